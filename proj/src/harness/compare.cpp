#include "slicelab/harness/compare.hpp"

#include <fstream>

#include "slicelab/kpm/dataset.hpp"

namespace slicelab::harness {

std::vector<RatioRow> compare(const EvalSummary& a, const EvalSummary& b) {
    if (a.seeds != b.seeds) throw Error("compare: " + a.agent + " and " + b.agent + " were evaluated on different seeds");
    if (a.grid != b.grid) throw Error("compare: " + a.agent + " and " + b.agent + " use different evaluation grids");
    if (a.slices != b.slices) throw Error("compare: " + a.agent + " and " + b.agent + " control different slices");
    std::vector<RatioRow> rows;
    for (std::size_t p = 0; p < a.grid.size(); ++p)
        for (std::size_t i = 0; i < a.slices.size(); ++i) {
            RatioRow r;
            r.agent = a.agent;
            r.reference = b.agent;
            r.point = point_label(a.grid[p]);
            r.slice = a.slices[i].index;
            r.violation_ratio = safe_ratio(a.stat(p, i, Metric::violation).mean, b.stat(p, i, Metric::violation).mean);
            r.prbs_ratio = safe_ratio(a.stat(p, i, Metric::prbs).mean, b.stat(p, i, Metric::prbs).mean);
            r.reward_ratio = safe_ratio(a.stat(p, i, Metric::reward).mean, b.stat(p, i, Metric::reward).mean);
            rows.push_back(r);
        }
    return rows;
}

std::vector<RatioRow> compare_all(const std::vector<EvalSummary>& summaries) {
    std::vector<RatioRow> rows;
    for (std::size_t i = 0; i < summaries.size(); ++i)
        for (std::size_t j = 0; j < summaries.size(); ++j) {
            if (i == j) continue;
            auto r = compare(summaries[i], summaries[j]);
            rows.insert(rows.end(), r.begin(), r.end());
        }
    return rows;
}

void write_comparison_csv(const std::filesystem::path& path, const std::vector<RatioRow>& rows) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << "agent,reference,point,slice,violation_ratio,prbs_ratio,reward_ratio\n";
    for (const auto& r : rows)
        out << r.agent << ',' << r.reference << ',' << r.point << ',' << r.slice << ','
            << kpm::format_real(r.violation_ratio) << ',' << kpm::format_real(r.prbs_ratio) << ','
            << kpm::format_real(r.reward_ratio) << '\n';
}

}  // namespace slicelab::harness
