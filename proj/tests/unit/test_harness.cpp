#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "slicelab/agents/factory.hpp"
#include "slicelab/harness/compare.hpp"
#include "slicelab/harness/runner.hpp"
#include "slicelab/harness/scenario.hpp"
#include "slicelab/harness/stats.hpp"

using namespace slicelab;
using namespace slicelab::harness;
namespace fs = std::filesystem;

namespace {

ScenarioSpec tiny(const std::string& name) {
    auto spec = scenario_from_name(name);
    auto& t = spec.config.training;
    t.episodes = 4;
    t.episode_len = 10;
    t.eval_every = 2;
    t.eval_episodes = 1;
    t.seeds = {1, 2};
    spec.config.ppo.hidden = {8};
    spec.config.ppo.episodes_per_update = 2;
    spec.config.dqn.hidden = {8};
    spec.config.dqn.warmup_steps = 10;
    spec.config.dqn.batch = 8;
    spec.config.qlearning.bin_fit_episodes = 1;
    return spec;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

EvalSummary fixed_summary(const Config& cfg, int prbs, int episodes) {
    const std::vector<std::uint64_t> seeds{1, 2};
    std::vector<GridMetrics> grids;
    for (auto s : seeds) {
        agents::FixedAgent a(SlicingAction{prbs}, 49), b(SlicingAction{prbs}, 49);
        const agents::Agent* ptrs[] = {&a, &b};
        grids.push_back(evaluate(cfg, ptrs, s, episodes));
    }
    return summarize("fixed" + std::to_string(prbs), cfg, seeds, grids);
}

}  // namespace

TEST_CASE("scenario presets") {
    const auto stat = stat_scenario();
    CHECK_NOTHROW(stat.validate());
    REQUIRE(stat.config.sim.slices.size() == 2);
    CHECK(stat.config.sim.capacity == 50);
    CHECK(stat.config.sim.slices[0].sla.lambda_ms == 110);
    CHECK(stat.config.sim.slices[1].sla.lambda_ms == 50);
    CHECK(stat.config.sim.slices[0].sla.phi_sla == 0.99);
    CHECK(stat.config.sim.slices[1].sla.phi_sla == 0.99);

    const auto dyn = dyn_scenario();
    CHECK_NOTHROW(dyn.validate());
    const auto& sla = dyn.config.sim.slices[0].sla;
    CHECK(sla.randomize_lambda);
    CHECK(sla.lambda_lo_ms == 10);
    CHECK(sla.lambda_hi_ms == 110);
    CHECK(sla.phi_sla == 0.9);
    CHECK(dyn.config.training.seeds.size() == 5);
    CHECK(eval_points(dyn.config).size() == 2);
    CHECK(point_label(SlaSpec{30, 0.9}) == "lambda30_phi0.9");
    CHECK(point_label(std::nullopt) == "nominal");
    CHECK_THROWS_AS(scenario_from_name("nope"), Error);
}

TEST_CASE("always-C on STAT meets both SLAs with 25 PRBs per slice") {
    const auto cfg = stat_scenario().config;
    agents::FixedAgent a(SlicingAction{49}, 49), b(SlicingAction{49}, 49);
    const agents::Agent* ptrs[] = {&a, &b};
    const auto g = evaluate(cfg, ptrs, 1, 3);
    REQUIRE(g.size() == 1);
    for (const auto& m : g[0]) {
        CHECK(m.violation_rate == 0.0);
        CHECK(m.mean_prbs == 25.0);
    }
}

TEST_CASE("evaluation is deterministic and seed dependent") {
    const auto cfg = stat_scenario().config;
    agents::FixedAgent a(SlicingAction{4}, 49), b(SlicingAction{6}, 49);
    const agents::Agent* ptrs[] = {&a, &b};
    const auto g1 = evaluate(cfg, ptrs, 5, 2), g2 = evaluate(cfg, ptrs, 5, 2), g3 = evaluate(cfg, ptrs, 6, 2);
    CHECK(g1 == g2);
    CHECK(g1 != g3);
}

TEST_CASE("an agent compared with itself gives unit ratios") {
    const auto cfg = stat_scenario().config;
    const auto s = fixed_summary(cfg, 5, 1);
    for (const auto& r : compare(s, s)) {
        CHECK(r.violation_ratio == 1.0);
        CHECK(r.prbs_ratio == 1.0);
        CHECK(r.reward_ratio == 1.0);
    }
}

TEST_CASE("always-1 against always-C") {
    const auto cfg = stat_scenario().config;
    const auto one = fixed_summary(cfg, 1, 1), full = fixed_summary(cfg, 49, 1);
    const auto rows = compare(one, full);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.agent == "fixed1");
        CHECK(r.reference == "fixed49");
        CHECK(r.prbs_ratio == doctest::Approx(1.0 / 25.0));
        CHECK(r.violation_ratio == std::numeric_limits<double>::infinity());
        CHECK(r.reward_ratio < 1.0);
    }
    CHECK(compare_all({one, full}).size() == 4);
    const auto path = fs::temp_directory_path() / "slicelab_cmp.csv";
    write_comparison_csv(path, rows);
    CHECK(slurp(path).rfind("agent,reference,point,slice,", 0) == 0);
}

TEST_CASE("comparisons need matching seeds, grids and slices") {
    const auto stat = stat_scenario().config;
    const auto a = fixed_summary(stat, 5, 1);
    auto b = a;
    b.seeds = {1, 3};
    CHECK_THROWS_AS(compare(a, b), Error);
    b = a;
    b.grid.push_back(SlaSpec{30, 0.9});
    CHECK_THROWS_AS(compare(a, b), Error);
    b = a;
    b.slices.pop_back();
    CHECK_THROWS_AS(compare(a, b), Error);
}

TEST_CASE("mean and Student-t interval") {
    const std::vector<double> xs{1, 2, 3};
    const auto m = mean_ci(xs);
    CHECK(m.mean == 2.0);
    CHECK(m.half_width == doctest::Approx(4.302652729749464 / std::sqrt(3.0)).epsilon(1e-9));
    const std::vector<double> one{4};
    CHECK(mean_ci(one).half_width == 0.0);
    CHECK(safe_ratio(0, 0) == 1.0);
    CHECK(safe_ratio(2, 0) == std::numeric_limits<double>::infinity());
    CHECK(safe_ratio(1, 4) == 0.25);
    CHECK(chi_square_p_value(0.0, 3) == 1.0);
    CHECK(chi_square_p_value(7.814727903251178, 3) == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("parallel seeds reproduce the serial runs") {
    for (std::string agent : {"ppo", "dqn", "qtab"}) {
        const auto spec = tiny("stat");
        TrainOptions o;
        o.agent = agent;
        const auto& seeds = spec.config.training.seeds;
        const auto a = run_seeds_serial(spec, o, seeds);
        const auto b = run_seeds_parallel(spec, o, seeds);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].final_eval == b[i].final_eval);
            REQUIRE(a[i].training.size() == b[i].training.size());
            for (std::size_t e = 0; e < a[i].training.size(); ++e) CHECK(a[i].training[e].slices == b[i].training[e].slices);
            for (std::size_t k = 0; k < a[i].agents.size(); ++k)
                CHECK(a[i].agents[k]->checkpoint().serialize() == b[i].agents[k]->checkpoint().serialize());
        }
    }
}

TEST_CASE("scenario outputs are byte-identical across runs") {
    const auto spec = tiny("dyn");
    TrainOptions o;
    o.agent = "ppo";
    const auto base = fs::temp_directory_path() / "slicelab_harness_det";
    fs::remove_all(base);
    run_scenario(spec, o, base / "a");
    run_scenario(spec, o, base / "b");
    int files = 0;
    for (const auto& e : fs::recursive_directory_iterator(base / "a")) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), base / "a");
        CHECK_MESSAGE(slurp(e.path()) == slurp(base / "b" / rel), rel.string());
        ++files;
    }
    CHECK(files >= 5);
    CHECK(fs::exists(checkpoint_path(base / "a" / "checkpoints", 1, SliceId{0})));
    const auto header = slurp(base / "a" / "summary.csv");
    CHECK(header.find("lambda30_phi0.9") != std::string::npos);
}
