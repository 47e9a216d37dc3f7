#include "slicelab/harness/stats.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "slicelab/core/types.hpp"

namespace slicelab::harness {

double mean(std::span<const double> xs) {
    if (xs.empty()) throw Error("mean of an empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

MeanCi mean_ci(std::span<const double> xs, double level) {
    MeanCi r;
    r.mean = mean(xs);
    const auto n = xs.size();
    if (n < 2) return r;
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    boost::math::students_t dist(static_cast<double>(n - 1));
    const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - level) / 2.0));
    r.half_width = t * sd / std::sqrt(static_cast<double>(n));
    return r;
}

double safe_ratio(double a, double b) {
    if (b == 0.0) return a == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return a / b;
}

double chi_square_p_value(double statistic, int dof) {
    if (dof < 1) throw Error("chi-square needs at least one degree of freedom");
    boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, std::max(0.0, statistic)));
}

}  // namespace slicelab::harness
