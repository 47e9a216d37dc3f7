#pragma once

#include <span>

namespace slicelab::harness {

struct MeanCi {
    double mean = 0.0;
    double half_width = 0.0;  // 0 for fewer than two samples

    double lo() const { return mean - half_width; }
    double hi() const { return mean + half_width; }
};

/// Sample mean with a Student-t confidence half-width.
MeanCi mean_ci(std::span<const double> xs, double level = 0.95);

double mean(std::span<const double> xs);

/// Ratio a/b with 0/0 = 1 and x/0 = +inf for x > 0.
double safe_ratio(double a, double b);

/// Upper-tail p-value of Pearson's chi-square statistic.
double chi_square_p_value(double statistic, int dof);

}  // namespace slicelab::harness
