#pragma once

#include <span>

namespace dvrpsr {

double mean(std::span<const double> xs);
double sample_stddev(std::span<const double> xs);
double pearson_correlation(std::span<const double> xs, std::span<const double> ys);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;  // two-sided
    int n = 0;
};

// Paired two-sample t-test on equally indexed observations.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

// Two-sided p-value of the Student t distribution with `dof` degrees of
// freedom, via the regularized incomplete beta function.
double student_two_sided_p(double t, int dof);

}  // namespace dvrpsr
