#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gruschin {

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

// Neumaier compensated sum; the result does not depend on how work was
// split across threads because callers always reduce in index order.
double compensated_sum(std::span<const double> xs);

// Mean and standard error of the mean (two-pass, compensated).
Estimate summarize(std::span<const double> xs);

// z-score of an estimate against a reference value; 0/0 -> 0.
double z_score(const Estimate& e, double reference);

// Standard error of a/b via the delta method, inputs independent.
double ratio_std_error(const Estimate& a, const Estimate& b);

double normal_cdf(double x);

// Two-sample Kolmogorov-Smirnov test. Returns the D statistic; the
// threshold at significance alpha is ks_two_sample_threshold.
double ks_two_sample(std::vector<double> xs, std::vector<double> ys);
double ks_two_sample_threshold(std::size_t n, std::size_t m, double alpha);

// One-sample KS against a callable CDF.
double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf);
double ks_one_sample_threshold(std::size_t n, double alpha);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Ordinary least squares of y against x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Round to `digits` significant decimal digits (used when emitting reports).
double round_sig(double x, int digits);

} // namespace gruschin
