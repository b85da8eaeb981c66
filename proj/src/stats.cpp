#include "gruschin/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace gruschin {

double compensated_sum(std::span<const double> xs) {
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

Estimate summarize(std::span<const double> xs) {
    Estimate e;
    e.n = xs.size();
    if (e.n == 0) return e;
    bool degenerate = true;
    for (double x : xs)
        if (x != xs[0]) {
            degenerate = false;
            break;
        }
    if (degenerate) {
        e.mean = xs[0];
        return e;
    }
    e.mean = compensated_sum(xs) / static_cast<double>(e.n);
    if (e.n == 1) return e;
    double ss = 0.0, comp = 0.0;
    for (double x : xs) {
        double d = x - e.mean;
        double y = d * d - comp;
        double t = ss + y;
        comp = (t - ss) - y;
        ss = t;
    }
    e.std_error = std::sqrt(ss / (static_cast<double>(e.n) * static_cast<double>(e.n - 1)));
    return e;
}

double z_score(const Estimate& e, double reference) {
    double diff = e.mean - reference;
    if (e.std_error == 0.0) return diff == 0.0 ? 0.0 : std::copysign(HUGE_VAL, diff);
    return diff / e.std_error;
}

double ratio_std_error(const Estimate& a, const Estimate& b) {
    if (b.mean == 0.0) throw std::invalid_argument("ratio_std_error: zero denominator mean");
    double r = a.mean / b.mean;
    double ra = a.mean != 0.0 ? a.std_error / a.mean : 0.0;
    double rb = b.std_error / b.mean;
    return std::abs(r) * std::sqrt(ra * ra + rb * rb);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_two_sample(std::vector<double> xs, std::vector<double> ys) {
    if (xs.empty() || ys.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    const double nx = static_cast<double>(xs.size());
    const double ny = static_cast<double>(ys.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < xs.size() && j < ys.size()) {
        double v = std::min(xs[i], ys[j]);
        while (i < xs.size() && xs[i] <= v) ++i;
        while (j < ys.size() && ys[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return d;
}

namespace {
double ks_critical_coefficient(double alpha) {
    // c(alpha) = sqrt(-ln(alpha/2)/2); c(0.01) = 1.6276
    if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("ks threshold: alpha in (0,1)");
    return std::sqrt(-0.5 * std::log(alpha / 2.0));
}
} // namespace

double ks_two_sample_threshold(std::size_t n, std::size_t m, double alpha) {
    double nn = static_cast<double>(n), mm = static_cast<double>(m);
    return ks_critical_coefficient(alpha) * std::sqrt((nn + mm) / (nn * mm));
}

double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
    if (xs.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double f = cdf(xs[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

double ks_one_sample_threshold(std::size_t n, double alpha) {
    return ks_critical_coefficient(alpha) / std::sqrt(static_cast<double>(n));
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need two equally sized samples, n >= 2");
    const double n = static_cast<double>(x.size());
    double mx = compensated_sum(x) / n;
    double my = compensated_sum(y) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

double round_sig(double x, int digits) {
    if (!std::isfinite(x)) return x;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
    return std::strtod(buf, nullptr);
}

} // namespace gruschin
