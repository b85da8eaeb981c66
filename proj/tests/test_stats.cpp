#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gruschin/rng.hpp"
#include "gruschin/stats.hpp"

using namespace gruschin;

TEST_CASE("compensated sum recovers cancelled mass") {
    std::vector<double> xs{1e16, 1.0, -1e16, 1.0};
    CHECK(compensated_sum(xs) == doctest::Approx(2.0));
}

TEST_CASE("summarize matches hand-computed mean and SE") {
    std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    Estimate e = summarize(xs);
    CHECK(e.mean == doctest::Approx(2.5));
    // sample sd = sqrt(5/3), SE = sd/2
    CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(e.n == 4);
}

TEST_CASE("z-score conventions") {
    Estimate e{1.0, 0.0, 10};
    CHECK(z_score(e, 1.0) == 0.0);
    CHECK(std::isinf(z_score(e, 0.5)));
    e.std_error = 0.25;
    CHECK(z_score(e, 0.5) == doctest::Approx(2.0));
}

TEST_CASE("two-sample KS separates shifted samples and accepts equal laws") {
    Rng rng(7);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<double> a(4000), b(4000), c(4000);
    for (auto& v : a) v = n01(rng);
    for (auto& v : b) v = n01(rng);
    for (auto& v : c) v = n01(rng) + 0.25;
    double thr = ks_two_sample_threshold(a.size(), b.size(), 0.01);
    CHECK(ks_two_sample(a, b) < thr);
    CHECK(ks_two_sample(a, c) > thr);
}

TEST_CASE("one-sample KS against the normal CDF") {
    Rng rng(11);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<double> a(5000);
    for (auto& v : a) v = n01(rng);
    CHECK(ks_one_sample(a, normal_cdf) < ks_one_sample_threshold(a.size(), 0.01));
    for (auto& v : a) v = 0.8 * v;
    CHECK(ks_one_sample(a, normal_cdf) > ks_one_sample_threshold(a.size(), 0.01));
}

TEST_CASE("line fit is exact on affine data") {
    std::vector<double> x{1.0, 2.0, 3.0, 5.0};
    std::vector<double> y;
    for (double v : x) y.push_back(-2.0 * v + 0.5);
    LineFit f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(-2.0));
    CHECK(f.intercept == doctest::Approx(0.5));
}

TEST_CASE("ratio SE via the delta method") {
    Estimate a{2.0, 0.02, 100};
    Estimate b{4.0, 0.08, 100};
    double se = ratio_std_error(a, b);
    CHECK(se == doctest::Approx(0.5 * std::sqrt(1e-4 + 4e-4)));
}

TEST_CASE("round_sig keeps 12 significant digits") {
    CHECK(round_sig(1.23456789012345e-7, 12) == doctest::Approx(1.23456789012e-7).epsilon(1e-12));
    CHECK(round_sig(0.0, 12) == 0.0);
}

TEST_CASE("stream factory is splittable and deterministic") {
    StreamFactory f(123);
    Rng a = f.stream(5), b = f.stream(5), c = f.stream(6);
    CHECK(a() == b());
    Rng a2 = f.stream(5);
    (void)c;
    CHECK(a2() != f.stream(6)());
}
