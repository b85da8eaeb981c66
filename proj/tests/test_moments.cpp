#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gruschin/moments.hpp"
#include "oracles.hpp"

using namespace gruschin;

namespace {

// Radial-integral oracle: pi^{-m/2} 2^{-theta} int_{R^m} |y|^{-2theta} e^{-|y|^2} dy
// = pi^{-m/2} 2^{-theta} * omega_{m-1} * int_0^inf r^{m-1-2theta} e^{-r^2} dr.
// The substitution r = s^4 removes the endpoint singularity.
double c_constant_by_quadrature(int m, double theta) {
    double omega = 2.0 * std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m);
    double q4 = 4.0 * (m - 1.0 - 2.0 * theta) + 3.0;
    auto f = [&](double s) {
        if (s <= 0.0) return 0.0;
        return 4.0 * std::pow(s, q4) * std::exp(-std::pow(s, 8.0));
    };
    double radial = oracles::integrate(f, 1e-30, 2.5, 1e-14);
    return std::pow(std::numbers::pi, -0.5 * m) * std::pow(2.0, -theta) * omega * radial;
}

} // namespace

TEST_CASE("c(m, theta) closed values") {
    CHECK(c_constant(2, 0.5) == doctest::Approx(std::sqrt(std::numbers::pi / 2.0)).epsilon(1e-12));
    CHECK(c_constant(3, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c_constant(2, 1e-6) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK_THROWS_AS(c_constant(2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(c_constant(2, 0.0), std::invalid_argument);
}

TEST_CASE("c(m, theta) equals the radial quadrature oracle to 1e-10") {
    for (int m : {1, 2, 3, 5}) {
        for (double frac : {0.125, 0.25, 0.375}) {
            double theta = frac * m;
            CHECK(c_constant(m, theta) ==
                  doctest::Approx(c_constant_by_quadrature(m, theta)).epsilon(1e-10));
        }
    }
}

TEST_CASE("appendix split: |x|/|x-mu| <= 3 whenever |x-mu| >= |mu|/2") {
    Rng rng(71);
    for (int trial = 0; trial < 2000; ++trial) {
        Vector mu(3), x(3);
        for (int i = 0; i < 3; ++i) {
            mu[i] = 2.0 * (draw_uniform(rng) - 0.5);
            x[i] = 4.0 * (draw_uniform(rng) - 0.5);
        }
        if ((x - mu).norm() >= 0.5 * mu.norm() && (x - mu).norm() > 0.0)
            CHECK(x.norm() / (x - mu).norm() <= 3.0 + 1e-12);
    }
}

TEST_CASE("Gaussian negative moment at mu = 0 matches the closed form") {
    GaussianSpec spec;
    spec.dim = 2;
    spec.variance = 1.0;
    spec.mu = Vector::Zero(2);
    StreamFactory sf(72);
    GaussianMomentReport rep = gaussian_negative_moment(spec, 0.5, 200000, sf);
    CHECK(rep.exact_at_zero_mu ==
          doctest::Approx(std::sqrt(std::numbers::pi / 2.0)).epsilon(1e-12));
    CHECK(std::abs(rep.mc.mean - rep.exact_at_zero_mu) <= 3.0 * rep.mc.std_error);
}

TEST_CASE("shifted moments never exceed (3^{2 theta} + 1) c(m,theta) sigma^{-theta}") {
    StreamFactory sf(73);
    for (double mu_norm : {0.0, 0.5, 1.0, 5.0, 50.0}) {
        GaussianSpec spec;
        spec.dim = 2;
        spec.variance = 1.0;
        spec.mu = Vector::Zero(2);
        spec.mu[0] = mu_norm;
        GaussianMomentReport rep = gaussian_negative_moment(spec, 0.5, 50000, sf.fork(1));
        CHECK(rep.mc.mean <= rep.analytic_bound + 3.0 * rep.mc.std_error);
    }
}

TEST_CASE("sigma-scaling: estimate(sigma)/estimate(1) = sigma^{-theta}") {
    StreamFactory sf(74);
    const double theta = 0.5, sig = 4.0;
    GaussianSpec unit{2, 1.0, Vector::Zero(2)};
    GaussianSpec wide{2, sig, Vector::Zero(2)};
    auto a = gaussian_negative_moment(unit, theta, 100000, sf.fork(1)).mc;
    auto b = gaussian_negative_moment(wide, theta, 100000, sf.fork(2)).mc;
    double ratio = b.mean / a.mean;
    double se = ratio * std::sqrt(std::pow(a.std_error / a.mean, 2) +
                                  std::pow(b.std_error / b.mean, 2));
    CHECK(std::abs(ratio - std::pow(sig, -theta)) <= 3.0 * se);
}

TEST_CASE("theta close to m/2 triggers the warning and a larger sample") {
    GaussianSpec spec{2, 1.0, Vector::Zero(2)};
    StreamFactory sf(75);
    GaussianMomentReport rep = gaussian_negative_moment(spec, 0.95, 1000, sf);
    CHECK(rep.heavy_theta_warning);
    CHECK(rep.n_used > 2000);
}

TEST_CASE("bdg: zero sigma gives zero on both sides") {
    SigmaSpec zero = SigmaSpec::table({0.0}, {Matrix::Zero(2, 2)});
    // A zero sigma violates (H1), so bdg_check takes the spec directly.
    TimeChange id = TimeChange::identity(1.0, 32);
    StreamFactory sf(76);
    BdgReport rep = bdg_check(zero, 2, id, 2.0, 4.0, 1.0, 500, 32, sf);
    CHECK(rep.empirical_sup_moment.mean == 0.0);
    CHECK(rep.bound == 0.0);
}

TEST_CASE("bdg with p = 2, C_2 = 4 (Doob) on the identity clock") {
    const int m = 2;
    TimeChange id = TimeChange::identity(1.0, 64);
    StreamFactory sf(77);
    BdgReport rep = bdg_check(SigmaSpec::identity(), m, id, 2.0, 4.0, 1.0, 20000, 64, sf);
    CHECK(rep.bound == doctest::Approx(4.0 * m).epsilon(1e-12));
    CHECK(rep.empirical_sup_moment.mean <=
          rep.bound + 3.0 * rep.empirical_sup_moment.std_error);
    // And the sup moment is genuinely above the endpoint moment m*t.
    CHECK(rep.empirical_sup_moment.mean > 2.0);
}

TEST_CASE("bdg holds on a jump clock") {
    std::vector<double> t, v;
    for (int i = 0; i <= 64; ++i) {
        t.push_back(i / 64.0);
        v.push_back(0.3 * t.back() + (t.back() >= 0.4 ? 0.7 : 0.0) + (t.back() >= 0.9 ? 1.1 : 0.0));
    }
    TimeChange jumpy(t, v, Interp::PiecewiseConstant);
    StreamFactory sf(78);
    BdgReport rep = bdg_check(SigmaSpec::identity(), 3, jumpy, 2.0, 4.0, 1.0, 20000, 64, sf);
    CHECK(rep.empirical_sup_moment.mean <=
          rep.bound + 3.0 * rep.empirical_sup_moment.std_error);
}
