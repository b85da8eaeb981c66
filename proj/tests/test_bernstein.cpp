#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gruschin/bernstein.hpp"
#include "gruschin/rng.hpp"
#include "oracles.hpp"

using namespace gruschin;

namespace {
std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i)
        g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return g;
}
} // namespace

TEST_CASE("pure drift exponent is theta*u") {
    auto phi = BernsteinFunction::pure_drift(0.7);
    CHECK(phi.evaluate(3.0) == doctest::Approx(2.1));
    CHECK(phi.evaluate_by_quadrature(3.0) == doctest::Approx(2.1));
}

TEST_CASE("relativistic exponent matches its closed form") {
    double beta = 0.5, c = 1.3, rho = 2.0;
    auto phi = BernsteinFunction::relativistic_stable(beta, c, rho);
    double q = std::pow(rho, 1.0 / beta);
    for (double u : {0.3, 1.0, 7.0}) {
        double expect = c / beta * std::tgamma(1.0 - beta) * (std::pow(u + q, beta) - rho);
        CHECK(phi.evaluate(u) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("stable closed form vs independent quadrature of the Levy integral") {
    double alpha = 0.7, c = 1.0;
    auto phi = BernsteinFunction::stable(alpha, c);
    auto nu = [&](double x) { return c * std::pow(x, -1.0 - alpha); };
    for (double u : {0.01, 0.5, 2.0, 40.0}) {
        // Head on (0, 1/u) with x = s^8 to regularize the endpoint; tail on
        // (1/u, inf) through x = 1/w with w = s^8 likewise.
        auto head_f = [&](double s) {
            if (s <= 0.0) return 0.0;
            double x = std::pow(s, 8.0);
            return -std::expm1(-u * x) * nu(x) * 8.0 * std::pow(s, 7.0);
        };
        double head = oracles::integrate(head_f, 0.0, std::pow(1.0 / u, 0.125), 1e-12);
        auto tail_f = [&](double s) {
            if (s <= 0.0) return 0.0;
            double w = std::pow(s, 8.0);
            return -std::expm1(-u / w) * nu(1.0 / w) / (w * w) * 8.0 * std::pow(s, 7.0);
        };
        double rest = oracles::integrate(tail_f, 0.0, std::pow(u, 0.125), 1e-12);
        CHECK(phi.evaluate(u) == doctest::Approx(head + rest).epsilon(1e-6));
    }
}

TEST_CASE("all built-in kinds agree with the quadrature route on a log grid") {
    std::vector<BernsteinFunction> kinds = {
        BernsteinFunction::stable(0.7, 1.0),
        BernsteinFunction::stable(0.3, 2.0),
        BernsteinFunction::truncated_stable(0.5, 1.0),
        BernsteinFunction::truncated_stable(0.8, 0.7),
        BernsteinFunction::relativistic_stable(0.5, 1.0, 1.0),
        BernsteinFunction::relativistic_stable(0.6, 2.0, 0.5),
        BernsteinFunction::pure_drift(1.4),
    };
    for (const auto& phi : kinds) {
        for (double u : log_grid(1e-3, 1e3, 13)) {
            double a = phi.evaluate(u);
            double b = phi.evaluate_by_quadrature(u);
            CHECK(std::abs(a - b) <= 1e-6 * std::max(std::abs(b), 1e-300));
        }
    }
}

TEST_CASE("truncated 1/2-stable quadrature matches the erf closed form") {
    auto phi = BernsteinFunction::truncated_stable(0.5, 1.7);
    for (double u : {0.05, 1.0, 12.0, 300.0})
        CHECK(phi.evaluate(u) ==
              doctest::Approx(oracles::truncated_half_exponent(1.7, u)).epsilon(1e-8));
}

TEST_CASE("phi vanishes at 0+ and is monotone and subadditive") {
    std::vector<BernsteinFunction> kinds = {
        BernsteinFunction::stable(0.4, 1.0),
        BernsteinFunction::truncated_stable(0.5, 1.0),
        BernsteinFunction::relativistic_stable(0.5, 1.0, 1.0),
        BernsteinFunction::pure_drift(0.3),
    };
    Rng rng(17);
    for (const auto& phi : kinds) {
        CHECK(phi.evaluate(1e-12) < 1e-4);
        auto grid = log_grid(1e-3, 1e3, 25);
        for (std::size_t i = 1; i < grid.size(); ++i)
            CHECK(phi.evaluate(grid[i - 1]) <= phi.evaluate(grid[i]) * (1.0 + 1e-12));
        for (int trial = 0; trial < 20; ++trial) {
            double u = std::exp(3.0 * (draw_uniform(rng) - 0.5));
            double v = std::exp(3.0 * (draw_uniform(rng) - 0.5));
            CHECK(phi.evaluate(u + v) <= (phi.evaluate(u) + phi.evaluate(v)) * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("concavity spot check on a grid") {
    auto phi = BernsteinFunction::relativistic_stable(0.7, 1.0, 1.0);
    auto grid = log_grid(1e-2, 1e2, 21);
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        double um = grid[i - 1], u = grid[i], up = grid[i + 1];
        double w = (u - um) / (up - um);
        double chord = (1.0 - w) * phi.evaluate(um) + w * phi.evaluate(up);
        CHECK(phi.evaluate(u) >= chord - 1e-10);
    }
}

TEST_CASE("custom kind: valid density accepted and evaluated") {
    auto nu = [](double x) { return std::exp(-x) * std::pow(x, -0.5); };
    auto phi = BernsteinFunction::custom(0.2, nu, 0.0, std::numeric_limits<double>::infinity());
    for (double u : {0.5, 2.0}) {
        auto f = [&](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-u * x) * nu(x); };
        double expect = 0.2 * u + oracles::integrate(f, 1e-14, 60.0, 1e-12);
        CHECK(phi.evaluate(u) == doctest::Approx(expect).epsilon(1e-7));
    }
}

TEST_CASE("custom kind: non-integrable densities are rejected with a region diagnostic") {
    auto near_zero = [](double x) { return std::pow(x, -2.0); };
    CHECK_THROWS_WITH_AS(
        BernsteinFunction::custom(0.0, near_zero, 0.0, 1.0),
        doctest::Contains("near x = 0+"), std::invalid_argument);

    auto fat_tail = [](double x) { return 1.0 / x; };
    CHECK_THROWS_WITH_AS(
        BernsteinFunction::custom(0.0, fat_tail, 1.0, std::numeric_limits<double>::infinity()),
        doctest::Contains("tail"), std::invalid_argument);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(BernsteinFunction::stable(1.2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(BernsteinFunction::stable(0.5, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(BernsteinFunction::pure_drift(-0.1), std::invalid_argument);
    auto phi = BernsteinFunction::stable(0.5, 1.0);
    CHECK_THROWS_AS(phi.evaluate(0.0), std::invalid_argument);
}

TEST_CASE("levy means") {
    CHECK(BernsteinFunction::truncated_stable(0.5, 1.0).levy_mean() == doctest::Approx(2.0));
    CHECK(std::isinf(BernsteinFunction::stable(0.5, 1.0).levy_mean()));
    double q = std::pow(1.0, 2.0);
    CHECK(BernsteinFunction::relativistic_stable(0.5, 1.0, 1.0).levy_mean() ==
          doctest::Approx(std::tgamma(0.5) * std::pow(q, -0.5)));
}
