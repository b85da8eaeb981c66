#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gruschin/sde.hpp"

using namespace gruschin;

namespace {

GruschinModel default_model(int m = 2, int d = 1, double l = 0.5) {
    return GruschinModel(m, d, l, SigmaSpec::identity(), ScalarTimeFn::constant(1.0),
                         DriftSpec::zero(), ScalarTimeFn::constant(0.0), 3.0);
}

StatePoint zero_state(int m, int d) { return StatePoint{Vector::Zero(m), Vector::Zero(d)}; }

TimeChange zero_clock(double t_max, int n) {
    std::vector<double> t(n + 1), v(n + 1, 0.0);
    for (int i = 0; i <= n; ++i) t[i] = t_max * i / n;
    return TimeChange(t, v, Interp::PiecewiseConstant);
}

} // namespace

TEST_CASE("frozen clocks and zero drift give a constant path") {
    GruschinModel model = default_model();
    TimeChange z = zero_clock(1.0, 32);
    Rng rng(1);
    StatePoint x{Vector::Zero(2), Vector::Zero(1)};
    x.x1 << 0.4, -0.2;
    x.x2 << 1.5;
    SdePath p = simulate_deterministic(model, x, z, z, 1.0, 32, rng);
    for (const auto& v : p.x1) CHECK((v - x.x1).norm() == 0.0);
    for (const auto& v : p.x2) CHECK((v - x.x2).norm() == 0.0);
}

TEST_CASE("Brownian isometry: E |X1_T|^2 = m T for the identity clock") {
    GruschinModel model = default_model();
    const double T = 1.0;
    const int n_steps = 64;
    const std::size_t n_paths = 10000;
    TimeChange id = TimeChange::identity(T, n_steps);
    StreamFactory sf(5);
    std::vector<double> v(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        Rng rng = sf.stream(i);
        v[i] = simulate_deterministic(model, zero_state(2, 1), id, id, T, n_steps, rng)
                   .end()
                   .x1.squaredNorm();
    }
    Estimate e = summarize(v);
    CHECK(std::abs(e.mean - 2.0 * T) <= 3.0 * e.std_error);
}

TEST_CASE("second-component isometry: E |X2_T|^2 = T^2/2 for l = 1, m = d = 1") {
    GruschinModel model = default_model(1, 1, 1.0);
    const double T = 1.0;
    const int n_steps = 256;
    const std::size_t n_paths = 10000;
    TimeChange id = TimeChange::identity(T, n_steps);
    StreamFactory sf(6);
    std::vector<double> v(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        Rng rng = sf.stream(i);
        v[i] = simulate_deterministic(model, zero_state(1, 1), id, id, T, n_steps, rng)
                   .end()
                   .x2.squaredNorm();
    }
    Estimate e = summarize(v);
    // Euler bias is O(dt); at dt = 1/256 it is far below 3 SE here.
    CHECK(std::abs(e.mean - T * T / 2.0) <= 3.0 * e.std_error + 2.0 * (T / n_steps));
}

TEST_CASE("pure-drift subordination reduces bit-exactly to the deterministic scheme") {
    GruschinModel model = default_model();
    auto pd = BernsteinFunction::pure_drift(1.0);
    const double T = 1.0;
    const int n_steps = 64;
    StatePoint x{Vector::Zero(2), Vector::Zero(1)};
    x.x1 << 0.3, 0.1;
    Rng rng_a(99), rng_b(99);
    SdePath a = simulate_subordinated(model, x, pd, pd, T, n_steps, rng_a);
    TimeChange id = TimeChange::identity(T, n_steps);
    SdePath b = simulate_deterministic(model, x, id, id, T, n_steps, rng_b);
    for (int i = 0; i <= n_steps; ++i) {
        CHECK((a.x1[i] - b.x1[i]).norm() == 0.0);
        CHECK((a.x2[i] - b.x2[i]).norm() == 0.0);
    }
}

TEST_CASE("conditional Gaussianity given a frozen subordinator path") {
    GruschinModel model = default_model();
    auto phi = BernsteinFunction::stable(0.7, 1.0);
    Rng clock_rng(123);
    TimeChange s1 = TimeChange::from_subordinator(sample_path(phi, 1.0, 64, clock_rng));
    const double total = s1(1.0);
    StreamFactory sf(7);
    const std::size_t n_paths = 4000;
    std::vector<double> std1;
    for (std::size_t i = 0; i < n_paths; ++i) {
        Rng rng = sf.stream(i);
        SdePath p = simulate_deterministic(model, zero_state(2, 1), s1, s1, 1.0, 64, rng);
        std1.push_back(p.end().x1[0] / std::sqrt(total));
        std1.push_back(p.end().x1[1] / std::sqrt(total));
    }
    CHECK(ks_one_sample(std1, normal_cdf) < ks_one_sample_threshold(std1.size(), 0.01));
}

TEST_CASE("hypothesis guards reject bad models at construction") {
    // (H1): sigma = diag(1, 0.2) has ||sigma^{-1}|| = 5 > lambda = 1.
    Matrix bad = Matrix::Identity(2, 2);
    bad(1, 1) = 0.2;
    CHECK_THROWS_WITH_AS(
        GruschinModel(2, 1, 0.5, SigmaSpec::table({0.0}, {bad}), ScalarTimeFn::constant(1.0),
                      DriftSpec::zero(), ScalarTimeFn::constant(0.0), 2.0),
        doctest::Contains("(H1)"), std::invalid_argument);

    // (H2): b(z) = +z needs k >= 1, so k = 0 must be rejected.
    CHECK_THROWS_WITH_AS(
        GruschinModel(2, 1, 0.5, SigmaSpec::identity(), ScalarTimeFn::constant(1.0),
                      DriftSpec::linear(1.0), ScalarTimeFn::constant(0.0), 2.0),
        doctest::Contains("(H2)"), std::invalid_argument);

    // Same drift passes with the right k.
    CHECK_NOTHROW(GruschinModel(2, 1, 0.5, SigmaSpec::identity(), ScalarTimeFn::constant(1.0),
                                DriftSpec::linear(1.0), ScalarTimeFn::constant(1.0), 2.0));
}

TEST_CASE("semigroup basics: constants, martingale coordinate, bounded guard") {
    GruschinModel model = default_model();
    auto phi1 = BernsteinFunction::stable(0.7, 1.0);
    auto phi2 = BernsteinFunction::truncated_stable(0.5, 1.0);
    StreamFactory sf(8);
    StatePoint x{Vector::Zero(2), Vector::Zero(1)};
    x.x1 << 0.4, 0.0;

    Estimate c = semigroup(
        model, [](const StatePoint&) { return 2.5; }, 1.0, x, phi1, phi2, 500, 32, sf);
    CHECK(c.mean == 2.5);
    CHECK(c.std_error == 0.0);

    Estimate first = semigroup(
        model, [](const StatePoint& z) { return z.x1[0]; }, 1.0, x, phi1, phi2, 20000, 32,
        sf.fork(1));
    CHECK(std::abs(first.mean - 0.4) <= 3.0 * first.std_error);

    SemigroupOptions opts;
    opts.f_bound = 0.1;
    CHECK_THROWS_AS(semigroup(
                        model, [](const StatePoint& z) { return z.x1[0]; }, 1.0, x, phi1, phi2,
                        200, 32, sf.fork(2), opts),
                    std::runtime_error);
}

TEST_CASE("subordinated first-component isometry: E|X1_T - x1|^2 = m E S1(T)") {
    GruschinModel model = default_model();
    auto phi1 = BernsteinFunction::truncated_stable(0.5, 1.0); // mean 2T
    auto phi2 = BernsteinFunction::pure_drift(1.0);
    StreamFactory sf(9);
    StatePoint x{Vector::Zero(2), Vector::Zero(1)};
    Estimate e = semigroup(
        model, [](const StatePoint& z) { return z.x1.squaredNorm(); }, 1.0, x, phi1, phi2, 20000,
        64, sf);
    CHECK(std::abs(e.mean - 2.0 * 2.0) <= 3.0 * e.std_error);
}

TEST_CASE("semigroup self-consistency at doubled path count") {
    GruschinModel model = default_model();
    auto phi1 = BernsteinFunction::stable(0.7, 1.0);
    auto phi2 = BernsteinFunction::truncated_stable(0.5, 1.0);
    auto f = [](const StatePoint& z) { return 1.0 + std::exp(-z.x2.squaredNorm()); };
    StreamFactory sf(10);
    Estimate a = semigroup(model, f, 1.0, zero_state(2, 1), phi1, phi2, 10000, 64, sf.fork(1));
    Estimate b = semigroup(model, f, 1.0, zero_state(2, 1), phi1, phi2, 20000, 64, sf.fork(2));
    double se = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    CHECK(std::abs(a.mean - b.mean) <= 3.0 * se);
}

TEST_CASE("weak order: halving dt moves E f(X_T) by less than the MC standard error") {
    GruschinModel model = default_model();
    auto phi1 = BernsteinFunction::truncated_stable(0.5, 1.0);
    auto phi2 = BernsteinFunction::truncated_stable(0.5, 1.0);
    auto f = [](const StatePoint& z) {
        return 1.0 + std::exp(-(z.x1.squaredNorm() + z.x2.squaredNorm()));
    };
    StreamFactory sf(12);
    Estimate coarse = semigroup(model, f, 1.0, zero_state(2, 1), phi1, phi2, 100000, 32, sf.fork(1));
    Estimate fine = semigroup(model, f, 1.0, zero_state(2, 1), phi1, phi2, 100000, 64, sf.fork(2));
    double se = std::sqrt(coarse.std_error * coarse.std_error + fine.std_error * fine.std_error);
    CHECK(std::abs(coarse.mean - fine.mean) <= 3.0 * se);
}

TEST_CASE("qmc driver agrees with plain MC within noise and is deterministic") {
    GruschinModel model = default_model();
    auto phi1 = BernsteinFunction::pure_drift(1.0);
    auto phi2 = BernsteinFunction::pure_drift(1.0);
    auto f = [](const StatePoint& z) { return std::exp(-z.x1.squaredNorm()); };
    StreamFactory sf(14);
    SemigroupOptions qmc;
    qmc.qmc = true;
    Estimate a = semigroup(model, f, 1.0, zero_state(2, 1), phi1, phi2, 20000, 16, sf.fork(1));
    Estimate b = semigroup(model, f, 1.0, zero_state(2, 1), phi1, phi2, 20000, 16, sf.fork(2), qmc);
    CHECK(std::abs(a.mean - b.mean) <= 4.0 * (a.std_error + 1e-4));
    Estimate b2 = semigroup(model, f, 1.0, zero_state(2, 1), phi1, phi2, 20000, 16, sf.fork(2), qmc);
    CHECK(b.mean == b2.mean);
}

TEST_CASE("non-finite states are reported with the step index") {
    // b(z) = 40 z with k = 40 satisfies (H2) but explodes the explicit
    // scheme at dt = 1/16 (growth factor 3.5 per step).
    GruschinModel model(1, 1, 0.5, SigmaSpec::identity(), ScalarTimeFn::constant(1.0),
                        DriftSpec::linear(40.0), ScalarTimeFn::constant(40.0), 2.0);
    TimeChange id = TimeChange::identity(1.0, 16);
    StatePoint x{Vector::Zero(1), Vector::Zero(1)};
    x.x2 << 1e305;
    Rng rng(2);
    CHECK_THROWS_WITH_AS(simulate_deterministic(model, x, id, id, 1.0, 16, rng),
                         doctest::Contains("step"), std::runtime_error);
}
