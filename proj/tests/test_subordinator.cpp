#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gruschin/subordinator.hpp"
#include "oracles.hpp"

using namespace gruschin;

TEST_CASE("pure drift path is exactly theta * t") {
    auto phi = BernsteinFunction::pure_drift(0.8);
    Rng rng(1);
    SubordinatorPath p = sample_path(phi, 2.0, 10, rng);
    for (std::size_t i = 0; i < p.t.size(); ++i) CHECK(p.s[i] == 0.8 * p.t[i]);
}

TEST_CASE("stable marginal passes KS against the Kanter oracle sampler") {
    const double alpha = 0.7, c = 1.0;
    auto phi = BernsteinFunction::stable(alpha, c);
    const std::size_t n = 100000;
    StreamFactory sf(2024);
    double scale = std::pow(c * std::tgamma(1.0 - alpha) / alpha, 1.0 / alpha);
    std::vector<double> ours(n), oracle(n);
    Rng rng_a = sf.stream(0), rng_b = sf.stream(1);
    for (std::size_t i = 0; i < n; ++i) {
        ours[i] = sample_terminal_value(phi, 1.0, rng_a);
        oracle[i] = scale * oracles::kanter_standard_increment(alpha, rng_b);
    }
    double d = ks_two_sample(ours, oracle);
    CHECK(d < ks_two_sample_threshold(n, n, 0.01));
}

TEST_CASE("laplace transform checks for the three random kinds and drift") {
    StreamFactory sf(7);
    auto drift = laplace_transform_check(BernsteinFunction::pure_drift(0.4), 2.0, 1.5, 200, sf);
    CHECK(drift.z == 0.0);
    CHECK(drift.std_error == 0.0);

    auto stab = laplace_transform_check(BernsteinFunction::stable(0.5, 1.0), 1.0, 1.0, 100000,
                                        sf.fork(1));
    CHECK(std::abs(stab.z) <= 3.0);

    auto rel = laplace_transform_check(BernsteinFunction::relativistic_stable(0.5, 1.0, 1.0), 1.0,
                                       2.0, 100000, sf.fork(2));
    CHECK(std::abs(rel.z) <= 3.0);

    auto trunc = laplace_transform_check(BernsteinFunction::truncated_stable(0.5, 1.0), 1.0, 1.0,
                                         100000, sf.fork(3));
    CHECK(std::abs(trunc.z) <= 3.0);

    CHECK_THROWS_AS(
        laplace_transform_check(BernsteinFunction::pure_drift(1.0), 1.0, 1.0, 99, sf),
        std::invalid_argument);
}

TEST_CASE("truncated-stable first moment: E S(1) = 2 (beta=1/2, c=1)") {
    StreamFactory sf(11);
    auto e = subordinator_mean(BernsteinFunction::truncated_stable(0.5, 1.0), 1.0, 100000, sf);
    CHECK(std::abs(e.mean - 2.0) <= 3.0 * e.std_error);
}

TEST_CASE("means: pure drift exact, relativistic matches the exponent derivative") {
    StreamFactory sf(13);
    auto pd = subordinator_mean(BernsteinFunction::pure_drift(0.9), 2.0, 500, sf);
    CHECK(pd.mean == doctest::Approx(1.8));
    CHECK(pd.std_error == 0.0);

    auto rel = BernsteinFunction::relativistic_stable(0.5, 1.0, 1.0);
    // phi'(0+) by Richardson extrapolation of phi(h)/h.
    double h = 1e-6;
    double d1 = rel.evaluate(h) / h, d2 = rel.evaluate(h / 2.0) / (h / 2.0);
    double deriv = 2.0 * d2 - d1;
    double T = 1.5;
    auto e = subordinator_mean(rel, T, 100000, sf.fork(1));
    CHECK(std::abs(e.mean - T * deriv) <= 3.0 * e.std_error);

    CHECK_THROWS_AS(subordinator_mean(BernsteinFunction::stable(0.5, 1.0), 1.0, 100, sf),
                    std::invalid_argument);
}

TEST_CASE("negative moments: pure drift exact, stable self-similar, oracle cross-check") {
    StreamFactory sf(17);
    auto pd = negative_moment(BernsteinFunction::pure_drift(2.0), 2.0, 1.0, 500, sf);
    CHECK(pd.mean == doctest::Approx(0.25));
    CHECK(pd.std_error == 0.0);

    const double alpha = 0.7, kappa = 0.49;
    auto phi = BernsteinFunction::stable(alpha, 1.0);
    auto at_t = negative_moment(phi, 2.0, kappa, 100000, sf.fork(1));
    auto at_1 = negative_moment(phi, 1.0, kappa, 100000, sf.fork(2));
    double ratio = at_t.mean / (std::pow(2.0, -kappa / alpha) * at_1.mean);
    double se = ratio * std::sqrt(std::pow(at_t.std_error / at_t.mean, 2) +
                                  std::pow(at_1.std_error / at_1.mean, 2));
    CHECK(std::abs(ratio - 1.0) <= 3.0 * se);

    // Exact value from the Laplace route.
    double exact = oracles::laplace_negative_moment([&](double u) { return phi.evaluate(u); },
                                                    1.0, kappa);
    CHECK(std::abs(at_1.mean - exact) <= 4.0 * at_1.std_error);

    // Truncated kind against the same oracle.
    auto tr = BernsteinFunction::truncated_stable(0.5, 1.0);
    auto tr_est = negative_moment(tr, 1.0, 1.0, 100000, sf.fork(3));
    double tr_exact = oracles::laplace_negative_moment(
        [&](double u) { return oracles::truncated_half_exponent(1.0, u); }, 1.0, 1.0);
    CHECK(std::abs(tr_est.mean - tr_exact) <= 4.0 * tr_est.std_error);

    CHECK_THROWS_AS(negative_moment(BernsteinFunction::pure_drift(0.0), 1.0, 1.0, 100, sf),
                    std::runtime_error);
}

TEST_CASE("paths are monotone with stationary, exchangeable increments") {
    StreamFactory sf(23);
    std::vector<BernsteinFunction> kinds = {
        BernsteinFunction::stable(0.7, 1.0),
        BernsteinFunction::truncated_stable(0.5, 1.0),
        BernsteinFunction::relativistic_stable(0.5, 1.0, 1.0),
    };
    for (const auto& phi : kinds) {
        Rng rng = sf.stream(0);
        const int n_steps = 64;
        const std::size_t n_paths = 2000;
        std::vector<double> first, late;
        for (std::size_t p = 0; p < n_paths; ++p) {
            SubordinatorPath path = sample_path(phi, 1.0, n_steps, rng);
            for (int i = 0; i < n_steps; ++i) CHECK(path.s[i + 1] >= path.s[i]);
            // Differencing the cumulative path smears the compound-Poisson
            // no-jump atom by ~1 ulp; quantize so KS tie-handling sees it.
            first.push_back(round_sig(path.s[1] - path.s[0], 12));
            late.push_back(round_sig(path.s[40] - path.s[39], 12));
        }
        double d = ks_two_sample(first, late);
        CHECK(d < ks_two_sample_threshold(first.size(), late.size(), 0.01));
    }
}

TEST_CASE("stable self-similarity in law: S(cT) ~ c^{1/alpha} S(T)") {
    const double alpha = 0.6, c_scale = 3.0;
    auto phi = BernsteinFunction::stable(alpha, 1.0);
    StreamFactory sf(29);
    const std::size_t n = 50000;
    std::vector<double> a(n), b(n);
    Rng ra = sf.stream(0), rb = sf.stream(1);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = sample_terminal_value(phi, c_scale * 1.0, ra);
        b[i] = std::pow(c_scale, 1.0 / alpha) * sample_terminal_value(phi, 1.0, rb);
    }
    CHECK(ks_two_sample(a, b) < ks_two_sample_threshold(n, n, 0.01));
}

TEST_CASE("determinism: same (seed, path index) gives bit-identical paths") {
    auto phi = BernsteinFunction::truncated_stable(0.5, 1.0);
    StreamFactory sf(31);
    Rng r1 = sf.stream(42), r2 = sf.stream(42);
    SubordinatorPath a = sample_path(phi, 1.0, 32, r1);
    SubordinatorPath b = sample_path(phi, 1.0, 32, r2);
    for (std::size_t i = 0; i < a.s.size(); ++i) CHECK(a.s[i] == b.s[i]);
}

TEST_CASE("rejection cap errors carry the acceptance-rate estimate") {
    auto rel = BernsteinFunction::relativistic_stable(0.5, 1.0, 1.0);
    SamplerOptions opts;
    opts.rejection_cap = 2;
    Rng rng(3);
    bool threw = false;
    // dt large enough that acceptance ~ exp(-60 * 2 sqrt(pi)) never passes the cap.
    try {
        for (int i = 0; i < 200; ++i)
            (void)relativistic_increment(std::get<RelativisticStableKind>(rel.kind()), 60.0, rng,
                                         opts);
    } catch (const std::runtime_error& e) {
        threw = true;
        CHECK(std::string(e.what()).find("acceptance rate") != std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("truncated small-jump cutoff keeps the discarded variance below the cap") {
    TruncatedStableKind k{0.5, 1.0};
    double dt = 1.0 / 256.0;
    double delta = truncated_default_delta(k, dt, 1e-6);
    double var = k.c * std::pow(delta, 2.0 - k.beta) / (2.0 - k.beta) * dt;
    CHECK(var <= 1e-6 * (1.0 + 1e-12));
    CHECK(delta < 1.0);
}
