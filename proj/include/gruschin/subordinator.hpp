#pragma once

#include <cstdint>
#include <vector>

#include "gruschin/bernstein.hpp"
#include "gruschin/rng.hpp"
#include "gruschin/stats.hpp"

namespace gruschin {

// Non-decreasing grid path S(t_0)=0 <= S(t_1) <= ... on a uniform grid.
struct SubordinatorPath {
    std::vector<double> t;
    std::vector<double> s;
};

struct SamplerOptions {
    // Truncated-stable small-jump cutoff; 0 selects the default for which the
    // discarded small-jump variance per step stays below variance_cap.
    double truncated_delta = 0.0;
    double truncated_variance_cap = 1e-6;
    std::uint64_t rejection_cap = 1'000'000;
};

// One-sided stable variable with Laplace transform exp(-u^alpha).
double stable_standard_increment(double alpha, Rng& rng);

// Marginal increments of the built-in subordinators over a step dt.
double stable_increment(const StableKind& k, double dt, Rng& rng);
double relativistic_increment(const RelativisticStableKind& k, double dt, Rng& rng,
                              const SamplerOptions& opts = {});
double truncated_increment(const TruncatedStableKind& k, double dt, double delta, Rng& rng);
double truncated_default_delta(const TruncatedStableKind& k, double dt, double variance_cap);

// Independent stationary increments on the uniform grid over [0, T].
SubordinatorPath sample_path(const BernsteinFunction& phi, double T, int n_steps, Rng& rng,
                             const SamplerOptions& opts = {});

// Number of internal steps that keeps the marginal sampler healthy when only
// S(T) is needed (rejection acceptance rate for tempered kinds).
int marginal_step_count(const BernsteinFunction& phi, double T);
double sample_terminal_value(const BernsteinFunction& phi, double T, Rng& rng,
                             const SamplerOptions& opts = {});

// Monte Carlo estimate of E S(T)^{-kappa}. Throws if any sampled S(T) is zero.
Estimate negative_moment(const BernsteinFunction& phi, double T, double kappa,
                         std::size_t n_paths, const StreamFactory& streams,
                         unsigned n_threads = 0, const SamplerOptions& opts = {});

// Monte Carlo estimate of E S(T); rejects kinds with infinite mean.
Estimate subordinator_mean(const BernsteinFunction& phi, double T, std::size_t n_paths,
                           const StreamFactory& streams, unsigned n_threads = 0,
                           const SamplerOptions& opts = {});

struct LaplaceCheck {
    double empirical = 0.0;
    double analytic = 0.0;
    double std_error = 0.0;
    double z = 0.0;
};

// Compares the empirical mean of exp(-u S(t)) with exp(-t phi(u)).
LaplaceCheck laplace_transform_check(const BernsteinFunction& phi, double t, double u,
                                     std::size_t n_paths, const StreamFactory& streams,
                                     unsigned n_threads = 0, const SamplerOptions& opts = {});

} // namespace gruschin
