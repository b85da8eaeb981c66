#pragma once

#include <functional>
#include <optional>

#include "gruschin/model.hpp"
#include "gruschin/rng.hpp"
#include "gruschin/stats.hpp"
#include "gruschin/subordinator.hpp"
#include "gruschin/time_change.hpp"

namespace gruschin {

struct SdePath {
    std::vector<double> t;
    std::vector<Vector> x1;
    std::vector<Vector> x2;
    StatePoint end() const { return StatePoint{x1.back(), x2.back()}; }
};

// Euler scheme for the deterministically time-changed system:
//   X1 step: sigma_{t_i} dW1 with dW1 ~ N(0, (l1(t_{i+1})-l1(t_i)) I_m)
//   X2 step: b(t_i, X2) dt + |X1_{t_i}|^l dW2 with dW2 ~ N(0, dl2 I_d)
// Time-changed increments are drawn directly as N(0, dl I); no second grid.
SdePath simulate_deterministic(const GruschinModel& model, const StatePoint& x,
                               const TimeChange& ell1, const TimeChange& ell2, double T,
                               int n_steps, Rng& rng);

// Samples S1, S2 and delegates to the deterministic scheme with ell_i = S_i.
SdePath simulate_subordinated(const GruschinModel& model, const StatePoint& x,
                              const BernsteinFunction& phi1, const BernsteinFunction& phi2,
                              double T, int n_steps, Rng& rng, const SamplerOptions& opts = {});

struct SemigroupOptions {
    unsigned n_threads = 0;
    bool qmc = false; // randomly shifted low-discrepancy Gaussian driving
    std::optional<double> f_bound;
    SamplerOptions sampler;
};

// Monte Carlo estimate of P_t f(x) = E f(X_t(x)).
Estimate semigroup(const GruschinModel& model, const std::function<double(const StatePoint&)>& f,
                   double t, const StatePoint& x, const BernsteinFunction& phi1,
                   const BernsteinFunction& phi2, std::size_t n_paths, int n_steps,
                   const StreamFactory& streams, const SemigroupOptions& opts = {});

} // namespace gruschin
