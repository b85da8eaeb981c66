#pragma once

#include <optional>

#include "gruschin/model.hpp"
#include "gruschin/rng.hpp"
#include "gruschin/sde.hpp"
#include "gruschin/stats.hpp"
#include "gruschin/time_change.hpp"

namespace gruschin {

struct CouplingOptions {
    // Floor for |Y1|^{-l} inside the second-stage Girsanov drift density;
    // clip events are counted, not hidden.
    double eps_floor = 1e-8;
    bool record_trace = false;
};

// First-component coupling on [0, horizon] with the drift active on [0, T].
// The modulus |X1 - Y1| is deterministic; tau1 comes from the closed-form
// root of the cumulative clock mass, not from a threshold.
struct FirstCoupling {
    std::vector<double> t;
    std::vector<Vector> x1, y1;
    std::vector<double> modulus_closed; // (1 - cum(t)/A1) |x1-y1|, clamped at 0
    std::vector<double> eta1_norm;      // |eta1| per cell, 0 once coupled
    double tau1 = 0.0;
    double log_r1 = 0.0;
    double clock_mass = 0.0; // A1 = int_0^T lambda^{-2} dl1
};

FirstCoupling couple_first(const GruschinModel& model, const Vector& x1, const Vector& y1,
                           const TimeChange& ell1, double T, double horizon, int n_steps,
                           Rng& rng);

// Second-component coupling given the first-component pair on the same grid.
// Shares dW2; the coupling drift acts on [T, tau2) against the ell2 clock.
struct SecondCoupling {
    std::vector<Vector> x2, y2;
    double tau2 = 0.0;
    bool coupled = false;
    double log_r2 = 0.0;
    long clip_count = 0;
    double gap_at_T = 0.0; // |X2_T - Y2_T|
    // Pathwise supermartingale check: max over grid t in [T, tau2) of
    //   e^{-K(T,t)}|D2_t| - |D2_T| + int_T^t xi2 e^{-K(T,s)} dl2(s).
    double supermartingale_violation = 0.0;
};

SecondCoupling couple_second(const GruschinModel& model, const FirstCoupling& first,
                             const Vector& x2, const Vector& y2, const TimeChange& ell2,
                             double T, Rng& rng, const CouplingOptions& opts = {});

struct CouplingRun {
    double T = 0.0;
    double tau1 = 0.0;
    double tau2 = 0.0;
    bool coupled2 = false;
    double log_r1 = 0.0;
    double log_r2 = 0.0;
    long clip_count = 0;
    double supermartingale_violation = 0.0;
    StatePoint x_end, y_end;
    double weight() const;         // R = exp(log_r1 + log_r2)
    double entropy_sample() const; // R log R

    struct Trace {
        std::vector<double> t;
        std::vector<double> modulus1_sim;
        std::vector<double> modulus1_closed;
        std::vector<double> eta1_norm;
        std::vector<Vector> x1, y1, x2, y2;
    };
    std::optional<Trace> trace;
};

// Full two-step coupling over [0, 2T]; n_steps grid cells, n_steps even.
CouplingRun run_coupling(const GruschinModel& model, const StatePoint& x, const StatePoint& y,
                         const TimeChange& ell1, const TimeChange& ell2, double T, int n_steps,
                         Rng& rng, const CouplingOptions& opts = {});

struct CouplingEstimate {
    Estimate entropy;       // E[R log R]
    Estimate entropy_first; // E[R1 log R1], the first-stage weight alone
    Estimate er;            // E R (martingale check target: 1)
    double tau1_max = 0.0;
    double tau2_max = 0.0;
    long clip_count = 0;
    std::size_t n_uncoupled_second = 0;
    double max_supermartingale_violation = 0.0;
    double top_mass_share = 0.0; // weight mass carried by the top 1% of paths
    bool heavy_tail_warning = false;
};

// Deterministic clocks shared across paths.
CouplingEstimate entropy_estimate(const GruschinModel& model, const StatePoint& x,
                                  const StatePoint& y, const TimeChange& ell1,
                                  const TimeChange& ell2, double T, std::size_t n_paths,
                                  int n_steps, const StreamFactory& streams,
                                  unsigned n_threads = 0, const CouplingOptions& opts = {});

// Random clocks: fresh (S1, S2) per path; averaging the per-path conditional
// entropy realizes the outer expectation over the subordinators.
CouplingEstimate entropy_estimate_subordinated(
    const GruschinModel& model, const StatePoint& x, const StatePoint& y,
    const BernsteinFunction& phi1, const BernsteinFunction& phi2, double T, std::size_t n_paths,
    int n_steps, const StreamFactory& streams, unsigned n_threads = 0,
    const CouplingOptions& opts = {}, const SamplerOptions& sampler = {});

// Weighted endpoint statistics of Y under R, for the change-of-measure law
// identity E[R g(Y_2T)] = E[g(X_2T(y))].
struct WeightedMoments {
    std::vector<Estimate> mean;          // per coordinate of (x1, x2)
    std::vector<Estimate> second_moment; // per coordinate
};

WeightedMoments weighted_endpoint_moments(
    const GruschinModel& model, const StatePoint& x, const StatePoint& y,
    const BernsteinFunction& phi1, const BernsteinFunction& phi2, double T, std::size_t n_paths,
    int n_steps, const StreamFactory& streams, unsigned n_threads = 0,
    const CouplingOptions& opts = {}, const SamplerOptions& sampler = {});

} // namespace gruschin
