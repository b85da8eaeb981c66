#pragma once

#include "gruschin/model.hpp"
#include "gruschin/rng.hpp"
#include "gruschin/stats.hpp"
#include "gruschin/time_change.hpp"

namespace gruschin {

// Centered Gaussian on R^m with covariance variance * I, shifted by mu.
struct GaussianSpec {
    int dim = 1;
    double variance = 1.0;
    Vector mu;
};

// c(m, theta) = 2^{-theta} Gamma(m/2 - theta) / Gamma(m/2), theta in (0, m/2);
// equals pi^{-m/2} 2^{-theta} int |y|^{-2 theta} e^{-|y|^2} dy by radial
// reduction. E|xi|^{-2 theta} = c(m, theta) variance^{-theta} at mu = 0.
double c_constant(int m, double theta);

struct GaussianMomentReport {
    double analytic_bound = 0.0;  // (3^{2 theta} + 1) c(m,theta) variance^{-theta}
    double exact_at_zero_mu = 0.0; // c(m,theta) variance^{-theta}
    Estimate mc;                   // E |xi - mu|^{-2 theta}, antithetic pairs
    bool heavy_theta_warning = false;
    std::size_t n_used = 0;
};

GaussianMomentReport gaussian_negative_moment(const GaussianSpec& spec, double theta,
                                              std::size_t n_pairs, const StreamFactory& streams,
                                              unsigned n_threads = 0);

struct BdgReport {
    Estimate empirical_sup_moment; // E sup_{s<=t} |int sigma dW_{l(s)}|^p
    double bound = 0.0;            // C_p (int_0^t ||sigma||_F^2 dl)^{p/2}
};

// Time-changed stochastic integral against a (possibly jumpy) clock; the
// running sup over grid nodes is compared with the Stieltjes right side.
BdgReport bdg_check(const SigmaSpec& sigma, int m, const TimeChange& ell, double p, double c_p,
                    double t, std::size_t n_paths, int n_steps, const StreamFactory& streams,
                    unsigned n_threads = 0);

} // namespace gruschin
