#include "gruschin/moments.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "gruschin/grid.hpp"
#include "gruschin/parallel.hpp"

namespace gruschin {

double c_constant(int m, double theta) {
    if (m < 1) throw std::invalid_argument("c_constant: m must be >= 1");
    if (!(theta > 0.0 && theta < 0.5 * m))
        throw std::invalid_argument("c_constant: theta must lie in (0, m/2); the integral diverges otherwise");
    double half_m = 0.5 * m;
    return std::exp(-theta * std::log(2.0) + std::lgamma(half_m - theta) - std::lgamma(half_m));
}

GaussianMomentReport gaussian_negative_moment(const GaussianSpec& spec, double theta,
                                              std::size_t n_pairs, const StreamFactory& streams,
                                              unsigned n_threads) {
    if (spec.dim < 1 || !(spec.variance > 0.0))
        throw std::invalid_argument("gaussian_negative_moment: dim >= 1 and variance > 0 required");
    if (spec.mu.size() != 0 && spec.mu.size() != spec.dim)
        throw std::invalid_argument("gaussian_negative_moment: mu dimension mismatch");
    if (n_pairs == 0) throw std::invalid_argument("gaussian_negative_moment: n_pairs must be positive");
    const double cm = c_constant(spec.dim, theta); // validates theta

    GaussianMomentReport rep;
    rep.exact_at_zero_mu = cm * std::pow(spec.variance, -theta);
    rep.analytic_bound = (std::pow(3.0, 2.0 * theta) + 1.0) * rep.exact_at_zero_mu;
    rep.heavy_theta_warning = theta > 0.45 * spec.dim;
    std::size_t n_used = n_pairs;
    if (rep.heavy_theta_warning) {
        // The integrand is heavy-tailed at the origin as theta -> m/2; scale
        // the sample up to keep the error in check.
        double frac = 1.0 - 2.0 * theta / spec.dim;
        double scale = std::min(16.0, std::ceil(1.0 / std::max(frac, 1.0 / 16.0)));
        n_used = static_cast<std::size_t>(n_pairs * scale);
    }
    rep.n_used = 2 * n_used;

    const double sd = std::sqrt(spec.variance);
    const Vector mu = spec.mu.size() == spec.dim ? spec.mu : Vector::Zero(spec.dim);
    std::vector<double> vals(n_used);
    parallel_for_index(n_used, n_threads, [&](std::size_t i) {
        Rng rng = streams.stream(i);
        Vector z(spec.dim);
        for (int j = 0; j < spec.dim; ++j) z[j] = sd * draw_normal(rng);
        double a = std::pow((z - mu).norm(), -2.0 * theta);
        double b = std::pow((z + mu).norm(), -2.0 * theta);
        vals[i] = 0.5 * (a + b);
    });
    rep.mc = summarize(vals);
    return rep;
}

BdgReport bdg_check(const SigmaSpec& sigma, int m, const TimeChange& ell, double p, double c_p,
                    double t, std::size_t n_paths, int n_steps, const StreamFactory& streams,
                    unsigned n_threads) {
    if (!(p > 0.0)) throw std::invalid_argument("bdg_check: p must be positive");
    if (!(c_p > 0.0)) throw std::invalid_argument("bdg_check: C_p must be positive");
    if (n_paths == 0 || n_steps < 1) throw std::invalid_argument("bdg_check: bad sample sizes");

    const std::vector<double> grid = uniform_grid(t, n_steps);
    std::vector<double> dl(n_steps);
    for (int i = 0; i < n_steps; ++i) dl[i] = ell(grid[i + 1]) - ell(grid[i]);

    std::vector<Matrix> sig(n_steps);
    std::vector<double> frob2(n_steps + 1, 0.0);
    for (int i = 0; i < n_steps; ++i) sig[i] = sigma.at(grid[i], m);
    for (int i = 0; i <= n_steps; ++i) frob2[i] = sigma.at(grid[i], m).squaredNorm();

    std::vector<double> vals(n_paths);
    parallel_for_index(n_paths, n_threads, [&](std::size_t pi) {
        Rng rng = streams.stream(pi);
        Vector msum = Vector::Zero(m);
        Vector dw(m);
        double sup2 = 0.0;
        for (int i = 0; i < n_steps; ++i) {
            double sd = std::sqrt(dl[i]);
            for (int j = 0; j < m; ++j) dw[j] = sd * draw_normal(rng);
            msum += sig[i] * dw;
            sup2 = std::max(sup2, msum.squaredNorm());
        }
        vals[pi] = std::pow(sup2, 0.5 * p);
    });

    BdgReport rep;
    rep.empirical_sup_moment = summarize(vals);
    double quad = 0.0; // right-endpoint Stieltjes sum on the step grid
    for (int i = 0; i < n_steps; ++i) quad += frob2[i + 1] * dl[i];
    rep.bound = c_p * std::pow(quad, 0.5 * p);
    return rep;
}

} // namespace gruschin
