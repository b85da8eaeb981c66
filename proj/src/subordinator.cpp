#include "gruschin/subordinator.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gruschin/grid.hpp"
#include "gruschin/parallel.hpp"

namespace gruschin {

namespace {

double stable_scale(double alpha, double c, double dt) {
    // Increment over dt has Laplace transform exp(-dt * c G(1-a)/a * u^a),
    // i.e. scale^alpha = dt * c * Gamma(1-alpha)/alpha.
    return std::pow(dt * c * std::tgamma(1.0 - alpha) / alpha, 1.0 / alpha);
}

double stable_exponent_coefficient(double alpha, double c) {
    return c * std::tgamma(1.0 - alpha) / alpha;
}

} // namespace

double stable_standard_increment(double alpha, Rng& rng) {
    // Chambers-Mallows-Stuck, one-sided case; this normalization has Laplace
    // transform exp(-u^alpha) directly.
    const double pi = std::numbers::pi;
    double theta = pi * (draw_uniform(rng) - 0.5);
    double e = draw_exponential(rng);
    double a_half = alpha * (theta + pi / 2.0);
    return std::sin(a_half) / std::pow(std::cos(theta), 1.0 / alpha) *
           std::pow(std::cos(theta - a_half) / e, (1.0 - alpha) / alpha);
}

double stable_increment(const StableKind& k, double dt, Rng& rng) {
    return stable_scale(k.alpha, k.c, dt) * stable_standard_increment(k.alpha, rng);
}

double relativistic_increment(const RelativisticStableKind& k, double dt, Rng& rng,
                              const SamplerOptions& opts) {
    // Exponential tilting: accepting a stable increment X with probability
    // exp(-q X) yields exactly the tempered marginal.
    const double q = k.tempering_rate();
    const StableKind base{k.beta, k.c};
    for (std::uint64_t attempt = 1; attempt <= opts.rejection_cap; ++attempt) {
        double x = stable_increment(base, dt, rng);
        if (std::log(draw_uniform(rng)) < -q * x) return x;
    }
    double acceptance = std::exp(-dt * stable_exponent_coefficient(k.beta, k.c) * std::pow(q, k.beta));
    std::ostringstream os;
    os << "relativistic_increment: rejection cap " << opts.rejection_cap
       << " exceeded (estimated acceptance rate " << acceptance << "); reduce the step size";
    throw std::runtime_error(os.str());
}

double truncated_default_delta(const TruncatedStableKind& k, double dt, double variance_cap) {
    // Small-jump variance int_0^delta x^2 nu(dx) * dt = c delta^{2-beta}/(2-beta) * dt.
    double delta = std::pow(variance_cap * (2.0 - k.beta) / (k.c * dt), 1.0 / (2.0 - k.beta));
    return std::clamp(delta, 1e-12, 0.5);
}

double truncated_increment(const TruncatedStableKind& k, double dt, double delta, Rng& rng) {
    // Compound Poisson above delta plus the mean of the removed small jumps.
    // The small jumps enter as their mean, not a Gaussian, so increments stay
    // non-negative.
    const double beta = k.beta;
    double lambda = delta < 1.0 ? k.c / beta * (std::pow(delta, -beta) - 1.0) : 0.0;
    double small_mean_rate = k.c * std::pow(std::min(delta, 1.0), 1.0 - beta) / (1.0 - beta);
    double inc = small_mean_rate * dt;
    if (lambda > 0.0) {
        std::poisson_distribution<long> pois(lambda * dt);
        long n = pois(rng);
        const double d_pow = std::pow(delta, -beta);
        for (long j = 0; j < n; ++j) {
            double u = draw_uniform(rng);
            inc += std::pow(d_pow - u * (d_pow - 1.0), -1.0 / beta);
        }
    }
    return inc;
}

namespace {

double sample_increment_dispatch(const BernsteinFunction& phi, double dt, Rng& rng,
                                 const SamplerOptions& opts) {
    if (const auto* s = std::get_if<StableKind>(&phi.kind())) return stable_increment(*s, dt, rng);
    if (const auto* r = std::get_if<RelativisticStableKind>(&phi.kind()))
        return relativistic_increment(*r, dt, rng, opts);
    if (const auto* t = std::get_if<TruncatedStableKind>(&phi.kind())) {
        double delta = opts.truncated_delta > 0.0
                           ? opts.truncated_delta
                           : truncated_default_delta(*t, dt, opts.truncated_variance_cap);
        return truncated_increment(*t, dt, delta, rng);
    }
    if (const auto* p = std::get_if<PureDriftKind>(&phi.kind())) return p->theta * dt;
    throw std::invalid_argument("sample_path: no sampler for custom Bernstein functions");
}

std::vector<double> sample_terminal_values(const BernsteinFunction& phi, double T,
                                           std::size_t n_paths, const StreamFactory& streams,
                                           unsigned n_threads, const SamplerOptions& opts) {
    std::vector<double> values(n_paths);
    const int n_sub = marginal_step_count(phi, T);
    const double dt = T / n_sub;
    std::exception_ptr err;
    std::mutex err_mu;
    parallel_for_index(n_paths, n_threads, [&](std::size_t i) {
        try {
            Rng rng = streams.stream(i);
            double s = 0.0;
            for (int j = 0; j < n_sub; ++j) s += sample_increment_dispatch(phi, dt, rng, opts);
            values[i] = s;
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (!err) err = std::current_exception();
        }
    });
    if (err) std::rethrow_exception(err);
    return values;
}

} // namespace

SubordinatorPath sample_path(const BernsteinFunction& phi, double T, int n_steps, Rng& rng,
                             const SamplerOptions& opts) {
    if (!(T > 0.0)) throw std::invalid_argument("sample_path: T must be positive");
    if (n_steps < 1) throw std::invalid_argument("sample_path: n_steps must be >= 1");
    const double dt = T / n_steps;
    SubordinatorPath path;
    path.t = uniform_grid(T, n_steps);
    path.s.resize(n_steps + 1);
    path.s[0] = 0.0;
    if (const auto* p = std::get_if<PureDriftKind>(&phi.kind())) {
        for (int i = 1; i <= n_steps; ++i) path.s[i] = p->theta * path.t[i];
        return path;
    }
    for (int i = 0; i < n_steps; ++i)
        path.s[i + 1] = path.s[i] + sample_increment_dispatch(phi, dt, rng, opts);
    return path;
}

int marginal_step_count(const BernsteinFunction& phi, double T) {
    if (const auto* r = std::get_if<RelativisticStableKind>(&phi.kind())) {
        // Keep the per-step rejection acceptance rate above exp(-1.5).
        double mass = T * stable_exponent_coefficient(r->beta, r->c) *
                      std::pow(r->tempering_rate(), r->beta);
        return std::max(1, static_cast<int>(std::ceil(mass / 1.5)));
    }
    return 1;
}

double sample_terminal_value(const BernsteinFunction& phi, double T, Rng& rng,
                             const SamplerOptions& opts) {
    const int n_sub = marginal_step_count(phi, T);
    const double dt = T / n_sub;
    double s = 0.0;
    for (int j = 0; j < n_sub; ++j) s += sample_increment_dispatch(phi, dt, rng, opts);
    return s;
}

Estimate negative_moment(const BernsteinFunction& phi, double T, double kappa,
                         std::size_t n_paths, const StreamFactory& streams, unsigned n_threads,
                         const SamplerOptions& opts) {
    if (!(kappa > 0.0)) throw std::invalid_argument("negative_moment: kappa must be positive");
    if (n_paths == 0) throw std::invalid_argument("negative_moment: n_paths must be positive");
    std::vector<double> values = sample_terminal_values(phi, T, n_paths, streams, n_threads, opts);
    for (double& v : values) {
        if (v <= 0.0)
            throw std::runtime_error(
                "negative_moment: sampled S(T) = 0; the negative moment is "
                "infinite/undefined for this configuration");
        v = std::pow(v, -kappa);
    }
    return summarize(values);
}

Estimate subordinator_mean(const BernsteinFunction& phi, double T, std::size_t n_paths,
                           const StreamFactory& streams, unsigned n_threads,
                           const SamplerOptions& opts) {
    if (!phi.has_finite_mean())
        throw std::invalid_argument("subordinator_mean: first moment is infinite for this kind");
    if (n_paths == 0) throw std::invalid_argument("subordinator_mean: n_paths must be positive");
    std::vector<double> values = sample_terminal_values(phi, T, n_paths, streams, n_threads, opts);
    return summarize(values);
}

LaplaceCheck laplace_transform_check(const BernsteinFunction& phi, double t, double u,
                                     std::size_t n_paths, const StreamFactory& streams,
                                     unsigned n_threads, const SamplerOptions& opts) {
    if (n_paths < 100)
        throw std::invalid_argument(
            "laplace_transform_check: n_paths < 100 gives no meaningful standard error");
    if (!(u > 0.0)) throw std::invalid_argument("laplace_transform_check: u must be positive");
    std::vector<double> values = sample_terminal_values(phi, t, n_paths, streams, n_threads, opts);
    for (double& v : values) v = std::exp(-u * v);
    Estimate e = summarize(values);
    LaplaceCheck check;
    check.empirical = e.mean;
    check.analytic = std::exp(-t * phi.evaluate(u));
    check.std_error = e.std_error;
    check.z = z_score(e, check.analytic);
    return check;
}

} // namespace gruschin
