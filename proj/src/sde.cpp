#include "gruschin/sde.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "gruschin/grid.hpp"
#include "gruschin/parallel.hpp"

namespace gruschin {

namespace {

void check_inputs(const GruschinModel& model, const StatePoint& x, double T, int n_steps) {
    if (!(T > 0.0)) throw std::invalid_argument("simulate: T must be positive");
    if (n_steps < 1) throw std::invalid_argument("simulate: n_steps must be >= 1");
    if (x.x1.size() != model.m() || x.x2.size() != model.d())
        throw std::invalid_argument("simulate: state dimensions do not match the model");
    if (!x.x1.allFinite() || !x.x2.allFinite())
        throw std::invalid_argument("simulate: initial state must be finite");
}

// Per-cell clock increments on the step grid. A clock sampled on the same
// grid is read by node index; a finer clock is evaluated at the step nodes.
std::vector<double> clock_increments(const TimeChange& ell, double T, int n_steps) {
    std::vector<double> inc(n_steps);
    const bool aligned = ell.grid().size() == static_cast<std::size_t>(n_steps) + 1 &&
                         std::abs(ell.t_max() - T) <= 1e-12 * (1.0 + T) &&
                         std::abs(ell.t_min()) <= 1e-12;
    if (aligned) {
        std::span<const double> v = ell.values();
        for (int i = 0; i < n_steps; ++i) inc[i] = v[i + 1] - v[i];
        return inc;
    }
    if (ell.t_min() > 0.0 || ell.t_max() < T)
        throw std::invalid_argument("simulate: clock grid must cover [0, T]");
    double prev = ell(0.0);
    for (int i = 0; i < n_steps; ++i) {
        double cur = ell(grid_node(T, n_steps, i + 1));
        inc[i] = cur - prev;
        prev = cur;
    }
    return inc;
}

} // namespace

namespace detail {

// Draw order per step: m normals for dW1, then d for dW2.
template <typename NextNormal>
SdePath simulate_core(const GruschinModel& model, const StatePoint& x, const TimeChange& ell1,
                      const TimeChange& ell2, double T, int n_steps, NextNormal&& next_normal) {
    const int m = model.m(), d = model.d();
    const double dt = T / n_steps;
    const std::vector<double> dl1 = clock_increments(ell1, T, n_steps);
    const std::vector<double> dl2 = clock_increments(ell2, T, n_steps);
    SdePath path;
    path.t = uniform_grid(T, n_steps);
    path.x1.resize(n_steps + 1);
    path.x2.resize(n_steps + 1);
    path.x1[0] = x.x1;
    path.x2[0] = x.x2;
    const bool sigma_id = model.sigma_is_identity();
    const bool b_zero = model.drift_is_zero();
    Vector dw1(m), dw2(d);
    for (int i = 0; i < n_steps; ++i) {
        const double ti = path.t[i];
        const double sd1 = std::sqrt(dl1[i]);
        const double sd2 = std::sqrt(dl2[i]);
        for (int j = 0; j < m; ++j) dw1[j] = sd1 * next_normal();
        for (int j = 0; j < d; ++j) dw2[j] = sd2 * next_normal();
        if (sigma_id)
            path.x1[i + 1] = path.x1[i] + dw1;
        else
            path.x1[i + 1] = path.x1[i] + model.sigma(ti) * dw1;
        double coeff = model.diffusion_coefficient(path.x1[i]);
        if (b_zero)
            path.x2[i + 1] = path.x2[i] + coeff * dw2;
        else
            path.x2[i + 1] = path.x2[i] + model.b(ti, path.x2[i]) * dt + coeff * dw2;
        if (!path.x1[i + 1].allFinite() || !path.x2[i + 1].allFinite()) {
            std::ostringstream os;
            os << "simulate: non-finite state at step " << i + 1 << " (t = " << path.t[i + 1] << ")";
            throw std::runtime_error(os.str());
        }
    }
    return path;
}

} // namespace detail

SdePath simulate_deterministic(const GruschinModel& model, const StatePoint& x,
                               const TimeChange& ell1, const TimeChange& ell2, double T,
                               int n_steps, Rng& rng) {
    check_inputs(model, x, T, n_steps);
    return detail::simulate_core(model, x, ell1, ell2, T, n_steps,
                                 [&rng] { return draw_normal(rng); });
}

SdePath simulate_subordinated(const GruschinModel& model, const StatePoint& x,
                              const BernsteinFunction& phi1, const BernsteinFunction& phi2,
                              double T, int n_steps, Rng& rng, const SamplerOptions& opts) {
    check_inputs(model, x, T, n_steps);
    TimeChange s1 = TimeChange::from_subordinator(sample_path(phi1, T, n_steps, rng, opts));
    TimeChange s2 = TimeChange::from_subordinator(sample_path(phi2, T, n_steps, rng, opts));
    return detail::simulate_core(model, x, s1, s2, T, n_steps, [&rng] { return draw_normal(rng); });
}

namespace {

class LowDiscrepancySource {
public:
    // Randomly shifted additive-recurrence sequence mapped through the
    // normal quantile; dimension fixed per path.
    LowDiscrepancySource(std::size_t dim, std::uint64_t seed) : alpha_(dim), shift_(dim) {
        double phi = 2.0;
        for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (double(dim) + 1.0));
        double a = 1.0 / phi;
        double cur = 1.0;
        std::uint64_t s = seed;
        for (std::size_t j = 0; j < dim; ++j) {
            cur *= a;
            alpha_[j] = cur - std::floor(cur);
            shift_[j] = static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
        }
    }

    double normal(std::size_t path_index, std::size_t j) const {
        static const boost::math::normal_distribution<double> unit;
        double v = shift_[j] + static_cast<double>(path_index + 1) * alpha_[j];
        v -= std::floor(v);
        double u = std::clamp(v, 1e-15, 1.0 - 1e-15);
        return boost::math::quantile(unit, u);
    }

private:
    std::vector<double> alpha_;
    std::vector<double> shift_;
};

} // namespace

Estimate semigroup(const GruschinModel& model, const std::function<double(const StatePoint&)>& f,
                   double t, const StatePoint& x, const BernsteinFunction& phi1,
                   const BernsteinFunction& phi2, std::size_t n_paths, int n_steps,
                   const StreamFactory& streams, const SemigroupOptions& opts) {
    check_inputs(model, x, t, n_steps);
    if (n_paths == 0) throw std::invalid_argument("semigroup: n_paths must be positive");
    std::vector<double> values(n_paths);
    std::exception_ptr err;
    std::mutex err_mu;
    const StreamFactory clock_streams = streams.fork(1);
    const StreamFactory gauss_streams = streams.fork(2);
    const std::size_t qmc_dim = static_cast<std::size_t>(n_steps) * (model.m() + model.d());
    std::optional<LowDiscrepancySource> qmc;
    if (opts.qmc) qmc.emplace(qmc_dim, gauss_streams.master());

    parallel_for_index(n_paths, opts.n_threads, [&](std::size_t i) {
        try {
            Rng clock_rng = clock_streams.stream(i);
            TimeChange s1 =
                TimeChange::from_subordinator(sample_path(phi1, t, n_steps, clock_rng, opts.sampler));
            TimeChange s2 =
                TimeChange::from_subordinator(sample_path(phi2, t, n_steps, clock_rng, opts.sampler));
            SdePath path;
            if (opts.qmc) {
                std::size_t j = 0;
                path = detail::simulate_core(model, x, s1, s2, t, n_steps,
                                             [&] { return qmc->normal(i, j++); });
            } else {
                Rng rng = gauss_streams.stream(i);
                path = detail::simulate_core(model, x, s1, s2, t, n_steps,
                                             [&rng] { return draw_normal(rng); });
            }
            double v = f(path.end());
            if (opts.f_bound && std::abs(v) > *opts.f_bound + 1e-9)
                throw std::runtime_error("semigroup: f exceeded the caller-asserted bound");
            values[i] = v;
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (!err) err = std::current_exception();
        }
    });
    if (err) std::rethrow_exception(err);
    return summarize(values);
}

} // namespace gruschin
