#include "gruschin/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "gruschin/grid.hpp"
#include "gruschin/parallel.hpp"

namespace gruschin {

namespace {

std::vector<double> clock_increments_on(const TimeChange& ell, double horizon, int n_steps) {
    std::vector<double> inc(n_steps);
    const bool aligned = ell.grid().size() == static_cast<std::size_t>(n_steps) + 1 &&
                         std::abs(ell.t_max() - horizon) <= 1e-12 * (1.0 + horizon) &&
                         std::abs(ell.t_min()) <= 1e-12;
    if (aligned) {
        std::span<const double> v = ell.values();
        for (int i = 0; i < n_steps; ++i) inc[i] = v[i + 1] - v[i];
        return inc;
    }
    if (ell.t_min() > 0.0 || ell.t_max() < horizon)
        throw std::invalid_argument("coupling: clock grid must cover the run horizon");
    double prev = ell(0.0);
    for (int i = 0; i < n_steps; ++i) {
        double cur = ell(grid_node(horizon, n_steps, i + 1));
        inc[i] = cur - prev;
        prev = cur;
    }
    return inc;
}

int node_at_time(double horizon, int n_steps, double T) {
    double pos = T / horizon * n_steps;
    int i = static_cast<int>(std::llround(pos));
    if (std::abs(pos - i) > 1e-9 || i < 1 || i > n_steps)
        throw std::invalid_argument("coupling: T must be a grid node of [0, horizon]");
    return i;
}

} // namespace

double CouplingRun::weight() const { return std::exp(log_r1 + log_r2); }

double CouplingRun::entropy_sample() const {
    double lr = log_r1 + log_r2;
    return std::exp(lr) * lr;
}

FirstCoupling couple_first(const GruschinModel& model, const Vector& x1, const Vector& y1,
                           const TimeChange& ell1, double T, double horizon, int n_steps,
                           Rng& rng) {
    if (x1.size() != model.m() || y1.size() != model.m())
        throw std::invalid_argument("couple_first: dimension mismatch");
    if (!(horizon >= T && T > 0.0)) throw std::invalid_argument("couple_first: need horizon >= T > 0");
    const int m = model.m();
    const int iT = node_at_time(horizon, n_steps, T);
    const std::vector<double> t = uniform_grid(horizon, n_steps);
    const std::vector<double> dl1 = clock_increments_on(ell1, horizon, n_steps);

    // lambda^{-2} at right endpoints; A1 and the cumulative sums drive both
    // the drift and the closed-form modulus, in one arithmetic.
    std::vector<double> laminv2(n_steps + 1, 0.0);
    for (int i = 0; i <= n_steps; ++i) {
        double lam = model.lambda(t[i]);
        laminv2[i] = 1.0 / (lam * lam);
    }

    FirstCoupling out;
    out.t = t;
    out.x1.resize(n_steps + 1);
    out.y1.resize(n_steps + 1);
    out.modulus_closed.assign(n_steps + 1, 0.0);
    out.eta1_norm.assign(n_steps, 0.0);
    out.x1[0] = x1;
    out.y1[0] = y1;

    const double dx = (x1 - y1).norm();
    double a1 = 0.0;
    for (int i = 0; i < iT; ++i) a1 += laminv2[i + 1] * dl1[i];
    out.clock_mass = a1;

    const bool trivial = dx < 1e-12;
    if (!trivial && !(a1 > 0.0))
        throw std::runtime_error("couple_first: degenerate clock, coupling impossible");

    Vector unit_dir = trivial ? Vector::Zero(m) : Vector(((x1 - y1) / dx).eval());
    const bool sigma_id = model.sigma_is_identity();

    out.modulus_closed[0] = trivial ? 0.0 : dx;
    out.tau1 = 0.0;
    bool coupled = trivial;
    if (trivial) out.y1[0] = x1;

    double cum = 0.0;
    Vector dw(m);
    for (int i = 0; i < n_steps; ++i) {
        const double sd = std::sqrt(dl1[i]);
        for (int j = 0; j < m; ++j) dw[j] = sd * draw_normal(rng);
        Vector sdw = sigma_id ? dw : Vector(model.sigma(t[i]) * dw);
        out.x1[i + 1] = out.x1[i] + sdw;
        if (coupled) {
            out.y1[i + 1] = out.x1[i + 1];
            out.modulus_closed[i + 1] = 0.0;
            continue;
        }
        // Drift mass for this cell, from the same partial sums as Eq-style
        // closed form; it never overshoots because cum <= a1 by construction.
        double dcum = (i < iT) ? laminv2[i + 1] * dl1[i] : 0.0;
        cum += dcum;
        double delta_r = dx * dcum / a1;
        out.y1[i + 1] = out.y1[i] + sdw + delta_r * unit_dir;
        out.modulus_closed[i + 1] = std::max(0.0, dx * (1.0 - cum / a1));
        if (dl1[i] > 0.0 && dcum > 0.0) {
            // eta1 = (delta_r / dl1) sigma^{-1} u; log weight for the shared
            // Brownian increment dW ~ N(0, dl1 I).
            double xi = delta_r / dl1[i];
            Vector eta = sigma_id ? Vector(xi * unit_dir)
                                  : Vector(xi * model.sigma(t[i]).lu().solve(unit_dir));
            out.eta1_norm[i] = eta.norm();
            out.log_r1 -= eta.dot(dw) + 0.5 * eta.squaredNorm() * dl1[i];
        }
        if (cum >= a1 * (1.0 - 1e-15)) {
            coupled = true;
            out.tau1 = t[i + 1];
            out.y1[i + 1] = out.x1[i + 1];
            out.modulus_closed[i + 1] = 0.0;
        }
    }
    if (!coupled)
        throw std::runtime_error("couple_first: modulus failed to reach zero by T");
    return out;
}

SecondCoupling couple_second(const GruschinModel& model, const FirstCoupling& first,
                             const Vector& x2, const Vector& y2, const TimeChange& ell2,
                             double T, Rng& rng, const CouplingOptions& opts) {
    if (x2.size() != model.d() || y2.size() != model.d())
        throw std::invalid_argument("couple_second: dimension mismatch");
    const int d = model.d();
    const int n_steps = static_cast<int>(first.t.size()) - 1;
    const double horizon = first.t.back();
    const int iT = node_at_time(horizon, n_steps, T);
    const double dt = horizon / n_steps;
    const std::vector<double>& t = first.t;
    const std::vector<double> dl2 = clock_increments_on(ell2, horizon, n_steps);
    const bool b_zero = model.drift_is_zero();

    // exp(-K(T, t_i)) on [T, 2T] and the normalizer B2 = int_T^2T e^{-2K} dl2.
    std::vector<double> ekt(n_steps + 1, 0.0);
    for (int i = iT; i <= n_steps; ++i) ekt[i] = std::exp(-model.K(T, t[i]));
    double b2 = 0.0;
    for (int i = iT; i < n_steps; ++i) b2 += ekt[i + 1] * ekt[i + 1] * dl2[i];

    SecondCoupling out;
    out.x2.resize(n_steps + 1);
    out.y2.resize(n_steps + 1);
    out.x2[0] = x2;
    out.y2[0] = y2;
    out.tau2 = horizon;

    const double floor_inv = std::pow(opts.eps_floor, -model.l());

    double xi2 = 0.0;        // set at t = T
    double decrement = 0.0;  // running sum of xi2 e^{-K} dl2
    Vector dw(d);
    for (int i = 0; i < n_steps; ++i) {
        const double sd = std::sqrt(dl2[i]);
        for (int j = 0; j < d; ++j) dw[j] = sd * draw_normal(rng);
        const Vector& x1i = first.x1[i];
        const Vector& y1i = first.y1[i];
        double coeff_x = model.diffusion_coefficient(x1i);
        double coeff_y = model.diffusion_coefficient(y1i);
        Vector bx = b_zero ? Vector() : model.b(t[i], out.x2[i]);
        Vector by = b_zero ? Vector() : model.b(t[i], out.y2[i]);

        Vector x_next = out.x2[i] + coeff_x * dw;
        if (!b_zero) x_next += bx * dt;
        out.x2[i + 1] = x_next;

        if (out.coupled) {
            out.y2[i + 1] = out.x2[i + 1];
            continue;
        }

        Vector y_base = out.y2[i] + coeff_y * dw;
        if (!b_zero) y_base += by * dt;

        if (i == iT) {
            out.gap_at_T = (out.x2[iT] - out.y2[iT]).norm();
            if (out.gap_at_T > 0.0 && !(b2 > 0.0))
                throw std::runtime_error("couple_second: degenerate clock on [T, 2T]");
            xi2 = b2 > 0.0 ? out.gap_at_T / b2 : 0.0;
        }

        if (i >= iT) {
            Vector gap = out.x2[i] - out.y2[i];
            double gap_norm = gap.norm();
            // Supermartingale check against the realized drift decrements.
            double lhs = ekt[i] * gap_norm - out.gap_at_T;
            out.supermartingale_violation =
                std::max(out.supermartingale_violation, lhs + decrement);
            if (gap_norm < 1e-12) {
                // Near-coincidence: declare coupled instead of normalizing a
                // near-zero direction.
                out.coupled = true;
                out.tau2 = t[i];
                out.y2[i + 1] = out.x2[i + 1];
                continue;
            }
            Vector u2 = gap / gap_norm;
            double planned = xi2 * ekt[i + 1] * dl2[i];
            // Gap left after the common-noise/b move of this cell; past tau1
            // the diffusion coefficients agree, so this is predictable.
            Vector residual = out.x2[i + 1] - y_base;
            double residual_norm = residual.norm();
            double applied = planned;
            Vector dir = u2;
            // The planned decrements sum to the full gap; absorb rounding at
            // the closing cell (the drift accumulates at gap_at_T scale, so
            // the tolerance must too) instead of leaving an ulp remainder.
            if (planned >= residual_norm - 1e-12 * (out.gap_at_T + 1.0)) {
                applied = residual_norm;
                dir = residual_norm > 0.0 ? Vector(residual / residual_norm) : u2;
                out.coupled = true;
                out.tau2 = t[i + 1];
            }
            out.y2[i + 1] = out.coupled ? out.x2[i + 1] : Vector(y_base + applied * dir);
            decrement += applied * ekt[i + 1];
            if (dl2[i] > 0.0 && applied > 0.0) {
                double y1_norm = y1i.norm();
                double inv_factor;
                if (y1_norm < opts.eps_floor) {
                    inv_factor = floor_inv;
                    ++out.clip_count;
                } else {
                    inv_factor = std::pow(y1_norm, -model.l());
                }
                double eta_mag = (applied / dl2[i]) * inv_factor;
                out.log_r2 -= eta_mag * dir.dot(dw) + 0.5 * eta_mag * eta_mag * dl2[i];
            }
        } else {
            out.y2[i + 1] = y_base;
        }
    }
    return out;
}

CouplingRun run_coupling(const GruschinModel& model, const StatePoint& x, const StatePoint& y,
                         const TimeChange& ell1, const TimeChange& ell2, double T, int n_steps,
                         Rng& rng, const CouplingOptions& opts) {
    if (n_steps < 2 || n_steps % 2 != 0)
        throw std::invalid_argument("run_coupling: n_steps must be even and >= 2");
    const double horizon = 2.0 * T;
    FirstCoupling first = couple_first(model, x.x1, y.x1, ell1, T, horizon, n_steps, rng);
    SecondCoupling second = couple_second(model, first, x.x2, y.x2, ell2, T, rng, opts);

    CouplingRun run;
    run.T = T;
    run.tau1 = first.tau1;
    run.tau2 = second.tau2;
    run.coupled2 = second.coupled;
    run.log_r1 = first.log_r1;
    run.log_r2 = second.log_r2;
    run.clip_count = second.clip_count;
    run.supermartingale_violation = second.supermartingale_violation;
    run.x_end = StatePoint{first.x1.back(), second.x2.back()};
    run.y_end = StatePoint{first.y1.back(), second.y2.back()};
    if (opts.record_trace) {
        CouplingRun::Trace tr;
        tr.t = first.t;
        tr.modulus1_closed = first.modulus_closed;
        tr.eta1_norm = first.eta1_norm;
        tr.modulus1_sim.resize(first.t.size());
        for (std::size_t i = 0; i < first.t.size(); ++i)
            tr.modulus1_sim[i] = (first.x1[i] - first.y1[i]).norm();
        tr.x1 = first.x1;
        tr.y1 = first.y1;
        tr.x2 = second.x2;
        tr.y2 = second.y2;
        run.trace = std::move(tr);
    }
    return run;
}

namespace {

template <typename MakeClocks>
CouplingEstimate estimate_impl(const GruschinModel& model, const StatePoint& x,
                               const StatePoint& y, double T, std::size_t n_paths, int n_steps,
                               const StreamFactory& streams, unsigned n_threads,
                               const CouplingOptions& opts, MakeClocks&& make_clocks) {
    if (n_paths == 0) throw std::invalid_argument("entropy_estimate: n_paths must be positive");
    std::vector<double> entropy(n_paths), entropy1(n_paths), weights(n_paths);
    std::vector<double> tau1(n_paths), tau2(n_paths);
    std::vector<long> clips(n_paths, 0);
    std::vector<unsigned char> uncoupled(n_paths, 0);
    std::vector<double> violations(n_paths, 0.0);
    std::exception_ptr err;
    std::mutex err_mu;
    parallel_for_index(n_paths, n_threads, [&](std::size_t i) {
        try {
            Rng rng = streams.stream(i);
            auto [ell1, ell2] = make_clocks(rng);
            CouplingRun run = run_coupling(model, x, y, ell1, ell2, T, n_steps, rng, opts);
            entropy[i] = run.entropy_sample();
            entropy1[i] = std::exp(run.log_r1) * run.log_r1;
            weights[i] = run.weight();
            tau1[i] = run.tau1;
            tau2[i] = run.tau2;
            clips[i] = run.clip_count;
            uncoupled[i] = run.coupled2 ? 0 : 1;
            violations[i] = run.supermartingale_violation;
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (!err) err = std::current_exception();
        }
    });
    if (err) std::rethrow_exception(err);

    CouplingEstimate est;
    est.entropy = summarize(entropy);
    est.entropy_first = summarize(entropy1);
    est.er = summarize(weights);
    est.tau1_max = *std::max_element(tau1.begin(), tau1.end());
    est.tau2_max = *std::max_element(tau2.begin(), tau2.end());
    for (long c : clips) est.clip_count += c;
    for (unsigned char u : uncoupled) est.n_uncoupled_second += u;
    est.max_supermartingale_violation = *std::max_element(violations.begin(), violations.end());

    std::vector<double> sorted = weights;
    std::sort(sorted.begin(), sorted.end());
    double total = compensated_sum(sorted);
    std::size_t top = std::max<std::size_t>(1, n_paths / 100);
    double top_mass = 0.0;
    for (std::size_t i = n_paths - top; i < n_paths; ++i) top_mass += sorted[i];
    est.top_mass_share = total > 0.0 ? top_mass / total : 0.0;
    est.heavy_tail_warning = est.top_mass_share > 0.5;
    return est;
}

} // namespace

CouplingEstimate entropy_estimate(const GruschinModel& model, const StatePoint& x,
                                  const StatePoint& y, const TimeChange& ell1,
                                  const TimeChange& ell2, double T, std::size_t n_paths,
                                  int n_steps, const StreamFactory& streams, unsigned n_threads,
                                  const CouplingOptions& opts) {
    return estimate_impl(model, x, y, T, n_paths, n_steps, streams.fork(3), n_threads, opts,
                         [&](Rng&) { return std::pair<TimeChange, TimeChange>(ell1, ell2); });
}

CouplingEstimate entropy_estimate_subordinated(
    const GruschinModel& model, const StatePoint& x, const StatePoint& y,
    const BernsteinFunction& phi1, const BernsteinFunction& phi2, double T, std::size_t n_paths,
    int n_steps, const StreamFactory& streams, unsigned n_threads, const CouplingOptions& opts,
    const SamplerOptions& sampler) {
    const double horizon = 2.0 * T;
    return estimate_impl(
        model, x, y, T, n_paths, n_steps, streams.fork(3), n_threads, opts, [&](Rng& rng) {
            TimeChange s1 = TimeChange::from_subordinator(sample_path(phi1, horizon, n_steps, rng, sampler));
            TimeChange s2 = TimeChange::from_subordinator(sample_path(phi2, horizon, n_steps, rng, sampler));
            return std::pair<TimeChange, TimeChange>(std::move(s1), std::move(s2));
        });
}

WeightedMoments weighted_endpoint_moments(
    const GruschinModel& model, const StatePoint& x, const StatePoint& y,
    const BernsteinFunction& phi1, const BernsteinFunction& phi2, double T, std::size_t n_paths,
    int n_steps, const StreamFactory& streams, unsigned n_threads, const CouplingOptions& opts,
    const SamplerOptions& sampler) {
    if (n_paths == 0) throw std::invalid_argument("weighted_endpoint_moments: n_paths > 0 required");
    const int dim = model.m() + model.d();
    const double horizon = 2.0 * T;
    std::vector<std::vector<double>> wz(dim, std::vector<double>(n_paths));
    std::vector<std::vector<double>> wz2(dim, std::vector<double>(n_paths));
    std::exception_ptr err;
    std::mutex err_mu;
    const StreamFactory forked = streams.fork(3);
    parallel_for_index(n_paths, n_threads, [&](std::size_t i) {
        try {
            Rng rng = forked.stream(i);
            TimeChange s1 = TimeChange::from_subordinator(sample_path(phi1, horizon, n_steps, rng, sampler));
            TimeChange s2 = TimeChange::from_subordinator(sample_path(phi2, horizon, n_steps, rng, sampler));
            CouplingRun run = run_coupling(model, x, y, s1, s2, T, n_steps, rng, opts);
            double w = run.weight();
            for (int jdx = 0; jdx < model.m(); ++jdx) {
                double z = run.y_end.x1[jdx];
                wz[jdx][i] = w * z;
                wz2[jdx][i] = w * z * z;
            }
            for (int jdx = 0; jdx < model.d(); ++jdx) {
                double z = run.y_end.x2[jdx];
                wz[model.m() + jdx][i] = w * z;
                wz2[model.m() + jdx][i] = w * z * z;
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (!err) err = std::current_exception();
        }
    });
    if (err) std::rethrow_exception(err);
    WeightedMoments out;
    out.mean.reserve(dim);
    out.second_moment.reserve(dim);
    for (int c = 0; c < dim; ++c) {
        out.mean.push_back(summarize(wz[c]));
        out.second_moment.push_back(summarize(wz2[c]));
    }
    return out;
}

} // namespace gruschin
