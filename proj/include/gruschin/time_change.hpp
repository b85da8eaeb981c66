#pragma once

#include <functional>
#include <span>
#include <vector>

#include "gruschin/subordinator.hpp"

namespace gruschin {

enum class Interp {
    PiecewiseConstant, // cadlag: value v_i on [t_i, t_{i+1})
    PiecewiseLinear,
};

// Deterministic clock: non-decreasing grid function with ell(0) = 0 allowed
// to start anywhere >= 0 after regularization.
class TimeChange {
public:
    TimeChange(std::vector<double> grid, std::vector<double> values, Interp interp);

    static TimeChange identity(double t_max, int n_cells);
    // Lossless view of a sampled subordinator path (cadlag step function).
    static TimeChange from_subordinator(const SubordinatorPath& path);

    double operator()(double t) const;

    std::span<const double> grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    Interp interp() const { return interp_; }
    double t_min() const { return grid_.front(); }
    double t_max() const { return grid_.back(); }

    bool strictly_increasing() const;

    // Exact integral of the interpolant over [a, b] within the grid.
    double integral(double a, double b) const;

private:
    std::vector<double> grid_;
    std::vector<double> values_;
    Interp interp_;
};

// ell_eps(t) = (1/eps) int_t^{t+eps} ell(s) ds + eps t on every grid node
// whose forward window stays inside the domain. Strictly increasing and
// >= ell pointwise; decreases to ell as eps decreases.
TimeChange regularize(const TimeChange& ell, double eps);

// Inverse of a strictly increasing clock, gamma(ell(t)) = t.
TimeChange inverse(const TimeChange& ell_eps);

// Right-endpoint Riemann-Stieltjes sum of g against the clock increments on
// grid cells of [a, b]; a and b must be grid nodes.
double stieltjes(const std::function<double(double)>& g, const TimeChange& ell, double a, double b);
double stieltjes(std::span<const double> g_at_nodes, const TimeChange& ell, double a, double b);

} // namespace gruschin
