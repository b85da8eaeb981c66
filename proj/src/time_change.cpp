#include "gruschin/time_change.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gruschin/grid.hpp"

namespace gruschin {

namespace {

std::size_t locate_node(std::span<const double> grid, double t, const char* what) {
    auto it = std::lower_bound(grid.begin(), grid.end(), t - 1e-12);
    if (it == grid.end() || std::abs(*it - t) > 1e-9 * (1.0 + std::abs(t))) {
        std::ostringstream os;
        os << what << ": " << t << " is not a grid node";
        throw std::invalid_argument(os.str());
    }
    return static_cast<std::size_t>(it - grid.begin());
}

} // namespace

TimeChange::TimeChange(std::vector<double> grid, std::vector<double> values, Interp interp)
    : grid_(std::move(grid)), values_(std::move(values)), interp_(interp) {
    if (grid_.size() != values_.size() || grid_.size() < 2)
        throw std::invalid_argument("TimeChange: grid and values must share a size >= 2");
    for (std::size_t i = 1; i < grid_.size(); ++i) {
        if (!(grid_[i] > grid_[i - 1]))
            throw std::invalid_argument("TimeChange: grid must be strictly increasing");
        if (values_[i] < values_[i - 1])
            throw std::invalid_argument("TimeChange: values must be non-decreasing");
    }
}

TimeChange TimeChange::identity(double t_max, int n_cells) {
    if (!(t_max > 0.0) || n_cells < 1) throw std::invalid_argument("identity: bad arguments");
    std::vector<double> t = uniform_grid(t_max, n_cells);
    return TimeChange(t, t, Interp::PiecewiseLinear);
}

TimeChange TimeChange::from_subordinator(const SubordinatorPath& path) {
    return TimeChange(path.t, path.s, Interp::PiecewiseConstant);
}

double TimeChange::operator()(double t) const {
    if (t < grid_.front() - 1e-12 || t > grid_.back() + 1e-12)
        throw std::invalid_argument("TimeChange: evaluation outside the grid");
    t = std::clamp(t, grid_.front(), grid_.back());
    auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - grid_.begin());
    if (i == grid_.size()) return values_.back();
    if (i == 0) return values_.front();
    --i;
    if (interp_ == Interp::PiecewiseConstant) return values_[i];
    double w = (t - grid_[i]) / (grid_[i + 1] - grid_[i]);
    return values_[i] + w * (values_[i + 1] - values_[i]);
}

bool TimeChange::strictly_increasing() const {
    for (std::size_t i = 1; i < values_.size(); ++i)
        if (!(values_[i] > values_[i - 1])) return false;
    return true;
}

double TimeChange::integral(double a, double b) const {
    if (a > b) throw std::invalid_argument("TimeChange::integral: a > b");
    if (a < grid_.front() - 1e-12 || b > grid_.back() + 1e-12)
        throw std::invalid_argument("TimeChange::integral: range outside the grid");
    a = std::clamp(a, grid_.front(), grid_.back());
    b = std::clamp(b, grid_.front(), grid_.back());
    auto cell_integral = [&](std::size_t i, double lo, double hi) {
        // Integral of the interpolant over [lo, hi] within cell i.
        if (hi <= lo) return 0.0;
        if (interp_ == Interp::PiecewiseConstant) return values_[i] * (hi - lo);
        double h = grid_[i + 1] - grid_[i];
        double slope = (values_[i + 1] - values_[i]) / h;
        double flo = values_[i] + slope * (lo - grid_[i]);
        double fhi = values_[i] + slope * (hi - grid_[i]);
        return 0.5 * (flo + fhi) * (hi - lo);
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
        double lo = std::max(a, grid_[i]);
        double hi = std::min(b, grid_[i + 1]);
        if (hi > lo) total += cell_integral(i, lo, hi);
        if (grid_[i + 1] >= b) break;
    }
    return total;
}

TimeChange regularize(const TimeChange& ell, double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("regularize: eps must lie in (0,1]");
    std::span<const double> grid = ell.grid();
    std::vector<double> out_t, out_v;
    out_t.reserve(grid.size());
    out_v.reserve(grid.size());
    const double t_hi = ell.t_max();
    for (double t : grid) {
        if (t + eps > t_hi + 1e-12) break;
        out_t.push_back(t);
        out_v.push_back(ell.integral(t, t + eps) / eps + eps * t);
    }
    if (out_t.size() < 2) {
        std::ostringstream os;
        os << "regularize: clock must be defined on [" << ell.t_min() << ", "
           << grid[std::min<std::size_t>(1, grid.size() - 1)] + eps
           << "] to regularize with eps = " << eps << "; extend the grid past t + eps";
        throw std::invalid_argument(os.str());
    }
    return TimeChange(std::move(out_t), std::move(out_v), Interp::PiecewiseLinear);
}

TimeChange inverse(const TimeChange& ell_eps) {
    if (!ell_eps.strictly_increasing())
        throw std::invalid_argument("inverse: clock must be strictly increasing");
    std::vector<double> u(ell_eps.values().begin(), ell_eps.values().end());
    std::vector<double> t(ell_eps.grid().begin(), ell_eps.grid().end());
    return TimeChange(std::move(u), std::move(t), Interp::PiecewiseLinear);
}

double stieltjes(const std::function<double(double)>& g, const TimeChange& ell, double a, double b) {
    std::span<const double> grid = ell.grid();
    std::span<const double> v = ell.values();
    std::size_t ia = locate_node(grid, a, "stieltjes");
    std::size_t ib = locate_node(grid, b, "stieltjes");
    if (ia > ib) throw std::invalid_argument("stieltjes: a > b");
    double sum = 0.0;
    for (std::size_t i = ia; i < ib; ++i) sum += g(grid[i + 1]) * (v[i + 1] - v[i]);
    return sum;
}

double stieltjes(std::span<const double> g_at_nodes, const TimeChange& ell, double a, double b) {
    if (g_at_nodes.size() != ell.grid().size())
        throw std::invalid_argument("stieltjes: grid function size mismatch");
    std::span<const double> grid = ell.grid();
    std::span<const double> v = ell.values();
    std::size_t ia = locate_node(grid, a, "stieltjes");
    std::size_t ib = locate_node(grid, b, "stieltjes");
    if (ia > ib) throw std::invalid_argument("stieltjes: a > b");
    double sum = 0.0;
    for (std::size_t i = ia; i < ib; ++i) sum += g_at_nodes[i + 1] * (v[i + 1] - v[i]);
    return sum;
}

} // namespace gruschin
