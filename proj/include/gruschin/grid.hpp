#pragma once

#include <vector>

namespace gruschin {

// Shared uniform-grid arithmetic: every module building a grid over [0, T]
// must use the same expression so that node times agree bit-exactly.
inline double grid_node(double T, int n_cells, int i) {
    return T * static_cast<double>(i) / static_cast<double>(n_cells);
}

inline std::vector<double> uniform_grid(double T, int n_cells) {
    std::vector<double> t(static_cast<std::size_t>(n_cells) + 1);
    for (int i = 0; i <= n_cells; ++i) t[static_cast<std::size_t>(i)] = grid_node(T, n_cells, i);
    return t;
}

} // namespace gruschin
