#pragma once

// Internal: small dense simplex solver for the zero-sum game
//   value(D) = max over x in the probability simplex of min_i <D[i], x>,
// used by the value-vector pruning step. The game is reduced, after shifting
// D positive, to the LP  max 1'w  s.t.  D''w <= 1, w >= 0,  whose initial
// slack basis is feasible, so no phase-1 is needed.

#include <cmath>
#include <cstddef>
#include <vector>

namespace superstate {
namespace detail {

struct GameResult {
    double value = 0.0;
    std::vector<double> witness;  // argmax point on the simplex
    bool ok = false;
};

// D is m x n row-major: m adversary rows, n simplex coordinates.
inline GameResult max_min_over_simplex(const std::vector<double>& d, int m, int n) {
    GameResult res;
    if (m <= 0 || n <= 0) return res;

    double shift = 0.0;
    for (double v : d) shift = std::max(shift, std::abs(v));
    shift += 1.0;

    // tableau over variables [w_1..w_m | s_1..s_n], n constraint rows + objective
    const int cols = m + n + 1;
    std::vector<double> t(static_cast<std::size_t>(n + 1) * cols, 0.0);
    auto at = [&](int r, int c) -> double& { return t[static_cast<std::size_t>(r) * cols + c]; };
    std::vector<int> basis(n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < m; ++i) at(j, i) = d[static_cast<std::size_t>(i) * n + j] + shift;
        at(j, m + j) = 1.0;
        at(j, cols - 1) = 1.0;
        basis[j] = m + j;
    }
    for (int i = 0; i < m; ++i) at(n, i) = -1.0;  // maximize sum w -> minimize -sum w

    const double eps = 1e-11;
    const long max_pivots = 2000L + 50L * (static_cast<long>(m) + n);
    for (long pivot = 0; pivot < max_pivots; ++pivot) {
        int col = -1;  // Bland: lowest-index improving column
        for (int c = 0; c < m + n; ++c) {
            if (at(n, c) < -eps) {
                col = c;
                break;
            }
        }
        if (col < 0) {
            // optimal; the objective cell accumulated z = sum of w
            const double z = at(n, cols - 1);
            if (z <= eps) return res;  // degenerate game (cannot happen after the shift)
            res.value = 1.0 / z - shift;
            res.witness.assign(n, 0.0);
            // dual values sit in the objective row under the slack columns
            double total = 0.0;
            for (int j = 0; j < n; ++j) {
                const double y = at(n, m + j);
                res.witness[j] = y > 0.0 ? y : 0.0;
                total += res.witness[j];
            }
            if (total > 0.0) {
                for (double& v : res.witness) v /= total;
            }
            res.ok = true;
            return res;
        }
        int row = -1;
        double best_ratio = 0.0;
        for (int r = 0; r < n; ++r) {
            if (at(r, col) > eps) {
                const double ratio = at(r, cols - 1) / at(r, col);
                if (row < 0 || ratio < best_ratio - eps ||
                    (ratio < best_ratio + eps && basis[r] < basis[row])) {
                    row = r;
                    best_ratio = ratio;
                }
            }
        }
        if (row < 0) return res;  // unbounded: cannot happen with shifted positive data
        const double piv = at(row, col);
        for (int c = 0; c < cols; ++c) at(row, c) /= piv;
        for (int r = 0; r <= n; ++r) {
            if (r == row) continue;
            const double f = at(r, col);
            if (f == 0.0) continue;
            for (int c = 0; c < cols; ++c) at(r, c) -= f * at(row, c);
        }
        basis[row] = col;
    }
    return res;  // pivot cap reached; caller treats as "keep"
}

}  // namespace detail
}  // namespace superstate
