#pragma once

// Per-particle update mathematics.
//
//   V(t+1) = S_v(c1 V + c2 r2 (PL - X) + c3 r3 (PG - X))
//   X(t+1) = S_x(X + V)
//
// Matrices use the assignment convention X(location, facility). All kernels work
// on MatrixRef views so the engine can run them directly on its flat buffers.
//
// Random draw order, per call:
//   GlobalMax / SecondTarget: one uniform_index draw per round whose tie set has
//     more than one cell, nothing otherwise.
//   PickColumn: n-1 draws for the Fisher-Yates column order (i = n-1 down to 1),
//     then one draw per column whose tie set has more than one row.
// Tie sets are always enumerated in row-major order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "assignment.hpp"
#include "matrix.hpp"
#include "random.hpp"

namespace qapswarm {

enum class VelocityMode { Raw, Norm };
enum class AggregationMode { GlobalMax, PickColumn, SecondTarget };

struct PsoCoefficients {
    double c1 = 0.5;  // inertia
    double c2 = 0.5;  // self recognition
    double c3 = 0.5;  // social factor
    double v_max = 4.0;
    VelocityMode sv_mode = VelocityMode::Norm;
    AggregationMode sx_mode = AggregationMode::SecondTarget;
    std::size_t depth = 2;  // SecondTarget only

    /// Throws std::invalid_argument when a field is out of range for problem size n.
    void validate(std::size_t n) const {
        auto unit = [](double c, const char* name) {
            if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0,1]");
        };
        unit(c1, "c1");
        unit(c2, "c2");
        unit(c3, "c3");
        if (!(v_max > 0.0) || !std::isfinite(v_max)) throw std::invalid_argument("v_max must be positive");
        if (sx_mode == AggregationMode::SecondTarget && (depth < 1 || depth >= n)) {
            throw std::invalid_argument("depth must satisfy 1 <= depth < n (depth=" + std::to_string(depth) +
                                        ", n=" + std::to_string(n) + ")");
        }
    }
};

inline const char* to_string(VelocityMode m) { return m == VelocityMode::Raw ? "raw" : "norm"; }

inline const char* to_string(AggregationMode m) {
    switch (m) {
        case AggregationMode::GlobalMax: return "global-max";
        case AggregationMode::PickColumn: return "pick-column";
        case AggregationMode::SecondTarget: return "second-target";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Velocity shaping

/// Clamps every entry into [-v_max, v_max].
inline void sv_raw(MatrixRef<double> v, double v_max) {
    for (double& x : v.flat()) x = std::clamp(x, -v_max, v_max);
}

/// Clamp, then divide each column by its absolute sum. All-zero columns stay zero.
inline void sv_norm(MatrixRef<double> v, double v_max) {
    sv_raw(v, v_max);
    const std::size_t n = v.size();
    for (std::size_t col = 0; col < n; ++col) {
        double sum = 0;
        for (std::size_t row = 0; row < n; ++row) sum += std::fabs(v(row, col));
        if (sum > 0) {
            for (std::size_t row = 0; row < n; ++row) v(row, col) /= sum;
        }
    }
}

inline void apply_sv(MatrixRef<double> v, const PsoCoefficients& k) {
    if (k.sv_mode == VelocityMode::Raw) {
        sv_raw(v, k.v_max);
    } else {
        sv_norm(v, k.v_max);
    }
}

inline SquareMatrix<double> sv_raw(SquareMatrix<double> v, double v_max) {
    sv_raw(v.ref(), v_max);
    return v;
}

inline SquareMatrix<double> sv_norm(SquareMatrix<double> v, double v_max) {
    sv_norm(v.ref(), v_max);
    return v;
}

/// In-place velocity update for one particle. r2 and r3 apply uniformly to the whole matrix.
inline void velocity_update(MatrixRef<double> v, MatrixRef<const Bit> x, MatrixRef<const Bit> local_best,
                            MatrixRef<const Bit> swarm_best, const PsoCoefficients& k, double r2, double r3) {
    require_same_size(x.size(), v.size(), "velocity_update");
    require_same_size(local_best.size(), v.size(), "velocity_update");
    require_same_size(swarm_best.size(), v.size(), "velocity_update");
    if (!(r2 >= 0.0 && r2 <= 1.0) || !(r3 >= 0.0 && r3 <= 1.0)) {
        throw std::invalid_argument("velocity_update: r2 and r3 must lie in [0,1]");
    }
    const double a = k.c2 * r2;
    const double b = k.c3 * r3;
    const std::size_t cells = v.cells();
    double* vp = v.data();
    const Bit* xp = x.data();
    const Bit* lp = local_best.data();
    const Bit* gp = swarm_best.data();
    for (std::size_t i = 0; i < cells; ++i) {
        const double xi = xp[i];
        vp[i] = k.c1 * vp[i] + a * (lp[i] - xi) + b * (gp[i] - xi);
    }
    apply_sv(v, k);
}

inline SquareMatrix<double> velocity_update(SquareMatrix<double> v, const SquareMatrix<Bit>& x,
                                            const SquareMatrix<Bit>& local_best, const SquareMatrix<Bit>& swarm_best,
                                            const PsoCoefficients& k, double r2, double r3) {
    velocity_update(v.ref(), x.cref(), local_best.cref(), swarm_best.cref(), k, r2, r3);
    return v;
}

// ---------------------------------------------------------------------------
// Position

inline void position_combine(MatrixRef<const Bit> x, MatrixRef<const double> v, MatrixRef<double> out) {
    require_same_size(x.size(), v.size(), "position_combine");
    require_same_size(out.size(), v.size(), "position_combine");
    const std::size_t cells = v.cells();
    for (std::size_t i = 0; i < cells; ++i) out.data()[i] = x.data()[i] + v.data()[i];
}

inline SquareMatrix<double> position_combine(const SquareMatrix<Bit>& x, const SquareMatrix<double>& v) {
    SquareMatrix<double> out(v.size());
    position_combine(x.cref(), v.cref(), out.ref());
    return out;
}

// ---------------------------------------------------------------------------
// Aggregation (S_x)

/// Reusable scratch buffers for the aggregation procedures.
class AggregationWorkspace {
public:
    void prepare(std::size_t n) {
        row_used.assign(n, 0);
        col_used.assign(n, 0);
        ties.clear();
        ties.reserve(n * n);
        if (order.size() != n * n) order.resize(n * n);
        columns.resize(n);
    }

    std::vector<std::uint32_t> order;
    std::vector<std::uint8_t> row_used;
    std::vector<std::uint8_t> col_used;
    std::vector<std::uint32_t> ties;
    std::vector<std::uint32_t> columns;
};

namespace detail {

inline void assign_cell(std::size_t row, std::size_t col, MatrixRef<Bit> out, std::span<Location> perm_out,
                        AggregationWorkspace& ws) {
    ws.row_used[row] = 1;
    ws.col_used[col] = 1;
    out(row, col) = 1;
    perm_out[col] = static_cast<Location>(row);
}

inline void check_aggregation_args(MatrixRef<const double> m, MatrixRef<Bit> out, std::span<Location> perm_out) {
    require_same_size(out.size(), m.size(), "aggregation output");
    require_same_size(perm_out.size(), m.size(), "aggregation permutation");
}

/// Greedy maximum selection shared by GlobalMax (no exclusion) and SecondTarget.
/// Cells are visited in order of decreasing value; for rounds 1..depth cells with
/// z == 1 are skipped, falling back to the full set if nothing else is left.
inline void greedy_max_selection(MatrixRef<const double> m, const Bit* z, std::size_t depth, RandomStream& rng,
                                 MatrixRef<Bit> out, std::span<Location> perm_out, AggregationWorkspace& ws) {
    const std::size_t n = m.size();
    const std::size_t cells = n * n;
    const double* val = m.data();
    ws.prepare(n);
    std::iota(ws.order.begin(), ws.order.end(), 0u);
    std::sort(ws.order.begin(), ws.order.end(), [val](std::uint32_t a, std::uint32_t b) {
        return val[a] > val[b] || (val[a] == val[b] && a < b);
    });
    std::fill(out.data(), out.data() + cells, Bit{0});

    auto live = [&](std::uint32_t cell) { return !ws.row_used[cell / n] && !ws.col_used[cell % n]; };

    std::size_t head = 0;  // every cell before head is in a used row or column
    for (std::size_t round = 1; round <= n; ++round) {
        while (!live(ws.order[head])) ++head;

        bool restricted = z != nullptr && round <= depth;
        std::size_t start = head;
        if (restricted) {
            std::size_t q = head;
            while (q < cells && !(live(ws.order[q]) && z[ws.order[q]] == 0)) ++q;
            if (q == cells) {
                restricted = false;
            } else {
                start = q;
            }
        }

        const double best = val[ws.order[start]];
        ws.ties.clear();
        for (std::size_t q = start; q < cells && val[ws.order[q]] == best; ++q) {
            const std::uint32_t cell = ws.order[q];
            if (live(cell) && (!restricted || z[cell] == 0)) ws.ties.push_back(cell);
        }
        const std::uint32_t pick = ws.ties.size() == 1 ? ws.ties[0] : ws.ties[rng.uniform_index(ws.ties.size())];
        assign_cell(pick / n, pick % n, out, perm_out, ws);
    }
}

inline void debug_check_output(MatrixRef<Bit> out) {
#ifndef NDEBUG
    if (!is_permutation_matrix<Bit>(out)) throw std::logic_error("aggregation produced an invalid permutation matrix");
#else
    (void)out;
#endif
}

}  // namespace detail

/// GlobalMax: repeatedly take the largest entry among unassigned rows and columns.
inline void sx_global_max(MatrixRef<const double> m, RandomStream& rng, MatrixRef<Bit> out,
                          std::span<Location> perm_out, AggregationWorkspace& ws) {
    detail::check_aggregation_args(m, out, perm_out);
    detail::greedy_max_selection(m, nullptr, 0, rng, out, perm_out, ws);
    detail::debug_check_output(out);
}

/// PickColumn: visit columns in a random order, taking the largest unassigned row in each.
inline void sx_pick_column(MatrixRef<const double> m, RandomStream& rng, MatrixRef<Bit> out,
                           std::span<Location> perm_out, AggregationWorkspace& ws) {
    detail::check_aggregation_args(m, out, perm_out);
    const std::size_t n = m.size();
    ws.prepare(n);
    std::iota(ws.columns.begin(), ws.columns.end(), 0u);
    for (std::size_t i = n - 1; i > 0; --i) {
        std::swap(ws.columns[i], ws.columns[rng.uniform_index(i + 1)]);
    }
    std::fill(out.data(), out.data() + out.cells(), Bit{0});

    for (std::uint32_t col : ws.columns) {
        ws.ties.clear();
        double best = 0;
        for (std::uint32_t row = 0; row < n; ++row) {
            if (ws.row_used[row]) continue;
            const double v = m(row, col);
            if (ws.ties.empty() || v > best) {
                best = v;
                ws.ties.clear();
                ws.ties.push_back(row);
            } else if (v == best) {
                ws.ties.push_back(row);
            }
        }
        const std::uint32_t row = ws.ties.size() == 1 ? ws.ties[0] : ws.ties[rng.uniform_index(ws.ties.size())];
        detail::assign_cell(row, col, out, perm_out, ws);
    }
    detail::debug_check_output(out);
}

/// SecondTarget: GlobalMax that ignores cells where the previous solution z has a 1
/// during the first `depth` rounds.
inline void sx_second_target(MatrixRef<const double> m, MatrixRef<const Bit> z, std::size_t depth,
                             RandomStream& rng, MatrixRef<Bit> out, std::span<Location> perm_out,
                             AggregationWorkspace& ws) {
    detail::check_aggregation_args(m, out, perm_out);
    require_same_size(z.size(), m.size(), "sx_second_target");
    if (depth < 1 || depth >= m.size()) {
        throw std::invalid_argument("sx_second_target: depth must satisfy 1 <= depth < n");
    }
    if (!is_permutation_matrix<Bit>(z)) throw std::invalid_argument("sx_second_target: Z is not a permutation matrix");
    detail::greedy_max_selection(m, z.data(), depth, rng, out, perm_out, ws);
    detail::debug_check_output(out);
}

/// Dispatches on k.sx_mode; z is the particle's current solution.
inline void aggregate(const PsoCoefficients& k, MatrixRef<const double> m, MatrixRef<const Bit> z, RandomStream& rng,
                      MatrixRef<Bit> out, std::span<Location> perm_out, AggregationWorkspace& ws) {
    switch (k.sx_mode) {
        case AggregationMode::GlobalMax: sx_global_max(m, rng, out, perm_out, ws); return;
        case AggregationMode::PickColumn: sx_pick_column(m, rng, out, perm_out, ws); return;
        case AggregationMode::SecondTarget: sx_second_target(m, z, k.depth, rng, out, perm_out, ws); return;
    }
}

// Value-returning conveniences.

inline SquareMatrix<Bit> sx_global_max(const SquareMatrix<double>& m, RandomStream& rng) {
    SquareMatrix<Bit> out(m.size());
    std::vector<Location> perm(m.size());
    AggregationWorkspace ws;
    sx_global_max(m.cref(), rng, out.ref(), perm, ws);
    return out;
}

inline SquareMatrix<Bit> sx_pick_column(const SquareMatrix<double>& m, RandomStream& rng) {
    SquareMatrix<Bit> out(m.size());
    std::vector<Location> perm(m.size());
    AggregationWorkspace ws;
    sx_pick_column(m.cref(), rng, out.ref(), perm, ws);
    return out;
}

inline SquareMatrix<Bit> sx_second_target(const SquareMatrix<double>& m, const SquareMatrix<Bit>& z,
                                          std::size_t depth, RandomStream& rng) {
    SquareMatrix<Bit> out(m.size());
    std::vector<Location> perm(m.size());
    AggregationWorkspace ws;
    sx_second_target(m.cref(), z.cref(), depth, rng, out.ref(), perm, ws);
    return out;
}

}  // namespace qapswarm
