#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "matrix.hpp"
#include "qaplib_io.hpp"

namespace qapswarm {

using Location = std::int32_t;

/// Cell type of permutation-matrix blocks.
using Bit = std::uint8_t;

/// Checks that perm is a bijection on {0..n-1}.
inline bool is_permutation(std::span<const Location> perm) {
    std::vector<bool> seen(perm.size(), false);
    for (Location k : perm) {
        if (k < 0 || static_cast<std::size_t>(k) >= perm.size() || seen[k]) return false;
        seen[k] = true;
    }
    return true;
}

/// An assignment of facilities to locations: perm[i] is the location of facility i.
/// The matrix view has X(k, i) == 1 iff k == perm[i]; it is derived from perm on demand.
class Assignment {
public:
    Assignment() = default;

    explicit Assignment(std::vector<Location> perm) : perm_(std::move(perm)) {
        if (!is_permutation(perm_)) throw std::invalid_argument("Assignment: not a permutation");
    }

    static Assignment identity(std::size_t n) {
        std::vector<Location> p(n);
        std::iota(p.begin(), p.end(), 0);
        return Assignment(std::move(p));
    }

    std::size_t size() const { return perm_.size(); }
    Location operator[](std::size_t facility) const { return perm_[facility]; }
    std::span<const Location> perm() const { return perm_; }

    SquareMatrix<Bit> matrix() const {
        SquareMatrix<Bit> x(perm_.size(), 0);
        write_matrix(x.ref());
        return x;
    }

    void write_matrix(MatrixRef<Bit> out) const {
        require_same_size(out.size(), perm_.size(), "Assignment::write_matrix");
        std::fill(out.data(), out.data() + out.cells(), Bit{0});
        for (std::size_t i = 0; i < perm_.size(); ++i) out(perm_[i], i) = 1;
    }

    friend bool operator==(const Assignment&, const Assignment&) = default;

private:
    std::vector<Location> perm_;
};

/// Writes the permutation read off a 0/1 matrix into perm_out; throws if a row or column sum is not 1.
template <class T>
void matrix_to_perm(MatrixRef<const T> x, std::span<Location> perm_out) {
    const std::size_t n = x.size();
    require_same_size(perm_out.size(), n, "matrix_to_perm");
    std::vector<int> row_sum(n, 0);
    for (std::size_t col = 0; col < n; ++col) {
        int col_sum = 0;
        for (std::size_t row = 0; row < n; ++row) {
            const T v = x(row, col);
            if (v == T{1}) {
                ++col_sum;
                ++row_sum[row];
                perm_out[col] = static_cast<Location>(row);
            } else if (v != T{0}) {
                throw std::invalid_argument("matrix_to_assignment: entry (" + std::to_string(row) + "," +
                                            std::to_string(col) + ") is not 0 or 1");
            }
        }
        if (col_sum != 1) {
            throw std::invalid_argument("matrix_to_assignment: column " + std::to_string(col) + " sums to " +
                                        std::to_string(col_sum));
        }
    }
    for (std::size_t row = 0; row < n; ++row) {
        if (row_sum[row] != 1) {
            throw std::invalid_argument("matrix_to_assignment: row " + std::to_string(row) + " sums to " +
                                        std::to_string(row_sum[row]));
        }
    }
}

template <class T>
Assignment matrix_to_assignment(const SquareMatrix<T>& x) {
    std::vector<Location> perm(x.size());
    matrix_to_perm<T>(x.cref(), perm);
    return Assignment(std::move(perm));
}

/// True when the block has exactly one 1 per row and column and zeros elsewhere.
template <class T>
bool is_permutation_matrix(MatrixRef<const T> x) {
    std::vector<Location> scratch(x.size());
    try {
        matrix_to_perm<T>(x, scratch);
    } catch (const std::invalid_argument&) {
        return false;
    }
    return true;
}

/// Exact integer cost; instance must be integral.
inline std::int64_t evaluate_cost_exact(const QapInstance& inst, std::span<const Location> perm) {
    const std::size_t n = inst.n;
    require_same_size(perm.size(), n, "evaluate_cost");
    if (!inst.integral) throw std::invalid_argument("evaluate_cost_exact: instance has non-integer entries");
    const std::int64_t* f = inst.flow_int.data();
    const std::int64_t* d = inst.distance_int.data();
    std::int64_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t* frow = f + i * n;
        const std::int64_t* drow = d + static_cast<std::size_t>(perm[i]) * n;
        std::int64_t row = 0;
        for (std::size_t j = 0; j < n; ++j) row += frow[j] * drow[perm[j]];
        total += row;
    }
    return total;
}

/// Sum over i, j of flow(i, j) * distance(perm[i], perm[j]), O(n^2).
/// Integral instances are summed in 64-bit integers, so the result is exact below 2^53.
inline double evaluate_cost(const QapInstance& inst, std::span<const Location> perm) {
    if (inst.integral) return static_cast<double>(evaluate_cost_exact(inst, perm));
    const std::size_t n = inst.n;
    require_same_size(perm.size(), n, "evaluate_cost");
    const double* f = inst.flow.data();
    const double* d = inst.distance.data();
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* frow = f + i * n;
        const double* drow = d + static_cast<std::size_t>(perm[i]) * n;
        for (std::size_t j = 0; j < n; ++j) total += frow[j] * drow[perm[j]];
    }
    return total;
}

inline double evaluate_cost(const QapInstance& inst, const Assignment& a) { return evaluate_cost(inst, a.perm()); }

/// Relative gap (cost - reference) / reference.
inline double gap(double cost, double reference) {
    if (!(reference > 0)) throw std::invalid_argument("gap: reference must be positive");
    return (cost - reference) / reference;
}

}  // namespace qapswarm
