#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace qapswarm {

/// Non-owning row-major view of an n x n block inside a larger buffer.
template <class T>
class MatrixRef {
public:
    MatrixRef() = default;
    MatrixRef(T* data, std::size_t n) : data_(data), n_(n) {}

    // Allow MatrixRef<T> -> MatrixRef<const T>.
    template <class U>
        requires std::is_convertible_v<U*, T*>
    MatrixRef(MatrixRef<U> other) : data_(other.data()), n_(other.size()) {}

    std::size_t size() const { return n_; }
    std::size_t cells() const { return n_ * n_; }
    T* data() const { return data_; }

    T& operator()(std::size_t row, std::size_t col) const {
        assert(row < n_ && col < n_);
        return data_[row * n_ + col];
    }

    std::span<T> flat() const { return {data_, n_ * n_}; }

private:
    T* data_ = nullptr;
    std::size_t n_ = 0;
};

/// Owning square matrix, row-major.
template <class T>
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n, T fill = T{}) : n_(n), data_(n * n, fill) {}

    SquareMatrix(std::initializer_list<std::initializer_list<T>> rows) : n_(rows.size()) {
        data_.reserve(n_ * n_);
        for (const auto& row : rows) {
            if (row.size() != n_) throw std::invalid_argument("SquareMatrix: ragged initializer");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static SquareMatrix from_flat(std::size_t n, std::vector<T> values) {
        if (values.size() != n * n) throw std::invalid_argument("SquareMatrix: flat size is not n*n");
        SquareMatrix m;
        m.n_ = n;
        m.data_ = std::move(values);
        return m;
    }

    std::size_t size() const { return n_; }
    T& operator()(std::size_t row, std::size_t col) { return data_[row * n_ + col]; }
    const T& operator()(std::size_t row, std::size_t col) const { return data_[row * n_ + col]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    const std::vector<T>& values() const { return data_; }

    MatrixRef<T> ref() { return {data_.data(), n_}; }
    MatrixRef<const T> ref() const { return {data_.data(), n_}; }
    MatrixRef<const T> cref() const { return {data_.data(), n_}; }

    friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<T> data_;
};

template <class T>
SquareMatrix<std::remove_const_t<T>> to_matrix(MatrixRef<T> view) {
    using V = std::remove_const_t<T>;
    return SquareMatrix<V>::from_flat(view.size(), std::vector<V>(view.data(), view.data() + view.cells()));
}

inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                                    std::to_string(b) + ")");
    }
}

}  // namespace qapswarm
