#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace onebit {

using cplx = std::complex<double>;

// Minimal row-major dense matrix; storage and indexing only.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    T* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
    const T* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using MatR = Matrix<double>;
using MatC = Matrix<cplx>;
using VecR = std::vector<double>;
using VecC = std::vector<cplx>;

// Real-valued expansions: omega(a) = [Re a; Im a],
// omega(A) = [Re A, -Im A; Im A, Re A].
VecR real_expand_vector(const VecC& a);
MatR real_expand_matrix(const MatC& a);

VecR matvec(const MatR& m, const VecR& v);
VecC matvec(const MatC& m, const VecC& v);

}  // namespace onebit
