#include "onebit/matrix.hpp"

#include <stdexcept>

namespace onebit {

VecR real_expand_vector(const VecC& a) {
    const std::size_t n = a.size();
    VecR out(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a[i].real();
        out[n + i] = a[i].imag();
    }
    return out;
}

MatR real_expand_matrix(const MatC& a) {
    const std::size_t r = a.rows();
    const std::size_t c = a.cols();
    MatR out(2 * r, 2 * c);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            const double re = a(i, j).real();
            const double im = a(i, j).imag();
            out(i, j) = re;
            out(i, c + j) = -im;
            out(r + i, j) = im;
            out(r + i, c + j) = re;
        }
    }
    return out;
}

VecR matvec(const MatR& m, const VecR& v) {
    if (m.cols() != v.size()) throw std::invalid_argument("matvec: dimension mismatch");
    VecR out(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* row = m.row_ptr(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    return out;
}

VecC matvec(const MatC& m, const VecC& v) {
    if (m.cols() != v.size()) throw std::invalid_argument("matvec: dimension mismatch");
    VecC out(m.rows(), cplx{0.0, 0.0});
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const cplx* row = m.row_ptr(i);
        cplx acc{0.0, 0.0};
        for (std::size_t j = 0; j < m.cols(); ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    return out;
}

}  // namespace onebit
