#include "onebit/detectors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "onebit/gaussian.hpp"

namespace onebit {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

MatR effective_channels(const ChannelMatrix& h, const SymbolBook& book,
                        const SystemConfig& config) {
    const int dim = config.real_dim();
    const double scale = std::sqrt(2.0 * config.transmit_power / config.noise_power);
    MatR psi(book.count, dim);
    // psi row k = scale * H * s_k
    for (int k = 0; k < book.count; ++k) {
        const double* s = book.vectors_real.row_ptr(k);
        for (int i = 0; i < dim; ++i) {
            const double* hrow = h.real_form.row_ptr(i);
            double acc = 0.0;
            for (std::size_t j = 0; j < h.real_form.cols(); ++j) acc += hrow[j] * s[j];
            psi(k, i) = scale * acc;
        }
    }
    return psi;
}

ScoreTable csi_score_table(const ChannelMatrix& h, const SymbolBook& book,
                           const SystemConfig& config) {
    const MatR psi = effective_channels(h, book, config);
    ScoreTable t;
    t.log_plus = MatR(psi.rows(), psi.cols());
    t.log_minus = MatR(psi.rows(), psi.cols());
    for (std::size_t k = 0; k < psi.rows(); ++k)
        for (std::size_t i = 0; i < psi.cols(); ++i) {
            t.log_plus(k, i) = log_std_normal_cdf(psi(k, i));
            t.log_minus(k, i) = log_std_normal_cdf(-psi(k, i));
        }
    return t;
}

int detect_index(std::span<const std::int8_t> y, const ScoreTable& scores, double* best_score,
                 bool* degenerate) {
    if (y.size() != scores.log_plus.cols())
        throw std::invalid_argument("detect_index: observation dimension mismatch");
    const std::size_t dim = y.size();
    int best = 0;
    double best_val = kNegInf;
    for (std::size_t k = 0; k < scores.log_plus.rows(); ++k) {
        const double* lp = scores.log_plus.row_ptr(k);
        const double* lm = scores.log_minus.row_ptr(k);
        double acc = 0.0;
        for (std::size_t i = 0; i < dim; ++i) acc += y[i] > 0 ? lp[i] : lm[i];
        if (acc > best_val) {
            best_val = acc;
            best = static_cast<int>(k);
        }
    }
    if (best_score) *best_score = best_val;
    if (degenerate) *degenerate = (best_val == kNegInf);
    return best;
}

DetectionResult make_result(int index, double score, bool degenerate, const SymbolBook& book) {
    DetectionResult r;
    r.symbol_index = index;
    r.log_likelihood = score;
    r.degenerate = degenerate;
    r.per_user_symbols.assign(book.vectors_complex.row_ptr(index),
                              book.vectors_complex.row_ptr(index) + book.config.num_users);
    return r;
}

DetectionResult ml_detect_csi(const QuantizedObservation& y, const ChannelMatrix& h,
                              const SymbolBook& book, const SystemConfig& config) {
    if (y.values.size() != static_cast<std::size_t>(config.real_dim()))
        throw std::invalid_argument("ml_detect_csi: observation dimension mismatch");
    const MatR psi = effective_channels(h, book, config);
    int best = 0;
    double best_val = kNegInf;
    for (int k = 0; k < book.count; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < y.values.size(); ++i)
            acc += log_std_normal_cdf(static_cast<double>(y.values[i]) * psi(k, i));
        if (acc > best_val) {
            best_val = acc;
            best = k;
        }
    }
    return make_result(best, best_val, best_val == kNegInf, book);
}

DetectionResult ml_detect_learned(const QuantizedObservation& y, const LikelihoodTable& table,
                                  const SymbolBook& book) {
    if (y.values.size() != table.log_p_plus.cols() ||
        table.log_p_plus.rows() != static_cast<std::size_t>(book.count))
        throw std::invalid_argument("ml_detect_learned: dimension mismatch");
    double score = 0.0;
    bool degenerate = false;
    const ScoreTable scores = learned_score_table(table);
    const int idx = detect_index(std::span<const std::int8_t>(y.values), scores, &score, &degenerate);
    return make_result(idx, score, degenerate, book);
}

MatC pseudo_inverse(const MatC& h) {
    const std::size_t m = h.rows(), n = h.cols();
    if (m < n) throw std::invalid_argument("pseudo_inverse: matrix must be tall");
    // normal matrix A = H^H H and right-hand side B = H^H
    MatC a(n, n), b(n, m);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            cplx acc{0.0, 0.0};
            for (std::size_t i = 0; i < m; ++i) acc += std::conj(h(i, r)) * h(i, c);
            a(r, c) = acc;
        }
        for (std::size_t i = 0; i < m; ++i) b(r, i) = std::conj(h(i, r));
    }
    // Gaussian elimination with partial pivoting on [A | B]
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i)));
    const double tol = 1e-12 * std::max(scale, 1.0);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (std::abs(a(piv, col)) < tol) throw DetectionError("rank-deficient channel");
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(piv, c), a(col, c));
            for (std::size_t c = 0; c < m; ++c) std::swap(b(piv, c), b(col, c));
        }
        const cplx inv = 1.0 / a(col, col);
        for (std::size_t c = 0; c < n; ++c) a(col, c) *= inv;
        for (std::size_t c = 0; c < m; ++c) b(col, c) *= inv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const cplx f = a(r, col);
            if (f == cplx{0.0, 0.0}) continue;
            for (std::size_t c = 0; c < n; ++c) a(r, c) -= f * a(col, c);
            for (std::size_t c = 0; c < m; ++c) b(r, c) -= f * b(col, c);
        }
    }
    return b;
}

namespace {

int zf_map(const MatC& pinv, const VecC& y, const SymbolBook& book) {
    const VecC x = matvec(pinv, y);
    int row = 0;
    for (int u = 0; u < book.config.num_users; ++u)
        row = row * book.config.mod_order + nearest_point(book.constellation, x[u]);
    return row;
}

VecC complex_from_signs(std::span<const std::int8_t> y) {
    const std::size_t nr = y.size() / 2;
    VecC out(nr);
    for (std::size_t i = 0; i < nr; ++i)
        out[i] = cplx{static_cast<double>(y[i]), static_cast<double>(y[nr + i])};
    return out;
}

}  // namespace

DetectionResult zf_detect_unquantized(const VecC& y, const ChannelMatrix& h,
                                      const SymbolBook& book, const Constellation&) {
    if (y.size() != h.complex_form.rows())
        throw std::invalid_argument("zf_detect: observation dimension mismatch");
    const int idx = zf_map(pseudo_inverse(h.complex_form), y, book);
    return make_result(idx, 0.0, false, book);
}

DetectionResult zf_detect(const QuantizedObservation& y, const ChannelMatrix& h,
                          const SymbolBook& book, const Constellation& constellation) {
    return zf_detect_unquantized(complex_from_signs(std::span<const std::int8_t>(y.values)), h,
                                 book, constellation);
}

ZfDetector::ZfDetector(const ChannelMatrix& h, const SymbolBook& book)
    : pinv_(pseudo_inverse(h.complex_form)), book_(&book) {}

int ZfDetector::detect(std::span<const std::int8_t> y) const {
    return zf_map(pinv_, complex_from_signs(y), *book_);
}

}  // namespace onebit
