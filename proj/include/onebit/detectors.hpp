#pragma once

#include <span>

#include "onebit/channel.hpp"
#include "onebit/likelihood.hpp"
#include "onebit/symbol_book.hpp"

namespace onebit {

struct DetectionResult {
    int symbol_index = 0;  // 0-based row of the symbol book
    double log_likelihood = 0.0;
    VecC per_user_symbols;
    bool degenerate = false;  // every candidate scored -inf
};

// Log-domain likelihood scores for every (symbol, antenna) pair; the common
// precomputed form the detectors and the Monte Carlo harness share.
struct ScoreTable {
    MatR log_plus;
    MatR log_minus;
};

// Effective channels psi(k,i) = sqrt(2 rho / N0) h_i^T s_k.
MatR effective_channels(const ChannelMatrix& h, const SymbolBook& book,
                        const SystemConfig& config);

ScoreTable csi_score_table(const ChannelMatrix& h, const SymbolBook& book,
                           const SystemConfig& config);

inline ScoreTable learned_score_table(const LikelihoodTable& t) {
    return ScoreTable{t.log_p_plus, t.log_p_minus};
}

// argmax_k sum_i score(k, i, y_i); ties and the all--inf case resolve to the
// lowest index (degenerate flag set in the latter case).
int detect_index(std::span<const std::int8_t> y, const ScoreTable& scores,
                 double* best_score = nullptr, bool* degenerate = nullptr);

// Optimal one-bit ML with perfect CSI: argmax_k sum_i log Phi(y_i psi(k,i)).
DetectionResult ml_detect_csi(const QuantizedObservation& y, const ChannelMatrix& h,
                              const SymbolBook& book, const SystemConfig& config);

// ML over a learned table: sum_i log p(k,i)^(y_i). Zero probabilities score
// -inf (a naive table's failure mode is preserved, not patched).
DetectionResult ml_detect_learned(const QuantizedObservation& y, const LikelihoodTable& table,
                                  const SymbolBook& book);

// One-bit zero-forcing with perfect CSI: pseudo-inverse applied to the +-1
// observation (no amplitude correction), then per-user nearest-point mapping.
DetectionResult zf_detect(const QuantizedObservation& y, const ChannelMatrix& h,
                          const SymbolBook& book, const Constellation& constellation);

// ZF core on an unquantized complex receive vector (noise-free test hook).
DetectionResult zf_detect_unquantized(const VecC& y, const ChannelMatrix& h,
                                      const SymbolBook& book, const Constellation& constellation);

// Moore-Penrose pseudo-inverse (H^H H)^{-1} H^H of a tall complex matrix.
// Throws DetectionError if the normal matrix is numerically singular.
MatC pseudo_inverse(const MatC& h);

// Precomputed ZF detector for repeated use on one channel.
class ZfDetector {
public:
    ZfDetector(const ChannelMatrix& h, const SymbolBook& book);
    int detect(std::span<const std::int8_t> y) const;  // returns the book row

private:
    MatC pinv_;
    const SymbolBook* book_;
};

DetectionResult make_result(int index, double score, bool degenerate, const SymbolBook& book);

}  // namespace onebit
