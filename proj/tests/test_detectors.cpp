#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "onebit/detectors.hpp"
#include "onebit/gaussian.hpp"

using namespace onebit;

namespace {

SystemConfig make_config(int nr, int nu, int m, double snr_db) {
    SystemConfig c;
    c.num_rx_antennas = nr;
    c.num_users = nu;
    c.mod_order = m;
    return c.at_snr_db(snr_db);
}

LikelihoodTable table_from_probs(const MatR& p) {
    LikelihoodTable t;
    t.p_plus = p;
    t.log_p_plus = MatR(p.rows(), p.cols());
    t.log_p_minus = MatR(p.rows(), p.cols());
    for (std::size_t k = 0; k < p.rows(); ++k)
        for (std::size_t i = 0; i < p.cols(); ++i) {
            t.log_p_plus(k, i) = std::log(p(k, i));
            t.log_p_minus(k, i) = std::log(1.0 - p(k, i));
        }
    return t;
}

// true-likelihood table Phi(psi) with log tails taken from psi directly
LikelihoodTable table_from_psi(const MatR& psi) {
    LikelihoodTable t;
    t.p_plus = MatR(psi.rows(), psi.cols());
    t.log_p_plus = MatR(psi.rows(), psi.cols());
    t.log_p_minus = MatR(psi.rows(), psi.cols());
    for (std::size_t k = 0; k < psi.rows(); ++k)
        for (std::size_t i = 0; i < psi.cols(); ++i) {
            t.p_plus(k, i) = std_normal_cdf(psi(k, i));
            t.log_p_plus(k, i) = log_std_normal_cdf(psi(k, i));
            t.log_p_minus(k, i) = log_std_normal_cdf(-psi(k, i));
        }
    return t;
}

QuantizedObservation obs_from_bits(unsigned bits, int dim) {
    QuantizedObservation y;
    for (int i = 0; i < dim; ++i)
        y.values.push_back((bits >> i) & 1u ? std::int8_t{1} : std::int8_t{-1});
    return y;
}

}  // namespace

TEST_CASE("single-candidate book always detects index 0") {
    const SystemConfig config = make_config(2, 1, 4, 10.0);
    SymbolBook book = enumerate_symbol_book(config);
    // truncate to one candidate
    book.count = 1;
    MatR p(1, 4, 0.3);
    const LikelihoodTable t = table_from_probs(p);
    for (unsigned bits = 0; bits < 16; ++bits) {
        const DetectionResult r = ml_detect_learned(obs_from_bits(bits, 4), t, book);
        CHECK(r.symbol_index == 0);
        CHECK_FALSE(r.degenerate);
    }
}

TEST_CASE("csi ml: noise-free transmissions are recovered on a tiny instance") {
    const SystemConfig config = make_config(2, 1, 4, 20.0);
    const SymbolBook book = enumerate_symbol_book(config);
    RandomStream rng = RandomStream::derive(44, 1);
    const ChannelMatrix h = draw_rayleigh_channel(config, rng);
    for (int k = 0; k < book.count; ++k) {
        const VecR s(book.vectors_real.row_ptr(k), book.vectors_real.row_ptr(k) + 2);
        const QuantizedObservation y = one_bit_quantize(synthesize_noiseless(h, s, config));
        const DetectionResult r = ml_detect_csi(y, h, book, config);
        CHECK(r.symbol_index == k);
        CHECK(r.per_user_symbols[0] == book.vectors_complex(k, 0));
    }
}

TEST_CASE("csi ml: log-domain argmax equals the direct product argmax") {
    const SystemConfig config = make_config(2, 1, 4, 5.0);
    const SymbolBook book = enumerate_symbol_book(config);
    for (int rep = 0; rep < 50; ++rep) {
        RandomStream rng = RandomStream::derive(1000, rep);
        const ChannelMatrix h = draw_rayleigh_channel(config, rng);
        const MatR psi = effective_channels(h, book, config);
        const QuantizedObservation y = obs_from_bits(static_cast<unsigned>(rng.integer(16)), 4);

        int best = 0;
        double best_prod = -1.0;
        for (int k = 0; k < book.count; ++k) {
            double prod = 1.0;
            for (int i = 0; i < 4; ++i)
                prod *= std_normal_cdf(static_cast<double>(y.values[i]) * psi(k, i));
            if (prod > best_prod) {
                best_prod = prod;
                best = k;
            }
        }
        CHECK(ml_detect_csi(y, h, book, config).symbol_index == best);
    }
}

TEST_CASE("learned ml: picks the agreeing row and avoids zero-probability rows") {
    const SystemConfig config = make_config(2, 1, 4, 10.0);
    const SymbolBook book = enumerate_symbol_book(config);
    const QuantizedObservation y = obs_from_bits(0b1010, 4);

    MatR p(4, 4, 0.5);
    for (int i = 0; i < 4; ++i) p(2, i) = y.values[i] > 0 ? 0.9 : 0.1;
    const DetectionResult agree = ml_detect_learned(y, table_from_probs(p), book);
    CHECK(agree.symbol_index == 2);
    CHECK_FALSE(agree.degenerate);

    // a row with a zero matching an observed sign scores -inf and loses to
    // any finite row
    MatR pz(4, 4, 0.01);
    for (int i = 0; i < 4; ++i) pz(0, i) = y.values[i] > 0 ? 1.0 : 0.0;  // perfect but hard
    pz(0, 3) = y.values[3] > 0 ? 0.0 : 1.0;                              // one fatal zero
    const DetectionResult r = ml_detect_learned(y, table_from_probs(pz), book);
    CHECK(r.symbol_index != 0);
    CHECK(std::isfinite(r.log_likelihood));
}

TEST_CASE("learned ml: all-equal table ties to the first index") {
    const SystemConfig config = make_config(2, 1, 4, 10.0);
    const SymbolBook book = enumerate_symbol_book(config);
    const LikelihoodTable t = table_from_probs(MatR(4, 4, 0.5));
    const DetectionResult r = ml_detect_learned(obs_from_bits(0b0110, 4), t, book);
    CHECK(r.symbol_index == 0);
    CHECK_FALSE(r.degenerate);
}

TEST_CASE("learned ml: all -inf scores return the first index with the degenerate flag") {
    const SystemConfig config = make_config(2, 1, 4, 10.0);
    const SymbolBook book = enumerate_symbol_book(config);
    const QuantizedObservation y = obs_from_bits(0b1111, 4);
    const LikelihoodTable t = table_from_probs(MatR(4, 4, 0.0));  // +1 impossible everywhere
    const DetectionResult r = ml_detect_learned(y, t, book);
    CHECK(r.symbol_index == 0);
    CHECK(r.degenerate);
}

TEST_CASE("csi ml and learned ml agree with the true table installed (exhaustive)") {
    const SystemConfig config = make_config(2, 1, 4, 10.0);
    const SymbolBook book = enumerate_symbol_book(config);
    RandomStream rng = RandomStream::derive(7, 3);
    const ChannelMatrix h = draw_rayleigh_channel(config, rng);
    const LikelihoodTable truth = table_from_psi(effective_channels(h, book, config));

    for (unsigned bits = 0; bits < 16; ++bits) {
        const QuantizedObservation y = obs_from_bits(bits, 4);
        const int a = ml_detect_csi(y, h, book, config).symbol_index;
        const int b = ml_detect_learned(y, truth, book).symbol_index;
        CHECK(a == b);
    }
}

TEST_CASE("scores are invariant to a common positive likelihood scale") {
    const SystemConfig config = make_config(2, 1, 4, 10.0);
    const SymbolBook book = enumerate_symbol_book(config);
    RandomStream rng = RandomStream::derive(8, 1);
    const ChannelMatrix h = draw_rayleigh_channel(config, rng);
    LikelihoodTable t = table_from_psi(effective_channels(h, book, config));

    const QuantizedObservation y = obs_from_bits(0b0101, 4);
    const int before = ml_detect_learned(y, t, book).symbol_index;
    // scaling every likelihood by c > 0 shifts every log score by log c
    const double log_c = 3.7;
    for (auto& v : t.log_p_plus.data()) v += log_c;
    for (auto& v : t.log_p_minus.data()) v += log_c;
    CHECK(ml_detect_learned(y, t, book).symbol_index == before);
}

TEST_CASE("zf: noise-free unquantized input is recovered exactly") {
    const SystemConfig config = make_config(4, 2, 4, 10.0);
    const SymbolBook book = enumerate_symbol_book(config);
    RandomStream rng = RandomStream::derive(9, 9);
    const ChannelMatrix h = draw_rayleigh_channel(config, rng);
    for (int k = 0; k < book.count; ++k) {
        VecC s(book.vectors_complex.row_ptr(k), book.vectors_complex.row_ptr(k) + 2);
        const VecC y = matvec(h.complex_form, s);
        const DetectionResult r = zf_detect_unquantized(y, h, book, book.constellation);
        CHECK(r.symbol_index == k);
    }
}

TEST_CASE("zf: single user matched-filter direction") {
    const SystemConfig config = make_config(4, 1, 4, 10.0);
    const SymbolBook book = enumerate_symbol_book(config);
    RandomStream rng = RandomStream::derive(10, 2);
    const ChannelMatrix h = draw_rayleigh_channel(config, rng);
    for (int k = 0; k < 4; ++k) {
        VecC s{book.vectors_complex(k, 0)};
        VecC y = matvec(h.complex_form, s);
        for (auto& v : y) v *= 2.5;  // positive scaling cannot change the decision
        CHECK(zf_detect_unquantized(y, h, book, book.constellation).symbol_index == k);
    }
}

TEST_CASE("zf: quantized path and rank deficiency") {
    const SystemConfig config = make_config(8, 2, 4, 20.0);
    const SymbolBook book = enumerate_symbol_book(config);
    RandomStream rng = RandomStream::derive(11, 5);
    const ChannelMatrix h = draw_rayleigh_channel(config, rng);

    const VecR s(book.vectors_real.row_ptr(7), book.vectors_real.row_ptr(7) + 4);
    RandomStream noise = RandomStream::derive(11, 6);
    const QuantizedObservation y =
        one_bit_quantize(synthesize_received(h, s, config, {}, noise));
    const DetectionResult r = zf_detect(y, h, book, book.constellation);
    CHECK(r.symbol_index >= 0);
    CHECK(r.symbol_index < book.count);

    ChannelMatrix bad = h;
    for (std::size_t i = 0; i < bad.complex_form.rows(); ++i)
        bad.complex_form(i, 1) = bad.complex_form(i, 0);
    CHECK_THROWS_AS(zf_detect(y, bad, book, book.constellation), DetectionError);
}

TEST_CASE("zf detector class matches the free function") {
    const SystemConfig config = make_config(8, 2, 4, 10.0);
    const SymbolBook book = enumerate_symbol_book(config);
    RandomStream rng = RandomStream::derive(12, 1);
    const ChannelMatrix h = draw_rayleigh_channel(config, rng);
    const ZfDetector zf(h, book);
    RandomStream noise = RandomStream::derive(12, 2);
    for (int rep = 0; rep < 20; ++rep) {
        const int k = static_cast<int>(noise.integer(book.count));
        const VecR s(book.vectors_real.row_ptr(k), book.vectors_real.row_ptr(k) + 4);
        const QuantizedObservation y =
            one_bit_quantize(synthesize_received(h, s, config, {}, noise));
        CHECK(zf.detect(y.values) == zf_detect(y, h, book, book.constellation).symbol_index);
    }
}

TEST_CASE("detection is deterministic") {
    const SystemConfig config = make_config(4, 2, 4, 5.0);
    const SymbolBook book = enumerate_symbol_book(config);
    RandomStream rng = RandomStream::derive(13, 1);
    const ChannelMatrix h = draw_rayleigh_channel(config, rng);
    const QuantizedObservation y = obs_from_bits(0b10110100, 8);
    const DetectionResult a = ml_detect_csi(y, h, book, config);
    const DetectionResult b = ml_detect_csi(y, h, book, config);
    CHECK(a.symbol_index == b.symbol_index);
    CHECK(a.log_likelihood == b.log_likelihood);
}
