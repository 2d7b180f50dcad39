#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "onebit/channel.hpp"
#include "onebit/symbol_book.hpp"

namespace onebit {

// Training-phase configuration. Dither variances (step, initial value) are
// per real receive component, i.e. the diagonal entries of the dither
// covariance on the 2Nr expansion.
struct TrainConfig {
    int reps_per_symbol = 30;  // N_tr, pilot repetitions per symbol vector
    int num_subblocks = 3;     // N, must divide N_tr (iDL only)
    double dither_step = 0.5;  // variance increment for saturated antennas
    double initial_dither_var = 0.0;
    double noise_power_for_denoise = 1.0;  // N0 fed to the de-noising inversion
    // Clamp applied to empirical frequencies before the probit inversion.
    // Unset: half a count at the estimator's resolution, 1/(2 * samples).
    std::optional<double> clamp_epsilon;

    int subblock_len() const { return reps_per_symbol / num_subblocks; }
    void validate() const;
};

// Learned per-antenna, per-symbol likelihood table. p_plus(k,i) estimates
// P(y_i = +1 | symbol k); the -1 probability is the complement, stored
// implicitly. log_p_plus / log_p_minus are the log-domain scores consumed by
// the detectors; for de-noised tables they are derived from the effective
// channel directly so that extreme tails stay finite instead of rounding to
// log(0) or log(1).
struct LikelihoodTable {
    MatR p_plus;
    MatR log_p_plus;
    MatR log_p_minus;
    TrainConfig train;
};

// Per-antenna dithering variances and update indicators of Algorithm-style
// incremental training.
struct DitherState {
    VecR variances;                        // sigma_{d,i}^2, per real component
    std::vector<std::uint8_t> indicators;  // I_i in {0,1}
};

// N_tr quantized training observations of one symbol, plus the dither
// variance that was active at each (sub-block, antenna) when it was observed.
// Sub-block n covers rows [n*len, (n+1)*len).
struct TrainingBlock {
    Matrix<std::int8_t> observations;  // N_tr x 2Nr, entries +-1
    MatR per_subblock_variances;       // N x 2Nr
};

// Fraction of entries equal to +1. Throws on an empty sequence.
double empirical_plus_frequency(std::span<const std::int8_t> observations);

struct DenoiseResult {
    double effective_channel;  // psi_hat
    double refined;            // Phi(psi_hat)
};

// De-noising inversion: clamp p_hat into [eps, 1-eps], then
// psi_hat = sqrt(1 + dither_var/noise_power) * quantile(p_hat) and
// refined = Phi(psi_hat). `dither_var` uses the same complex-domain power
// convention as noise_power: it is twice the per-real-component variance
// that was injected before quantization.
DenoiseResult denoise(double p_hat, double dither_var, double noise_power, double clamp_epsilon);

// Result of a learning pass: the table, the pre-clamp raw +1 frequencies over
// each symbol's full N_tr observations (what the undertrained count inspects),
// and the final per-symbol dither states (incremental learning only).
struct LearnResult {
    LikelihoodTable table;
    MatR raw_plus_freq;
    std::vector<DitherState> final_dither;
};

// Empirical frequencies from undithered observations; zeros and ones are kept
// as-is, so log scores may be -inf. num_subblocks and the dither settings in
// `train` are ignored.
LearnResult learn_naive(const SymbolBook& book, const ChannelMatrix& h, const SystemConfig& config,
                        const TrainConfig& train, RandomStream& rng);

// Fixed-variance dither-and-learning: each antenna is dithered with constant
// per-component variance fixed_dither_var for all N_tr slots, then the whole
// block is de-noised at once.
LearnResult learn_dl(const SymbolBook& book, const ChannelMatrix& h, const SystemConfig& config,
                     const TrainConfig& train, double fixed_dither_var, RandomStream& rng);

// Incremental dither-and-learning: per symbol, the variance starts at
// train.initial_dither_var, each of the N sub-blocks is observed and de-noised
// with the variance active at that time, and a saturated sub-block (all +1 or
// all -1 at an antenna) raises that antenna's variance by dither_step before
// the next sub-block. The table entry is the mean of the N refined
// probabilities.
LearnResult learn_idl(const SymbolBook& book, const ChannelMatrix& h, const SystemConfig& config,
                      const TrainConfig& train, RandomStream& rng);

// The two halves of learn_idl, split so a caller can inspect the raw blocks
// (e.g. to estimate the noise power) before the de-noising pass runs.
struct IdlTraining {
    std::vector<TrainingBlock> blocks;      // one per symbol
    std::vector<DitherState> final_dither;  // state after the last update
};
IdlTraining simulate_idl_training(const SymbolBook& book, const ChannelMatrix& h,
                                  const SystemConfig& config, const TrainConfig& train,
                                  RandomStream& rng);
LearnResult denoise_idl_training(const IdlTraining& training, const TrainConfig& train);

// One symbol's training block under the incremental dithering schedule
// (clean_row = the noise-free receive mean for that symbol).
TrainingBlock observe_idl_block(const VecR& clean_row, const SystemConfig& config,
                                const TrainConfig& train, RandomStream& rng,
                                DitherState* final_state = nullptr);

// Mean over symbols of the number of antennas whose raw empirical +1
// frequency is exactly 0 or 1.
double count_undertrained(const MatR& raw_plus_freq);

// Per-antenna +1 frequencies over a whole training block (the SNR-estimator
// feature vector).
VecR block_plus_frequencies(const TrainingBlock& block);

// Writes one row per symbol with 2Nr comma-separated p_plus probabilities.
void write_likelihood_csv(const LikelihoodTable& table, const std::string& path);

}  // namespace onebit
