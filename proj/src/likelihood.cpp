#include "onebit/likelihood.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "onebit/gaussian.hpp"

namespace onebit {

void TrainConfig::validate() const {
    if (reps_per_symbol <= 0) throw ConfigError("reps_per_symbol must be positive");
    if (num_subblocks <= 0) throw ConfigError("num_subblocks must be positive");
    if (reps_per_symbol % num_subblocks != 0)
        throw ConfigError("reps_per_symbol must be a multiple of num_subblocks");
    if (dither_step < 0.0 || initial_dither_var < 0.0)
        throw ConfigError("dither variances must be nonnegative");
    if (!(noise_power_for_denoise > 0.0))
        throw ConfigError("noise_power_for_denoise must be positive");
    if (clamp_epsilon && !(*clamp_epsilon > 0.0 && *clamp_epsilon < 0.5))
        throw ConfigError("clamp_epsilon must lie in (0, 0.5)");
}

double empirical_plus_frequency(std::span<const std::int8_t> observations) {
    if (observations.empty())
        throw std::invalid_argument("empirical_plus_frequency: empty sequence");
    long plus = 0;
    for (std::int8_t v : observations) plus += (v > 0);
    return static_cast<double>(plus) / static_cast<double>(observations.size());
}

DenoiseResult denoise(double p_hat, double dither_var, double noise_power, double clamp_epsilon) {
    const double clamped = std::clamp(p_hat, clamp_epsilon, 1.0 - clamp_epsilon);
    const double factor = std::sqrt(1.0 + dither_var / noise_power);
    const double psi = factor * std_normal_quantile(clamped);
    // keep the probability view strictly inside (0,1) even where Phi rounds to
    // 0 or 1; detectors score through the log-domain tails of psi instead
    const double refined = std::clamp(std_normal_cdf(psi), std::numeric_limits<double>::min(),
                                      1.0 - std::numeric_limits<double>::epsilon() / 2.0);
    return DenoiseResult{psi, refined};
}

namespace {

// Observes one symbol's N_tr training slots. Per slot the stream supplies
// 2Nr channel-noise gaussians followed by 2Nr dither gaussians (always drawn,
// scaled by the current per-antenna deviation, so fixed and incremental
// schedules consume identically). With `adaptive` set, the per-antenna
// variance grows by train.dither_step after each saturated sub-block.
void observe_block(const VecR& clean_row, const SystemConfig& config, const TrainConfig& train,
                   bool adaptive, double fixed_var, RandomStream& rng, TrainingBlock& block,
                   DitherState& state) {
    const int dim = config.real_dim();
    const int n_blocks = adaptive ? train.num_subblocks : 1;
    const int len = train.reps_per_symbol / n_blocks;
    const double noise_sd = std::sqrt(config.noise_power / 2.0);

    block.observations = Matrix<std::int8_t>(train.reps_per_symbol, dim);
    block.per_subblock_variances = MatR(n_blocks, dim);
    state.variances.assign(dim, adaptive ? train.initial_dither_var : fixed_var);
    state.indicators.assign(dim, 1);

    VecR dither_sd(dim);
    VecR r(dim);
    for (int n = 0; n < n_blocks; ++n) {
        for (int i = 0; i < dim; ++i) {
            block.per_subblock_variances(n, i) = state.variances[i];
            dither_sd[i] = std::sqrt(state.variances[i]);
        }
        for (int t = 0; t < len; ++t) {
            std::int8_t* row = block.observations.row_ptr(n * len + t);
            for (int i = 0; i < dim; ++i) r[i] = clean_row[i] + noise_sd * rng.gaussian();
            for (int i = 0; i < dim; ++i) r[i] += dither_sd[i] * rng.gaussian();
            for (int i = 0; i < dim; ++i) row[i] = r[i] >= 0.0 ? std::int8_t{1} : std::int8_t{-1};
        }
        if (adaptive) {
            for (int i = 0; i < dim; ++i) {
                int plus = 0;
                for (int t = 0; t < len; ++t) plus += (block.observations(n * len + t, i) > 0);
                const bool saturated = (plus == 0 || plus == len);
                state.indicators[i] = saturated ? 1 : 0;
                if (saturated) state.variances[i] += train.dither_step;
            }
        }
    }
}

MatR raw_frequencies(const std::vector<TrainingBlock>& blocks, int dim) {
    MatR raw(blocks.size(), dim);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const auto& obs = blocks[k].observations;
        for (int i = 0; i < dim; ++i) {
            long plus = 0;
            for (std::size_t t = 0; t < obs.rows(); ++t) plus += (obs(t, i) > 0);
            raw(k, i) = static_cast<double>(plus) / static_cast<double>(obs.rows());
        }
    }
    return raw;
}

double effective_epsilon(const TrainConfig& train, int samples) {
    return train.clamp_epsilon.value_or(0.5 / static_cast<double>(samples));
}

}  // namespace

LearnResult learn_naive(const SymbolBook& book, const ChannelMatrix& h, const SystemConfig& config,
                        const TrainConfig& train, RandomStream& rng) {
    train.validate();
    const int dim = config.real_dim();
    std::vector<TrainingBlock> blocks(book.count);
    DitherState state;
    for (int k = 0; k < book.count; ++k) {
        const VecR clean = synthesize_noiseless(h, VecR(book.vectors_real.row_ptr(k),
                                                        book.vectors_real.row_ptr(k) + 2 * config.num_users),
                                                config);
        observe_block(clean, config, train, /*adaptive=*/false, /*fixed_var=*/0.0, rng, blocks[k],
                      state);
    }
    LearnResult out;
    out.raw_plus_freq = raw_frequencies(blocks, dim);
    out.table.train = train;
    out.table.p_plus = out.raw_plus_freq;
    out.table.log_p_plus = MatR(book.count, dim);
    out.table.log_p_minus = MatR(book.count, dim);
    for (int k = 0; k < book.count; ++k) {
        for (int i = 0; i < dim; ++i) {
            const double p = out.table.p_plus(k, i);
            out.table.log_p_plus(k, i) = std::log(p);        // -inf at 0: kept
            out.table.log_p_minus(k, i) = std::log(1.0 - p); // -inf at 1: kept
        }
    }
    return out;
}

LearnResult learn_dl(const SymbolBook& book, const ChannelMatrix& h, const SystemConfig& config,
                     const TrainConfig& train, double fixed_dither_var, RandomStream& rng) {
    train.validate();
    if (fixed_dither_var < 0.0) throw ConfigError("learn_dl: negative dither variance");
    const int dim = config.real_dim();
    const double eps = effective_epsilon(train, train.reps_per_symbol);

    std::vector<TrainingBlock> blocks(book.count);
    DitherState state;
    LearnResult out;
    out.table.train = train;
    out.table.p_plus = MatR(book.count, dim);
    out.table.log_p_plus = MatR(book.count, dim);
    out.table.log_p_minus = MatR(book.count, dim);
    for (int k = 0; k < book.count; ++k) {
        const VecR clean = synthesize_noiseless(h, VecR(book.vectors_real.row_ptr(k),
                                                        book.vectors_real.row_ptr(k) + 2 * config.num_users),
                                                config);
        observe_block(clean, config, train, /*adaptive=*/false, fixed_dither_var, rng, blocks[k],
                      state);
    }
    out.raw_plus_freq = raw_frequencies(blocks, dim);
    for (int k = 0; k < book.count; ++k) {
        for (int i = 0; i < dim; ++i) {
            const auto dn = denoise(out.raw_plus_freq(k, i), 2.0 * fixed_dither_var,
                                    train.noise_power_for_denoise, eps);
            out.table.p_plus(k, i) = dn.refined;
            out.table.log_p_plus(k, i) = log_std_normal_cdf(dn.effective_channel);
            out.table.log_p_minus(k, i) = log_std_normal_cdf(-dn.effective_channel);
        }
    }
    return out;
}

IdlTraining simulate_idl_training(const SymbolBook& book, const ChannelMatrix& h,
                                  const SystemConfig& config, const TrainConfig& train,
                                  RandomStream& rng) {
    train.validate();
    IdlTraining tr;
    tr.blocks.resize(book.count);
    tr.final_dither.resize(book.count);
    for (int k = 0; k < book.count; ++k) {
        const VecR clean = synthesize_noiseless(h, VecR(book.vectors_real.row_ptr(k),
                                                        book.vectors_real.row_ptr(k) + 2 * config.num_users),
                                                config);
        observe_block(clean, config, train, /*adaptive=*/true, 0.0, rng, tr.blocks[k],
                      tr.final_dither[k]);
    }
    return tr;
}

LearnResult denoise_idl_training(const IdlTraining& training, const TrainConfig& train) {
    train.validate();
    const int n_blocks = train.num_subblocks;
    const int len = train.subblock_len();
    const double eps = effective_epsilon(train, len);
    const int count = static_cast<int>(training.blocks.size());
    const int dim = count > 0 ? static_cast<int>(training.blocks[0].observations.cols()) : 0;

    LearnResult out;
    out.table.train = train;
    out.table.p_plus = MatR(count, dim);
    out.table.log_p_plus = MatR(count, dim);
    out.table.log_p_minus = MatR(count, dim);
    out.raw_plus_freq = raw_frequencies(training.blocks, dim);
    out.final_dither = training.final_dither;

    VecR lp(n_blocks), lm(n_blocks);
    for (int k = 0; k < count; ++k) {
        const TrainingBlock& block = training.blocks[k];
        for (int i = 0; i < dim; ++i) {
            double p_sum = 0.0;
            for (int n = 0; n < n_blocks; ++n) {
                long plus = 0;
                for (int t = 0; t < len; ++t) plus += (block.observations(n * len + t, i) > 0);
                const double freq = static_cast<double>(plus) / static_cast<double>(len);
                const auto dn = denoise(freq, 2.0 * block.per_subblock_variances(n, i),
                                        train.noise_power_for_denoise, eps);
                p_sum += dn.refined / n_blocks;
                lp[n] = log_std_normal_cdf(dn.effective_channel);
                lm[n] = log_std_normal_cdf(-dn.effective_channel);
            }
            out.table.p_plus(k, i) = p_sum;
            // log of the mean of the per-sub-block probabilities, in log domain
            auto log_mean = [n_blocks](const VecR& v) {
                const double m = *std::max_element(v.begin(), v.end());
                double s = 0.0;
                for (double x : v) s += std::exp(x - m);
                return m + std::log(s) - std::log(static_cast<double>(n_blocks));
            };
            out.table.log_p_plus(k, i) = log_mean(lp);
            out.table.log_p_minus(k, i) = log_mean(lm);
        }
    }
    return out;
}

LearnResult learn_idl(const SymbolBook& book, const ChannelMatrix& h, const SystemConfig& config,
                      const TrainConfig& train, RandomStream& rng) {
    return denoise_idl_training(simulate_idl_training(book, h, config, train, rng), train);
}

TrainingBlock observe_idl_block(const VecR& clean_row, const SystemConfig& config,
                                const TrainConfig& train, RandomStream& rng,
                                DitherState* final_state) {
    train.validate();
    TrainingBlock block;
    DitherState state;
    observe_block(clean_row, config, train, /*adaptive=*/true, 0.0, rng, block, state);
    if (final_state) *final_state = std::move(state);
    return block;
}

double count_undertrained(const MatR& raw_plus_freq) {
    if (raw_plus_freq.rows() == 0) return 0.0;
    long total = 0;
    for (std::size_t k = 0; k < raw_plus_freq.rows(); ++k)
        for (std::size_t i = 0; i < raw_plus_freq.cols(); ++i) {
            const double f = raw_plus_freq(k, i);
            total += (f == 0.0 || f == 1.0);
        }
    return static_cast<double>(total) / static_cast<double>(raw_plus_freq.rows());
}

VecR block_plus_frequencies(const TrainingBlock& block) {
    const auto& obs = block.observations;
    VecR f(obs.cols(), 0.0);
    for (std::size_t i = 0; i < obs.cols(); ++i) {
        long plus = 0;
        for (std::size_t t = 0; t < obs.rows(); ++t) plus += (obs(t, i) > 0);
        f[i] = static_cast<double>(plus) / static_cast<double>(obs.rows());
    }
    return f;
}

void write_likelihood_csv(const LikelihoodTable& table, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open " + path + " for writing");
    for (std::size_t k = 0; k < table.p_plus.rows(); ++k) {
        for (std::size_t i = 0; i < table.p_plus.cols(); ++i)
            std::fprintf(f, i == 0 ? "%.17g" : ",%.17g", table.p_plus(k, i));
        std::fputc('\n', f);
    }
    std::fclose(f);
}

}  // namespace onebit
