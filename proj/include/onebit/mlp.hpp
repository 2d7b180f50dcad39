#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "onebit/likelihood.hpp"
#include "onebit/matrix.hpp"
#include "onebit/rng.hpp"

namespace onebit {

// Fully connected network with rectified-linear hidden layers and a scalar
// affine output. weights[l] is (out x in) row-major.
struct MlpParams {
    std::vector<MatR> weights;
    std::vector<VecR> biases;

    int depth() const { return static_cast<int>(weights.size()); }
    int input_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.front().cols()); }
    void check_shapes() const;
};

// He-initialized network; layer_sizes = {input, hidden..., 1}.
MlpParams make_mlp(const std::vector<int>& layer_sizes, RandomStream& rng);

// Scalar output (the SNR estimate, in dB, for this project's use).
double mlp_forward(const MlpParams& params, std::span<const double> features);

// Gradient of 0.5*(output - target)^2 with respect to every parameter,
// accumulated into grads (same shapes as params). Returns the squared error.
struct MlpGrads {
    std::vector<MatR> weights;
    std::vector<VecR> biases;
    explicit MlpGrads(const MlpParams& params);
    void zero();
};
double mlp_backprop(const MlpParams& params, std::span<const double> features, double target,
                    MlpGrads& grads);

// One feature/label pair: per-antenna +1 frequencies over a training block
// and the true SNR in dB.
struct SnrSample {
    VecR features;
    double label_db = 0.0;
};

struct TrainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainHyperParams {
    std::vector<int> hidden_sizes = {64, 64};
    int epochs = 120;
    int batch_size = 128;
    double learning_rate = 3e-3;
    double validation_fraction = 0.15;
    std::uint64_t seed = 1;
};

// Mini-batch training on mean squared error with per-parameter adaptive step
// sizes; keeps the parameters of the best validation epoch. Throws TrainError
// if the loss turns non-finite.
MlpParams mlp_train(const std::vector<SnrSample>& dataset, const TrainHyperParams& hp);

// Mean squared error over a dataset.
double mlp_mse(const MlpParams& params, std::span<const SnrSample> dataset);

// Dataset generation: for each grid SNR, draw a fresh Rayleigh channel and a
// random symbol vector, observe one training block under the incremental
// dithering schedule in `train`, and use the block's per-antenna +1
// frequencies as features with the grid SNR (dB) as label.
std::vector<SnrSample> generate_snr_dataset(const SystemConfig& config_template,
                                            const TrainConfig& train,
                                            const std::vector<double>& snr_grid_db,
                                            int samples_per_point, RandomStream& rng);

// N0 estimate from the network's dB output: rho / 10^(gamma_db/10).
double estimate_noise_power(const MlpParams& params, std::span<const double> features,
                            double transmit_power);

// Flat text serialization: header with layer sizes, then row-major weights
// and biases per layer, full precision.
void save_mlp(const MlpParams& params, const std::string& path);
MlpParams load_mlp(const std::string& path);

}  // namespace onebit
