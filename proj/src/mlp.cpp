#include "onebit/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "onebit/config.hpp"

namespace onebit {

void MlpParams::check_shapes() const {
    if (weights.empty() || weights.size() != biases.size())
        throw std::invalid_argument("mlp: empty or inconsistent parameter lists");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (biases[l].size() != weights[l].rows())
            throw std::invalid_argument("mlp: bias/weight shape mismatch");
        if (l > 0 && weights[l].cols() != weights[l - 1].rows())
            throw std::invalid_argument("mlp: layer chain dimension mismatch");
    }
    if (weights.back().rows() != 1)
        throw std::invalid_argument("mlp: output layer must be scalar");
}

MlpParams make_mlp(const std::vector<int>& layer_sizes, RandomStream& rng) {
    if (layer_sizes.size() < 2) throw std::invalid_argument("mlp: need at least two layer sizes");
    MlpParams p;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int in = layer_sizes[l], out = layer_sizes[l + 1];
        MatR w(out, in);
        const double sd = std::sqrt(2.0 / in);
        for (double& x : w.data()) x = sd * rng.gaussian();
        p.weights.push_back(std::move(w));
        p.biases.emplace_back(out, 0.0);
    }
    p.check_shapes();
    return p;
}

namespace {

// forward pass keeping pre-activations for backprop
struct ForwardTrace {
    std::vector<VecR> activations;  // x_0 .. x_{L-1} (post-nonlinearity)
    double output = 0.0;
};

ForwardTrace forward_trace(const MlpParams& p, std::span<const double> features) {
    if (features.size() != static_cast<std::size_t>(p.input_dim()))
        throw std::invalid_argument("mlp_forward: feature dimension mismatch");
    ForwardTrace tr;
    tr.activations.emplace_back(features.begin(), features.end());
    const int depth = p.depth();
    for (int l = 0; l < depth; ++l) {
        const MatR& w = p.weights[l];
        const VecR& x = tr.activations.back();
        VecR z(w.rows());
        for (std::size_t r = 0; r < w.rows(); ++r) {
            const double* row = w.row_ptr(r);
            double acc = p.biases[l][r];
            for (std::size_t c = 0; c < w.cols(); ++c) acc += row[c] * x[c];
            z[r] = acc;
        }
        if (l + 1 == depth) {
            tr.output = z[0];
        } else {
            for (double& v : z) v = std::max(v, 0.0);
            tr.activations.push_back(std::move(z));
        }
    }
    return tr;
}

}  // namespace

double mlp_forward(const MlpParams& params, std::span<const double> features) {
    return forward_trace(params, features).output;
}

MlpGrads::MlpGrads(const MlpParams& params) {
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        weights.emplace_back(params.weights[l].rows(), params.weights[l].cols());
        biases.emplace_back(params.biases[l].size(), 0.0);
    }
}

void MlpGrads::zero() {
    for (auto& w : weights) std::fill(w.data().begin(), w.data().end(), 0.0);
    for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

double mlp_backprop(const MlpParams& p, std::span<const double> features, double target,
                    MlpGrads& grads) {
    const ForwardTrace tr = forward_trace(p, features);
    const double err = tr.output - target;
    const int depth = p.depth();

    // delta of the current layer's outputs, starting from d(0.5 err^2)/d out
    VecR delta{err};
    for (int l = depth - 1; l >= 0; --l) {
        const VecR& x = tr.activations[l];
        MatR& gw = grads.weights[l];
        for (std::size_t r = 0; r < gw.rows(); ++r) {
            double* grow = gw.row_ptr(r);
            const double d = delta[r];
            grads.biases[l][r] += d;
            for (std::size_t c = 0; c < gw.cols(); ++c) grow[c] += d * x[c];
        }
        if (l == 0) break;
        const MatR& w = p.weights[l];
        VecR prev(w.cols(), 0.0);
        for (std::size_t r = 0; r < w.rows(); ++r) {
            const double* row = w.row_ptr(r);
            const double d = delta[r];
            for (std::size_t c = 0; c < w.cols(); ++c) prev[c] += d * row[c];
        }
        // derivative of the rectifier at the stored activation
        for (std::size_t c = 0; c < prev.size(); ++c)
            if (x[c] <= 0.0) prev[c] = 0.0;
        delta = std::move(prev);
    }
    return err * err;
}

double mlp_mse(const MlpParams& params, std::span<const SnrSample> dataset) {
    if (dataset.empty()) return 0.0;
    double acc = 0.0;
    for (const SnrSample& s : dataset) {
        const double e = mlp_forward(params, s.features) - s.label_db;
        acc += e * e;
    }
    return acc / static_cast<double>(dataset.size());
}

MlpParams mlp_train(const std::vector<SnrSample>& dataset, const TrainHyperParams& hp) {
    if (dataset.empty()) throw std::invalid_argument("mlp_train: empty dataset");
    const int input_dim = static_cast<int>(dataset.front().features.size());

    // labels are standardized for the optimizer; the affine de-normalization
    // is folded back into the output layer before returning
    double label_mean = 0.0;
    for (const SnrSample& s : dataset) label_mean += s.label_db;
    label_mean /= static_cast<double>(dataset.size());
    double label_var = 0.0;
    for (const SnrSample& s : dataset)
        label_var += (s.label_db - label_mean) * (s.label_db - label_mean);
    label_var /= static_cast<double>(dataset.size());
    const double label_scale = label_var > 1e-12 ? std::sqrt(label_var) : 1.0;

    std::vector<SnrSample> scaled = dataset;
    for (SnrSample& s : scaled) s.label_db = (s.label_db - label_mean) / label_scale;

    RandomStream rng = RandomStream::derive(hp.seed, 0x6d6c70u);
    std::vector<int> sizes;
    sizes.push_back(input_dim);
    for (int hsize : hp.hidden_sizes) sizes.push_back(hsize);
    sizes.push_back(1);
    MlpParams params = make_mlp(sizes, rng);

    // deterministic shuffle, then validation split from the tail
    std::vector<std::size_t> order(scaled.size());
    std::iota(order.begin(), order.end(), 0u);
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.integer(i)]);
    const std::size_t n_val =
        std::min(scaled.size() - 1,
                 static_cast<std::size_t>(hp.validation_fraction * scaled.size()));
    const std::size_t n_train = scaled.size() - n_val;
    std::vector<SnrSample> val;
    for (std::size_t i = n_train; i < scaled.size(); ++i) val.push_back(scaled[order[i]]);
    if (val.empty()) val.push_back(scaled[order[0]]);

    MlpGrads grads(params);
    // Adam state
    MlpGrads m1(params), m2(params);
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    long step = 0;

    // keeping the best validation epoch guarantees the returned parameters
    // never score worse than the initial ones
    double best_mse = mlp_mse(params, val);
    MlpParams best = params;

    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        for (std::size_t i = n_train; i > 1; --i)
            std::swap(order[i - 1], order[rng.integer(i)]);
        for (std::size_t start = 0; start < n_train; start += hp.batch_size) {
            const std::size_t stop = std::min(n_train, start + hp.batch_size);
            grads.zero();
            double batch_loss = 0.0;
            for (std::size_t i = start; i < stop; ++i) {
                const SnrSample& s = scaled[order[i]];
                batch_loss += mlp_backprop(params, s.features, s.label_db, grads);
            }
            if (!std::isfinite(batch_loss))
                throw TrainError("mlp_train: non-finite loss at epoch " + std::to_string(epoch));
            const double inv = 1.0 / static_cast<double>(stop - start);
            ++step;
            const double c1 = 1.0 - std::pow(beta1, double(step));
            const double c2 = 1.0 - std::pow(beta2, double(step));
            for (int l = 0; l < params.depth(); ++l) {
                auto update = [&](double& w, double& mm, double& vv, double g) {
                    g *= inv;
                    mm = beta1 * mm + (1.0 - beta1) * g;
                    vv = beta2 * vv + (1.0 - beta2) * g * g;
                    w -= hp.learning_rate * (mm / c1) / (std::sqrt(vv / c2) + adam_eps);
                };
                auto& w = params.weights[l].data();
                auto& gw = grads.weights[l].data();
                auto& mw = m1.weights[l].data();
                auto& vw = m2.weights[l].data();
                for (std::size_t j = 0; j < w.size(); ++j) update(w[j], mw[j], vw[j], gw[j]);
                for (std::size_t j = 0; j < params.biases[l].size(); ++j)
                    update(params.biases[l][j], m1.biases[l][j], m2.biases[l][j],
                           grads.biases[l][j]);
            }
        }
        const double mse = mlp_mse(params, val);
        if (!std::isfinite(mse))
            throw TrainError("mlp_train: non-finite validation loss at epoch " +
                             std::to_string(epoch));
        if (mse < best_mse) {
            best_mse = mse;
            best = params;
        }
    }
    // fold the label de-normalization into the affine output layer
    for (double& w : best.weights.back().data()) w *= label_scale;
    best.biases.back()[0] = best.biases.back()[0] * label_scale + label_mean;
    return best;
}

std::vector<SnrSample> generate_snr_dataset(const SystemConfig& config_template,
                                            const TrainConfig& train,
                                            const std::vector<double>& snr_grid_db,
                                            int samples_per_point, RandomStream& rng) {
    if (snr_grid_db.empty()) throw std::invalid_argument("generate_snr_dataset: empty grid");
    train.validate();
    const SymbolBook book = enumerate_symbol_book(config_template);
    std::vector<SnrSample> out;
    out.reserve(snr_grid_db.size() * samples_per_point);
    for (double db : snr_grid_db) {
        const SystemConfig config = config_template.at_snr_db(db);
        for (int s = 0; s < samples_per_point; ++s) {
            const ChannelMatrix h = draw_rayleigh_channel(config, rng);
            const int k = static_cast<int>(rng.integer(book.count));
            const VecR s_real(book.vectors_real.row_ptr(k),
                              book.vectors_real.row_ptr(k) + 2 * config.num_users);
            const VecR clean = synthesize_noiseless(h, s_real, config);
            const TrainingBlock block = observe_idl_block(clean, config, train, rng);
            out.push_back(SnrSample{block_plus_frequencies(block), db});
        }
    }
    return out;
}

double estimate_noise_power(const MlpParams& params, std::span<const double> features,
                            double transmit_power) {
    const double gamma_db = mlp_forward(params, features);
    return transmit_power / std::pow(10.0, gamma_db / 10.0);
}

void save_mlp(const MlpParams& params, const std::string& path) {
    params.check_shapes();
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open " + path + " for writing");
    std::fprintf(f, "mlp %d\n", params.depth());
    for (int l = 0; l < params.depth(); ++l)
        std::fprintf(f, "%zu %zu\n", params.weights[l].rows(), params.weights[l].cols());
    for (int l = 0; l < params.depth(); ++l) {
        const MatR& w = params.weights[l];
        for (std::size_t r = 0; r < w.rows(); ++r) {
            for (std::size_t c = 0; c < w.cols(); ++c)
                std::fprintf(f, c == 0 ? "%.17g" : " %.17g", w(r, c));
            std::fputc('\n', f);
        }
        for (std::size_t r = 0; r < params.biases[l].size(); ++r)
            std::fprintf(f, r == 0 ? "%.17g" : " %.17g", params.biases[l][r]);
        std::fputc('\n', f);
    }
    std::fclose(f);
}

MlpParams load_mlp(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "r");
    if (!f) throw IoError("cannot open " + path);
    char magic[8] = {};
    int depth = 0;
    if (std::fscanf(f, "%7s %d", magic, &depth) != 2 || std::string(magic) != "mlp" || depth <= 0) {
        std::fclose(f);
        throw IoError(path + ": not an mlp parameter file");
    }
    MlpParams p;
    std::vector<std::pair<std::size_t, std::size_t>> shapes(depth);
    for (auto& [r, c] : shapes) {
        if (std::fscanf(f, "%zu %zu", &r, &c) != 2) {
            std::fclose(f);
            throw IoError(path + ": truncated header");
        }
    }
    for (const auto& [rows, cols] : shapes) {
        MatR w(rows, cols);
        for (double& x : w.data())
            if (std::fscanf(f, "%lg", &x) != 1) {
                std::fclose(f);
                throw IoError(path + ": truncated weights");
            }
        VecR b(rows);
        for (double& x : b)
            if (std::fscanf(f, "%lg", &x) != 1) {
                std::fclose(f);
                throw IoError(path + ": truncated biases");
            }
        p.weights.push_back(std::move(w));
        p.biases.push_back(std::move(b));
    }
    std::fclose(f);
    p.check_shapes();
    return p;
}

}  // namespace onebit
