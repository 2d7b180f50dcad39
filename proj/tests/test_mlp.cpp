#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "onebit/mlp.hpp"

using namespace onebit;

namespace {

std::vector<SnrSample> random_dataset(int n, int dim, RandomStream& rng,
                                      double (*label)(const VecR&)) {
    std::vector<SnrSample> out;
    for (int i = 0; i < n; ++i) {
        VecR f(dim);
        for (double& v : f) v = rng.gaussian();
        out.push_back({f, label(f)});
    }
    return out;
}

}  // namespace

TEST_CASE("forward: zero weights give the output bias") {
    RandomStream rng(1);
    MlpParams p = make_mlp({6, 4, 1}, rng);
    for (auto& w : p.weights) std::fill(w.data().begin(), w.data().end(), 0.0);
    p.biases.back()[0] = 3.25;
    VecR x(6);
    for (double& v : x) v = rng.gaussian();
    CHECK(mlp_forward(p, x) == 3.25);
}

TEST_CASE("forward: a single affine layer is exact") {
    MlpParams p;
    p.weights.emplace_back(1, 3);
    p.weights[0](0, 0) = 0.5;
    p.weights[0](0, 1) = -2.0;
    p.weights[0](0, 2) = 4.0;
    p.biases.push_back({1.5});
    const VecR x{2.0, 1.0, 0.25};
    CHECK(mlp_forward(p, x) == doctest::Approx(0.5 * 2 - 2 + 1 + 1.5).epsilon(1e-15));
}

TEST_CASE("forward: dimension mismatch") {
    RandomStream rng(2);
    const MlpParams p = make_mlp({6, 4, 1}, rng);
    CHECK_THROWS_AS(mlp_forward(p, VecR(5, 0.0)), std::invalid_argument);
}

TEST_CASE("backprop gradients match central finite differences") {
    int points_checked = 0;
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        RandomStream rng(2000 + rep);
        MlpParams p = make_mlp({8, 5, 1}, rng);
        VecR x(8);
        for (double& v : x) v = rng.gaussian();
        const double target = rng.gaussian();

        MlpGrads g(p);
        g.zero();
        mlp_backprop(p, x, target, g);

        // finite differences over every parameter; compare as a whole vector
        const double h = 1e-5;
        double num_norm = 0.0, ana_norm = 0.0, diff_norm = 0.0;
        auto loss = [&]() {
            const double e = mlp_forward(p, x) - target;
            return 0.5 * e * e;
        };
        for (int l = 0; l < p.depth(); ++l) {
            for (std::size_t j = 0; j < p.weights[l].data().size(); ++j) {
                double& w = p.weights[l].data()[j];
                const double keep = w;
                w = keep + h;
                const double up = loss();
                w = keep - h;
                const double dn = loss();
                w = keep;
                const double num = (up - dn) / (2 * h);
                const double ana = g.weights[l].data()[j];
                num_norm += num * num;
                ana_norm += ana * ana;
                diff_norm += (num - ana) * (num - ana);
            }
            for (std::size_t j = 0; j < p.biases[l].size(); ++j) {
                double& b = p.biases[l][j];
                const double keep = b;
                b = keep + h;
                const double up = loss();
                b = keep - h;
                const double dn = loss();
                b = keep;
                const double num = (up - dn) / (2 * h);
                const double ana = g.biases[l][j];
                num_norm += num * num;
                ana_norm += ana * ana;
                diff_norm += (num - ana) * (num - ana);
            }
        }
        const double rel =
            std::sqrt(diff_norm) / std::max(std::sqrt(num_norm) + std::sqrt(ana_norm), 1e-12);
        worst = std::max(worst, rel);
        ++points_checked;
    }
    CHECK(points_checked >= 100);
    CHECK(worst < 1e-4);
}

TEST_CASE("training: constant labels are matched to within 0.1 dB^2") {
    RandomStream rng(3);
    auto data = random_dataset(256, 6, rng, [](const VecR&) { return 7.0; });
    TrainHyperParams hp;
    hp.hidden_sizes = {16};
    hp.epochs = 150;
    hp.seed = 5;
    const MlpParams p = mlp_train(data, hp);
    CHECK(mlp_mse(p, data) < 0.1);
}

TEST_CASE("training: linear map reaches the least-squares floor") {
    RandomStream rng(4);
    auto data = random_dataset(512, 8, rng, [](const VecR& f) {
        double acc = 1.0;
        for (std::size_t i = 0; i < f.size(); ++i) acc += (0.3 * (i + 1)) * f[i];
        return acc;
    });

    // label variance as the scale reference
    double mean = 0.0;
    for (const auto& s : data) mean += s.label_db;
    mean /= data.size();
    double var = 0.0;
    for (const auto& s : data) var += (s.label_db - mean) * (s.label_db - mean);
    var /= data.size();

    TrainHyperParams hp;
    hp.hidden_sizes = {16};
    hp.epochs = 200;
    hp.seed = 6;
    const MlpParams p = mlp_train(data, hp);
    CHECK(mlp_mse(p, data) < 0.01 * var);
}

TEST_CASE("training: held-out loss improves over the initial parameters") {
    RandomStream rng(5);
    auto data = random_dataset(400, 6, rng, [](const VecR& f) { return 2.0 * f[0] - f[3]; });
    TrainHyperParams hp0;
    hp0.hidden_sizes = {8};
    hp0.epochs = 0;
    hp0.seed = 7;
    TrainHyperParams hp40 = hp0;
    hp40.epochs = 40;
    const MlpParams before = mlp_train(data, hp0);
    const MlpParams after = mlp_train(data, hp40);
    CHECK(mlp_mse(after, data) < mlp_mse(before, data));
}

TEST_CASE("training: runaway step size raises a training error") {
    RandomStream rng(6);
    auto data = random_dataset(128, 4, rng, [](const VecR& f) { return f[0]; });
    TrainHyperParams hp;
    hp.hidden_sizes = {8};
    hp.epochs = 50;
    hp.learning_rate = 1e100;
    hp.seed = 8;
    CHECK_THROWS_AS(mlp_train(data, hp), TrainError);
}

TEST_CASE("training: empty dataset rejected") {
    CHECK_THROWS_AS(mlp_train({}, TrainHyperParams{}), std::invalid_argument);
}

TEST_CASE("serialization round trip preserves outputs exactly") {
    RandomStream rng(7);
    const MlpParams p = make_mlp({10, 7, 5, 1}, rng);
    const std::string path = "mlp_test.txt";
    save_mlp(p, path);
    const MlpParams q = load_mlp(path);
    for (int rep = 0; rep < 10; ++rep) {
        VecR x(10);
        for (double& v : x) v = rng.gaussian();
        CHECK(mlp_forward(p, x) == mlp_forward(q, x));
    }
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_mlp("does_not_exist.txt"), IoError);
}

TEST_CASE("noise power estimate follows the dB definition") {
    RandomStream rng(8);
    MlpParams p = make_mlp({4, 1}, rng);
    std::fill(p.weights[0].data().begin(), p.weights[0].data().end(), 0.0);

    p.biases[0][0] = 0.0;
    CHECK(estimate_noise_power(p, VecR(4, 0.2), 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    p.biases[0][0] = 10.0;
    CHECK(estimate_noise_power(p, VecR(4, 0.2), 1.0) == doctest::Approx(0.1).epsilon(1e-12));
    p.biases[0][0] = 20.0;
    CHECK(estimate_noise_power(p, VecR(4, 0.2), 2.0) == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("snr dataset: labels, ranges and feature statistics") {
    SystemConfig config;
    config.num_rx_antennas = 16;
    config.num_users = 2;
    config.mod_order = 4;
    TrainConfig train;
    train.reps_per_symbol = 30;
    train.num_subblocks = 3;
    train.dither_step = 0.5;

    RandomStream rng(9);
    const std::vector<double> grid{-20.0, 0.0, 20.0};
    const auto data = generate_snr_dataset(config, train, grid, 100, rng);
    REQUIRE(data.size() == 300);

    double low_dev = 0.0;
    double low_var = 0.0, high_var = 0.0;
    for (int i = 0; i < 100; ++i) {
        CHECK(data[i].label_db == -20.0);
        CHECK(data[i + 200].label_db == 20.0);
        double mean_low = 0.0, mean_high = 0.0;
        for (std::size_t j = 0; j < data[i].features.size(); ++j) {
            CHECK(data[i].features[j] >= 0.0);
            CHECK(data[i].features[j] <= 1.0);
            low_dev += std::abs(data[i].features[j] - 0.5);
            mean_low += data[i].features[j];
            mean_high += data[i + 200].features[j];
        }
        mean_low /= data[i].features.size();
        mean_high /= data[i].features.size();
        for (std::size_t j = 0; j < data[i].features.size(); ++j) {
            low_var += (data[i].features[j] - mean_low) * (data[i].features[j] - mean_low);
            high_var += (data[i + 200].features[j] - mean_high) *
                        (data[i + 200].features[j] - mean_high);
        }
    }
    low_dev /= 100.0 * 32;
    CHECK(low_dev < 0.1);  // noise-dominated signs concentrate near 1/2
    CHECK(high_var > low_var);

    CHECK_THROWS_AS(generate_snr_dataset(config, train, {}, 10, rng), std::invalid_argument);
}
