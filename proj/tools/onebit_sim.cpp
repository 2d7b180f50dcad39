// Monte Carlo simulator for one-bit massive MIMO uplink detection.
//
// Subcommands:
//   sweep-ser          SER vs SNR for the configured detectors
//   sweep-undertrained average undertrained-likelihood counts vs SNR
//   train-snr          train the SNR-regression network and write its
//                      parameters to --mlp-file
//   show-config        print the effective configuration
//
// Exit codes: 0 success, 1 configuration error, 2 runtime/IO error.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "onebit/experiment.hpp"

namespace {

struct CliOptions {
    int nr = 32;
    int nu = 4;
    int mod_order = 4;
    int ntr = 30;
    std::vector<int> subblocks = {3};
    double dither_step = 0.5;
    double snr_start = -10.0;
    double snr_stop = 30.0;
    double snr_step = 2.5;
    int trials = 2000;
    int data_symbols = 500;
    int min_errors = 100;
    std::uint64_t seed = 1;
    std::string snr_mode = "oracle";
    std::string ser_mode = "user";
    std::string mlp_file;
    std::string out = "sweep.csv";
    int threads = 0;
    int samples_per_point = 500;
};

std::vector<double> make_grid(const CliOptions& o) {
    std::vector<double> grid;
    if (!(o.snr_step > 0.0)) throw onebit::ConfigError("snr-step must be positive");
    for (double s = o.snr_start; s <= o.snr_stop + 1e-9; s += o.snr_step) grid.push_back(s);
    return grid;
}

onebit::ExperimentSpec make_spec(const CliOptions& o) {
    onebit::ExperimentSpec spec;
    spec.system.num_rx_antennas = o.nr;
    spec.system.num_users = o.nu;
    spec.system.mod_order = o.mod_order;
    spec.train.reps_per_symbol = o.ntr;
    spec.train.num_subblocks = o.subblocks.empty() ? 3 : o.subblocks.front();
    spec.train.dither_step = o.dither_step;
    spec.snr_grid_db = make_grid(o);
    spec.num_channel_realizations = o.trials;
    spec.data_symbols_per_channel = o.data_symbols;
    spec.min_errors = o.min_errors;
    spec.master_seed = o.seed;
    spec.num_threads = o.threads;
    spec.mlp_file = o.mlp_file;
    spec.undertrained_subblocks = o.subblocks;
    spec.fixed_dither_var = spec.system.transmit_power / 2.0;
    if (o.snr_mode == "oracle") {
        spec.snr_mode = onebit::SnrMode::oracle;
    } else if (o.snr_mode == "estimated") {
        spec.snr_mode = onebit::SnrMode::estimated;
        spec.detectors = {"naive-ml", "dl-ml", "idl-ml", "idl-ml-est", "zf", "csi-ml"};
    } else {
        throw onebit::ConfigError("snr-mode must be oracle or estimated");
    }
    if (o.ser_mode == "user") {
        spec.ser_mode = onebit::SerMode::per_user;
    } else if (o.ser_mode == "vector") {
        spec.ser_mode = onebit::SerMode::per_vector;
    } else {
        throw onebit::ConfigError("ser-mode must be user or vector");
    }
    return spec;
}

void print_config(const CliOptions& o) {
    std::printf("nr = %d\n", o.nr);
    std::printf("nu = %d\n", o.nu);
    std::printf("mod-order = %d\n", o.mod_order);
    std::printf("ntr = %d\n", o.ntr);
    std::printf("subblocks =");
    for (int n : o.subblocks) std::printf(" %d", n);
    std::printf("\n");
    std::printf("dither-step = %g\n", o.dither_step);
    std::printf("snr-start = %g\n", o.snr_start);
    std::printf("snr-stop = %g\n", o.snr_stop);
    std::printf("snr-step = %g\n", o.snr_step);
    std::printf("trials = %d\n", o.trials);
    std::printf("data-symbols = %d\n", o.data_symbols);
    std::printf("min-errors = %d\n", o.min_errors);
    std::printf("seed = %llu\n", static_cast<unsigned long long>(o.seed));
    std::printf("snr-mode = %s\n", o.snr_mode.c_str());
    std::printf("ser-mode = %s\n", o.ser_mode.c_str());
    std::printf("mlp-file = %s\n", o.mlp_file.c_str());
    std::printf("out = %s\n", o.out.c_str());
    std::printf("threads = %d\n", o.threads);
    std::printf("samples-per-point = %d\n", o.samples_per_point);
}

int run(int argc, char** argv) {
    CLI::App app{"one-bit massive MIMO uplink detection simulator"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key = value configuration file");
    app.allow_config_extras(false);

    CliOptions o;
    app.add_option("--nr", o.nr, "receive antennas");
    app.add_option("--nu", o.nu, "single-antenna users");
    app.add_option("--mod-order", o.mod_order, "QAM order (4, 16, 64)");
    app.add_option("--ntr", o.ntr, "pilot repetitions per symbol vector");
    app.add_option("--subblocks", o.subblocks,
                   "iDL sub-block count(s); extra values only affect sweep-undertrained")
        ->delimiter(',');
    app.add_option("--dither-step", o.dither_step, "iDL dithering variance increment");
    app.add_option("--snr-start", o.snr_start, "grid start (dB)");
    app.add_option("--snr-stop", o.snr_stop, "grid stop (dB)");
    app.add_option("--snr-step", o.snr_step, "grid step (dB)");
    app.add_option("--trials", o.trials, "channel realizations per grid point");
    app.add_option("--data-symbols", o.data_symbols, "data slots per channel realization");
    app.add_option("--min-errors", o.min_errors, "stop a grid point after this many errors");
    app.add_option("--seed", o.seed, "master seed");
    app.add_option("--snr-mode", o.snr_mode, "oracle | estimated");
    app.add_option("--ser-mode", o.ser_mode, "user | vector symbol-error counting");
    app.add_option("--mlp-file", o.mlp_file, "SNR estimator parameter file");
    app.add_option("--out", o.out, "output CSV path");
    app.add_option("--threads", o.threads, "worker threads (0 = all cores)");
    app.add_option("--samples-per-point", o.samples_per_point,
                   "train-snr: samples per grid SNR");

    CLI::App* ser = app.add_subcommand("sweep-ser", "symbol error rate sweep");
    CLI::App* undertrained =
        app.add_subcommand("sweep-undertrained", "undertrained likelihood count sweep");
    CLI::App* train = app.add_subcommand("train-snr", "train the SNR estimator");
    CLI::App* show = app.add_subcommand("show-config", "print the effective configuration");
    for (CLI::App* sub : {ser, undertrained, train, show}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (show->parsed()) {
        print_config(o);
        return 0;
    }
    if (ser->parsed()) {
        const onebit::ExperimentSpec spec = make_spec(o);
        spec.validate();
        const onebit::SweepResult result = onebit::run_ser_sweep(spec);
        onebit::emit_csv(result, o.out);
        std::fprintf(stderr, "wrote %zu rows to %s\n", result.rows.size(), o.out.c_str());
        return 0;
    }
    if (undertrained->parsed()) {
        const onebit::ExperimentSpec spec = make_spec(o);
        const onebit::SweepResult result = onebit::run_undertrained_sweep(spec);
        onebit::emit_csv(result, o.out);
        std::fprintf(stderr, "wrote %zu rows to %s\n", result.rows.size(), o.out.c_str());
        return 0;
    }
    if (train->parsed()) {
        if (o.mlp_file.empty())
            throw onebit::ConfigError("train-snr requires --mlp-file for the output");
        const onebit::ExperimentSpec spec = make_spec(o);
        spec.system.validate();
        spec.train.validate();
        onebit::RandomStream rng = onebit::RandomStream::derive(o.seed, 0x534e52u);
        const auto dataset = onebit::generate_snr_dataset(spec.system, spec.train,
                                                          spec.snr_grid_db,
                                                          o.samples_per_point, rng);
        onebit::TrainHyperParams hp;
        hp.seed = o.seed;
        const onebit::MlpParams params = onebit::mlp_train(dataset, hp);
        onebit::save_mlp(params, o.mlp_file);
        std::fprintf(stderr, "trained on %zu samples; wrote %s\n", dataset.size(),
                     o.mlp_file.c_str());
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const onebit::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 1;
    } catch (const onebit::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
