#pragma once

#include <optional>
#include <string>
#include <vector>

#include "onebit/detectors.hpp"
#include "onebit/mlp.hpp"

namespace onebit {

enum class SnrMode { oracle, estimated };
enum class SerMode { per_user, per_vector };

// Known detector identifiers: naive-ml, dl-ml, idl-ml, idl-ml-est, zf, csi-ml.
struct ExperimentSpec {
    SystemConfig system;  // noise_power is overridden per grid point
    TrainConfig train;    // noise_power_for_denoise is overridden per point / trial
    std::vector<double> snr_grid_db;
    std::vector<std::string> detectors = {"naive-ml", "dl-ml", "idl-ml", "zf", "csi-ml"};
    int num_channel_realizations = 2000;
    int data_symbols_per_channel = 500;  // N_d
    int min_errors = 100;                // per (snr, detector) stopping target
    std::uint64_t master_seed = 1;
    SnrMode snr_mode = SnrMode::oracle;
    std::string mlp_file;  // estimated mode: trained parameter file
    SerMode ser_mode = SerMode::per_user;
    int num_threads = 0;      // 0 = hardware concurrency
    bool zero_noise = false;  // test hook: noise-free data phase
    // DL dithering variance (per real component); rho/2 by default.
    double fixed_dither_var = 0.5;
    // sub-block counts compared by the undertrained sweep
    std::vector<int> undertrained_subblocks = {3, 5};

    void validate() const;
};

struct SweepRow {
    double snr_db = 0.0;
    std::string detector;
    long decisions = 0;
    long errors = 0;
    std::optional<double> ser;
    std::optional<double> avg_undertrained;
    double wall_time_s = 0.0;

    bool operator==(const SweepRow&) const = default;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool operator==(const SweepResult&) const = default;
};

// Per-trial outcome, entries parallel to ExperimentSpec::detectors.
struct TrialCounts {
    std::vector<long> errors;
    std::vector<long> decisions;
    std::vector<std::optional<double>> undertrained;
    std::vector<long> degenerate;
    int channel_redraws = 0;
};

// One channel realization: train every configured learner, then detect
// data_symbols_per_channel uniformly drawn symbol vectors from shared
// un-dithered observations. All randomness derives from
// (master_seed, snr_index, trial_index).
TrialCounts run_trial(const ExperimentSpec& spec, const SymbolBook& book, double snr_db,
                      int snr_index, long trial_index, const MlpParams* mlp = nullptr);

// SER sweep: per grid SNR, accumulates trials until every configured detector
// has at least min_errors errors or the channel budget is exhausted.
SweepResult run_ser_sweep(const ExperimentSpec& spec);

// Undertrained sweep over (naive, dl, idl per configured sub-block count):
// averages the undertrained count over exactly num_channel_realizations
// channels per grid SNR.
SweepResult run_undertrained_sweep(const ExperimentSpec& spec);

// Fixed column order: snr_db,detector,decisions,errors,ser,avg_undertrained,
// wall_time_s. Optional fields are left empty. Values round-trip exactly.
void emit_csv(const SweepResult& result, const std::string& path);
SweepResult parse_csv(const std::string& path);

}  // namespace onebit
