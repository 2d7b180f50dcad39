#include "onebit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "onebit/gaussian.hpp"

namespace onebit {

namespace {

// stream purposes
constexpr std::uint32_t kTagChannel = 1;
constexpr std::uint32_t kTagData = 2;
constexpr std::uint32_t kTagTrainBase = 16;  // + per-method offset

enum MethodId : std::uint32_t { kNaive = 0, kDl = 1, kIdl = 2, kIdlEst = 3 };

bool is_learner(const std::string& id) {
    return id == "naive-ml" || id == "dl-ml" || id == "idl-ml" || id == "idl-ml-est";
}

const std::vector<std::string> kKnownDetectors = {"naive-ml", "dl-ml",  "idl-ml",
                                                  "idl-ml-est", "zf", "csi-ml"};

// sqrt(rho) * H * s_k for every symbol row
MatR clean_means(const ChannelMatrix& h, const SymbolBook& book, const SystemConfig& config) {
    const int dim = config.real_dim();
    MatR clean(book.count, dim);
    const double a = std::sqrt(config.transmit_power);
    for (int k = 0; k < book.count; ++k) {
        const double* s = book.vectors_real.row_ptr(k);
        for (int i = 0; i < dim; ++i) {
            const double* hrow = h.real_form.row_ptr(i);
            double acc = 0.0;
            for (std::size_t j = 0; j < h.real_form.cols(); ++j) acc += hrow[j] * s[j];
            clean(k, i) = a * acc;
        }
    }
    return clean;
}

// Scoring kernel. Tables without -inf entries use a positive-mask sum over
// precomputed differences; tables with -inf (naive learning) fall back to a
// plain gather so infinities never meet.
struct Scorer {
    MatR diff;      // log_plus - log_minus
    VecR base;      // per-row sum of log_minus
    ScoreTable raw;
    bool all_finite = true;

    explicit Scorer(ScoreTable t) : raw(std::move(t)) {
        const std::size_t rows = raw.log_plus.rows(), cols = raw.log_plus.cols();
        for (const double v : raw.log_plus.data())
            if (!std::isfinite(v)) all_finite = false;
        for (const double v : raw.log_minus.data())
            if (!std::isfinite(v)) all_finite = false;
        if (all_finite) {
            diff = MatR(rows, cols);
            base.assign(rows, 0.0);
            for (std::size_t k = 0; k < rows; ++k) {
                double acc = 0.0;
                for (std::size_t i = 0; i < cols; ++i) {
                    diff(k, i) = raw.log_plus(k, i) - raw.log_minus(k, i);
                    acc += raw.log_minus(k, i);
                }
                base[k] = acc;
            }
        }
    }

    // positive: indices of +1 antennas for the current observation
    int detect(std::span<const std::int8_t> y, std::span<const int> positive,
               bool* degenerate) const {
        if (!all_finite) return detect_index(y, raw, nullptr, degenerate);
        int best = 0;
        double best_val = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < diff.rows(); ++k) {
            const double* drow = diff.row_ptr(k);
            double acc = base[k];
            for (const int i : positive) acc += drow[i];
            if (acc > best_val) {
                best_val = acc;
                best = static_cast<int>(k);
            }
        }
        if (degenerate) *degenerate = false;
        return best;
    }
};

struct TrialDetector {
    std::string id;
    std::optional<Scorer> scorer;
    std::optional<ZfDetector> zf;
    std::optional<double> undertrained;
};

long count_user_errors(const SymbolBook& book, int k_hat, int k_true) {
    if (k_hat == k_true) return 0;
    long errs = 0;
    for (int u = 0; u < book.config.num_users; ++u)
        errs += (book.user_indices(k_hat, u) != book.user_indices(k_true, u));
    return errs;
}

}  // namespace

void ExperimentSpec::validate() const {
    system.validate();
    train.validate();
    if (snr_grid_db.empty()) throw ConfigError("snr grid must not be empty");
    for (std::size_t i = 1; i < snr_grid_db.size(); ++i)
        if (!(snr_grid_db[i] > snr_grid_db[i - 1]))
            throw ConfigError("snr grid must be strictly increasing");
    if (detectors.empty()) throw ConfigError("at least one detector is required");
    for (const auto& d : detectors)
        if (std::find(kKnownDetectors.begin(), kKnownDetectors.end(), d) == kKnownDetectors.end())
            throw ConfigError("unknown detector id: " + d);
    if (std::find(detectors.begin(), detectors.end(), "idl-ml-est") != detectors.end() &&
        snr_mode != SnrMode::estimated)
        throw ConfigError("idl-ml-est requires snr_mode = estimated");
    if (snr_mode == SnrMode::estimated && mlp_file.empty())
        throw ConfigError("estimated snr mode requires an mlp parameter file");
    if (num_channel_realizations <= 0 || data_symbols_per_channel <= 0)
        throw ConfigError("trial and data-symbol counts must be positive");
    if (min_errors < 0) throw ConfigError("min_errors must be nonnegative");
    if (fixed_dither_var < 0.0) throw ConfigError("fixed_dither_var must be nonnegative");
}

TrialCounts run_trial(const ExperimentSpec& spec, const SymbolBook& book, double snr_db,
                      int snr_index, long trial_index, const MlpParams* mlp) {
    const SystemConfig config = spec.system.at_snr_db(snr_db);
    const auto tag_snr = static_cast<std::uint32_t>(snr_index);
    const auto tag_trial = static_cast<std::uint32_t>(trial_index);

    const bool wants_zf =
        std::find(spec.detectors.begin(), spec.detectors.end(), "zf") != spec.detectors.end();

    TrialCounts counts;
    const std::size_t nd = spec.detectors.size();
    counts.errors.assign(nd, 0);
    counts.decisions.assign(nd, 0);
    counts.undertrained.assign(nd, std::nullopt);
    counts.degenerate.assign(nd, 0);

    // channel (redrawn only if ZF needs a full-rank matrix and fails)
    ChannelMatrix h;
    std::optional<ZfDetector> zf;
    for (std::uint32_t attempt = 0;; ++attempt) {
        if (attempt > 100) throw DetectionError("channel redraw limit exceeded");
        RandomStream rng = RandomStream::derive(spec.master_seed, kTagChannel, tag_snr, tag_trial,
                                                attempt);
        h = draw_rayleigh_channel(config, rng);
        if (!wants_zf) break;
        try {
            zf.emplace(h, book);
            break;
        } catch (const DetectionError&) {
            counts.channel_redraws++;
            std::fprintf(stderr, "rank-deficient channel at snr %g, trial %ld; redrawing\n",
                         snr_db, trial_index);
        }
    }

    const MatR clean = clean_means(h, book, config);

    TrainConfig oracle_train = spec.train;
    oracle_train.noise_power_for_denoise = config.noise_power;

    std::vector<TrialDetector> dets(nd);
    for (std::size_t d = 0; d < nd; ++d) {
        const std::string& id = spec.detectors[d];
        dets[d].id = id;
        if (id == "csi-ml") {
            dets[d].scorer.emplace(csi_score_table(h, book, config));
        } else if (id == "zf") {
            dets[d].zf = zf;
        } else if (id == "naive-ml") {
            RandomStream rng = RandomStream::derive(spec.master_seed, kTagTrainBase + kNaive,
                                                    tag_snr, tag_trial);
            LearnResult r = learn_naive(book, h, config, oracle_train, rng);
            dets[d].undertrained = count_undertrained(r.raw_plus_freq);
            dets[d].scorer.emplace(learned_score_table(r.table));
        } else if (id == "dl-ml") {
            RandomStream rng =
                RandomStream::derive(spec.master_seed, kTagTrainBase + kDl, tag_snr, tag_trial);
            LearnResult r = learn_dl(book, h, config, oracle_train, spec.fixed_dither_var, rng);
            dets[d].undertrained = count_undertrained(r.raw_plus_freq);
            dets[d].scorer.emplace(learned_score_table(r.table));
        } else if (id == "idl-ml") {
            RandomStream rng =
                RandomStream::derive(spec.master_seed, kTagTrainBase + kIdl, tag_snr, tag_trial);
            LearnResult r = learn_idl(book, h, config, oracle_train, rng);
            dets[d].undertrained = count_undertrained(r.raw_plus_freq);
            dets[d].scorer.emplace(learned_score_table(r.table));
        } else if (id == "idl-ml-est") {
            if (!mlp) throw ConfigError("idl-ml-est requires trained mlp parameters");
            RandomStream rng = RandomStream::derive(spec.master_seed, kTagTrainBase + kIdlEst,
                                                    tag_snr, tag_trial);
            IdlTraining tr = simulate_idl_training(book, h, config, oracle_train, rng);
            const VecR features = block_plus_frequencies(tr.blocks.front());
            TrainConfig est_train = oracle_train;
            est_train.noise_power_for_denoise =
                estimate_noise_power(*mlp, features, config.transmit_power);
            LearnResult r = denoise_idl_training(tr, est_train);
            dets[d].undertrained = count_undertrained(r.raw_plus_freq);
            dets[d].scorer.emplace(learned_score_table(r.table));
        }
        counts.undertrained[d] = dets[d].undertrained;
    }

    // data phase: shared un-dithered observations for every detector
    RandomStream rng_data = RandomStream::derive(spec.master_seed, kTagData, tag_snr, tag_trial);
    const int dim = config.real_dim();
    const double noise_sd = std::sqrt(config.noise_power / 2.0);
    std::vector<std::int8_t> y(dim);
    std::vector<int> positive;
    positive.reserve(dim);

    for (int slot = 0; slot < spec.data_symbols_per_channel; ++slot) {
        const int k_true = static_cast<int>(rng_data.integer(book.count));
        const double* mean = clean.row_ptr(k_true);
        positive.clear();
        for (int i = 0; i < dim; ++i) {
            const double r = spec.zero_noise ? mean[i] : mean[i] + noise_sd * rng_data.gaussian();
            y[i] = r >= 0.0 ? std::int8_t{1} : std::int8_t{-1};
            if (y[i] > 0) positive.push_back(i);
        }
        for (std::size_t d = 0; d < nd; ++d) {
            int k_hat;
            if (dets[d].zf) {
                k_hat = dets[d].zf->detect(y);
            } else {
                bool degenerate = false;
                k_hat = dets[d].scorer->detect(y, positive, &degenerate);
                counts.degenerate[d] += degenerate;
            }
            if (spec.ser_mode == SerMode::per_user) {
                counts.errors[d] += count_user_errors(book, k_hat, k_true);
                counts.decisions[d] += config.num_users;
            } else {
                counts.errors[d] += (k_hat != k_true);
                counts.decisions[d] += 1;
            }
        }
    }
    return counts;
}

namespace {

// Runs trials for one grid point in deterministic waves: a wave is computed
// in parallel, then folded in trial order with the stopping rule checked
// after every trial, so results never depend on thread count.
template <typename StopFn>
std::vector<TrialCounts> run_point(const ExperimentSpec& spec, const SymbolBook& book,
                                   double snr_db, int snr_index, const MlpParams* mlp,
                                   StopFn should_stop) {
    const int nthreads = spec.num_threads > 0
                             ? spec.num_threads
                             : std::max(1u, std::thread::hardware_concurrency());
    std::vector<TrialCounts> accepted;
    long next_trial = 0;
    bool stopped = false;
    while (!stopped && next_trial < spec.num_channel_realizations) {
        const long wave = std::min<long>(spec.num_channel_realizations - next_trial,
                                         std::max(8, 2 * nthreads));
        std::vector<TrialCounts> results(wave);
        std::atomic<long> cursor{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&]() {
            for (;;) {
                const long i = cursor.fetch_add(1);
                if (i >= wave) return;
                try {
                    results[i] = run_trial(spec, book, snr_db, snr_index, next_trial + i, mlp);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);

        for (long i = 0; i < wave; ++i) {
            accepted.push_back(std::move(results[i]));
            if (should_stop(accepted)) {
                stopped = true;
                break;
            }
        }
        next_trial += wave;
    }
    return accepted;
}

std::optional<double> mean_undertrained(const std::vector<TrialCounts>& trials, std::size_t d) {
    double acc = 0.0;
    long n = 0;
    for (const auto& t : trials)
        if (t.undertrained[d]) {
            acc += *t.undertrained[d];
            ++n;
        }
    if (n == 0) return std::nullopt;
    return acc / static_cast<double>(n);
}

}  // namespace

SweepResult run_ser_sweep(const ExperimentSpec& spec) {
    spec.validate();
    MlpParams mlp;
    const MlpParams* mlp_ptr = nullptr;
    if (spec.snr_mode == SnrMode::estimated) {
        mlp = load_mlp(spec.mlp_file);
        mlp_ptr = &mlp;
    }
    const SymbolBook book = enumerate_symbol_book(spec.system);
    const std::size_t nd = spec.detectors.size();

    SweepResult out;
    for (std::size_t s = 0; s < spec.snr_grid_db.size(); ++s) {
        const double snr_db = spec.snr_grid_db[s];
        const auto t0 = std::chrono::steady_clock::now();
        auto stop = [&](const std::vector<TrialCounts>& trials) {
            std::vector<long> err(nd, 0);
            for (const auto& t : trials)
                for (std::size_t d = 0; d < nd; ++d) err[d] += t.errors[d];
            return std::all_of(err.begin(), err.end(),
                               [&](long e) { return e >= spec.min_errors; });
        };
        const auto trials = run_point(spec, book, snr_db, static_cast<int>(s), mlp_ptr, stop);
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (std::size_t d = 0; d < nd; ++d) {
            SweepRow row;
            row.snr_db = snr_db;
            row.detector = spec.detectors[d];
            for (const auto& t : trials) {
                row.errors += t.errors[d];
                row.decisions += t.decisions[d];
            }
            row.ser = row.decisions > 0
                          ? std::optional<double>(static_cast<double>(row.errors) /
                                                  static_cast<double>(row.decisions))
                          : std::nullopt;
            row.avg_undertrained = mean_undertrained(trials, d);
            row.wall_time_s = elapsed;
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

SweepResult run_undertrained_sweep(const ExperimentSpec& spec) {
    ExperimentSpec sub = spec;
    sub.detectors = {"naive-ml", "dl-ml"};
    std::vector<TrainConfig> idl_trains;
    for (int n : spec.undertrained_subblocks) {
        if (n <= 0 || spec.train.reps_per_symbol % n != 0)
            throw ConfigError("undertrained sub-block counts must divide reps_per_symbol");
        sub.detectors.push_back("idl-ml");
        TrainConfig t = spec.train;
        t.num_subblocks = n;
        idl_trains.push_back(t);
    }
    sub.validate();
    const SymbolBook book = enumerate_symbol_book(sub.system);

    SweepResult out;
    for (std::size_t s = 0; s < sub.snr_grid_db.size(); ++s) {
        const double snr_db = sub.snr_grid_db[s];
        const auto t0 = std::chrono::steady_clock::now();
        // only the training phase matters here; keep the data phase minimal
        ExperimentSpec point = sub;
        point.data_symbols_per_channel = 1;
        auto no_stop = [](const std::vector<TrialCounts>&) { return false; };
        std::vector<std::vector<TrialCounts>> per_method;
        {
            ExperimentSpec naive_dl = point;
            naive_dl.detectors = {"naive-ml", "dl-ml"};
            per_method.push_back(
                run_point(naive_dl, book, snr_db, static_cast<int>(s), nullptr, no_stop));
        }
        for (const TrainConfig& t : idl_trains) {
            ExperimentSpec idl_spec = point;
            idl_spec.detectors = {"idl-ml"};
            idl_spec.train = t;
            per_method.push_back(
                run_point(idl_spec, book, snr_db, static_cast<int>(s), nullptr, no_stop));
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        auto emit_row = [&](const std::string& name, const std::vector<TrialCounts>& trials,
                            std::size_t d) {
            SweepRow row;
            row.snr_db = snr_db;
            row.detector = name;
            row.avg_undertrained = mean_undertrained(trials, d);
            row.wall_time_s = elapsed;
            out.rows.push_back(std::move(row));
        };
        emit_row("naive", per_method[0], 0);
        emit_row("dl", per_method[0], 1);
        for (std::size_t v = 0; v < idl_trains.size(); ++v)
            emit_row("idl-n" + std::to_string(spec.undertrained_subblocks[v]), per_method[1 + v],
                     0);
    }
    return out;
}

namespace {

std::string format_opt(const std::optional<double>& v) {
    if (!v) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return buf;
}

}  // namespace

void emit_csv(const SweepResult& result, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open " + path + " for writing");
    std::fprintf(f, "snr_db,detector,decisions,errors,ser,avg_undertrained,wall_time_s\n");
    for (const SweepRow& r : result.rows)
        std::fprintf(f, "%.17g,%s,%ld,%ld,%s,%s,%.17g\n", r.snr_db, r.detector.c_str(),
                     r.decisions, r.errors, format_opt(r.ser).c_str(),
                     format_opt(r.avg_undertrained).c_str(), r.wall_time_s);
    if (std::fclose(f) != 0) throw IoError("failed to close " + path);
}

SweepResult parse_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) ||
        line != "snr_db,detector,decisions,errors,ser,avg_undertrained,wall_time_s")
        throw IoError(path + ": unexpected csv header");
    SweepResult out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        SweepRow r;
        auto next = [&]() {
            if (!std::getline(ss, field, ',')) throw IoError(path + ": short csv row");
            return field;
        };
        r.snr_db = std::stod(next());
        r.detector = next();
        r.decisions = std::stol(next());
        r.errors = std::stol(next());
        const std::string ser = next();
        if (!ser.empty()) r.ser = std::stod(ser);
        const std::string ut = next();
        if (!ut.empty()) r.avg_undertrained = std::stod(ut);
        r.wall_time_s = std::stod(next());
        out.rows.push_back(std::move(r));
    }
    return out;
}

}  // namespace onebit
