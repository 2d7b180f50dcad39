#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace onebit {

// User-facing configuration problems (bad flags, invalid parameter values).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem / serialization failures.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Detection-level failures (e.g. rank-deficient channel for ZF).
struct DetectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Physical-layer parameters. All powers are linear; snr() == rho/N0 exactly.
struct SystemConfig {
    int num_rx_antennas = 32;  // N_r
    int num_users = 4;         // N_u
    int mod_order = 4;         // M, square QAM
    double transmit_power = 1.0;  // rho
    double noise_power = 1.0;     // N0

    double snr() const { return transmit_power / noise_power; }
    double snr_db() const { return 10.0 * std::log10(snr()); }
    int real_dim() const { return 2 * num_rx_antennas; }

    // Copy with noise_power set so that snr_db() == db (transmit power fixed).
    SystemConfig at_snr_db(double db) const {
        SystemConfig c = *this;
        c.noise_power = transmit_power / std::pow(10.0, db / 10.0);
        return c;
    }

    void validate() const {
        if (num_rx_antennas <= 0 || num_users <= 0)
            throw ConfigError("antenna and user counts must be positive");
        if (num_rx_antennas < num_users)
            throw ConfigError("num_rx_antennas must be >= num_users");
        if (mod_order != 4 && mod_order != 16 && mod_order != 64)
            throw ConfigError("mod_order must be one of 4, 16, 64");
        if (!(transmit_power > 0.0) || !(noise_power > 0.0))
            throw ConfigError("transmit_power and noise_power must be positive");
    }
};

}  // namespace onebit
