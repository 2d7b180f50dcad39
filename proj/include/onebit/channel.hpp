#pragma once

#include <cstdint>

#include "onebit/config.hpp"
#include "onebit/matrix.hpp"
#include "onebit/rng.hpp"

namespace onebit {

// Uplink channel in complex (Nr x Nu) and real-expanded (2Nr x 2Nu) form.
struct ChannelMatrix {
    MatC complex_form;
    MatR real_form;
};

// i.i.d. CN(0,1) entries (real/imag parts each N(0, 1/2)).
ChannelMatrix draw_rayleigh_channel(const SystemConfig& config, RandomStream& rng);

// One-bit quantized receive vector, entries +1/-1.
struct QuantizedObservation {
    std::vector<std::int8_t> values;
    long time_index = 0;
};

// Elementwise sign with Q(0) = +1. Throws on non-finite input.
QuantizedObservation one_bit_quantize(const VecR& r, long time_index = 0);

// r = sqrt(rho) * H * s + z + d. The channel noise z has i.i.d. real Gaussian
// entries of variance N0/2 (real expansion of CN(0, N0 I)); the dither d has
// per-component variance dither_vars[i]. An empty dither_vars means no dither
// (and no dither draws). Draw order per call: 2Nr noise gaussians, then 2Nr
// dither gaussians when dither_vars is present.
VecR synthesize_received(const ChannelMatrix& h, const VecR& s_real, const SystemConfig& config,
                         const VecR& dither_vars, RandomStream& rng);

// Noise-free mean sqrt(rho) * H * s (test hook for deterministic synthesis).
VecR synthesize_noiseless(const ChannelMatrix& h, const VecR& s_real, const SystemConfig& config);

}  // namespace onebit
