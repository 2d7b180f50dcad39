#include "onebit/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace onebit {

ChannelMatrix draw_rayleigh_channel(const SystemConfig& config, RandomStream& rng) {
    const double s = std::sqrt(0.5);
    MatC h(config.num_rx_antennas, config.num_users);
    for (std::size_t i = 0; i < h.rows(); ++i)
        for (std::size_t j = 0; j < h.cols(); ++j)
            h(i, j) = cplx{s * rng.gaussian(), s * rng.gaussian()};
    return ChannelMatrix{h, real_expand_matrix(h)};
}

QuantizedObservation one_bit_quantize(const VecR& r, long time_index) {
    QuantizedObservation q;
    q.time_index = time_index;
    q.values.resize(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!std::isfinite(r[i]))
            throw std::invalid_argument("one_bit_quantize: non-finite input");
        q.values[i] = r[i] >= 0.0 ? std::int8_t{1} : std::int8_t{-1};
    }
    return q;
}

VecR synthesize_noiseless(const ChannelMatrix& h, const VecR& s_real, const SystemConfig& config) {
    if (s_real.size() != h.real_form.cols())
        throw std::invalid_argument("synthesize: symbol dimension mismatch");
    VecR r = matvec(h.real_form, s_real);
    const double a = std::sqrt(config.transmit_power);
    for (double& x : r) x *= a;
    return r;
}

VecR synthesize_received(const ChannelMatrix& h, const VecR& s_real, const SystemConfig& config,
                         const VecR& dither_vars, RandomStream& rng) {
    VecR r = synthesize_noiseless(h, s_real, config);
    if (!dither_vars.empty() && dither_vars.size() != r.size())
        throw std::invalid_argument("synthesize: dither variance dimension mismatch");
    const double sz = std::sqrt(config.noise_power / 2.0);
    for (double& x : r) x += sz * rng.gaussian();
    if (!dither_vars.empty()) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (dither_vars[i] < 0.0)
                throw std::invalid_argument("synthesize: negative dither variance");
            r[i] += std::sqrt(dither_vars[i]) * rng.gaussian();
        }
    }
    return r;
}

}  // namespace onebit
