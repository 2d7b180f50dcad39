#include "onebit/constellation.hpp"

#include <cmath>

#include "onebit/config.hpp"

namespace onebit {

Constellation build_constellation(int mod_order) {
    if (mod_order != 4 && mod_order != 16 && mod_order != 64)
        throw ConfigError("build_constellation: mod_order must be one of 4, 16, 64");

    const int side = static_cast<int>(std::lround(std::sqrt(double(mod_order))));
    // Levels -(side-1), ..., -1, +1, ..., +(side-1) in steps of 2; average
    // energy of the unscaled grid is 2(M-1)/3.
    const double scale = std::sqrt(3.0 / (2.0 * (mod_order - 1)));

    Constellation c;
    c.points.reserve(mod_order);
    for (int i = 0; i < side; ++i) {
        const double re = (2 * i - (side - 1)) * scale;
        for (int q = 0; q < side; ++q) {
            const double im = (2 * q - (side - 1)) * scale;
            c.points.emplace_back(re, im);
        }
    }
    double e = 0.0;
    for (const cplx& p : c.points) e += std::norm(p);
    c.avg_energy = e / mod_order;
    return c;
}

int nearest_point(const Constellation& c, cplx x) {
    int best = 0;
    double best_d = std::norm(x - c.points[0]);
    for (int i = 1; i < static_cast<int>(c.points.size()); ++i) {
        const double d = std::norm(x - c.points[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace onebit
