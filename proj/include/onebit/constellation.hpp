#pragma once

#include "onebit/matrix.hpp"

namespace onebit {

// Square M-QAM alphabet with zero mean and unit average energy. Points are
// ordered row-major over the I/Q grid (real part outer, imaginary part
// inner), most negative first, so indices are stable across runs.
struct Constellation {
    VecC points;
    double avg_energy = 1.0;
};

Constellation build_constellation(int mod_order);

// Index of the constellation point nearest to x in Euclidean distance.
int nearest_point(const Constellation& c, cplx x);

}  // namespace onebit
