#pragma once

#include "onebit/config.hpp"
#include "onebit/constellation.hpp"
#include "onebit/matrix.hpp"

namespace onebit {

// All K = M^Nu candidate symbol vectors, in complex and real-expanded form.
// Row k is the k-th lexicographic combination of per-user constellation
// indices, user 0 being the most significant digit.
struct SymbolBook {
    SystemConfig config;
    Constellation constellation;
    MatC vectors_complex;       // K x Nu
    MatR vectors_real;          // K x 2Nu, row = omega(complex row)
    Matrix<int> user_indices;   // K x Nu constellation indices
    int count = 0;              // K

    // Book row for a set of per-user constellation indices.
    int row_of(const std::vector<int>& indices) const;
};

SymbolBook enumerate_symbol_book(const SystemConfig& config, std::size_t max_count = 1u << 20);

}  // namespace onebit
