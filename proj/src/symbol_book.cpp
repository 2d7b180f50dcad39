#include "onebit/symbol_book.hpp"

#include <cmath>

namespace onebit {

SymbolBook enumerate_symbol_book(const SystemConfig& config, std::size_t max_count) {
    config.validate();
    const int m = config.mod_order;
    const int nu = config.num_users;

    double k_real = std::pow(double(m), double(nu));
    if (k_real > static_cast<double>(max_count))
        throw ConfigError("enumerate_symbol_book: M^Nu exceeds the configured cap");
    const int k_total = static_cast<int>(std::lround(k_real));

    SymbolBook book;
    book.config = config;
    book.constellation = build_constellation(m);
    book.count = k_total;
    book.vectors_complex = MatC(k_total, nu);
    book.user_indices = Matrix<int>(k_total, nu);
    book.vectors_real = MatR(k_total, 2 * nu);

    for (int k = 0; k < k_total; ++k) {
        int rem = k;
        for (int u = nu - 1; u >= 0; --u) {
            const int digit = rem % m;
            rem /= m;
            book.user_indices(k, u) = digit;
            const cplx p = book.constellation.points[digit];
            book.vectors_complex(k, u) = p;
            book.vectors_real(k, u) = p.real();
            book.vectors_real(k, nu + u) = p.imag();
        }
    }
    return book;
}

int SymbolBook::row_of(const std::vector<int>& indices) const {
    int k = 0;
    for (int u = 0; u < config.num_users; ++u) k = k * config.mod_order + indices[u];
    return k;
}

}  // namespace onebit
