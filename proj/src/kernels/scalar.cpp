#include <algorithm>

#include "wsnloc/kernels.hpp"

namespace wsnloc::kernels::scalar {

void occurrence_counts(const std::uint16_t* dist, std::size_t n, std::uint32_t* ts) {
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const std::uint16_t* row_j = dist + j * n;
        for (std::size_t k = j + 1; k < n; ++k) {
            if (row_j[k] == kUnreachable) continue;
            const std::uint16_t* row_k = dist + k * n;
            const std::uint32_t target = row_j[k];
            for (std::size_t i = 0; i < n; ++i) {
                ts[i] += static_cast<std::uint32_t>(std::uint32_t{row_j[i]} + row_k[i] == target);
            }
        }
    }
}

void weighted_occurrence_counts(const double* dist, std::size_t n, double rel_tol, std::uint32_t* ts) {
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double* row_j = dist + j * n;
        for (std::size_t k = j + 1; k < n; ++k) {
            const double* row_k = dist + k * n;
            const double limit = row_j[k] + row_j[k] * rel_tol;
            for (std::size_t i = 0; i < n; ++i) {
                ts[i] += static_cast<std::uint32_t>(row_j[i] + row_k[i] <= limit);
            }
        }
    }
}

std::uint16_t max_hop_sum3(const std::uint16_t* a, const std::uint16_t* b, const std::uint16_t* c, std::size_t m) {
    std::uint32_t best = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const std::uint32_t s = std::min<std::uint32_t>(std::uint32_t{a[i]} + b[i], kUnreachable);
        best = std::max(best, std::min<std::uint32_t>(s + c[i], kUnreachable));
    }
    return static_cast<std::uint16_t>(best);
}

}  // namespace wsnloc::kernels::scalar
