// Compiled with -mavx2; only reached when CPUID reports AVX2.
#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <algorithm>
#include <vector>

#include "wsnloc/kernels.hpp"

namespace wsnloc::kernels::avx2 {

void occurrence_counts(const std::uint16_t* dist, std::size_t n, std::uint32_t* ts) {
    constexpr std::size_t W = 16;
    const std::size_t body = n - n % W;
    // 16-bit lane counters per source row j; at most n - 1 < 65536 hits each.
    std::vector<std::uint16_t> acc(n);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        std::fill(acc.begin(), acc.end(), std::uint16_t{0});
        const std::uint16_t* row_j = dist + j * n;
        for (std::size_t k = j + 1; k < n; ++k) {
            if (row_j[k] == kUnreachable) continue;
            const std::uint16_t* row_k = dist + k * n;
            const __m256i target = _mm256_set1_epi16(static_cast<short>(row_j[k]));
            std::size_t i = 0;
            for (; i < body; i += W) {
                const __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(row_j + i));
                const __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(row_k + i));
                const __m256i hit = _mm256_cmpeq_epi16(_mm256_adds_epu16(a, b), target);
                __m256i* slot = reinterpret_cast<__m256i*>(acc.data() + i);
                // hit lanes are 0xFFFF, so subtracting adds one.
                _mm256_storeu_si256(slot, _mm256_sub_epi16(_mm256_loadu_si256(slot), hit));
            }
            const std::uint16_t t = row_j[k];
            for (; i < n; ++i) {
                acc[i] = static_cast<std::uint16_t>(acc[i] + (std::uint32_t{row_j[i]} + row_k[i] == t));
            }
        }
        for (std::size_t i = 0; i < n; ++i) ts[i] += acc[i];
    }
}

void weighted_occurrence_counts(const double* dist, std::size_t n, double rel_tol, std::uint32_t* ts) {
    constexpr std::size_t W = 4;
    const std::size_t body = n - n % W;
    std::vector<std::uint64_t> acc(n);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        std::fill(acc.begin(), acc.end(), std::uint64_t{0});
        const double* row_j = dist + j * n;
        for (std::size_t k = j + 1; k < n; ++k) {
            const double* row_k = dist + k * n;
            const double t = row_j[k] + row_j[k] * rel_tol;
            const __m256d limit = _mm256_set1_pd(t);
            std::size_t i = 0;
            for (; i < body; i += W) {
                const __m256d sum = _mm256_add_pd(_mm256_loadu_pd(row_j + i), _mm256_loadu_pd(row_k + i));
                const __m256i hit = _mm256_castpd_si256(_mm256_cmp_pd(sum, limit, _CMP_LE_OQ));
                __m256i* slot = reinterpret_cast<__m256i*>(acc.data() + i);
                _mm256_storeu_si256(slot, _mm256_sub_epi64(_mm256_loadu_si256(slot), hit));
            }
            for (; i < n; ++i) acc[i] += static_cast<std::uint64_t>(row_j[i] + row_k[i] <= t);
        }
        for (std::size_t i = 0; i < n; ++i) ts[i] += static_cast<std::uint32_t>(acc[i]);
    }
}

std::uint16_t max_hop_sum3(const std::uint16_t* a, const std::uint16_t* b, const std::uint16_t* c, std::size_t m) {
    constexpr std::size_t W = 16;
    const std::size_t body = m - m % W;
    __m256i best = _mm256_setzero_si256();
    std::size_t i = 0;
    for (; i < body; i += W) {
        const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        const __m256i vc = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(c + i));
        const __m256i s = _mm256_adds_epu16(_mm256_adds_epu16(va, vb), vc);
        best = _mm256_max_epu16(best, s);
    }
    alignas(32) std::uint16_t lanes[W];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), best);
    std::uint32_t out = *std::max_element(lanes, lanes + W);
    for (; i < m; ++i) {
        const std::uint32_t s = std::min<std::uint32_t>(std::uint32_t{a[i]} + b[i], kUnreachable);
        out = std::max(out, std::min<std::uint32_t>(s + c[i], kUnreachable));
    }
    return static_cast<std::uint16_t>(out);
}

}  // namespace wsnloc::kernels::avx2

#endif
