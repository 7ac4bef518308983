#pragma once

// Data-parallel inner loops over path-length tables. Each kernel has a scalar
// reference and an AVX2 variant; `dispatch` picks one at runtime from CPUID,
// overridable with WSNLOC_ISA=scalar|avx2 or set_isa().

#include <cstddef>
#include <cstdint>
#include <optional>

namespace wsnloc::kernels {

// Sentinel hop count for unreachable pairs. Sums saturate at this value.
inline constexpr std::uint16_t kUnreachable = 0xFFFF;

enum class Isa { Scalar, Avx2 };

const char* isa_name(Isa isa);
bool isa_supported(Isa isa);

// Currently selected variant.
Isa active_isa();
// Force a variant (nullopt restores auto-detection). Throws Error when the
// CPU lacks support.
void set_isa(std::optional<Isa> isa);

// dist is an n x n row-major symmetric table. For every unordered pair j < k
// and every i, ts[i] is incremented when dist[j][i] + dist[i][k] == dist[j][k].
// Unreachable pairs contribute nothing.
// ts must hold n zero-initialised counters. Requires n < 65536.
using OccurrenceFn = void (*)(const std::uint16_t* dist, std::size_t n, std::uint32_t* ts);

// Same membership count over real path lengths: i is counted for {j, k} when
// dist[j][i] + dist[i][k] <= dist[j][k] * (1 + rel_tol).
using WeightedOccurrenceFn = void (*)(const double* dist, std::size_t n, double rel_tol, std::uint32_t* ts);

// max over i < m of a[i] + b[i] + c[i], saturating at kUnreachable.
using MaxSum3Fn = std::uint16_t (*)(const std::uint16_t* a, const std::uint16_t* b, const std::uint16_t* c,
                                    std::size_t m);

namespace scalar {
void occurrence_counts(const std::uint16_t* dist, std::size_t n, std::uint32_t* ts);
void weighted_occurrence_counts(const double* dist, std::size_t n, double rel_tol, std::uint32_t* ts);
std::uint16_t max_hop_sum3(const std::uint16_t* a, const std::uint16_t* b, const std::uint16_t* c, std::size_t m);
}  // namespace scalar

namespace avx2 {
// Defined only on x86-64 builds; callers go through isa_supported first.
void occurrence_counts(const std::uint16_t* dist, std::size_t n, std::uint32_t* ts);
void weighted_occurrence_counts(const double* dist, std::size_t n, double rel_tol, std::uint32_t* ts);
std::uint16_t max_hop_sum3(const std::uint16_t* a, const std::uint16_t* b, const std::uint16_t* c, std::size_t m);
}  // namespace avx2

OccurrenceFn occurrence_counts_fn(Isa isa);
WeightedOccurrenceFn weighted_occurrence_counts_fn(Isa isa);
MaxSum3Fn max_hop_sum3_fn(Isa isa);

// Dispatching entry points.
void occurrence_counts(const std::uint16_t* dist, std::size_t n, std::uint32_t* ts);
void weighted_occurrence_counts(const double* dist, std::size_t n, double rel_tol, std::uint32_t* ts);
std::uint16_t max_hop_sum3(const std::uint16_t* a, const std::uint16_t* b, const std::uint16_t* c, std::size_t m);

}  // namespace wsnloc::kernels
