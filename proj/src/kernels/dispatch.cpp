#include <atomic>
#include <cstdlib>
#include <string_view>

#include "wsnloc/error.hpp"
#include "wsnloc/kernels.hpp"

namespace wsnloc::kernels {

namespace {

Isa detect() {
    if (const char* env = std::getenv("WSNLOC_ISA")) {
        const std::string_view want(env);
        if (want == "scalar") return Isa::Scalar;
        if (want == "avx2" && isa_supported(Isa::Avx2)) return Isa::Avx2;
    }
    return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<int>& selected() {
    static std::atomic<int> isa{static_cast<int>(detect())};
    return isa;
}

}  // namespace

const char* isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "?";
}

bool isa_supported(Isa isa) {
    if (isa == Isa::Scalar) return true;
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa active_isa() { return static_cast<Isa>(selected().load()); }

void set_isa(std::optional<Isa> isa) {
    if (!isa) {
        selected().store(static_cast<int>(detect()));
        return;
    }
    if (!isa_supported(*isa)) throw Error(std::string("ISA not supported: ") + isa_name(*isa));
    selected().store(static_cast<int>(*isa));
}

OccurrenceFn occurrence_counts_fn(Isa isa) {
#if defined(__x86_64__) || defined(_M_X64)
    if (isa == Isa::Avx2) return &avx2::occurrence_counts;
#endif
    (void)isa;
    return &scalar::occurrence_counts;
}

WeightedOccurrenceFn weighted_occurrence_counts_fn(Isa isa) {
#if defined(__x86_64__) || defined(_M_X64)
    if (isa == Isa::Avx2) return &avx2::weighted_occurrence_counts;
#endif
    (void)isa;
    return &scalar::weighted_occurrence_counts;
}

MaxSum3Fn max_hop_sum3_fn(Isa isa) {
#if defined(__x86_64__) || defined(_M_X64)
    if (isa == Isa::Avx2) return &avx2::max_hop_sum3;
#endif
    (void)isa;
    return &scalar::max_hop_sum3;
}

void occurrence_counts(const std::uint16_t* dist, std::size_t n, std::uint32_t* ts) {
    occurrence_counts_fn(active_isa())(dist, n, ts);
}

void weighted_occurrence_counts(const double* dist, std::size_t n, double rel_tol, std::uint32_t* ts) {
    weighted_occurrence_counts_fn(active_isa())(dist, n, rel_tol, ts);
}

std::uint16_t max_hop_sum3(const std::uint16_t* a, const std::uint16_t* b, const std::uint16_t* c, std::size_t m) {
    return max_hop_sum3_fn(active_isa())(a, b, c, m);
}

}  // namespace wsnloc::kernels
