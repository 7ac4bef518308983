#include <random>

#include "doctest.h"
#include "wsnloc/error.hpp"
#include "wsnloc/kernels.hpp"

using namespace wsnloc::kernels;

namespace {

// Symmetric table with a zero diagonal, occasional unreachable entries and
// enough small values that ties are common.
std::vector<std::uint16_t> random_hops(std::size_t n, std::mt19937_64& rng, bool holes) {
    std::vector<std::uint16_t> d(n * n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) {
            std::uint16_t v = static_cast<std::uint16_t>(1 + rng() % 6);
            if (holes && rng() % 17 == 0) v = kUnreachable;
            d[j * n + k] = d[k * n + j] = v;
        }
    }
    return d;
}

std::vector<double> random_lengths(std::size_t n, std::mt19937_64& rng) {
    std::vector<double> d(n * n, 0.0);
    std::uniform_int_distribution<int> step(1, 4);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) {
            // Multiples of 0.25 make exact ties frequent.
            const double v = 0.25 * step(rng) * (1 + rng() % 3);
            d[j * n + k] = d[k * n + j] = v;
        }
    }
    return d;
}

}  // namespace

TEST_CASE("AVX2 occurrence kernels match the scalar reference") {
    if (!isa_supported(Isa::Avx2)) {
        MESSAGE("AVX2 not available; equivalence not exercised");
        return;
    }
    std::mt19937_64 rng(5);
    for (std::size_t n : {1u, 2u, 3u, 7u, 15u, 16u, 17u, 31u, 33u, 64u, 100u}) {
        for (bool holes : {false, true}) {
            const auto d = random_hops(n, rng, holes);
            std::vector<std::uint32_t> a(n, 0), b(n, 0);
            scalar::occurrence_counts(d.data(), n, a.data());
            avx2::occurrence_counts(d.data(), n, b.data());
            CHECK(a == b);
        }
        const auto w = random_lengths(n, rng);
        for (double tol : {0.0, 1e-9, 0.1}) {
            std::vector<std::uint32_t> a(n, 0), b(n, 0);
            scalar::weighted_occurrence_counts(w.data(), n, tol, a.data());
            avx2::weighted_occurrence_counts(w.data(), n, tol, b.data());
            CHECK(a == b);
        }
    }
}

TEST_CASE("AVX2 max hop sum matches the scalar reference") {
    if (!isa_supported(Isa::Avx2)) return;
    std::mt19937_64 rng(6);
    for (std::size_t m : {0u, 1u, 5u, 15u, 16u, 17u, 40u, 257u}) {
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<std::uint16_t> a(m), b(m), c(m);
            for (std::size_t i = 0; i < m; ++i) {
                a[i] = static_cast<std::uint16_t>(rng() % 30000);
                b[i] = static_cast<std::uint16_t>(rng() % 30000);
                c[i] = static_cast<std::uint16_t>(rng() % 60);
                if (rng() % 50 == 0) c[i] = kUnreachable;
            }
            CHECK(scalar::max_hop_sum3(a.data(), b.data(), c.data(), m) ==
                  avx2::max_hop_sum3(a.data(), b.data(), c.data(), m));
        }
    }
}

TEST_CASE("scalar kernels on small hand cases") {
    // Path 0-1-2.
    const std::uint16_t d[9] = {0, 1, 2, 1, 0, 1, 2, 1, 0};
    std::uint32_t ts[3] = {0, 0, 0};
    scalar::occurrence_counts(d, 3, ts);
    CHECK(ts[0] == 2);
    CHECK(ts[1] == 3);
    CHECK(ts[2] == 2);

    const std::uint16_t a[3] = {1, 40000, 2};
    const std::uint16_t b[3] = {1, 40000, 2};
    const std::uint16_t c[3] = {1, 0, 3};
    CHECK(scalar::max_hop_sum3(a, b, c, 3) == kUnreachable);
    CHECK(scalar::max_hop_sum3(a, b, c, 1) == 3);
    CHECK(scalar::max_hop_sum3(a, b, c, 0) == 0);
}

TEST_CASE("runtime dispatch") {
    const Isa before = active_isa();
    set_isa(Isa::Scalar);
    CHECK(active_isa() == Isa::Scalar);
    CHECK(occurrence_counts_fn(Isa::Scalar) == &scalar::occurrence_counts);
    if (isa_supported(Isa::Avx2)) {
        set_isa(Isa::Avx2);
        CHECK(active_isa() == Isa::Avx2);
    } else {
        CHECK_THROWS_AS(set_isa(Isa::Avx2), wsnloc::Error);
    }
    set_isa(std::nullopt);
    CHECK(active_isa() == before);
}
