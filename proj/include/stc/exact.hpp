#pragma once

// Exact integer linear algebra for the number-field module. Kernels are written once
// over an integer type: std::int64_t runs with overflow detection (anything beyond
// 2^62 throws Overflow) and callers retry with BigInt.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <exception>
#include <utility>
#include <vector>

namespace stc {

using BigInt = boost::multiprecision::cpp_int;

namespace exact {

struct Overflow : std::exception {
    const char* what() const noexcept override { return "int64 intermediate exceeded 2^62"; }
};

inline constexpr std::int64_t kSafeLimit = std::int64_t(1) << 62;

inline std::int64_t narrow(__int128 v) {
    if (v > kSafeLimit || v < -kSafeLimit) throw Overflow{};
    return static_cast<std::int64_t>(v);
}

/// (a·d − b·c) / p, where the division is known to be exact.
inline std::int64_t bareiss_step(std::int64_t a, std::int64_t d, std::int64_t b, std::int64_t c, std::int64_t p) {
    const __int128 num = __int128(a) * d - __int128(b) * c;
    return narrow(num / p);
}

inline BigInt bareiss_step(const BigInt& a, const BigInt& d, const BigInt& b, const BigInt& c, const BigInt& p) {
    return (a * d - b * c) / p;
}

inline std::int64_t mul_add(std::int64_t acc, std::int64_t x, std::int64_t y) {
    return narrow(__int128(acc) + __int128(x) * y);
}

inline BigInt mul_add(const BigInt& acc, const BigInt& x, const BigInt& y) { return acc + x * y; }

/// Fraction-free Gaussian elimination; `m` is row-major dim×dim.
template <typename Int>
Int determinant(std::vector<Int> m, int dim) {
    if (dim == 0) return Int(1);
    auto at = [&](int i, int j) -> Int& { return m[std::size_t(i) * std::size_t(dim) + std::size_t(j)]; };
    bool negate = false;
    Int prev(1);
    for (int k = 0; k < dim - 1; ++k) {
        if (at(k, k) == 0) {
            int swap_row = -1;
            for (int i = k + 1; i < dim; ++i)
                if (at(i, k) != 0) {
                    swap_row = i;
                    break;
                }
            if (swap_row < 0) return Int(0);
            for (int j = 0; j < dim; ++j) std::swap(at(k, j), at(swap_row, j));
            negate = !negate;
        }
        for (int i = k + 1; i < dim; ++i) {
            for (int j = k + 1; j < dim; ++j) at(i, j) = bareiss_step(at(i, j), at(k, k), at(i, k), at(k, j), prev);
            at(i, k) = Int(0);
        }
        prev = at(k, k);
    }
    Int d = at(dim - 1, dim - 1);
    return negate ? Int(-d) : d;
}

/// Matrix of y ↦ x·y over the integral basis, given structure constants
/// tensor[(a·dim + b)·dim + c] with w_a·w_b = Σ_c tensor·w_c.
template <typename Int, typename Coord>
std::vector<Int> multiplication_matrix(const std::vector<std::int64_t>& tensor, int dim, const std::vector<Coord>& x) {
    std::vector<Int> m(std::size_t(dim) * std::size_t(dim), Int(0));
    for (int a = 0; a < dim; ++a) {
        if (x[std::size_t(a)] == 0) continue;
        const Int xa(x[std::size_t(a)]);
        for (int b = 0; b < dim; ++b)
            for (int c = 0; c < dim; ++c) {
                const std::int64_t t = tensor[(std::size_t(a) * dim + b) * dim + c];
                if (t != 0) {
                    auto& cell = m[std::size_t(c) * dim + b];
                    cell = mul_add(cell, xa, Int(t));
                }
            }
    }
    return m;
}

/// Adjugate of a row-major dim×dim matrix, so that adj·m = det(m)·I.
template <typename Int>
std::vector<Int> adjugate(const std::vector<Int>& m, int dim) {
    std::vector<Int> adj(m.size(), Int(0));
    if (dim == 1) {
        adj[0] = Int(1);
        return adj;
    }
    std::vector<Int> minor(std::size_t(dim - 1) * std::size_t(dim - 1));
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            std::size_t idx = 0;
            for (int r = 0; r < dim; ++r) {
                if (r == i) continue;
                for (int c = 0; c < dim; ++c) {
                    if (c == j) continue;
                    minor[idx++] = m[std::size_t(r) * dim + c];
                }
            }
            Int cof = determinant(minor, dim - 1);
            if ((i + j) % 2 == 1) cof = Int(-cof);
            adj[std::size_t(j) * dim + i] = cof;
        }
    return adj;
}

} // namespace exact
} // namespace stc
