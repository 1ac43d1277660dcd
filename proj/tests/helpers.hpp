#pragma once

#include <catch2/catch_amalgamated.hpp>

#include "rdl/amplitude.hpp"
#include "rdl/modq.hpp"
#include "rdl/rng.hpp"

namespace testutil {

using namespace rdl;

inline modq::ModMatrix random_matrix(u32 q, size_t rows, size_t cols, Rng& rng) {
    std::vector<u32> e(rows * cols);
    for (auto& v : e) v = u32(rng.below(q));
    return modq::ModMatrix(q, rows, cols, std::move(e));
}

inline modq::ModVector random_vector(u32 q, size_t len, Rng& rng) {
    std::vector<u32> e(len);
    for (auto& v : e) v = u32(rng.below(q));
    return modq::ModVector(q, std::move(e));
}

inline double l2_diff(const std::vector<cx>& a, const std::vector<cx>& b) {
    REQUIRE(a.size() == b.size());
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) d += std::norm(a[i] - b[i]);
    return std::sqrt(d);
}

// Independent GF(2) rank oracle: size of the row span by exhaustive
// enumeration of row combinations.
inline size_t rank_by_rowspan(const modq::ModMatrix& M) {
    std::set<std::vector<u32>> span;
    u64 combos = u64(1) << M.rows;
    for (u64 c = 0; c < combos; ++c) {
        std::vector<u32> acc(M.cols, 0);
        for (size_t i = 0; i < M.rows; ++i)
            if ((c >> i) & 1)
                for (size_t j = 0; j < M.cols; ++j) acc[j] ^= M(i, j);
        span.insert(acc);
    }
    size_t r = 0;
    while ((u64(1) << r) < span.size()) ++r;
    return r;
}

// Independent affine-set oracle: every x in Z_2^cols with Mx = t.
inline std::set<std::vector<u32>> solutions_by_enumeration(const modq::ModMatrix& M,
                                                           const modq::ModVector& t) {
    std::set<std::vector<u32>> out;
    u64 total = u64(1) << M.cols;
    for (u64 c = 0; c < total; ++c) {
        std::vector<u32> x(M.cols);
        for (size_t j = 0; j < M.cols; ++j) x[j] = u32((c >> (M.cols - 1 - j)) & 1);
        bool ok = true;
        for (size_t i = 0; i < M.rows && ok; ++i) {
            u32 acc = 0;
            for (size_t j = 0; j < M.cols; ++j) acc ^= M(i, j) & x[j];
            ok = acc == t[i];
        }
        if (ok) out.insert(x);
    }
    return out;
}

}  // namespace testutil
