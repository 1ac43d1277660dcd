#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "rdl/util.hpp"

namespace rdl::modq {

// Entries are stored as residues 0..q-1; the signed range is exposed only
// through CanonicalLift for display and norm computations.
struct ModVector {
    u32 modulus = 2;
    std::vector<u32> v;

    ModVector() = default;
    ModVector(u32 q, std::vector<u32> entries) : modulus(q), v(std::move(entries)) {
        require(q >= 2, errc::bad_input, "modulus must be >= 2");
        for (u32 e : v)
            require(e < q, errc::bad_input, "vector entry out of [0, q)");
    }
    static ModVector zeros(u32 q, size_t len) { return ModVector(q, std::vector<u32>(len, 0)); }

    size_t len() const { return v.size(); }
    u32 operator[](size_t i) const { return v[i]; }
    u32& at(size_t i) { return v[i]; }
    bool operator==(const ModVector& o) const { return modulus == o.modulus && v == o.v; }
};

struct ModMatrix {
    u32 modulus = 2;
    size_t rows = 0, cols = 0;
    std::vector<u32> a;  // row-major

    ModMatrix() = default;
    ModMatrix(u32 q, size_t r, size_t c, std::vector<u32> entries)
        : modulus(q), rows(r), cols(c), a(std::move(entries)) {
        require(q >= 2, errc::bad_input, "modulus must be >= 2");
        require(a.size() == rows * cols, errc::dimension_mismatch, "entry count != rows*cols");
        for (u32 e : a)
            require(e < q, errc::bad_input, "matrix entry out of [0, q)");
    }
    static ModMatrix zeros(u32 q, size_t r, size_t c) {
        return ModMatrix(q, r, c, std::vector<u32>(r * c, 0));
    }
    static ModMatrix identity(u32 q, size_t nn) {
        ModMatrix m = zeros(q, nn, nn);
        for (size_t i = 0; i < nn; ++i) m.at(i, i) = 1;
        return m;
    }

    u32 operator()(size_t i, size_t j) const { return a[i * cols + j]; }
    u32& at(size_t i, size_t j) { return a[i * cols + j]; }
    ModVector row(size_t i) const {
        return ModVector(modulus, std::vector<u32>(a.begin() + i * cols, a.begin() + (i + 1) * cols));
    }
    bool operator==(const ModMatrix& o) const {
        return modulus == o.modulus && rows == o.rows && cols == o.cols && a == o.a;
    }
};

// Signed representatives in {-floor(q/2), ..., floor((q-1)/2)}.
struct CanonicalLift {
    u32 modulus = 2;
    std::vector<i64> e;
};

inline i64 lift_entry(u32 v, u32 q) {
    return v <= (q - 1) / 2 ? i64(v) : i64(v) - i64(q);
}

inline CanonicalLift canonical_lift(const ModVector& x) {
    CanonicalLift out{x.modulus, {}};
    out.e.reserve(x.len());
    for (u32 v : x.v) out.e.push_back(lift_entry(v, x.modulus));
    return out;
}

inline ModVector reduce(const CanonicalLift& l) {
    std::vector<u32> v;
    v.reserve(l.e.size());
    for (i64 e : l.e) {
        i64 r = e % i64(l.modulus);
        if (r < 0) r += l.modulus;
        v.push_back(u32(r));
    }
    return ModVector(l.modulus, std::move(v));
}

inline u64 linf_norm(const CanonicalLift& l) {
    u64 m = 0;
    for (i64 e : l.e) m = std::max<u64>(m, u64(e < 0 ? -e : e));
    return m;
}

inline void check_compatible(const ModMatrix& A, const ModVector& x) {
    require(A.modulus == x.modulus, errc::modulus_mismatch, "matrix/vector moduli differ");
    require(A.cols == x.len(), errc::dimension_mismatch, "matrix cols != vector length");
}

inline ModVector mat_vec_mul(const ModMatrix& A, const ModVector& x) {
    check_compatible(A, x);
    std::vector<u32> out(A.rows, 0);
    for (size_t i = 0; i < A.rows; ++i) {
        u64 acc = 0;
        for (size_t j = 0; j < A.cols; ++j) acc += u64(A(i, j)) * x[j] % A.modulus;
        out[i] = u32(acc % A.modulus);
    }
    return ModVector(A.modulus, std::move(out));
}

inline ModMatrix transpose(const ModMatrix& A) {
    ModMatrix out = ModMatrix::zeros(A.modulus, A.cols, A.rows);
    for (size_t i = 0; i < A.rows; ++i)
        for (size_t j = 0; j < A.cols; ++j) out.at(j, i) = A(i, j);
    return out;
}

inline ModMatrix mat_mul(const ModMatrix& A, const ModMatrix& B) {
    require(A.modulus == B.modulus, errc::modulus_mismatch, "matrix moduli differ");
    require(A.cols == B.rows, errc::dimension_mismatch, "inner dimensions differ");
    ModMatrix out = ModMatrix::zeros(A.modulus, A.rows, B.cols);
    for (size_t i = 0; i < A.rows; ++i)
        for (size_t k = 0; k < A.cols; ++k) {
            u64 aik = A(i, k);
            if (!aik) continue;
            for (size_t j = 0; j < B.cols; ++j)
                out.at(i, j) = u32((out(i, j) + aik * B(k, j)) % A.modulus);
        }
    return out;
}

inline ModVector vec_add(const ModVector& a, const ModVector& b) {
    require(a.modulus == b.modulus && a.len() == b.len(), errc::dimension_mismatch, "vec_add shapes");
    std::vector<u32> out(a.len());
    for (size_t i = 0; i < a.len(); ++i) out[i] = (a[i] + b[i]) % a.modulus;
    return ModVector(a.modulus, std::move(out));
}

inline ModVector vec_sub(const ModVector& a, const ModVector& b) {
    require(a.modulus == b.modulus && a.len() == b.len(), errc::dimension_mismatch, "vec_sub shapes");
    std::vector<u32> out(a.len());
    for (size_t i = 0; i < a.len(); ++i) out[i] = (a[i] + a.modulus - b[i]) % a.modulus;
    return ModVector(a.modulus, std::move(out));
}

inline ModMatrix mod_view(const ModMatrix& A, u32 new_mod) {
    std::vector<u32> e(A.a.size());
    for (size_t i = 0; i < e.size(); ++i) e[i] = A.a[i] % new_mod;
    return ModMatrix(new_mod, A.rows, A.cols, std::move(e));
}

inline ModVector mod_view(const ModVector& x, u32 new_mod) {
    std::vector<u32> e(x.len());
    for (size_t i = 0; i < e.size(); ++i) e[i] = x[i] % new_mod;
    return ModVector(new_mod, std::move(e));
}

inline ModMatrix stack_rows(const ModMatrix& top, const ModMatrix& bottom) {
    require(top.cols == bottom.cols && top.modulus == bottom.modulus, errc::dimension_mismatch,
            "stack_rows shapes");
    std::vector<u32> e = top.a;
    e.insert(e.end(), bottom.a.begin(), bottom.a.end());
    return ModMatrix(top.modulus, top.rows + bottom.rows, top.cols, std::move(e));
}

// Column-contiguous blocks, in order; concatenation reproduces A.
inline std::vector<ModMatrix> block_split(const ModMatrix& A, size_t width) {
    require(width > 0 && A.cols % width == 0, errc::dimension_mismatch,
            "block width does not divide column count");
    std::vector<ModMatrix> out;
    for (size_t b = 0; b < A.cols / width; ++b) {
        ModMatrix blk = ModMatrix::zeros(A.modulus, A.rows, width);
        for (size_t i = 0; i < A.rows; ++i)
            for (size_t j = 0; j < width; ++j) blk.at(i, j) = A(i, b * width + j);
        out.push_back(std::move(blk));
    }
    return out;
}

// ---------------------------------------------------------------------------
// GF(2): rows packed into 64-bit words for the solver path.

struct BitMatrix {
    size_t rows = 0, cols = 0, wpr = 0;
    std::vector<u64> w;

    BitMatrix() = default;
    BitMatrix(size_t r, size_t c) : rows(r), cols(c), wpr((c + 63) / 64), w(r * wpr, 0) {}

    bool get(size_t i, size_t j) const { return (w[i * wpr + j / 64] >> (j % 64)) & 1; }
    void set(size_t i, size_t j, bool b) {
        u64& word = w[i * wpr + j / 64];
        u64 mask = u64(1) << (j % 64);
        word = b ? (word | mask) : (word & ~mask);
    }
    void xor_row(size_t dst, size_t src) {
        for (size_t k = 0; k < wpr; ++k) w[dst * wpr + k] ^= w[src * wpr + k];
    }
    void swap_rows(size_t a, size_t b) {
        if (a == b) return;
        for (size_t k = 0; k < wpr; ++k) std::swap(w[a * wpr + k], w[b * wpr + k]);
    }
};

inline BitMatrix to_bits(const ModMatrix& A) {
    require(A.modulus == 2, errc::modulus_mismatch, "GF(2) operation needs modulus 2");
    BitMatrix b(A.rows, A.cols);
    for (size_t i = 0; i < A.rows; ++i)
        for (size_t j = 0; j < A.cols; ++j)
            if (A(i, j)) b.set(i, j, true);
    return b;
}

inline ModMatrix from_bits(const BitMatrix& b) {
    ModMatrix A = ModMatrix::zeros(2, b.rows, b.cols);
    for (size_t i = 0; i < b.rows; ++i)
        for (size_t j = 0; j < b.cols; ++j)
            if (b.get(i, j)) A.at(i, j) = 1;
    return A;
}

inline size_t rank_bits(BitMatrix m) {
    size_t r = 0;
    for (size_t c = 0; c < m.cols && r < m.rows; ++c) {
        size_t piv = r;
        while (piv < m.rows && !m.get(piv, c)) ++piv;
        if (piv == m.rows) continue;
        m.swap_rows(r, piv);
        for (size_t i = 0; i < m.rows; ++i)
            if (i != r && m.get(i, c)) m.xor_row(i, r);
        ++r;
    }
    return r;
}

inline size_t rank_gf2(const ModMatrix& M) { return rank_bits(to_bits(M)); }

struct AffineSolution {
    ModVector particular;
    std::vector<ModVector> kernel_basis;  // one vector per free column, ascending
};

// Full solution set of Mx = t over GF(2): particular + span(kernel_basis),
// or nullopt when t is outside the image of M.
inline std::optional<AffineSolution> solve_affine_gf2(const ModMatrix& M, const ModVector& t) {
    require(M.modulus == 2 && t.modulus == 2, errc::modulus_mismatch, "solve_affine needs modulus 2");
    require(M.rows == t.len(), errc::dimension_mismatch, "rows != target length");
    BitMatrix aug(M.rows, M.cols + 1);
    for (size_t i = 0; i < M.rows; ++i) {
        for (size_t j = 0; j < M.cols; ++j) aug.set(i, j, M(i, j));
        aug.set(i, M.cols, t[i]);
    }
    std::vector<size_t> pivot_cols;
    size_t r = 0;
    for (size_t c = 0; c < M.cols && r < M.rows; ++c) {
        size_t piv = r;
        while (piv < M.rows && !aug.get(piv, c)) ++piv;
        if (piv == M.rows) continue;
        aug.swap_rows(r, piv);
        for (size_t i = 0; i < M.rows; ++i)
            if (i != r && aug.get(i, c)) aug.xor_row(i, r);
        pivot_cols.push_back(c);
        ++r;
    }
    for (size_t i = r; i < M.rows; ++i)
        if (aug.get(i, M.cols)) return std::nullopt;

    ModVector part = ModVector::zeros(2, M.cols);
    for (size_t i = 0; i < pivot_cols.size(); ++i) part.at(pivot_cols[i]) = aug.get(i, M.cols);

    std::vector<ModVector> kernel;
    size_t next_pivot = 0;
    for (size_t c = 0; c < M.cols; ++c) {
        if (next_pivot < pivot_cols.size() && pivot_cols[next_pivot] == c) {
            ++next_pivot;
            continue;
        }
        ModVector k = ModVector::zeros(2, M.cols);
        k.at(c) = 1;
        for (size_t i = 0; i < pivot_cols.size(); ++i) k.at(pivot_cols[i]) = aug.get(i, c);
        kernel.push_back(std::move(k));
    }
    return AffineSolution{std::move(part), std::move(kernel)};
}

// Procedure P1: append unit rows e_0, e_1, ... in index order, keeping a row
// iff it strictly increases the rank, until target_rank. Deterministic.
inline ModMatrix extend_full_rank_p1(const ModMatrix& A, size_t target_rank) {
    require(A.modulus == 2, errc::modulus_mismatch, "P1 operates over GF(2)");
    require(target_rank <= A.cols, errc::bad_input, "target rank exceeds column count");
    require(rank_gf2(A) == A.rows, errc::bad_input, "P1 input must have full row rank");
    BitMatrix cur = to_bits(A);
    size_t rank = A.rows;
    size_t i = 0;
    while (rank < target_rank) {
        require(i < A.cols, errc::internal, "P1 ran out of unit rows");
        BitMatrix trial(cur.rows + 1, cur.cols);
        std::copy(cur.w.begin(), cur.w.end(), trial.w.begin());
        trial.set(cur.rows, i, true);
        if (rank_bits(trial) > rank) {
            cur = std::move(trial);
            ++rank;
        }
        ++i;
    }
    return from_bits(cur);
}

// Procedure P2 step 1: the unit rows B such that stacking A over B is an
// invertible (2n+1) x (2n+1) matrix.
inline ModMatrix extend_to_invertible_p2(const ModMatrix& A) {
    ModMatrix full = extend_full_rank_p1(A, A.cols);
    ModMatrix B = ModMatrix::zeros(2, full.rows - A.rows, A.cols);
    for (size_t i = A.rows; i < full.rows; ++i)
        for (size_t j = 0; j < A.cols; ++j) B.at(i - A.rows, j) = full(i, j);
    return B;
}

}  // namespace rdl::modq
