#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rdl/modq.hpp"
#include "rdl/rng.hpp"
#include "rdl/util.hpp"

namespace rdl::isis {

struct SolverParams {
    u32 n = 1, l = 1;
    u32 q = 2;
    u64 m = 3;

    static SolverParams make(u32 n, u32 l) {
        require(n >= 1 && l >= 1, errc::bad_input, "need n >= 1, l >= 1");
        require(l < 31, errc::bad_input, "l too large");
        SolverParams p;
        p.n = n;
        p.l = l;
        p.q = u32(1) << l;
        p.m = pow_u64(2 * u64(n) + 1, l);
        return p;
    }
};

inline u64 tape_length(const SolverParams& p) { return p.m - u64(p.n) * p.l; }

// Randomness bitstring with a consumption cursor. A non-aborting run consumes
// exactly all m - nl bits.
struct SolverTape {
    std::vector<uint8_t> bits;
    size_t cursor = 0;

    size_t size() const { return bits.size(); }
    u32 read() {
        require(cursor < bits.size(), errc::internal, "tape underrun");
        return bits[cursor++];
    }
    bool operator==(const SolverTape& o) const { return bits == o.bits; }
};

inline SolverTape random_tape(const SolverParams& p, Rng& rng) {
    SolverTape t;
    t.bits.resize(tape_length(p));
    for (auto& b : t.bits) b = uint8_t(rng.below(2));
    return t;
}

// Bits in consumption order, packed 4 per hex digit, first bit most
// significant inside its digit; the final digit is zero-padded.
inline std::string tape_to_hex(const SolverTape& t) {
    std::string out;
    for (size_t i = 0; i < t.bits.size(); i += 4) {
        u32 nib = 0;
        for (size_t j = 0; j < 4; ++j) nib = (nib << 1) | (i + j < t.bits.size() ? t.bits[i + j] : 0);
        out += "0123456789abcdef"[nib];
    }
    return out;
}

inline SolverTape tape_from_hex(const std::string& hex, u64 nbits) {
    require(hex.size() == (nbits + 3) / 4, errc::bad_input,
            "tape hex length != ceil(bits/4) for " + std::to_string(nbits) + " bits");
    SolverTape t;
    t.bits.reserve(nbits);
    for (size_t i = 0; i < hex.size(); ++i) {
        char c = hex[i];
        u32 nib;
        if (c >= '0' && c <= '9') nib = u32(c - '0');
        else if (c >= 'a' && c <= 'f') nib = u32(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F') nib = u32(c - 'A' + 10);
        else fail(errc::bad_input, "invalid hex digit in tape");
        for (int j = 3; j >= 0; --j) {
            u64 pos = i * 4 + u64(3 - j);
            u32 bit = (nib >> j) & 1;
            if (pos < nbits) t.bits.push_back(uint8_t(bit));
            else require(bit == 0, errc::bad_input, "tape padding bits must be zero");
        }
    }
    return t;
}

// Solution(x_F) or Abort carrying the full input tape.
struct SolverOutput {
    bool aborted = false;
    modq::ModVector x;   // valid iff !aborted
    SolverTape tape;     // full input tape (echoed so abort outputs stay distinct)

    bool operator==(const SolverOutput& o) const {
        if (aborted != o.aborted) return false;
        return aborted ? tape == o.tape : x == o.x;
    }
};

struct LevelTrace {
    std::vector<modq::ModVector> shares, pads, block_x1, block_x2;
    std::vector<modq::ModVector> offsets;  // z_i as mod-q vectors with entries in {0,1,q-1}
    modq::ModVector partial_x;
    modq::ModMatrix reduced_A;
    modq::ModVector reduced_y;
};

struct SolverTrace {
    std::vector<LevelTrace> levels;
};

namespace detail {

inline SolverParams params_of(const modq::ModMatrix& A) {
    u32 q = A.modulus;
    require(q >= 2 && (q & (q - 1)) == 0, errc::bad_input, "modulus is not a power of two");
    u32 l = 0;
    for (u32 t = q; t > 1; t >>= 1) ++l;
    SolverParams p = SolverParams::make(u32(A.rows), l);
    require(p.m == A.cols, errc::dimension_mismatch,
            "solver needs m = (2n+1)^l columns, got " + std::to_string(A.cols));
    return p;
}

// Lexicographic order on 0/1 representatives, coordinate 0 most significant.
inline bool lex_le(const modq::ModVector& a, const modq::ModVector& b) { return a.v <= b.v; }

// Core recursion over the current level's modulus 2^level. Returns the binary
// solution or nullopt on a rank abort.
inline std::optional<std::vector<u32>> solve_level(const modq::ModMatrix& A,
                                                   const modq::ModVector& y, u32 n, u32 level,
                                                   SolverTape& tape, SolverTrace* trace) {
    const u32 width = 2 * n + 1;
    modq::ModMatrix A2 = modq::mod_view(A, 2);

    if (level == 1) {
        if (modq::rank_gf2(A2) < n) return std::nullopt;
        modq::ModMatrix B = modq::extend_to_invertible_p2(A2);
        modq::ModMatrix M = modq::stack_rows(A2, B);
        std::vector<u32> rhs = modq::mod_view(y, 2).v;
        for (u32 j = 0; j < n + 1; ++j) rhs.push_back(tape.read());
        auto sol = modq::solve_affine_gf2(M, modq::ModVector(2, rhs));
        require(sol && sol->kernel_basis.empty(), errc::internal, "P2 system is not invertible");
        return sol->particular.v;
    }

    u64 mp = pow_u64(width, level - 1);
    std::vector<modq::ModMatrix> blocks = modq::block_split(A2, width);
    for (const auto& blk : blocks)
        if (modq::rank_gf2(blk) < n) return std::nullopt;

    // Shares y_1..y_{m'-1} from the tape; y_{m'} closes the telescoping sum.
    std::vector<modq::ModVector> shares;
    shares.reserve(mp);
    modq::ModVector acc = modq::ModVector::zeros(2, n);
    for (u64 i = 0; i + 1 < mp; ++i) {
        std::vector<u32> s(n);
        for (u32 j = 0; j < n; ++j) s[j] = tape.read();
        shares.emplace_back(2, s);
        acc = modq::vec_add(acc, shares.back());
    }
    shares.push_back(modq::vec_sub(modq::mod_view(y, 2), acc));

    std::vector<modq::ModMatrix> ext;
    ext.reserve(mp);
    for (const auto& blk : blocks) ext.push_back(modq::extend_full_rank_p1(blk, 2 * n));

    std::vector<modq::ModVector> pads;
    pads.reserve(mp);
    for (u64 i = 0; i < mp; ++i) {
        std::vector<u32> u(n);
        for (u32 j = 0; j < n; ++j) u[j] = tape.read();
        pads.emplace_back(2, u);
    }

    const u32 q = A.modulus;
    std::vector<u32> x_all;
    x_all.reserve(A.cols);
    modq::ModMatrix Z = modq::ModMatrix::zeros(q, A.cols, mp);
    LevelTrace lt;
    for (u64 i = 0; i < mp; ++i) {
        std::vector<u32> t = shares[i].v;
        t.insert(t.end(), pads[i].v.begin(), pads[i].v.end());
        auto sol = modq::solve_affine_gf2(ext[i], modq::ModVector(2, t));
        require(sol && sol->kernel_basis.size() == 1, errc::internal,
                "extended block must have a 1-dimensional kernel");
        modq::ModVector x1 = sol->particular;
        modq::ModVector x2 = modq::vec_add(sol->particular, sol->kernel_basis[0]);
        if (!lex_le(x1, x2)) std::swap(x1, x2);
        require(!(x1 == x2), errc::internal, "block solutions must differ");
        // Offset taken over the integers: entries of x2 - x1 land in
        // {-1, 0, 1}, i.e. {0, 1, q-1} mod q, so x + Z x' stays binary mod q.
        for (u32 j = 0; j < width; ++j) {
            i64 d = i64(x2[j]) - i64(x1[j]);
            Z.at(i * width + j, i) = u32((d + q) % q);
        }
        x_all.insert(x_all.end(), x1.v.begin(), x1.v.end());
        if (trace) {
            lt.block_x1.push_back(x1);
            lt.block_x2.push_back(x2);
        }
    }
    modq::ModVector x(q, x_all);

    modq::ModMatrix AZ = modq::mat_mul(A, Z);
    for (u32 e : AZ.a) require(e % 2 == 0, errc::internal, "A.Z must vanish mod 2");
    modq::ModMatrix Ap = modq::ModMatrix::zeros(q / 2, AZ.rows, AZ.cols);
    for (size_t i = 0; i < AZ.a.size(); ++i) Ap.a[i] = AZ.a[i] / 2;

    modq::ModVector Ax = modq::mat_vec_mul(A, x);
    modq::ModVector diff = modq::vec_sub(y, Ax);
    for (u32 e : diff.v) require(e % 2 == 0, errc::internal, "y - A.x must vanish mod 2");
    std::vector<u32> yp(diff.len());
    for (size_t i = 0; i < yp.size(); ++i) yp[i] = diff[i] / 2;

    if (trace) {
        lt.shares = shares;
        lt.pads = pads;
        lt.partial_x = x;
        lt.reduced_A = Ap;
        lt.reduced_y = modq::ModVector(q / 2, yp);
        for (u64 i = 0; i < mp; ++i) {
            std::vector<u32> col(width);
            for (u32 j = 0; j < width; ++j) col[j] = Z(i * width + j, i);
            lt.offsets.emplace_back(q, col);
        }
        trace->levels.push_back(std::move(lt));
    }

    auto sub = solve_level(Ap, modq::ModVector(q / 2, yp), n, level - 1, tape, trace);
    if (!sub) return std::nullopt;

    // x_F = x + Z x' mod q; stays binary because the offsets are signed.
    std::vector<u32> xf = x.v;
    for (u64 i = 0; i < mp; ++i) {
        if (!(*sub)[i]) continue;
        for (u32 j = 0; j < width; ++j)
            xf[i * width + j] = u32((xf[i * width + j] + Z(i * width + j, i)) % q);
    }
    for (u32 e : xf) require(e <= 1, errc::internal, "solution left {0,1}^m");
    return xf;
}

}  // namespace detail

// Algorithm: recursive block solver for A x = y mod 2^l with x in {0,1}^m,
// driven by an explicit randomness tape.
inline SolverOutput solve(const modq::ModMatrix& A, const modq::ModVector& y,
                          const SolverTape& tape, SolverTrace* trace = nullptr) {
    SolverParams p = detail::params_of(A);
    require(y.modulus == A.modulus && y.len() == A.rows, errc::dimension_mismatch,
            "y does not match A");
    require(tape.bits.size() == tape_length(p), errc::bad_input,
            "tape must hold exactly m - nl = " + std::to_string(tape_length(p)) + " bits");

    SolverTape consuming = tape;
    consuming.cursor = 0;
    auto sol = detail::solve_level(A, y, p.n, p.l, consuming, trace);
    SolverOutput out;
    out.tape = tape;
    if (!sol) {
        out.aborted = true;
        return out;
    }
    require(consuming.cursor == consuming.bits.size(), errc::internal,
            "non-aborting run must consume the whole tape");
    out.x = modq::ModVector(A.modulus, *sol);
    modq::ModVector check = modq::mat_vec_mul(A, out.x);
    require(check == y, errc::internal, "solver produced an invalid solution");
    return out;
}

namespace detail {

inline void recover_level(const modq::ModMatrix& A, const modq::ModVector& y,
                          const modq::ModVector& xF, u32 n, u32 level,
                          std::vector<uint8_t>& bits) {
    const u32 width = 2 * n + 1;
    modq::ModMatrix A2 = modq::mod_view(A, 2);
    modq::ModVector x2 = modq::mod_view(xF, 2);

    if (level == 1) {
        require(modq::rank_gf2(A2) >= n, errc::not_reachable,
                "rank-deficient instance: the solver aborts, so this solution is outside its image");
        modq::ModMatrix B = modq::extend_to_invertible_p2(A2);
        modq::ModVector u = modq::mat_vec_mul(B, x2);
        for (u32 j = 0; j < n + 1; ++j) bits.push_back(uint8_t(u[j]));
        return;
    }

    u64 mp = pow_u64(width, level - 1);
    std::vector<modq::ModMatrix> blocks = modq::block_split(A2, width);
    for (const auto& blk : blocks)
        require(modq::rank_gf2(blk) >= n, errc::not_reachable,
                "rank-deficient block: the solver aborts, so this solution is outside its image");

    const u32 q = A.modulus;
    std::vector<uint8_t> pad_bits;
    std::vector<u32> x_all;
    modq::ModMatrix Z = modq::ModMatrix::zeros(q, A.cols, mp);
    std::vector<u32> sub_x(mp, 0);
    for (u64 i = 0; i < mp; ++i) {
        modq::ModMatrix ext = modq::extend_full_rank_p1(blocks[i], 2 * n);
        std::vector<u32> xfi(x2.v.begin() + i * width, x2.v.begin() + (i + 1) * width);
        modq::ModVector t = modq::mat_vec_mul(ext, modq::ModVector(2, xfi));
        // t = (y_i || u_i); shares for i < m'-1 feed the tape, u_i always does.
        if (i + 1 < mp)
            for (u32 j = 0; j < n; ++j) bits.push_back(uint8_t(t[j]));
        for (u32 j = 0; j < n; ++j) pad_bits.push_back(uint8_t(t[n + j]));

        auto sol = modq::solve_affine_gf2(ext, t);
        require(sol && sol->kernel_basis.size() == 1, errc::internal, "block recovery failed");
        modq::ModVector x1 = sol->particular;
        modq::ModVector xb = modq::vec_add(sol->particular, sol->kernel_basis[0]);
        if (!lex_le(x1, xb)) std::swap(x1, xb);
        sub_x[i] = xfi == x1.v ? 0 : 1;
        require(sub_x[i] == 0 || xfi == xb.v, errc::internal,
                "solution block matches neither candidate");
        for (u32 j = 0; j < width; ++j) {
            i64 d = i64(xb[j]) - i64(x1[j]);
            Z.at(i * width + j, i) = u32((d + q) % q);
        }
        x_all.insert(x_all.end(), x1.v.begin(), x1.v.end());
    }
    bits.insert(bits.end(), pad_bits.begin(), pad_bits.end());

    modq::ModVector x(q, x_all);
    modq::ModMatrix AZ = modq::mat_mul(A, Z);
    modq::ModMatrix Ap = modq::ModMatrix::zeros(q / 2, AZ.rows, AZ.cols);
    for (size_t i = 0; i < AZ.a.size(); ++i) Ap.a[i] = AZ.a[i] / 2;
    modq::ModVector diff = modq::vec_sub(y, modq::mat_vec_mul(A, x));
    std::vector<u32> yp(diff.len());
    for (size_t i = 0; i < yp.size(); ++i) yp[i] = diff[i] / 2;

    recover_level(Ap, modq::ModVector(q / 2, yp), modq::ModVector(q / 2, sub_x), n, level - 1,
                  bits);
}

}  // namespace detail

// Reconstructs the unique tape r with solve(A, y, r) = x_F, in the exact bit
// order solve consumes.
inline SolverTape recover(const modq::ModMatrix& A, const modq::ModVector& y,
                          const modq::ModVector& xF) {
    SolverParams p = detail::params_of(A);
    require(y.modulus == A.modulus && y.len() == A.rows, errc::dimension_mismatch,
            "y does not match A");
    require(xF.modulus == A.modulus && xF.len() == A.cols, errc::dimension_mismatch,
            "x_F does not match A");
    for (u32 e : xF.v)
        require(e <= 1, errc::bad_input, "x_F must lie in {0,1}^m");
    require(modq::mat_vec_mul(A, xF) == y, errc::bad_input, "x_F does not satisfy A x = y mod q");

    SolverTape t;
    t.bits.reserve(tape_length(p));
    detail::recover_level(A, y, xF, p.n, p.l, t.bits);
    require(t.bits.size() == tape_length(p), errc::internal, "recovered tape has wrong length");
    return t;
}

// Brute-force audit oracle: exactly {x in {0,1}^m : A x = y mod q}, sorted
// lexicographically (coordinate 0 most significant).
inline std::vector<modq::ModVector> enumerate_solutions(const modq::ModMatrix& A,
                                                        const modq::ModVector& y) {
    require(y.modulus == A.modulus && y.len() == A.rows, errc::dimension_mismatch,
            "y does not match A");
    require(A.cols <= 24, errc::cap_exceeded, "2^m enumeration capped at m = 24");
    u32 q = A.modulus;
    u64 total = u64(1) << A.cols;
    std::vector<modq::ModVector> out;
    std::vector<u32> x(A.cols, 0);
    for (u64 c = 0; c < total; ++c) {
        for (size_t j = 0; j < A.cols; ++j) x[j] = u32((c >> (A.cols - 1 - j)) & 1);
        modq::ModVector xv(q, x);
        if (modq::mat_vec_mul(A, xv) == y) out.push_back(std::move(xv));
    }
    return out;
}

// Exhaustive tape enumeration vs the uniform distribution on the solution
// set; abort outcomes land on a separate atom.
struct UniformityAudit {
    double epsilon = 1.0;   // total-variation distance to solution-uniform
    double fidelity = 0.0;  // F(p_y, u_y) = sum sqrt(p u)
    double coverage = 0.0;  // fraction of solutions the solver reaches
    u64 solutions = 0;
    u64 hits = 0;
    double abort_mass = 0.0;
};

inline UniformityAudit uniformity_audit(const modq::ModMatrix& A, const modq::ModVector& y) {
    SolverParams p = detail::params_of(A);
    u64 len = tape_length(p);
    require(len <= 22, errc::cap_exceeded, "tape space enumeration capped at 2^22");
    std::vector<modq::ModVector> sols = enumerate_solutions(A, y);

    u64 ntapes = u64(1) << len;
    std::map<std::vector<u32>, u64> hits;
    u64 aborts = 0;
    SolverTape t;
    t.bits.resize(len);
    for (u64 c = 0; c < ntapes; ++c) {
        for (u64 j = 0; j < len; ++j) t.bits[j] = uint8_t((c >> (len - 1 - j)) & 1);
        SolverOutput out = solve(A, y, t);
        if (out.aborted) ++aborts;
        else ++hits[out.x.v];
    }

    UniformityAudit audit;
    audit.solutions = sols.size();
    audit.abort_mass = double(aborts) / double(ntapes);
    if (sols.empty()) {
        audit.epsilon = 1.0;
        audit.fidelity = 0.0;
        audit.coverage = 0.0;
        return audit;
    }
    double u = 1.0 / double(sols.size());
    double tv = audit.abort_mass;  // u_y puts no mass on the abort atom
    double fid = 0.0;
    u64 covered = 0;
    for (const auto& s : sols) {
        auto it = hits.find(s.v);
        double ps = it == hits.end() ? 0.0 : double(it->second) / double(ntapes);
        if (it != hits.end()) ++covered;
        tv += std::abs(ps - u);
        fid += std::sqrt(ps * u);
    }
    audit.epsilon = tv / 2.0;
    audit.fidelity = fid;
    audit.coverage = double(covered) / double(sols.size());
    audit.hits = covered;
    require(audit.fidelity >= 1.0 - audit.epsilon - 1e-12, errc::internal,
            "fidelity fell below 1 - epsilon");
    return audit;
}

struct AbortEstimate {
    double rate = 0.0;
    double lo = 0.0, hi = 1.0;  // Wilson 95% interval
    u64 trials = 0, aborts = 0;
};

// Monte Carlo over uniform A (and a fresh random tape) of the abort event.
inline AbortEstimate abort_probability(const SolverParams& p, u64 trials, u64 seed) {
    require(trials >= 1, errc::bad_input, "need at least one trial");
    Rng root = Rng::seeded(seed);
    AbortEstimate est;
    est.trials = trials;
    for (u64 t = 0; t < trials; ++t) {
        Rng r = root.fork("abort-trial", t);
        std::vector<u32> entries(size_t(p.n) * p.m);
        for (auto& e : entries) e = u32(r.below(p.q));
        modq::ModMatrix A(p.q, p.n, size_t(p.m), std::move(entries));
        std::vector<u32> yv(p.n);
        for (auto& e : yv) e = u32(r.below(p.q));
        SolverTape tape = random_tape(p, r);
        if (solve(A, modq::ModVector(p.q, yv), tape).aborted) ++est.aborts;
    }
    est.rate = double(est.aborts) / double(est.trials);
    const double z = 1.959963984540054;
    double nn = double(est.trials);
    double ph = est.rate;
    double denom = 1.0 + z * z / nn;
    double center = (ph + z * z / (2.0 * nn)) / denom;
    double half = z * std::sqrt(ph * (1.0 - ph) / nn + z * z / (4.0 * nn * nn)) / denom;
    est.lo = std::max(0.0, center - half);
    est.hi = std::min(1.0, center + half);
    return est;
}

}  // namespace rdl::isis
