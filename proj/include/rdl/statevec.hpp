#pragma once

#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <vector>

#include "rdl/amplitude.hpp"
#include "rdl/modq.hpp"
#include "rdl/rng.hpp"
#include "rdl/util.hpp"

namespace rdl::sv {

// One register: a list of digit radices (digit 0 most significant) plus an
// optional bottom slot that extends the register's index range by 1.
struct Register {
    std::vector<u32> radices;
    bool has_bottom = false;

    static Register qdigits(u32 q, u32 count, bool bottom = false) {
        return Register{std::vector<u32>(count, q), bottom};
    }
    u64 digits_dim() const {
        u64 d = 1;
        for (u32 r : radices) d *= r;
        return d;
    }
    u64 dim() const { return digits_dim() + (has_bottom ? 1 : 0); }
    u64 bottom_index() const { return digits_dim(); }
};

// Registers in declaration order, register 0 most significant.
struct RegisterLayout {
    std::vector<Register> regs;
    std::vector<u64> dims;
    std::vector<u64> strides;
    u64 total = 1;

    RegisterLayout() = default;
    explicit RegisterLayout(std::vector<Register> r) : regs(std::move(r)) {
        dims.resize(regs.size());
        strides.assign(regs.size(), 1);
        for (size_t k = 0; k < regs.size(); ++k) dims[k] = regs[k].dim();
        total = 1;
        for (size_t k = regs.size(); k-- > 0;) {
            strides[k] = total;
            total *= dims[k];
        }
        require(total <= caps().state, errc::cap_exceeded,
                "state dimension " + std::to_string(total) + " exceeds cap " +
                    std::to_string(caps().state));
    }

    u64 reg_value(u64 index, size_t k) const { return (index / strides[k]) % dims[k]; }

    bool same_shape(const RegisterLayout& o) const {
        if (regs.size() != o.regs.size()) return false;
        for (size_t k = 0; k < regs.size(); ++k)
            if (regs[k].radices != o.regs[k].radices || regs[k].has_bottom != o.regs[k].has_bottom)
                return false;
        return true;
    }
};

struct StateVector {
    RegisterLayout layout;
    std::vector<cx> amp;

    StateVector() = default;
    explicit StateVector(RegisterLayout l) : layout(std::move(l)), amp(layout.total, cx(0.0)) {}
};

inline StateVector basis_state(RegisterLayout l, const std::vector<u64>& reg_values) {
    StateVector s(std::move(l));
    require(reg_values.size() == s.layout.regs.size(), errc::dimension_mismatch,
            "one value per register expected");
    u64 idx = 0;
    for (size_t k = 0; k < reg_values.size(); ++k) {
        require(reg_values[k] < s.layout.dims[k], errc::bad_input, "register value out of range");
        idx += reg_values[k] * s.layout.strides[k];
    }
    s.amp[idx] = 1.0;
    return s;
}

inline double norm(const StateVector& s) {
    double n = 0.0;
    for (cx v : s.amp) n += std::norm(v);
    return std::sqrt(n);
}

inline cx inner(const StateVector& u, const StateVector& v) {
    require(u.layout.same_shape(v.layout), errc::dimension_mismatch, "inner: layouts differ");
    cx acc = 0.0;
    for (size_t i = 0; i < u.amp.size(); ++i) acc += std::conj(u.amp[i]) * v.amp[i];
    return acc;
}

enum class Direction { forward, inverse };

namespace detail {

inline void find_register(const RegisterLayout& l, size_t k) {
    require(k < l.regs.size(), errc::bad_input, "register id out of range");
}

// Per-digit DFT on the digits part of one register slice; bottom slot fixed.
inline void transform_slice(std::vector<cx>& slice, const Register& reg,
                            const std::vector<std::vector<cx>>& kernels) {
    u64 dd = reg.digits_dim();
    std::vector<cx> buf;
    u64 stride = dd;
    for (size_t j = 0; j < reg.radices.size(); ++j) {
        u32 r = reg.radices[j];
        stride /= r;
        const auto& K = kernels[j];
        buf.assign(r, 0.0);
        for (u64 base = 0; base < dd; base += stride * r) {
            for (u64 off = 0; off < stride; ++off) {
                u64 p = base + off;
                for (u32 x = 0; x < r; ++x) {
                    cx acc = 0.0;
                    for (u32 y = 0; y < r; ++y) acc += K[size_t(x) * r + y] * slice[p + u64(y) * stride];
                    buf[x] = acc;
                }
                for (u32 x = 0; x < r; ++x) slice[p + u64(x) * stride] = buf[x];
            }
        }
    }
}

}  // namespace detail

// q-point DFT with kernel w^{xy}/sqrt(q) on each digit independently;
// identity on the bottom slot.
inline StateVector qft_register(const StateVector& s, size_t k, Direction dir) {
    detail::find_register(s.layout, k);
    const Register& reg = s.layout.regs[k];
    int sign = dir == Direction::forward ? +1 : -1;
    std::vector<std::vector<cx>> kernels;
    kernels.reserve(reg.radices.size());
    for (u32 r : reg.radices) kernels.push_back(amp::detail::dft_kernel(r, sign));

    StateVector out = s;
    u64 st = s.layout.strides[k];
    u64 dim = s.layout.dims[k];
    u64 span = st * dim;
    std::vector<cx> slice(reg.digits_dim());
    for (u64 base = 0; base < s.layout.total; base += span) {
        for (u64 off = 0; off < st; ++off) {
            u64 p = base + off;
            for (u64 r = 0; r < slice.size(); ++r) slice[r] = out.amp[p + r * st];
            detail::transform_slice(slice, reg, kernels);
            for (u64 r = 0; r < slice.size(); ++r) out.amp[p + r * st] = slice[r];
        }
    }
    return out;
}

// Basis map |x> -> |x + z mod q> on the register's digits; bottom fixed.
inline StateVector shift_register(const StateVector& s, size_t k, const modq::ModVector& z) {
    detail::find_register(s.layout, k);
    const Register& reg = s.layout.regs[k];
    require(z.len() == reg.radices.size(), errc::dimension_mismatch, "shift: digit count mismatch");
    for (u32 r : reg.radices)
        require(r == z.modulus, errc::modulus_mismatch, "shift: register radix != z modulus");

    u64 dd = reg.digits_dim();
    std::vector<u64> perm(s.layout.dims[k]);
    std::vector<u32> digits;
    for (u64 v = 0; v < dd; ++v) {
        amp::digits_of(v, z.modulus, u32(z.len()), digits);
        for (size_t j = 0; j < digits.size(); ++j) digits[j] = (digits[j] + z[j]) % z.modulus;
        perm[v] = amp::index_of(digits, z.modulus);
    }
    if (reg.has_bottom) perm[dd] = dd;

    StateVector out(s.layout);
    u64 st = s.layout.strides[k];
    for (u64 i = 0; i < s.layout.total; ++i) {
        u64 v = s.layout.reg_value(i, k);
        out.amp[i + (perm[v] - v) * st] = s.amp[i];
    }
    return out;
}

// dst <- dst + sign * src (digitwise mod q); bottom values pass through.
inline StateVector add_register(const StateVector& s, size_t src, size_t dst, int sign) {
    detail::find_register(s.layout, src);
    detail::find_register(s.layout, dst);
    require(src != dst, errc::bad_input, "src and dst must differ");
    const Register& rs = s.layout.regs[src];
    const Register& rd = s.layout.regs[dst];
    require(rs.radices == rd.radices, errc::dimension_mismatch, "add_register: shapes differ");
    u32 q = rs.radices.empty() ? 2 : rs.radices[0];
    for (u32 r : rs.radices) require(r == q, errc::modulus_mismatch, "add_register: mixed radix");

    u32 m = u32(rs.radices.size());
    u64 dd = rs.digits_dim();
    StateVector out(s.layout);
    std::vector<u32> ds, dd2;
    for (u64 i = 0; i < s.layout.total; ++i) {
        u64 sv = s.layout.reg_value(i, src);
        u64 dv = s.layout.reg_value(i, dst);
        if (sv >= dd || dv >= dd) {
            out.amp[i] = s.amp[i];
            continue;
        }
        amp::digits_of(sv, q, m, ds);
        amp::digits_of(dv, q, m, dd2);
        for (u32 j = 0; j < m; ++j)
            dd2[j] = u32((dd2[j] + (sign > 0 ? ds[j] : q - ds[j])) % q);
        u64 nv = amp::index_of(dd2, q);
        out.amp[i + (nv - dv) * s.layout.strides[dst]] = s.amp[i];
    }
    return out;
}

// dst <- dst + sign * (M . src) mod q, the reversible linear map used for
// syndrome computation and controlled shifts.
inline StateVector add_matrix_register(const StateVector& s, size_t src, size_t dst,
                                       const modq::ModMatrix& M, int sign) {
    detail::find_register(s.layout, src);
    detail::find_register(s.layout, dst);
    require(src != dst, errc::bad_input, "src and dst must differ");
    const Register& rs = s.layout.regs[src];
    const Register& rd = s.layout.regs[dst];
    require(M.cols == rs.radices.size() && M.rows == rd.radices.size(), errc::dimension_mismatch,
            "matrix shape does not match registers");
    u32 q = M.modulus;
    for (u32 r : rs.radices) require(r == q, errc::modulus_mismatch, "src radix != modulus");
    for (u32 r : rd.radices) require(r == q, errc::modulus_mismatch, "dst radix != modulus");

    // Precompute M.x for every src value.
    u64 sdd = rs.digits_dim();
    std::vector<std::vector<u32>> delta(sdd);
    std::vector<u32> digits;
    for (u64 v = 0; v < sdd; ++v) {
        amp::digits_of(v, q, u32(M.cols), digits);
        modq::ModVector mx = modq::mat_vec_mul(M, modq::ModVector(q, digits));
        delta[v] = mx.v;
    }

    u64 ddd = rd.digits_dim();
    StateVector out(s.layout);
    std::vector<u32> dst_digits;
    for (u64 i = 0; i < s.layout.total; ++i) {
        u64 svv = s.layout.reg_value(i, src);
        u64 dvv = s.layout.reg_value(i, dst);
        if (svv >= sdd || dvv >= ddd) {
            out.amp[i] = s.amp[i];
            continue;
        }
        amp::digits_of(dvv, q, u32(M.rows), dst_digits);
        const auto& d = delta[svv];
        for (size_t j = 0; j < dst_digits.size(); ++j)
            dst_digits[j] = u32((dst_digits[j] + (sign > 0 ? d[j] : q - d[j])) % q);
        u64 nv = amp::index_of(dst_digits, q);
        out.amp[i + (nv - dvv) * s.layout.strides[dst]] = s.amp[i];
    }
    return out;
}

// One branch of the reference-mapping unitary: a phase times a Householder
// reflection sending v to |0...0> with real positive overlap.
struct ReferenceBranch {
    cx phase = 1.0;
    std::vector<cx> w;
    double wnorm2 = 0.0;
    bool trivial = true;
};

inline ReferenceBranch make_reference_branch(const std::vector<cx>& v) {
    double n2 = 0.0;
    for (cx x : v) n2 += std::norm(x);
    require(std::abs(std::sqrt(n2) - 1.0) < 1e-9, errc::bad_input, "branch vector is not unit");
    ReferenceBranch b;
    cx a = v[0];
    b.phase = std::abs(a) > 1e-14 ? a / std::abs(a) : cx(1.0);
    std::vector<cx> w(v.size());
    for (size_t i = 0; i < v.size(); ++i) w[i] = std::conj(b.phase) * v[i];
    w[0] -= 1.0;
    double wn = 0.0;
    for (cx x : w) wn += std::norm(x);
    if (wn < 1e-24) return b;  // already the reference state up to phase
    b.w = std::move(w);
    b.wnorm2 = wn;
    b.trivial = false;
    return b;
}

namespace detail {

inline void apply_branch(std::vector<cx>& u, const ReferenceBranch& b, bool inverse) {
    if (!inverse) {
        for (auto& x : u) x *= std::conj(b.phase);
        if (b.trivial) return;
        cx dot = 0.0;
        for (size_t i = 0; i < u.size(); ++i) dot += std::conj(b.w[i]) * u[i];
        cx c = 2.0 * dot / b.wnorm2;
        for (size_t i = 0; i < u.size(); ++i) u[i] -= c * b.w[i];
    } else {
        if (!b.trivial) {
            cx dot = 0.0;
            for (size_t i = 0; i < u.size(); ++i) dot += std::conj(b.w[i]) * u[i];
            cx c = 2.0 * dot / b.wnorm2;
            for (size_t i = 0; i < u.size(); ++i) u[i] -= c * b.w[i];
        }
        for (auto& x : u) x *= b.phase;
    }
}

}  // namespace detail

// On each control branch c with a vector v_c, applies the unitary sending
// v_c to the reference basis state; absent branches act as identity.
inline StateVector controlled_map_to_reference(const StateVector& s, size_t ctrl, size_t target,
                                               const std::map<u64, ReferenceBranch>& branches,
                                               bool inverse = false) {
    detail::find_register(s.layout, ctrl);
    detail::find_register(s.layout, target);
    require(ctrl != target, errc::bad_input, "ctrl and target must differ");
    for (const auto& [c, b] : branches) {
        require(c < s.layout.dims[ctrl], errc::bad_input, "branch control value out of range");
        if (!b.trivial)
            require(b.w.size() == s.layout.regs[target].digits_dim(), errc::dimension_mismatch,
                    "branch vector length != target dimension");
    }

    StateVector out = s;
    u64 st = s.layout.strides[target];
    u64 tdd = s.layout.regs[target].digits_dim();
    std::vector<cx> u(tdd);
    for (u64 i = 0; i < s.layout.total; ++i) {
        if (s.layout.reg_value(i, target) != 0) continue;
        auto it = branches.find(s.layout.reg_value(i, ctrl));
        if (it == branches.end()) continue;
        for (u64 t = 0; t < tdd; ++t) u[t] = out.amp[i + t * st];
        detail::apply_branch(u, it->second, inverse);
        for (u64 t = 0; t < tdd; ++t) out.amp[i + t * st] = u[t];
    }
    return out;
}

inline std::map<u64, ReferenceBranch> reference_branches(
    const std::map<u64, std::vector<cx>>& vectors) {
    std::map<u64, ReferenceBranch> out;
    for (const auto& [c, v] : vectors) out.emplace(c, make_reference_branch(v));
    return out;
}

inline std::vector<double> measure_probs(const StateVector& s, size_t k) {
    detail::find_register(s.layout, k);
    std::vector<double> probs(s.layout.dims[k], 0.0);
    for (u64 i = 0; i < s.layout.total; ++i) probs[s.layout.reg_value(i, k)] += std::norm(s.amp[i]);
    return probs;
}

// Renormalized conditional state for one outcome, with its probability.
inline std::pair<double, StateVector> collapse(const StateVector& s, size_t k, u64 outcome) {
    detail::find_register(s.layout, k);
    require(outcome < s.layout.dims[k], errc::bad_input, "outcome out of range");
    double p = 0.0;
    for (u64 i = 0; i < s.layout.total; ++i)
        if (s.layout.reg_value(i, k) == outcome) p += std::norm(s.amp[i]);
    require(p > 1e-30, errc::zero_probability, "conditioning on a zero-probability outcome");
    StateVector out(s.layout);
    double inv = 1.0 / std::sqrt(p);
    for (u64 i = 0; i < s.layout.total; ++i)
        if (s.layout.reg_value(i, k) == outcome) out.amp[i] = s.amp[i] * inv;
    return {p, std::move(out)};
}

inline std::pair<u64, StateVector> sample_measure(const StateVector& s, size_t k, Rng& rng) {
    std::vector<double> probs = measure_probs(s, k);
    double r = rng.uniform01();
    double acc = 0.0;
    u64 outcome = probs.size() - 1;
    for (u64 v = 0; v < probs.size(); ++v) {
        acc += probs[v];
        if (r < acc) {
            outcome = v;
            break;
        }
    }
    auto [p, st] = collapse(s, k, outcome);
    (void)p;
    return {outcome, std::move(st)};
}

// Debug dump: ASCII layout line, then little-endian (re, im) double pairs.
inline void dump_state(std::ostream& os, const StateVector& s) {
    static_assert(sizeof(double) == 8);
    std::string header;
    for (size_t k = 0; k < s.layout.regs.size(); ++k) {
        if (k) header += ';';
        const auto& reg = s.layout.regs[k];
        for (size_t j = 0; j < reg.radices.size(); ++j) {
            if (j) header += ',';
            header += std::to_string(reg.radices[j]);
        }
        if (reg.has_bottom) header += "+bot";
    }
    os << header << '\n';
    for (cx v : s.amp) {
        double re = v.real(), im = v.imag();
        os.write(reinterpret_cast<const char*>(&re), 8);
        os.write(reinterpret_cast<const char*>(&im), 8);
    }
}

inline StateVector load_state(std::istream& is) {
    std::string header;
    std::getline(is, header);
    std::vector<Register> regs;
    size_t pos = 0;
    while (pos <= header.size()) {
        size_t end = header.find(';', pos);
        std::string part = header.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
        Register reg;
        if (part.size() >= 4 && part.substr(part.size() - 4) == "+bot") {
            reg.has_bottom = true;
            part = part.substr(0, part.size() - 4);
        }
        size_t p2 = 0;
        while (p2 <= part.size()) {
            size_t e2 = part.find(',', p2);
            std::string tok = part.substr(p2, e2 == std::string::npos ? std::string::npos : e2 - p2);
            require(!tok.empty(), errc::bad_input, "malformed state header");
            reg.radices.push_back(u32(std::stoul(tok)));
            if (e2 == std::string::npos) break;
            p2 = e2 + 1;
        }
        regs.push_back(std::move(reg));
        if (end == std::string::npos) break;
        pos = end + 1;
    }
    StateVector s{RegisterLayout(std::move(regs))};
    for (auto& v : s.amp) {
        double re = 0, im = 0;
        is.read(reinterpret_cast<char*>(&re), 8);
        is.read(reinterpret_cast<char*>(&im), 8);
        require(bool(is), errc::bad_input, "truncated state dump");
        v = cx(re, im);
    }
    return s;
}

}  // namespace rdl::sv
