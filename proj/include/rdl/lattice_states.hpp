#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "rdl/amplitude.hpp"
#include "rdl/modq.hpp"
#include "rdl/statevec.hpp"
#include "rdl/util.hpp"

namespace rdl::lat {

constexpr double kZeroWeight = 1e-12;

inline cx omega_pow(u32 q, u64 e) {
    double ang = 2.0 * std::numbers::pi * double(e % q) / double(q);
    return cx(std::cos(ang), std::sin(ang));
}

inline u64 dot_mod(const modq::ModVector& a, const modq::ModVector& b) {
    require(a.modulus == b.modulus && a.len() == b.len(), errc::dimension_mismatch, "dot shapes");
    u64 acc = 0;
    for (size_t i = 0; i < a.len(); ++i) acc = (acc + u64(a[i]) * b[i]) % a.modulus;
    return acc;
}

// The fiber {x in Z_q^m : A x = y mod q} under canonical representatives,
// with its weight w_y = q^{2n} sum_{x in fiber} |fhat(x)|^2.
struct DualFiber {
    modq::ModVector y;
    std::vector<modq::ModVector> elements;
    double weight = 0.0;
};

namespace detail {

inline u32 inv_mod_prime(u32 a, u32 p) {
    // Fermat: a^(p-2) mod p.
    u64 r = 1, base = a % p;
    u32 e = p - 2;
    while (e) {
        if (e & 1) r = r * base % p;
        base = base * base % p;
        e >>= 1;
    }
    return u32(r);
}

inline bool is_prime(u32 q) {
    if (q < 2) return false;
    for (u32 d = 2; u64(d) * d <= q; ++d)
        if (q % d == 0) return false;
    return true;
}

// Gaussian elimination over F_p: particular solution + kernel basis, or
// nullopt when inconsistent.
struct PrimeAffine {
    modq::ModVector particular;
    std::vector<modq::ModVector> kernel;
};

inline std::optional<PrimeAffine> solve_affine_prime(const modq::ModMatrix& A,
                                                     const modq::ModVector& y) {
    u32 p = A.modulus;
    size_t rows = A.rows, cols = A.cols;
    std::vector<std::vector<u32>> aug(rows, std::vector<u32>(cols + 1));
    for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < cols; ++j) aug[i][j] = A(i, j);
        aug[i][cols] = y[i];
    }
    std::vector<size_t> pivot_cols;
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t piv = r;
        while (piv < rows && aug[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(aug[r], aug[piv]);
        u32 inv = inv_mod_prime(aug[r][c], p);
        for (size_t j = c; j <= cols; ++j) aug[r][j] = u32(u64(aug[r][j]) * inv % p);
        for (size_t i = 0; i < rows; ++i) {
            if (i == r || aug[i][c] == 0) continue;
            u64 f = aug[i][c];
            for (size_t j = c; j <= cols; ++j)
                aug[i][j] = u32((aug[i][j] + (p - 1) * f % p * aug[r][j]) % p);
        }
        pivot_cols.push_back(c);
        ++r;
    }
    for (size_t i = r; i < rows; ++i)
        if (aug[i][cols] != 0) return std::nullopt;
    modq::ModVector part = modq::ModVector::zeros(p, cols);
    for (size_t i = 0; i < pivot_cols.size(); ++i) part.at(pivot_cols[i]) = aug[i][cols];
    std::vector<modq::ModVector> kernel;
    size_t next = 0;
    for (size_t c = 0; c < cols; ++c) {
        if (next < pivot_cols.size() && pivot_cols[next] == c) {
            ++next;
            continue;
        }
        modq::ModVector k = modq::ModVector::zeros(p, cols);
        k.at(c) = 1;
        for (size_t i = 0; i < pivot_cols.size(); ++i)
            k.at(pivot_cols[i]) = (p - aug[i][c]) % p;
        kernel.push_back(std::move(k));
    }
    return PrimeAffine{std::move(part), std::move(kernel)};
}

}  // namespace detail

// Particular solution + kernel coset when q is prime, exhaustive scan
// otherwise.
inline DualFiber enumerate_fiber(const modq::ModMatrix& A, const modq::ModVector& y,
                                 const amp::AmplitudeTable& fhat) {
    require(A.modulus == y.modulus && A.rows == y.len(), errc::dimension_mismatch,
            "A and y are incompatible");
    require(fhat.q == A.modulus && fhat.m == A.cols, errc::dimension_mismatch,
            "fhat does not match the instance");
    u32 q = A.modulus;
    u32 m = u32(A.cols);
    DualFiber out{y, {}, 0.0};

    if (detail::is_prime(q)) {
        auto sol = detail::solve_affine_prime(A, y);
        if (!sol) return out;
        u32 k = u32(sol->kernel.size());
        u64 count = pow_u64(q, k);
        require(count <= caps().dense, errc::cap_exceeded, "fiber too large to enumerate");
        out.elements.reserve(count);
        std::vector<u32> coeff;
        for (u64 t = 0; t < count; ++t) {
            amp::digits_of(t, q, k, coeff);
            modq::ModVector x = sol->particular;
            for (u32 j = 0; j < k; ++j) {
                if (!coeff[j]) continue;
                for (size_t c = 0; c < m; ++c)
                    x.at(c) = u32((x[c] + u64(coeff[j]) * sol->kernel[j][c]) % q);
            }
            out.elements.push_back(std::move(x));
        }
    } else {
        u64 n = pow_u64(q, m);
        require(n <= caps().dense, errc::cap_exceeded, "q^m exceeds dense cap");
        std::vector<u32> digits;
        for (u64 i = 0; i < n; ++i) {
            amp::digits_of(i, q, m, digits);
            modq::ModVector x(q, digits);
            if (modq::mat_vec_mul(A, x) == y) out.elements.push_back(std::move(x));
        }
    }
    std::sort(out.elements.begin(), out.elements.end(),
              [](const modq::ModVector& a, const modq::ModVector& b) { return a.v < b.v; });
    double mass = 0.0;
    for (const auto& x : out.elements) mass += std::norm(fhat.value(amp::index_of(x.v, q)));
    out.weight = double(pow_u64(q, 2 * u32(A.rows))) * mass;
    return out;
}

// All weights w_y indexed by the mixed-radix index of y, in one pass over
// Z_q^m.
inline std::vector<double> all_weights(const modq::ModMatrix& A, const amp::AmplitudeTable& fhat) {
    require(fhat.q == A.modulus && fhat.m == A.cols, errc::dimension_mismatch,
            "fhat does not match the instance");
    u32 q = A.modulus;
    u32 n = u32(A.rows), m = u32(A.cols);
    u64 np = pow_u64(q, m);
    require(np <= caps().dense, errc::cap_exceeded, "q^m exceeds dense cap");
    std::vector<double> w(pow_u64(q, n), 0.0);
    std::vector<u32> digits;
    for (u64 i = 0; i < np; ++i) {
        amp::digits_of(i, q, m, digits);
        modq::ModVector y = modq::mat_vec_mul(A, modq::ModVector(q, digits));
        w[amp::index_of(y.v, q)] += std::norm(fhat.value(i));
    }
    double scale = double(pow_u64(q, 2 * n));
    for (auto& v : w) v *= scale;
    return w;
}

// |psi_s> = sum_e f(e) |A^T s + e>.
inline sv::StateVector build_psi(const modq::ModMatrix& A, const amp::AmplitudeTable& f,
                                 const modq::ModVector& s) {
    require(f.q == A.modulus && f.m == A.cols, errc::dimension_mismatch, "f does not match A");
    require(s.modulus == A.modulus && s.len() == A.rows, errc::dimension_mismatch,
            "s does not match A");
    u32 q = A.modulus;
    u32 m = u32(A.cols);
    modq::ModVector shift = modq::mat_vec_mul(modq::transpose(A), s);
    sv::StateVector psi{sv::RegisterLayout({sv::Register::qdigits(q, m)})};
    u64 np = psi.layout.total;
    std::vector<u32> digits;
    for (u64 v = 0; v < np; ++v) {
        amp::digits_of(v, q, m, digits);
        for (u32 j = 0; j < m; ++j) digits[j] = (digits[j] + q - shift[j]) % q;
        psi.amp[v] = f.value(amp::index_of(digits, q));
    }
    return psi;
}

// |W_y>, built in the Fourier domain as (q^n / sqrt(w_y)) sum_{x in fiber}
// fhat(x) |x> followed by an inverse QFT; returns the state and w_y.
inline std::pair<sv::StateVector, double> build_w(const modq::ModMatrix& A,
                                                  const amp::AmplitudeTable& f,
                                                  const modq::ModVector& y) {
    amp::AmplitudeTable fhat = amp::fourier_of(f);
    DualFiber fiber = enumerate_fiber(A, y, fhat);
    require(fiber.weight > kZeroWeight, errc::empty_fiber,
            "w_y vanishes; |W_y> is undefined for this y");
    u32 q = A.modulus;
    u32 m = u32(A.cols);
    sv::StateVector w{sv::RegisterLayout({sv::Register::qdigits(q, m)})};
    double scale = double(pow_u64(q, u32(A.rows))) / std::sqrt(fiber.weight);
    for (const auto& x : fiber.elements)
        w.amp[amp::index_of(x.v, q)] = fhat.value(amp::index_of(x.v, q)) * scale;
    w = sv::qft_register(w, 0, sv::Direction::inverse);
    return {std::move(w), fiber.weight};
}

// Appends a syndrome register: QFT, |x>|0> -> |x>|Ax>, inverse QFT. Inputs in
// span{|W_y>} come out as sum_y alpha_y |W_y>|y>.
inline sv::StateVector append_syndrome(const sv::StateVector& state, const modq::ModMatrix& A) {
    require(state.layout.regs.size() == 1, errc::bad_input,
            "append_syndrome expects a single-register state");
    const sv::Register& reg = state.layout.regs[0];
    require(!reg.has_bottom && reg.radices.size() == A.cols, errc::dimension_mismatch,
            "register is not a Z_q^m register matching A");
    for (u32 r : reg.radices)
        require(r == A.modulus, errc::modulus_mismatch, "register radix != modulus of A");

    sv::StateVector joint{sv::RegisterLayout(
        {reg, sv::Register::qdigits(A.modulus, u32(A.rows))})};
    u64 stride = joint.layout.strides[0];
    for (u64 v = 0; v < state.layout.total; ++v) joint.amp[v * stride] = state.amp[v];
    joint = sv::qft_register(joint, 0, sv::Direction::forward);
    joint = sv::add_matrix_register(joint, 0, 1, A, +1);
    joint = sv::qft_register(joint, 0, sv::Direction::inverse);
    return joint;
}

// p_max = (E_y sqrt(w_y / q^n))^2.
inline double pmax_from_weights(const std::vector<double>& w, u32 q, u32 n) {
    double qn = double(pow_u64(q, n));
    double acc = 0.0;
    for (double v : w) acc += std::sqrt(std::max(0.0, v) / qn);
    acc /= double(w.size());
    return acc * acc;
}

inline double pmax_formula(const modq::ModMatrix& A, const amp::AmplitudeTable& f) {
    amp::AmplitudeTable fhat = amp::fourier_of(f);
    return pmax_from_weights(all_weights(A, fhat), A.modulus, u32(A.rows));
}

// E_s |<Y_s|psi_s>|^2 with Y_s = (1/sqrt(q^n)) sum_y w^{y.s} |W_y>, by
// explicit construction of every Y_s and psi_s.
inline double pgm_success_direct(const modq::ModMatrix& A, const amp::AmplitudeTable& f) {
    u32 q = A.modulus;
    u32 n = u32(A.rows), m = u32(A.cols);
    amp::AmplitudeTable fhat = amp::fourier_of(f);
    std::vector<double> w = all_weights(A, fhat);
    u64 qn = pow_u64(q, n);
    u64 qm = pow_u64(q, m);

    std::vector<std::vector<cx>> ws(qn);
    std::vector<u32> ydig;
    for (u64 yi = 0; yi < qn; ++yi) {
        if (w[yi] <= kZeroWeight) continue;  // zero-weight fibers are skipped
        amp::digits_of(yi, q, n, ydig);
        auto [wy, weight] = build_w(A, f, modq::ModVector(q, ydig));
        ws[yi] = std::move(wy.amp);
    }

    double total = 0.0;
    std::vector<u32> sdig;
    std::vector<cx> ys(qm);
    for (u64 si = 0; si < qn; ++si) {
        amp::digits_of(si, q, n, sdig);
        modq::ModVector s(q, sdig);
        std::fill(ys.begin(), ys.end(), cx(0.0));
        for (u64 yi = 0; yi < qn; ++yi) {
            if (ws[yi].empty()) continue;
            amp::digits_of(yi, q, n, ydig);
            cx phase = omega_pow(q, dot_mod(modq::ModVector(q, ydig), s));
            for (u64 v = 0; v < qm; ++v) ys[v] += phase * ws[yi][v];
        }
        double inv = 1.0 / std::sqrt(double(qn));
        sv::StateVector psi = build_psi(A, f, s);
        cx ov = 0.0;
        for (u64 v = 0; v < qm; ++v) ov += std::conj(ys[v] * inv) * psi.amp[v];
        total += std::norm(ov);
    }
    return total / double(qn);
}

}  // namespace rdl::lat
