#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <set>
#include <vector>

#include "rdl/modq.hpp"
#include "rdl/util.hpp"

namespace rdl::amp {

// Mixed-radix index over Z_q^m with coordinate 0 most significant.
inline u64 index_of(const std::vector<u32>& digits, u32 q) {
    u64 i = 0;
    for (u32 d : digits) i = i * q + d;
    return i;
}

inline void digits_of(u64 index, u32 q, u32 m, std::vector<u32>& out) {
    out.assign(m, 0);
    for (u32 k = m; k-- > 0;) {
        out[k] = u32(index % q);
        index /= q;
    }
}

inline std::vector<u32> digits_of(u64 index, u32 q, u32 m) {
    std::vector<u32> out;
    digits_of(index, q, m, out);
    return out;
}

struct TargetSet {
    enum class Kind { binary, linf_ball, explicit_list };
    Kind kind = Kind::binary;
    u64 bound = 0;
    std::vector<modq::ModVector> elements;

    static TargetSet binary() { return TargetSet{Kind::binary, 0, {}}; }
    static TargetSet linf_ball(u64 b) { return TargetSet{Kind::linf_ball, b, {}}; }
    static TargetSet explicit_set(std::vector<modq::ModVector> elems) {
        require(!elems.empty(), errc::bad_input, "explicit target set is empty");
        std::set<std::vector<u32>> seen;
        for (const auto& e : elems)
            require(seen.insert(e.v).second, errc::bad_input, "explicit target set has duplicates");
        return TargetSet{Kind::explicit_list, 0, std::move(elems)};
    }

    bool contains(const modq::ModVector& x) const {
        switch (kind) {
            case Kind::binary:
                for (u32 e : x.v)
                    if (e > 1) return false;
                return true;
            case Kind::linf_ball: {
                for (u32 e : x.v) {
                    i64 l = modq::lift_entry(e, x.modulus);
                    if (u64(l < 0 ? -l : l) > bound) return false;
                }
                return true;
            }
            case Kind::explicit_list:
                for (const auto& e : elements)
                    if (e.v == x.v) return true;
                return false;
        }
        return false;
    }
};

// f : Z_q^m -> C with unit 2-norm, dense over q^m points or a per-coordinate
// product of m length-q tables. `dual`, when set, is the Fourier transform
// known at construction time (never lazily mutated).
struct AmplitudeTable {
    u32 q = 2, m = 1;
    bool product_form = false;
    std::vector<cx> dense;
    std::vector<std::vector<cx>> factors;
    std::shared_ptr<const AmplitudeTable> dual;

    u64 points() const { return pow_u64(q, m); }

    cx value(u64 index) const {
        if (!product_form) return dense[index];
        cx v = 1.0;
        for (u32 k = m; k-- > 0;) {
            v *= factors[k][index % q];
            index /= q;
        }
        return v;
    }

    std::vector<cx> to_dense() const {
        if (!product_form) return dense;
        u64 n = points();
        std::vector<cx> out(n, cx(1.0));
        u64 block = n;
        for (u32 k = 0; k < m; ++k) {
            block /= q;
            for (u64 i = 0; i < n; ++i) out[i] *= factors[k][(i / block) % q];
        }
        return out;
    }

    double norm2() const {
        if (product_form) {
            double p = 1.0;
            for (const auto& f : factors) {
                double s = 0.0;
                for (cx v : f) s += std::norm(v);
                p *= s;
            }
            return std::sqrt(p);
        }
        double s = 0.0;
        for (cx v : dense) s += std::norm(v);
        return std::sqrt(s);
    }
};

namespace detail {

inline void check_dims(u32 q, u32 m) {
    require(q >= 2 && m >= 1, errc::bad_input, "need q >= 2, m >= 1");
    u64 n = pow_u64(q, m);
    require(n <= caps().dense, errc::cap_exceeded,
            "q^m = " + std::to_string(n) + " exceeds dense cap " + std::to_string(caps().dense));
}

inline void check_normalized(const AmplitudeTable& f, const char* what) {
    require(std::abs(f.norm2() - 1.0) < 1e-9, errc::bad_input,
            std::string(what) + " is not unit-norm");
}

inline std::vector<cx> dft_kernel(u32 q, int sign) {
    std::vector<cx> k(size_t(q) * q);
    double scale = 1.0 / std::sqrt(double(q));
    for (u32 x = 0; x < q; ++x)
        for (u32 y = 0; y < q; ++y) {
            double ang = sign * 2.0 * std::numbers::pi * double(u64(x) * y % q) / double(q);
            k[size_t(x) * q + y] = cx(std::cos(ang), std::sin(ang)) * scale;
        }
    return k;
}

// In-place DFT along every axis of a dense table over Z_q^m.
inline void dft_all_axes(std::vector<cx>& data, u32 q, u32 m, int sign) {
    const std::vector<cx> K = dft_kernel(q, sign);
    std::vector<cx> buf(q);
    u64 n = data.size();
    u64 stride = n;
    for (u32 axis = 0; axis < m; ++axis) {
        stride /= q;
        for (u64 base = 0; base < n; base += stride * q) {
            for (u64 off = 0; off < stride; ++off) {
                u64 p = base + off;
                for (u32 x = 0; x < q; ++x) {
                    cx acc = 0.0;
                    const cx* row = &K[size_t(x) * q];
                    for (u32 y = 0; y < q; ++y) acc += row[y] * data[p + u64(y) * stride];
                    buf[x] = acc;
                }
                for (u32 x = 0; x < q; ++x) data[p + u64(x) * stride] = buf[x];
            }
        }
    }
}

}  // namespace detail

inline AmplitudeTable delta_family(u32 q, u32 m) {
    detail::check_dims(q, m);
    AmplitudeTable f;
    f.q = q;
    f.m = m;
    f.product_form = true;
    f.factors.assign(m, std::vector<cx>(q, 0.0));
    for (auto& fac : f.factors) fac[0] = 1.0;
    return f;
}

inline AmplitudeTable uniform_family(u32 q, u32 m) {
    detail::check_dims(q, m);
    AmplitudeTable f;
    f.q = q;
    f.m = m;
    f.product_form = true;
    f.factors.assign(m, std::vector<cx>(q, 1.0 / std::sqrt(double(q))));
    return f;
}

inline AmplitudeTable dense_family(u32 q, u32 m, std::vector<cx> values) {
    detail::check_dims(q, m);
    require(values.size() == pow_u64(q, m), errc::dimension_mismatch, "dense table size != q^m");
    AmplitudeTable f;
    f.q = q;
    f.m = m;
    f.dense = std::move(values);
    detail::check_normalized(f, "dense amplitude table");
    return f;
}

inline AmplitudeTable product_family(u32 q, u32 m, std::vector<std::vector<cx>> factors) {
    detail::check_dims(q, m);
    require(factors.size() == m, errc::dimension_mismatch, "need one factor per coordinate");
    for (auto& fac : factors)
        require(fac.size() == q, errc::dimension_mismatch, "factor length != q");
    AmplitudeTable f;
    f.q = q;
    f.m = m;
    f.product_form = true;
    f.factors = std::move(factors);
    detail::check_normalized(f, "product amplitude table");
    return f;
}

// Per-coordinate amplitudes sqrt(sum_k exp(-pi (x+kq)^2 / sigma^2)) on
// canonical lifts, wraparound truncated below 1e-15, then normalized.
inline AmplitudeTable gaussian_family(double sigma, u32 q, u32 m) {
    require(sigma > 0.0, errc::bad_input, "sigma must be positive");
    detail::check_dims(q, m);
    std::vector<cx> fac(q);
    double s2 = sigma * sigma;
    double total = 0.0;
    for (u32 x = 0; x < q; ++x) {
        double lift = double(modq::lift_entry(x, q));
        double rho = 0.0;
        for (int k = 0;; ++k) {
            double up = std::exp(-std::numbers::pi * (lift + double(k) * q) * (lift + double(k) * q) / s2);
            double down = k == 0 ? 0.0
                                 : std::exp(-std::numbers::pi * (lift - double(k) * q) * (lift - double(k) * q) / s2);
            rho += up + down;
            if (up < 1e-15 && down < 1e-15) break;
        }
        fac[x] = std::sqrt(rho);
        total += rho;
    }
    double inv = 1.0 / std::sqrt(total);
    for (auto& v : fac) v *= inv;
    AmplitudeTable f;
    f.q = q;
    f.m = m;
    f.product_form = true;
    f.factors.assign(m, fac);
    return f;
}

// Forward transform: fhat(x) = q^{-m/2} sum_y w^{x.y} f(y), w = e^{2 pi i / q}.
inline AmplitudeTable fourier(const AmplitudeTable& f, int sign = +1) {
    AmplitudeTable out;
    out.q = f.q;
    out.m = f.m;
    if (f.product_form) {
        out.product_form = true;
        const auto K = detail::dft_kernel(f.q, sign);
        out.factors.assign(f.m, std::vector<cx>(f.q, 0.0));
        for (u32 k = 0; k < f.m; ++k)
            for (u32 x = 0; x < f.q; ++x) {
                cx acc = 0.0;
                for (u32 y = 0; y < f.q; ++y) acc += K[size_t(x) * f.q + y] * f.factors[k][y];
                out.factors[k][x] = acc;
            }
    } else {
        out.dense = f.dense;
        detail::dft_all_axes(out.dense, f.q, f.m, sign);
    }
    require(std::abs(out.norm2() - 1.0) < 1e-9, errc::internal, "transform broke normalization");
    return out;
}

inline AmplitudeTable fourier_inverse(const AmplitudeTable& f) { return fourier(f, -1); }

// The Fourier transform of f, using the dual cached at construction when
// available.
inline AmplitudeTable fourier_of(const AmplitudeTable& f) {
    if (f.dual) return *f.dual;
    return fourier(f);
}

// f with fhat = 1_T / sqrt(|T ∩ Z_q^m|), built in the Fourier domain and
// inverse-transformed.
inline AmplitudeTable indicator_fourier_family(const TargetSet& T, u32 q, u32 m) {
    detail::check_dims(q, m);
    u64 n = pow_u64(q, m);
    std::vector<cx> hat(n, 0.0);
    u64 count = 0;
    std::vector<u32> digits;
    for (u64 i = 0; i < n; ++i) {
        digits_of(i, q, m, digits);
        if (T.contains(modq::ModVector(q, digits))) {
            hat[i] = 1.0;
            ++count;
        }
    }
    require(count > 0, errc::empty_fiber, "target set meets no point of Z_q^m");
    double inv = 1.0 / std::sqrt(double(count));
    for (auto& v : hat)
        v *= inv;
    AmplitudeTable fhat;
    fhat.q = q;
    fhat.m = m;
    fhat.dense = hat;
    AmplitudeTable f;
    f.q = q;
    f.m = m;
    f.dense = std::move(hat);
    detail::dft_all_axes(f.dense, q, m, -1);
    f.dual = std::make_shared<AmplitudeTable>(std::move(fhat));
    return f;
}

// 1 - eta = sum_{x in T} |fhat(x)|^2.
inline double mass_on(const AmplitudeTable& fhat, const TargetSet& T) {
    detail::check_normalized(fhat, "fhat");
    u64 n = fhat.points();
    double mass = 0.0;
    std::vector<u32> digits;
    for (u64 i = 0; i < n; ++i) {
        digits_of(i, fhat.q, fhat.m, digits);
        if (T.contains(modq::ModVector(fhat.q, digits))) mass += std::norm(fhat.value(i));
    }
    return mass;
}

}  // namespace rdl::amp
