#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "rdl/amplitude.hpp"
#include "rdl/isis_solver.hpp"
#include "rdl/lattice_states.hpp"
#include "rdl/modq.hpp"
#include "rdl/rng.hpp"
#include "rdl/statevec.hpp"
#include "rdl/util.hpp"

namespace rdl::red {

// One step of an oracle circuit. Register ids index the pipeline layout:
// 0 = sample (m digits), 1 = answer (n digits), 2.. = work registers.
struct OracleOp {
    enum class Kind { qft, add_mat, add_reg, map_ref } kind;
    size_t a = 0, b = 0;  // qft: a = reg; add_*: a = src, b = dst; map_ref: a = ctrl, b = target
    int sign = +1;        // qft: +1 forward; add_*: +-1
    modq::ModMatrix mat;
    std::map<u64, sv::ReferenceBranch> branches;

    static OracleOp qft(size_t reg, int sign) { return {Kind::qft, reg, 0, sign, {}, {}}; }
    static OracleOp add_mat(size_t src, size_t dst, modq::ModMatrix m, int sign) {
        return {Kind::add_mat, src, dst, sign, std::move(m), {}};
    }
    static OracleOp add_reg(size_t src, size_t dst, int sign) {
        return {Kind::add_reg, src, dst, sign, {}, {}};
    }
    static OracleOp map_ref(size_t ctrl, size_t target, std::map<u64, sv::ReferenceBranch> br) {
        return {Kind::map_ref, ctrl, target, +1, {}, std::move(br)};
    }
};

// A unitary on (sample tensor answer tensor work) with its diagonal report:
// |gamma_{s,s}| per s (phases absorbed into the work state) and the mean
// success p = E_s |gamma_{s,s}|^2.
struct SlweOracle {
    modq::ModMatrix A;
    amp::AmplitudeTable f;
    u32 q = 2, n = 1, m = 1;
    std::vector<sv::Register> work;
    std::vector<OracleOp> ops;
    std::vector<double> diag;
    double p = 0.0;
};

inline void oracle_apply(const SlweOracle& o, sv::StateVector& state, bool inverse = false) {
    auto run = [&](const OracleOp& op, bool inv) {
        switch (op.kind) {
            case OracleOp::Kind::qft: {
                int sg = inv ? -op.sign : op.sign;
                state = sv::qft_register(state, op.a,
                                         sg > 0 ? sv::Direction::forward : sv::Direction::inverse);
                break;
            }
            case OracleOp::Kind::add_mat:
                state = sv::add_matrix_register(state, op.a, op.b, op.mat,
                                                inv ? -op.sign : op.sign);
                break;
            case OracleOp::Kind::add_reg:
                state = sv::add_register(state, op.a, op.b, inv ? -op.sign : op.sign);
                break;
            case OracleOp::Kind::map_ref:
                state = sv::controlled_map_to_reference(state, op.a, op.b, op.branches, inv);
                break;
        }
    };
    if (!inverse) {
        for (const auto& op : o.ops) run(op, false);
    } else {
        for (auto it = o.ops.rbegin(); it != o.ops.rend(); ++it) run(*it, true);
    }
}

// Pipeline layout [sample, answer, work..., extras...].
inline sv::RegisterLayout oracle_layout(const SlweOracle& o, std::vector<sv::Register> extras = {}) {
    std::vector<sv::Register> regs{sv::Register::qdigits(o.q, o.m), sv::Register::qdigits(o.q, o.n)};
    regs.insert(regs.end(), o.work.begin(), o.work.end());
    regs.insert(regs.end(), extras.begin(), extras.end());
    return sv::RegisterLayout(std::move(regs));
}

namespace detail {

// |psi_s> on the sample register, 0 everywhere else.
inline sv::StateVector embed_psi(const SlweOracle& o, const modq::ModVector& s,
                                 std::vector<sv::Register> extras = {}) {
    sv::StateVector psi = lat::build_psi(o.A, o.f, s);
    sv::StateVector full{oracle_layout(o, std::move(extras))};
    u64 stride = full.layout.strides[0];
    for (u64 v = 0; v < psi.layout.total; ++v) full.amp[v * stride] = psi.amp[v];
    return full;
}

// |gamma_{s,s}| for every s: run the oracle on |psi_s>|0...> and take the
// norm of the answer-register projection onto s.
inline void probe_diagonal(SlweOracle& o) {
    u64 qn = pow_u64(o.q, o.n);
    o.diag.assign(qn, 0.0);
    std::vector<u32> sdig;
    for (u64 si = 0; si < qn; ++si) {
        amp::digits_of(si, o.q, o.n, sdig);
        sv::StateVector st = embed_psi(o, modq::ModVector(o.q, sdig));
        oracle_apply(o, st);
        double p = 0.0;
        for (u64 i = 0; i < st.layout.total; ++i)
            if (st.layout.reg_value(i, 1) == si) p += std::norm(st.amp[i]);
        o.diag[si] = std::sqrt(p);
    }
    double acc = 0.0;
    for (double d : o.diag) acc += d * d;
    o.p = acc / double(qn);
}

}  // namespace detail

// The pretty-good-measurement oracle: append the syndrome, rotate each
// |W_y> branch onto the reference state, then inverse-QFT the syndrome into
// the answer. Needs no extra work register; zero-weight fibers get identity
// branches.
inline SlweOracle pgm_oracle(const modq::ModMatrix& A, const amp::AmplitudeTable& f) {
    SlweOracle o;
    o.A = A;
    o.f = f;
    o.q = A.modulus;
    o.n = u32(A.rows);
    o.m = u32(A.cols);

    amp::AmplitudeTable fhat = amp::fourier_of(f);
    std::vector<double> w = lat::all_weights(A, fhat);
    std::map<u64, sv::ReferenceBranch> branches;
    std::vector<u32> ydig;
    for (u64 yi = 0; yi < w.size(); ++yi) {
        if (w[yi] <= lat::kZeroWeight) continue;
        amp::digits_of(yi, o.q, o.n, ydig);
        auto [wy, weight] = lat::build_w(A, f, modq::ModVector(o.q, ydig));
        branches.emplace(yi, sv::make_reference_branch(wy.amp));
    }
    o.ops.push_back(OracleOp::qft(0, +1));
    o.ops.push_back(OracleOp::add_mat(0, 1, A, +1));
    o.ops.push_back(OracleOp::qft(0, -1));
    o.ops.push_back(OracleOp::map_ref(1, 0, std::move(branches)));
    o.ops.push_back(OracleOp::qft(1, -1));
    detail::probe_diagonal(o);
    return o;
}

// Test oracle that leaves the answer register at 0: correct only for s = 0.
inline SlweOracle biased_oracle(const modq::ModMatrix& A, const amp::AmplitudeTable& f) {
    SlweOracle o;
    o.A = A;
    o.f = f;
    o.q = A.modulus;
    o.n = u32(A.rows);
    o.m = u32(A.cols);
    detail::probe_diagonal(o);
    return o;
}

// Shift-averaging wrapper: superpose t, shift the sample by A^T t, run the
// inner oracle, subtract t from the answer. The diagonal becomes sqrt(p) for
// every s.
inline SlweOracle symmetrize(const SlweOracle& inner, const modq::ModMatrix& A) {
    require(inner.A == A, errc::bad_input, "symmetrize: oracle was built for a different A");
    SlweOracle o = inner;
    size_t treg = 2 + inner.work.size();
    o.work.push_back(sv::Register::qdigits(o.q, o.n));
    o.ops.clear();
    o.ops.push_back(OracleOp::qft(treg, +1));  // |0> -> uniform over t
    o.ops.push_back(OracleOp::add_mat(treg, 0, modq::transpose(A), +1));
    o.ops.insert(o.ops.end(), inner.ops.begin(), inner.ops.end());
    o.ops.push_back(OracleOp::add_reg(treg, 1, -1));
    detail::probe_diagonal(o);
    double want = std::sqrt(o.p);
    for (double d : o.diag)
        require(std::abs(d - want) < 1e-9, errc::internal,
                "symmetrized diagonal is not constant sqrt(p)");
    return o;
}

namespace detail {

// Probability-valued inputs arrive from float pipelines; forgive 1e-9 of
// numerical overshoot, reject anything larger.
inline double unit_range(double v, const char* what) {
    require(v >= -1e-9 && v <= 1.0 + 1e-9, errc::bad_input,
            std::string(what) + " must lie in [0,1]");
    return std::min(1.0, std::max(0.0, v));
}

}  // namespace detail

// Forward-reduction guarantee on E_y[p'_y]; may be negative and is reported as-is.
inline double forward_bound(double p, double eta) {
    p = detail::unit_range(p, "p");
    eta = detail::unit_range(eta, "eta");
    return p * (1.0 - eta) - 2.0 * std::sqrt(p * (1.0 - p) * eta);
}

struct ForwardResult {
    double p_prime = 0.0;        // exact probability of landing in the fiber inside T
    double post_prob = 0.0;      // exact third-register-0 probability (must equal p)
    std::optional<modq::ModVector> sample;
    double wall_ms = 0.0;
};

namespace detail {

// The phased superposition (1/sqrt(q^n)) sum_s w^{-y.s} |psi_s>|0>|0..>|s>
// over [sample, answer, work..., third].
inline sv::StateVector forward_initial_state(const modq::ModMatrix& A,
                                             const amp::AmplitudeTable& f,
                                             const SlweOracle& oracle,
                                             const modq::ModVector& y, size_t third) {
    u32 q = oracle.q, n = oracle.n;
    sv::StateVector st{oracle_layout(oracle, {sv::Register::qdigits(q, n)})};
    u64 qn = pow_u64(q, n);
    double inv_sqrt = 1.0 / std::sqrt(double(qn));
    std::vector<u32> sdig;
    for (u64 si = 0; si < qn; ++si) {
        amp::digits_of(si, q, n, sdig);
        modq::ModVector s(q, sdig);
        sv::StateVector psi = lat::build_psi(A, f, s);
        cx phase = std::conj(lat::omega_pow(q, lat::dot_mod(y, s))) * inv_sqrt;
        u64 base = si * st.layout.strides[third];
        u64 stride = st.layout.strides[0];
        for (u64 v = 0; v < psi.layout.total; ++v) st.amp[base + v * stride] += phase * psi.amp[v];
    }
    return st;
}

}  // namespace detail

// The forward pipeline, run with exact conditioning: build the phased
// superposition over s, run the oracle, post-select 0 on the subtraction
// register, undo the oracle, QFT the sample register, and read off the exact
// probability of the target fiber.
inline ForwardResult forward_isis(const modq::ModMatrix& A, const amp::TargetSet& T,
                                  const amp::AmplitudeTable& f, const SlweOracle& oracle,
                                  const modq::ModVector& y, Rng* sampler = nullptr) {
    auto t0 = std::chrono::steady_clock::now();
    require(oracle.A == A, errc::bad_input, "oracle was built for a different A");
    u32 q = oracle.q, n = oracle.n, m = oracle.m;
    require(y.modulus == q && y.len() == n, errc::dimension_mismatch, "y does not match A");

    size_t third = 2 + oracle.work.size();
    sv::StateVector st = detail::forward_initial_state(A, f, oracle, y, third);

    oracle_apply(oracle, st);
    st = sv::add_register(st, 1, third, -1);
    auto [p0, conditioned] = sv::collapse(st, third, 0);
    require(std::abs(p0 - oracle.p) < 1e-9, errc::internal,
            "post-selection probability differs from the oracle's p");
    oracle_apply(oracle, conditioned, /*inverse=*/true);
    conditioned = sv::qft_register(conditioned, 0, sv::Direction::forward);

    std::vector<double> marginal = sv::measure_probs(conditioned, 0);
    double ppy = 0.0;
    std::vector<u32> xdig;
    for (u64 xi = 0; xi < marginal.size(); ++xi) {
        if (marginal[xi] <= 0.0) continue;
        amp::digits_of(xi, q, m, xdig);
        modq::ModVector x(q, xdig);
        if (modq::mat_vec_mul(A, x) == y && T.contains(x)) ppy += marginal[xi];
    }

    ForwardResult res;
    res.p_prime = ppy;
    res.post_prob = p0;
    if (sampler) {
        double r = sampler->uniform01();
        double acc = 0.0;
        u64 pick = marginal.size() - 1;
        for (u64 xi = 0; xi < marginal.size(); ++xi) {
            acc += marginal[xi];
            if (r < acc) {
                pick = xi;
                break;
            }
        }
        res.sample = modq::ModVector(q, amp::digits_of(pick, q, m));
    }
    res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    return res;
}

struct SampledForwardResult {
    modq::ModVector x;
    bool hit = false;   // x landed in the target fiber
    u64 attempts = 0;   // repetitions of the prepare/oracle/measure stage
};

// Demonstration mode: the post-selection is actually measured, restarting
// from the initial state until the subtraction register reads 0, with at
// most ceil(20/p) attempts before erroring.
inline SampledForwardResult forward_isis_sampled(const modq::ModMatrix& A,
                                                 const amp::TargetSet& T,
                                                 const amp::AmplitudeTable& f,
                                                 const SlweOracle& oracle,
                                                 const modq::ModVector& y, Rng& rng) {
    require(oracle.A == A, errc::bad_input, "oracle was built for a different A");
    require(oracle.p > 1e-12, errc::zero_probability, "oracle never succeeds");
    size_t third = 2 + oracle.work.size();
    u64 max_attempts = u64(std::ceil(20.0 / oracle.p));
    for (u64 attempt = 1; attempt <= max_attempts; ++attempt) {
        sv::StateVector st = detail::forward_initial_state(A, f, oracle, y, third);
        oracle_apply(oracle, st);
        st = sv::add_register(st, 1, third, -1);
        auto [outcome, collapsed] = sv::sample_measure(st, third, rng);
        if (outcome != 0) continue;
        oracle_apply(oracle, collapsed, /*inverse=*/true);
        collapsed = sv::qft_register(collapsed, 0, sv::Direction::forward);
        auto [xi, rest] = sv::sample_measure(collapsed, 0, rng);
        (void)rest;
        SampledForwardResult res;
        res.x = modq::ModVector(oracle.q, amp::digits_of(xi, oracle.q, oracle.m));
        res.hit = modq::mat_vec_mul(A, res.x) == y && T.contains(res.x);
        res.attempts = attempt;
        return res;
    }
    fail(errc::retry_limit, "post-selection failed " + std::to_string(max_attempts) + " times");
}

// ---------------------------------------------------------------------------
// Clean IC|LWE> oracles: the net family {|W'_y>}, with any abort amplitude
// kept on the bottom slot (orthogonal to every |W_y>).

struct WPrime {
    std::vector<cx> vec;      // over Z_q^m
    double abort_mass = 0.0;  // |amplitude|^2 on bottom outcomes
};

struct IclweOracle {
    u32 q = 2, n = 1, m = 1;
    std::vector<WPrime> family;    // indexed by the mixed-radix index of y
    std::vector<double> gamma_y;   // |<W'_y|W_y>|
    double gamma = 0.0;            // mean fidelity = 1 - eps'
    double eps_prime = 1.0;
    bool phase_aligned = true;     // every <W'_y|W_y> real nonnegative
};

inline IclweOracle perfect_iclwe_oracle(const modq::ModMatrix& A, const amp::AmplitudeTable& f) {
    IclweOracle o;
    o.q = A.modulus;
    o.n = u32(A.rows);
    o.m = u32(A.cols);
    u64 qn = pow_u64(o.q, o.n);
    o.family.resize(qn);
    o.gamma_y.assign(qn, 1.0);
    std::vector<u32> ydig;
    for (u64 yi = 0; yi < qn; ++yi) {
        amp::digits_of(yi, o.q, o.n, ydig);
        auto [wy, weight] = lat::build_w(A, f, modq::ModVector(o.q, ydig));
        o.family[yi].vec = std::move(wy.amp);
    }
    o.gamma = 1.0;
    o.eps_prime = 0.0;
    return o;
}

// A stub whose runs all land on the abort slot; every fidelity is zero.
inline IclweOracle aborting_iclwe_oracle(u32 q, u32 n, u32 m) {
    IclweOracle o;
    o.q = q;
    o.n = n;
    o.m = m;
    o.family.assign(pow_u64(q, n), WPrime{std::vector<cx>(pow_u64(q, m), cx(0.0)), 1.0});
    o.gamma_y.assign(pow_u64(q, n), 0.0);
    o.gamma = 0.0;
    o.eps_prime = 1.0;
    return o;
}

struct SolverOracleReport {
    IclweOracle oracle;
    std::vector<isis::UniformityAudit> per_y;
    double eps_mean = 0.0;  // E_y[Delta(p_y, u_y)]
};

// Solver-to-oracle construction: uniform tape superposition, the solver run in
// superposition, randomness-recovery uncomputation, inverse QFT (identity on
// the abort slot). Refused unless perfect recovery verifies on this instance.
inline SolverOracleReport iclwe_oracle_from_solver(const modq::ModMatrix& A,
                                                   const amp::AmplitudeTable& f,
                                                   u64 recovery_samples = 64,
                                                   u64 recovery_seed = 1) {
    isis::SolverParams p = isis::detail::params_of(A);
    require(f.q == A.modulus && f.m == A.cols, errc::dimension_mismatch, "f does not match A");
    u64 len = isis::tape_length(p);
    require(len <= 22, errc::cap_exceeded, "tape space too large for exact construction");
    u64 ntapes = u64(1) << len;

    // The construction targets fhat = 1_{Z_2^m} / sqrt(2^m).
    {
        amp::AmplitudeTable fh = amp::fourier_of(f);
        double want = 1.0 / std::sqrt(double(u64(1) << p.m));
        std::vector<u32> dg;
        for (u64 v = 0; v < fh.points(); ++v) {
            amp::digits_of(v, fh.q, fh.m, dg);
            bool bin = true;
            for (u32 d : dg) bin = bin && d <= 1;
            require(std::abs(fh.value(v) - cx(bin ? want : 0.0)) < 1e-9, errc::bad_input,
                    "solver oracle needs fhat = normalized binary indicator");
        }
    }

    // Perfect-recovery precheck; uncomputation is invalid if it fails.
    {
        Rng rng = Rng::seeded(recovery_seed);
        u64 checks = std::min<u64>(ntapes, recovery_samples);
        bool exhaustive = ntapes <= recovery_samples;
        for (u64 c = 0; c < checks; ++c) {
            u64 code = exhaustive ? c : rng.below(ntapes);
            isis::SolverTape tape;
            tape.bits.resize(len);
            for (u64 j = 0; j < len; ++j) tape.bits[j] = uint8_t((code >> (len - 1 - j)) & 1);
            std::vector<u32> yv(p.n);
            for (auto& e : yv) e = u32(rng.below(p.q));
            modq::ModVector y(p.q, yv);
            isis::SolverOutput out = isis::solve(A, y, tape);
            if (out.aborted) continue;  // abort outputs carry their tape verbatim
            require(isis::recover(A, y, out.x) == tape, errc::precheck_failed,
                    "randomness recovery failed; refusing to build the oracle");
        }
    }

    amp::AmplitudeTable fhat = amp::fourier_of(f);
    SolverOracleReport rep;
    IclweOracle& o = rep.oracle;
    o.q = p.q;
    o.n = p.n;
    o.m = u32(p.m);
    u64 qn = pow_u64(o.q, o.n);
    u64 qm = pow_u64(o.q, o.m);
    require(qm <= caps().dense, errc::cap_exceeded, "q^m exceeds dense cap");
    o.family.resize(qn);
    o.gamma_y.assign(qn, 0.0);
    rep.per_y.resize(qn);

    std::vector<double> weights = lat::all_weights(A, fhat);
    std::vector<u32> ydig;
    double gsum = 0.0, esum = 0.0;
    for (u64 yi = 0; yi < qn; ++yi) {
        amp::digits_of(yi, o.q, o.n, ydig);
        modq::ModVector y(o.q, ydig);

        std::vector<cx> hat(qm, cx(0.0));
        double abort_mass = 0.0;
        double inv_amp = 1.0 / std::sqrt(double(ntapes));
        isis::SolverTape tape;
        tape.bits.resize(len);
        for (u64 c = 0; c < ntapes; ++c) {
            for (u64 j = 0; j < len; ++j) tape.bits[j] = uint8_t((c >> (len - 1 - j)) & 1);
            isis::SolverOutput out = isis::solve(A, y, tape);
            if (out.aborted) abort_mass += 1.0 / double(ntapes);
            else hat[amp::index_of(out.x.v, o.q)] += inv_amp;
        }

        // gamma_y in the Fourier domain (the inverse QFT preserves it).
        double gam = 0.0;
        if (weights[yi] > lat::kZeroWeight) {
            double scale = double(pow_u64(o.q, o.n)) / std::sqrt(weights[yi]);
            cx ov = 0.0;
            std::vector<u32> xdig;
            for (u64 v = 0; v < qm; ++v) {
                if (hat[v] == cx(0.0)) continue;
                amp::digits_of(v, o.q, o.m, xdig);
                modq::ModVector x(o.q, xdig);
                if (modq::mat_vec_mul(A, x) == y)
                    ov += std::conj(fhat.value(v) * scale) * hat[v];
            }
            require(std::abs(ov.imag()) < 1e-9, errc::internal,
                    "solver overlap acquired a phase");
            gam = std::abs(ov);
        }
        o.gamma_y[yi] = gam;

        // inverse QFT into the state family; abort amplitude stays put.
        amp::detail::dft_all_axes(hat, o.q, o.m, -1);
        double n2 = abort_mass;
        for (cx v : hat) n2 += std::norm(v);
        require(std::abs(n2 - 1.0) < 1e-9, errc::internal, "|W'_y> is not unit norm");
        o.family[yi].vec = std::move(hat);
        o.family[yi].abort_mass = abort_mass;

        rep.per_y[yi] = isis::uniformity_audit(A, y);
        require(std::abs(rep.per_y[yi].fidelity - gam) < 1e-9, errc::internal,
                "gamma_y disagrees with F(p_y, u_y)");
        require(gam >= 1.0 - rep.per_y[yi].epsilon - 1e-12, errc::internal,
                "Fuchs-van de Graaf violated");
        gsum += gam;
        esum += rep.per_y[yi].epsilon;
    }
    o.gamma = gsum / double(qn);
    o.eps_prime = 1.0 - o.gamma;
    rep.eps_mean = esum / double(qn);
    require(o.gamma >= 1.0 - rep.eps_mean - 1e-12, errc::internal,
            "mean fidelity fell below 1 - eps");
    return rep;
}

// Reverse-reduction guarantee; clamped at zero, raw inner value reported alongside
// as a signed square.
inline double reverse_bound(double eps, double eps_prime, double* raw = nullptr) {
    eps = detail::unit_range(eps, "eps");
    eps_prime = detail::unit_range(eps_prime, "eps'");
    double inner = 1.0 - eps - eps_prime - 2.0 * std::sqrt(eps * eps_prime);
    if (raw) *raw = inner < 0.0 ? -(inner * inner) : inner * inner;
    double clamped = std::max(0.0, inner);
    return clamped * clamped;
}

struct ReverseResult {
    double amp_success = 0.0;          // |<psi'_s|B_s>|
    std::vector<double> dist;          // |<psi'_s|B_{s'}>|^2 per s'
    double residual = 0.0;             // mass outside span{B_{s'}}
    double expected_amp = 0.0;         // E_y[sqrt(w_y/q^n) gamma_y]
};

// Reverse-reduction measurement: build psi'_s by appending the syndrome, then measure
// in the basis B_s = (1/sqrt(q^n)) sum_y w^{s.y} |W'_y>|y>.
inline ReverseResult reverse_slwe(const modq::ModMatrix& A, const amp::AmplitudeTable& f,
                                  const IclweOracle& oracle, const modq::ModVector& s) {
    u32 q = oracle.q, n = oracle.n, m = oracle.m;
    require(A.modulus == q && A.rows == n && A.cols == m, errc::dimension_mismatch,
            "oracle does not match A");
    sv::StateVector psi = lat::build_psi(A, f, s);
    sv::StateVector joint = lat::append_syndrome(psi, A);

    u64 qn = pow_u64(q, n);
    u64 qm = pow_u64(q, m);
    // c_y = <W'_y (x) y | psi'_s>, computed slice by slice.
    std::vector<cx> cy(qn, cx(0.0));
    u64 stride = joint.layout.strides[0];  // sample register is most significant
    for (u64 yi = 0; yi < qn; ++yi) {
        cx acc = 0.0;
        const auto& wp = oracle.family[yi].vec;
        for (u64 v = 0; v < qm; ++v) acc += std::conj(wp[v]) * joint.amp[v * stride + yi];
        cy[yi] = acc;
    }

    ReverseResult res;
    res.dist.assign(qn, 0.0);
    double inv = 1.0 / std::sqrt(double(qn));
    std::vector<u32> ydig, spdig;
    double total = 0.0;
    u64 s_index = amp::index_of(s.v, q);
    for (u64 spi = 0; spi < qn; ++spi) {
        amp::digits_of(spi, q, n, spdig);
        modq::ModVector sp(q, spdig);
        cx val = 0.0;
        for (u64 yi = 0; yi < qn; ++yi) {
            amp::digits_of(yi, q, n, ydig);
            cx ph = std::conj(lat::omega_pow(q, lat::dot_mod(sp, modq::ModVector(q, ydig))));
            val += ph * cy[yi];
        }
        val *= inv;
        res.dist[spi] = std::norm(val);
        total += res.dist[spi];
        if (spi == s_index) res.amp_success = std::abs(val);
    }
    res.residual = std::max(0.0, 1.0 - total);

    amp::AmplitudeTable fhat = amp::fourier_of(f);
    std::vector<double> w = lat::all_weights(A, fhat);
    double qnn = double(qn);
    double acc = 0.0;
    for (u64 yi = 0; yi < qn; ++yi)
        acc += std::sqrt(std::max(0.0, w[yi]) / qnn) * oracle.gamma_y[yi];
    res.expected_amp = acc / qnn;
    if (oracle.phase_aligned)
        require(std::abs(res.amp_success - res.expected_amp) < 1e-8, errc::internal,
                "success amplitude differs from E_y[sqrt(w_y/q^n) gamma_y]");
    return res;
}

struct EndToEndReport {
    u32 n = 1, l = 1, q = 2;
    u64 m = 3;
    u64 seed = 0;
    std::string digest;
    bool solver_aborts = false;
    double p_max = 0.0;
    double eps = 0.0;        // 1 - E_y sqrt(w_y/q^n)
    double eps_prime = 0.0;  // 1 - gamma
    double eps_uniformity = 0.0;
    double gamma = 0.0;
    double bound = 0.0;
    double bound_raw = 0.0;
    std::vector<double> success_s;  // |<psi'_s|B_s>|^2 per s
    double mean_success = 0.0;
    double margin = 0.0;  // mean_success - bound
};

// Samples a random instance, builds the solver-backed oracle, and runs the
// reverse pipeline for f with fhat the normalized binary indicator.
inline EndToEndReport end_to_end(u32 n, u32 l, u64 seed) {
    isis::SolverParams p = isis::SolverParams::make(n, l);
    Rng rng = Rng::seeded(seed).fork("end-to-end");
    std::vector<u32> entries(size_t(p.n) * p.m);
    for (auto& e : entries) e = u32(rng.below(p.q));
    modq::ModMatrix A(p.q, p.n, size_t(p.m), std::move(entries));

    EndToEndReport rep;
    rep.n = n;
    rep.l = l;
    rep.q = p.q;
    rep.m = p.m;
    rep.seed = seed;
    std::string blob = std::to_string(p.q) + "|" + std::to_string(p.n) + "|" + std::to_string(p.m);
    for (u32 e : A.a) blob += "," + std::to_string(e);
    rep.digest = hex64(fnv1a(blob));

    amp::AmplitudeTable f = amp::indicator_fourier_family(amp::TargetSet::binary(), p.q, u32(p.m));
    amp::AmplitudeTable fhat = amp::fourier_of(f);
    std::vector<double> w = lat::all_weights(A, fhat);
    rep.p_max = lat::pmax_from_weights(w, p.q, p.n);
    double qn = double(pow_u64(p.q, p.n));
    double esum = 0.0;
    for (double v : w) esum += std::sqrt(std::max(0.0, v) / qn);
    rep.eps = 1.0 - esum / double(w.size());

    SolverOracleReport oracle_rep = iclwe_oracle_from_solver(A, f, 64, seed ^ 0x9e37u);
    rep.solver_aborts = false;
    for (const auto& a : oracle_rep.per_y)
        if (a.abort_mass > 0.0) rep.solver_aborts = true;
    rep.gamma = oracle_rep.oracle.gamma;
    rep.eps_prime = oracle_rep.oracle.eps_prime;
    rep.eps_uniformity = oracle_rep.eps_mean;
    rep.bound = reverse_bound(rep.eps, rep.eps_prime, &rep.bound_raw);

    u64 qni = pow_u64(p.q, p.n);
    rep.success_s.resize(qni);
    double acc = 0.0;
    std::vector<u32> sdig;
    for (u64 si = 0; si < qni; ++si) {
        amp::digits_of(si, p.q, p.n, sdig);
        ReverseResult rr = reverse_slwe(A, f, oracle_rep.oracle, modq::ModVector(p.q, sdig));
        rep.success_s[si] = rr.amp_success * rr.amp_success;
        acc += rep.success_s[si];
    }
    rep.mean_success = acc / double(qni);
    rep.margin = rep.mean_success - rep.bound;
    return rep;
}

}  // namespace rdl::red
