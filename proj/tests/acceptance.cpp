// Acceptance suite: one pass/fail line per criterion, exit 0 iff all hold.
// Usage: rdl_acceptance [path-to-cli-binary]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rdl/driver.hpp"
#include "rdl/json_io.hpp"
#include "rdl/reductions.hpp"

using namespace rdl;

namespace {

int g_failures = 0;

struct Criterion {
    std::string name;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;

    explicit Criterion(std::string n) : name(std::move(n)) {}

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    void finish(double budget_s = 0.0) {
        double secs = seconds();
        if (budget_s > 0.0 && secs > budget_s) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + std::string("runtime ") +
                      std::to_string(secs) + "s over budget " + std::to_string(budget_s) + "s";
        }
        std::printf("[%s] %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", name.c_str(), secs,
                    detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++g_failures;
    }
};

struct Dim {
    u32 q, n, m;
};

// Every (q, n) combination from {2,3,4} x {1,2}, sizes capped at q^m <= 2^16.
const std::vector<Dim> kIdentityDims = {
    {2, 1, 8},  {2, 1, 12}, {2, 1, 16}, {2, 2, 8}, {2, 2, 12}, {2, 2, 16},
    {3, 1, 4},  {3, 1, 6},  {3, 1, 8},  {3, 1, 10}, {3, 2, 5},  {3, 2, 7},
    {3, 2, 9},  {4, 1, 4},  {4, 1, 6},  {4, 1, 8},  {4, 2, 4},  {4, 2, 6},
    {4, 2, 7},  {4, 2, 8},  {2, 1, 14}, {2, 2, 14},
};

modq::ModMatrix random_matrix(u32 q, size_t rows, size_t cols, Rng& rng) {
    std::vector<u32> e(rows * cols);
    for (auto& v : e) v = u32(rng.below(q));
    return modq::ModMatrix(q, rows, cols, std::move(e));
}

// A = [I_n | random]: every fiber has exactly q^{m-n} points, so fhat-uniform
// families make the state family orthonormal (p_max = 1).
modq::ModMatrix surjective_matrix(u32 q, u32 n, u32 m, Rng& rng) {
    modq::ModMatrix A = random_matrix(q, n, m, rng);
    for (u32 i = 0; i < n; ++i)
        for (u32 j = 0; j < n; ++j) A.at(i, j) = i == j ? 1 : 0;
    return A;
}

amp::AmplitudeTable family_for(u32 q, u32 m, u32 which, Rng& rng) {
    switch (which % 3) {
        case 0: return io::random_dense_family(q, m, rng);
        case 1: return amp::gaussian_family(0.8 * q, q, m);
        default: return amp::indicator_fourier_family(amp::TargetSet::linf_ball(1), q, m);
    }
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

// Criterion 1: Fourier identities on >= 20 random instances within 1e-9.
static void criterion1(std::vector<std::pair<modq::ModMatrix, amp::AmplitudeTable>>& instances) {
    Criterion c("criterion 1: Fourier identity suite (>=20 instances, tol 1e-9)");
    Rng root = Rng::seeded(20260810);
    u32 idx = 0;
    for (const Dim& d : kIdentityDims) {
        Rng rng = root.fork("identity", idx);
        modq::ModMatrix A = random_matrix(d.q, d.n, d.m, rng);
        amp::AmplitudeTable f = family_for(d.q, d.m, idx, rng);
        driver::IdentityDeviations dev = driver::identity_suite(A, f);
        std::string tag = std::to_string(d.q) + "^" + std::to_string(d.m) + ",n=" +
                          std::to_string(d.n);
        c.expect(dev.psi_fourier < 1e-9, "psi_fourier " + tag);
        c.expect(dev.w_fourier < 1e-9, "w_fourier " + tag);
        c.expect(dev.psi_to_w < 1e-9, "psi_to_w " + tag);
        c.expect(dev.w_to_psi < 1e-9, "w_to_psi " + tag);
        c.expect(std::abs(dev.mean_weight - double(pow_u64(d.q, d.n))) < 1e-9, "E[w_y] " + tag);
        instances.emplace_back(std::move(A), std::move(f));
        ++idx;
    }
    c.expect(instances.size() >= 20, "need at least 20 instances");
    c.finish(30.0);
}

// Criterion 2: direct PGM success equals the closed-form optimum everywhere.
static void criterion2(const std::vector<std::pair<modq::ModMatrix, amp::AmplitudeTable>>& instances) {
    Criterion c("criterion 2: PGM agreement (direct = formula, tol 1e-9)");
    for (const auto& [A, f] : instances) {
        double formula = lat::pmax_formula(A, f);
        double direct = lat::pgm_success_direct(A, f);
        c.expect(std::abs(formula - direct) < 1e-9,
                 "disagreement " + std::to_string(std::abs(formula - direct)));
    }
    Rng rng = Rng::seeded(77);
    for (u32 q : {2u, 3u, 4u}) {
        for (u32 n : {1u, 2u}) {
            u32 m = n + 2;
            modq::ModMatrix A = surjective_matrix(q, n, m, rng);
            double one = lat::pmax_formula(A, amp::delta_family(q, m));
            c.expect(std::abs(one - 1.0) < 1e-9, "p_max != 1 for fhat-uniform, full-rank A");
            modq::ModMatrix B = random_matrix(q, n, m, rng);
            double guess = lat::pmax_formula(B, amp::uniform_family(q, m));
            c.expect(std::abs(guess - 1.0 / double(pow_u64(q, n))) < 1e-9,
                     "p_max != q^-n for uniform f");
        }
    }
    c.finish();
}

// Criterion 3: the forward pipeline meets its success bound; the p = 1
// subcase is exact to 1e-8.
static void criterion3() {
    Criterion c("criterion 3: forward reduction bound (>=10 instances, both targets)");
    Rng root = Rng::seeded(31);
    const std::vector<Dim> dims = {{2, 1, 4}, {2, 1, 6}, {3, 1, 3}, {3, 1, 4}, {4, 1, 3},
                                   {4, 1, 4}, {2, 2, 4}, {2, 2, 6}, {3, 2, 3}, {4, 2, 3}};
    u32 idx = 0;
    for (const Dim& d : dims) {
        Rng rng = root.fork("forward", idx);
        modq::ModMatrix A = random_matrix(d.q, d.n, d.m, rng);
        amp::AmplitudeTable f = io::random_dense_family(d.q, d.m, rng);
        red::SlweOracle oracle = red::pgm_oracle(A, f);
        amp::AmplitudeTable fhat = amp::fourier_of(f);
        for (int which = 0; which < 2; ++which) {
            amp::TargetSet T =
                which == 0 ? amp::TargetSet::binary() : amp::TargetSet::linf_ball(d.q > 2 ? 1 : 0);
            double eta = 1.0 - amp::mass_on(fhat, T);
            u64 qn = pow_u64(d.q, d.n);
            double mean = 0.0;
            for (u64 yi = 0; yi < qn; ++yi) {
                modq::ModVector y(d.q, amp::digits_of(yi, d.q, d.n));
                red::ForwardResult r = red::forward_isis(A, T, f, oracle, y);
                c.expect(std::abs(r.post_prob - oracle.p) < 1e-9, "post-selection != p");
                mean += r.p_prime;
            }
            mean /= double(qn);
            double bound = red::forward_bound(oracle.p, eta);
            c.expect(mean >= bound - 1e-7,
                     "bound violated: mean " + std::to_string(mean) + " < " + std::to_string(bound));
        }
        ++idx;
    }
    // p = 1 subcase: orthonormal state family, exactness E_y[p'_y] = 1 - eta.
    for (const Dim& d : {Dim{2, 1, 5}, Dim{3, 1, 3}, Dim{4, 1, 3}, Dim{2, 2, 5}}) {
        Rng rng = root.fork("forward-exact", d.q * 100 + d.m);
        modq::ModMatrix A = surjective_matrix(d.q, d.n, d.m, rng);
        amp::AmplitudeTable f = amp::delta_family(d.q, d.m);  // fhat uniform
        red::SlweOracle oracle = red::pgm_oracle(A, f);
        c.expect(std::abs(oracle.p - 1.0) < 1e-9, "oracle p != 1 in the exact subcase");
        amp::TargetSet T = amp::TargetSet::linf_ball(d.q >= 3 ? 1 : 0);
        double eta = 1.0 - amp::mass_on(amp::fourier_of(f), T);
        u64 qn = pow_u64(d.q, d.n);
        double mean = 0.0;
        for (u64 yi = 0; yi < qn; ++yi) {
            modq::ModVector y(d.q, amp::digits_of(yi, d.q, d.n));
            mean += red::forward_isis(A, T, f, oracle, y).p_prime;
        }
        mean /= double(qn);
        c.expect(std::abs(mean - (1.0 - eta)) < 1e-8,
                 "p=1 exactness off by " + std::to_string(std::abs(mean - (1.0 - eta))));
    }
    c.finish(120.0);
}

// Criterion 4: symmetrization of the biased oracle, then the full pipeline.
static void criterion4() {
    Criterion c("criterion 4: symmetrization of the biased oracle at q=2, n=1");
    Rng rng = Rng::seeded(4);
    modq::ModMatrix A(2, 1, 3, {1, 0, 1});
    amp::AmplitudeTable f = io::random_dense_family(2, 3, rng);
    red::SlweOracle biased = red::biased_oracle(A, f);
    red::SlweOracle sym = red::symmetrize(biased, A);
    double want = std::sqrt(0.5);
    c.expect(std::abs(sym.diag[0] - want) < 1e-9, "diag[0] != sqrt(1/2)");
    c.expect(std::abs(sym.diag[1] - want) < 1e-9, "diag[1] != sqrt(1/2)");

    amp::TargetSet T = amp::TargetSet::binary();
    double eta = 1.0 - amp::mass_on(amp::fourier_of(f), T);
    double mean = 0.0;
    for (u32 yv : {0u, 1u}) {
        red::ForwardResult r = red::forward_isis(A, T, f, sym, modq::ModVector(2, {yv}));
        c.expect(std::abs(r.post_prob - sym.p) < 1e-9, "post-selection != p");
        mean += r.p_prime;
    }
    mean /= 2.0;
    c.expect(mean >= red::forward_bound(sym.p, eta) - 1e-7, "bound violated");
    c.finish();
}

// Criterion 5: solver correctness and accounting, exhaustive at n=1 l=1 and
// statistical at n=1 l=2.
static void criterion5() {
    Criterion c("criterion 5: solver correctness, accounting, abort rate");
    // exhaustive n=1, l=1: all 7 full-rank A, all y, all 4 tapes
    for (u32 aval = 1; aval < 8; ++aval) {
        modq::ModMatrix A(2, 1, 3, {(aval >> 2) & 1, (aval >> 1) & 1, aval & 1});
        for (u32 yv : {0u, 1u}) {
            modq::ModVector y(2, {yv});
            std::set<std::vector<u32>> outs;
            for (u64 code = 0; code < 4; ++code) {
                isis::SolverTape t;
                t.bits = {uint8_t((code >> 1) & 1), uint8_t(code & 1)};
                isis::SolverOutput out = isis::solve(A, y, t);
                c.expect(!out.aborted, "full-rank instance aborted");
                if (out.aborted) continue;
                c.expect(modq::mat_vec_mul(A, out.x) == y, "invalid solution");
                bool binary = true;
                for (u32 e : out.x.v) binary = binary && e <= 1;
                c.expect(binary, "solution not binary");
                c.expect(isis::recover(A, y, out.x) == t, "recovery mismatch");
                c.expect(isis::tape_length(isis::SolverParams::make(1, 1)) == 2, "tape length");
                outs.insert(out.x.v);
            }
            c.expect(outs.size() == 4, "injectivity failed");
            isis::UniformityAudit audit = isis::uniformity_audit(A, y);
            c.expect(audit.epsilon == 0.0 && audit.coverage == 1.0,
                     "tape<->solution bijection failed");
        }
    }

    // n=1, l=2: 500 random (A, tape) runs
    isis::SolverParams p2 = isis::SolverParams::make(1, 2);
    Rng rng = Rng::seeded(52);
    u64 aborts = 0;
    const u64 trials = 500;
    for (u64 t = 0; t < trials; ++t) {
        modq::ModMatrix A = random_matrix(p2.q, 1, size_t(p2.m), rng);
        modq::ModVector y(p2.q, {u32(rng.below(p2.q))});
        isis::SolverTape tape = isis::random_tape(p2, rng);
        isis::SolverOutput out = isis::solve(A, y, tape);
        if (out.aborted) {
            ++aborts;
            c.expect(out.tape == tape, "abort must echo the full tape");
            continue;
        }
        c.expect(modq::mat_vec_mul(A, out.x) == y, "invalid solution at l=2");
        bool binary = true;
        for (u32 e : out.x.v) binary = binary && e <= 1;
        c.expect(binary, "solution not binary at l=2");
        c.expect(isis::recover(A, y, out.x) == tape, "recovery mismatch at l=2");
    }
    double rate = double(aborts) / double(trials);
    const double z = 1.959963984540054;
    double half = z * std::sqrt(rate * (1.0 - rate) / double(trials) +
                                z * z / (4.0 * double(trials) * double(trials))) /
                  (1.0 + z * z / double(trials));
    double center = (rate + z * z / (2.0 * double(trials))) / (1.0 + z * z / double(trials));

    // Exhaustive ground truth over all 4^9 matrices: abort iff one of the 3
    // level-1 blocks or the level-2 reduction is 0 mod 2; per-block rate 7/8.
    u64 ex_aborts = 0;
    const u64 total = pow_u64(4, 9);
    isis::SolverTape zero_tape;
    zero_tape.bits.assign(7, 0);
    std::vector<u32> digits;
    modq::ModVector y0(4, {0});
    for (u64 code = 0; code < total; ++code) {
        amp::digits_of(code, 4, 9, digits);
        modq::ModMatrix A(4, 1, 9, digits);
        if (isis::solve(A, y0, zero_tape).aborted) ++ex_aborts;
    }
    double exhaustive = double(ex_aborts) / double(total);
    double per_block = 1.0 - std::pow(7.0 / 8.0, 4.0);
    c.expect(std::abs(exhaustive - per_block) < 1e-12,
             "exhaustive rate != per-block formula 1-(7/8)^4");
    c.expect(center - half <= exhaustive && exhaustive <= center + half,
             "95% CI [" + std::to_string(center - half) + "," + std::to_string(center + half) +
                 "] misses exhaustive rate " + std::to_string(exhaustive));
    c.finish();
}

// Criterion 6: gamma_y = F(p_y, u_y) and the Fuchs-van de Graaf inequality on
// every audited y at n=1, l in {1,2}.
static void criterion6() {
    Criterion c("criterion 6: oracle fidelity = classical fidelity per y");
    Rng rng = Rng::seeded(6);
    std::vector<modq::ModMatrix> cases;
    cases.emplace_back(2, 1, 3, std::vector<u32>{1, 0, 1});
    cases.emplace_back(2, 1, 3, std::vector<u32>{1, 1, 1});
    for (int i = 0; i < 2; ++i) {
        isis::SolverParams p = isis::SolverParams::make(1, 2);
        cases.push_back(random_matrix(p.q, 1, size_t(p.m), rng));
    }
    for (const auto& A : cases) {
        amp::AmplitudeTable f =
            amp::indicator_fourier_family(amp::TargetSet::binary(), A.modulus, u32(A.cols));
        red::SolverOracleReport rep = red::iclwe_oracle_from_solver(A, f);
        for (size_t yi = 0; yi < rep.per_y.size(); ++yi) {
            c.expect(std::abs(rep.oracle.gamma_y[yi] - rep.per_y[yi].fidelity) < 1e-9,
                     "gamma_y != F(p_y, u_y)");
            c.expect(rep.oracle.gamma_y[yi] >= 1.0 - rep.per_y[yi].epsilon - 1e-12,
                     "gamma_y < 1 - eps_y");
        }
    }
    c.finish();
}

// Criterion 7: reverse reduction end to end at n=1, l in {1,2}.
static void criterion7(u64& nonabort_l1_seed) {
    Criterion c("criterion 7: reverse + end-to-end bound sandwich");
    // l = 1: find the first seed whose sampled A is full rank; success = 1.
    nonabort_l1_seed = 0;
    for (u64 seed = 1; seed < 64; ++seed) {
        red::EndToEndReport rep = red::end_to_end(1, 1, seed);
        if (rep.solver_aborts) continue;
        nonabort_l1_seed = seed;
        c.expect(std::abs(rep.mean_success - 1.0) < 1e-9, "l=1 success != 1");
        c.expect(std::abs(rep.p_max - 1.0) < 1e-9, "l=1 p_max != 1");
        break;
    }
    c.expect(nonabort_l1_seed != 0, "no non-aborting l=1 seed in range");

    // l = 2: the full sandwich, all four quantities present.
    bool saw_abort = false, saw_clean = false;
    for (u64 seed = 1; seed <= 6; ++seed) {
        red::EndToEndReport rep = red::end_to_end(1, 2, seed);
        c.expect(rep.mean_success >= rep.bound - 1e-7, "success below the reverse bound");
        c.expect(rep.mean_success <= rep.p_max + 1e-9, "success above p_max");
        c.expect(rep.success_s.size() == 4, "per-s success missing");
        (rep.solver_aborts ? saw_abort : saw_clean) = true;
    }
    c.expect(saw_clean, "no clean l=2 instance among seeds 1..6");
    c.finish(300.0);
}

// Criterion 8: byte-identical report bodies for identical config + seed.
static void criterion8(const std::string& cli, u64 l1_seed) {
    Criterion c("criterion 8: determinism (byte-identical report bodies)");
    // library level
    red::EndToEndReport a = red::end_to_end(1, 2, 3);
    red::EndToEndReport b = red::end_to_end(1, 2, 3);
    io::json ja, jb;
    ja["success"] = driver::vec_to_json(a.success_s);
    ja["eps"] = a.eps;
    ja["gamma"] = a.gamma;
    ja["digest"] = a.digest;
    jb["success"] = driver::vec_to_json(b.success_s);
    jb["eps"] = b.eps;
    jb["gamma"] = b.gamma;
    jb["digest"] = b.digest;
    c.expect(io::dump17(ja) == io::dump17(jb), "library run not deterministic");

    if (!cli.empty()) {
        std::string p1 = "/tmp/rdl_acc_e2e_1.json", p2 = "/tmp/rdl_acc_e2e_2.json";
        std::string cmd1 = cli + " end-to-end --n 1 --l 1 --seed " + std::to_string(l1_seed) +
                           " --quiet --json " + p1;
        std::string cmd2 = cli + " end-to-end --n 1 --l 1 --seed " + std::to_string(l1_seed) +
                           " --quiet --json " + p2;
        c.expect(std::system(cmd1.c_str()) == 0, "CLI run 1 failed");
        c.expect(std::system(cmd2.c_str()) == 0, "CLI run 2 failed");
        io::json j1 = io::json::parse(slurp(p1));
        io::json j2 = io::json::parse(slurp(p2));
        c.expect(io::dump17(j1.at("report")) == io::dump17(j2.at("report")),
                 "CLI report bodies differ");
    } else {
        c.expect(false, "no CLI binary path given");
    }
    c.finish();
}

int main(int argc, char** argv) {
    std::string cli = argc > 1 ? argv[1] : "";
    std::vector<std::pair<modq::ModMatrix, amp::AmplitudeTable>> instances;
    u64 l1_seed = 1;
    try {
        criterion1(instances);
        criterion2(instances);
        criterion3();
        criterion4();
        criterion5();
        criterion6();
        criterion7(l1_seed);
        criterion8(cli, l1_seed);
    } catch (const std::exception& e) {
        std::printf("[FAIL] acceptance suite threw: %s\n", e.what());
        return 1;
    }
    if (g_failures == 0) std::printf("all acceptance criteria hold\n");
    return g_failures == 0 ? 0 : 1;
}
