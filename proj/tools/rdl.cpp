// rdl: exact desk-scale experiments on the reductions between ISIS and
// superposed-error LWE problems. Every subcommand emits a JSON report whose
// body is byte-identical across runs with the same config and seed; exit code
// 0 iff every asserted margin holds.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rdl/driver.hpp"

namespace {

using namespace rdl;
using driver::Check;
using driver::RunOutcome;
using io::json;

struct CommonOpts {
    std::string json_path;
    std::string csv_path;
    std::string dump_state;
    u64 cap = 0;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--json", c.json_path, "write the report to this file");
    cmd->add_option("--csv", c.csv_path, "append flat check rows to this CSV");
    cmd->add_option("--cap", c.cap, "override the dense amplitude cap (points)");
    cmd->add_flag("--quiet", c.quiet, "suppress stdout report");
}

void apply_cap(const CommonOpts& c) {
    if (c.cap > 0) {
        caps().dense = c.cap;
        caps().state = std::max(caps().state, c.cap << 2);
    }
}

modq::ModVector parse_csv_vector(const std::string& csv, u32 q) {
    std::vector<u32> vals;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        require(!tok.empty(), errc::bad_input, "empty entry in vector");
        long v = std::stol(tok);
        require(v >= 0 && v < long(q), errc::bad_input, "vector entry outside [0, q)");
        vals.push_back(u32(v));
    }
    return modq::ModVector(q, std::move(vals));
}

void maybe_dump(const std::string& path, const sv::StateVector& st) {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::binary);
    require(bool(out), errc::bad_input, "cannot open dump file " + path);
    sv::dump_state(out, st);
}

// --------------------------------------------------------------------------

RunOutcome run_identities(u32 q, u32 n, u32 m, const std::string& f_arg, u64 seed,
                          const std::string& dump_path) {
    io::Instance inst = io::gen_instance(q, n, m, seed);
    amp::AmplitudeTable f = io::parse_family(io::load_json_arg(f_arg), q, m);
    std::vector<Check> checks = driver::identity_checks(inst.A, f);

    if (!dump_path.empty()) {
        maybe_dump(dump_path, lat::build_psi(inst.A, f, modq::ModVector::zeros(q, n)));
    }

    RunOutcome out;
    out.body = driver::base_body("identities");
    out.body["q"] = q;
    out.body["n"] = n;
    out.body["m"] = m;
    out.body["seed"] = seed;
    out.body["digest"] = inst.digest;
    out.body["checks"] = driver::checks_to_json(checks);
    out.pass = driver::all_pass(checks);
    out.body["pass"] = out.pass;
    return out;
}

RunOutcome run_pgm(const std::string& instance_path, const std::string& f_arg) {
    io::Instance inst = io::load_instance(instance_path);
    amp::AmplitudeTable f = io::parse_family(io::load_json_arg(f_arg), inst.q, u32(inst.m));
    double formula = lat::pmax_formula(inst.A, f);
    double direct = lat::pgm_success_direct(inst.A, f);
    std::vector<Check> checks{driver::check_abs("pgm_direct_vs_formula", direct, formula, 1e-9)};

    RunOutcome out;
    out.body = driver::base_body("pgm");
    out.body["digest"] = inst.digest;
    out.body["p_max"] = formula;
    out.body["pgm_direct"] = direct;
    out.body["checks"] = driver::checks_to_json(checks);
    out.pass = driver::all_pass(checks);
    out.body["pass"] = out.pass;
    return out;
}

RunOutcome run_solve(const std::string& instance_path, const std::string& tape_arg, u64 seed) {
    io::Instance inst = io::load_instance(instance_path);
    isis::SolverParams p = isis::SolverParams::make(inst.n, [&] {
        u32 l = 0;
        for (u32 t = inst.q; t > 1; t >>= 1) ++l;
        require(inst.q == (u32(1) << l), errc::bad_input, "solver needs q = 2^l");
        return l;
    }());
    modq::ModVector y = inst.y ? *inst.y : [&] {
        Rng rng = Rng::seeded(seed).fork("solve-y");
        std::vector<u32> yv(inst.n);
        for (auto& e : yv) e = u32(rng.below(inst.q));
        return modq::ModVector(inst.q, yv);
    }();

    isis::SolverTape tape;
    if (tape_arg == "random") {
        Rng rng = Rng::seeded(seed).fork("solve-tape");
        tape = isis::random_tape(p, rng);
    } else {
        tape = isis::tape_from_hex(tape_arg, isis::tape_length(p));
    }
    isis::SolverOutput res = isis::solve(inst.A, y, tape);

    RunOutcome out;
    out.body = driver::base_body("solve");
    out.body["digest"] = inst.digest;
    out.body["seed"] = seed;
    json params;
    params["n"] = p.n;
    params["l"] = p.l;
    params["q"] = p.q;
    params["m"] = p.m;
    params["tape_bits"] = isis::tape_length(p);
    out.body["params"] = params;
    out.body["y"] = driver::modvec_to_json(y);
    out.body["tape_hex"] = isis::tape_to_hex(tape);
    out.body["aborted"] = res.aborted;
    if (!res.aborted) {
        out.body["x_F"] = driver::modvec_to_json(res.x);
        isis::SolverTape back = isis::recover(inst.A, y, res.x);
        std::vector<Check> checks{
            driver::check_abs("recover_roundtrip", back == tape ? 0.0 : 1.0, 0.0, 0.0)};
        out.body["checks"] = driver::checks_to_json(checks);
        out.pass = driver::all_pass(checks);
    } else {
        out.pass = true;  // an abort is a valid outcome, not a failed margin
    }
    out.body["pass"] = out.pass;
    return out;
}

RunOutcome run_recover(const std::string& instance_path, const std::string& solution_csv) {
    io::Instance inst = io::load_instance(instance_path);
    require(inst.y.has_value(), errc::bad_input, "recover needs the instance to carry y");
    modq::ModVector xF = parse_csv_vector(solution_csv, inst.q);
    isis::SolverTape tape = isis::recover(inst.A, *inst.y, xF);
    isis::SolverOutput again = isis::solve(inst.A, *inst.y, tape);
    std::vector<Check> checks{driver::check_abs(
        "solve_of_recovered_tape", !again.aborted && again.x == xF ? 0.0 : 1.0, 0.0, 0.0)};

    RunOutcome out;
    out.body = driver::base_body("recover");
    out.body["digest"] = inst.digest;
    out.body["tape_hex"] = isis::tape_to_hex(tape);
    out.body["x_F"] = driver::modvec_to_json(xF);
    out.body["checks"] = driver::checks_to_json(checks);
    out.pass = driver::all_pass(checks);
    out.body["pass"] = out.pass;
    return out;
}

RunOutcome run_audit(u32 n, u32 l, bool exhaustive, u64 trials, u64 seed) {
    isis::SolverParams p = isis::SolverParams::make(n, l);
    Rng rng = Rng::seeded(seed).fork("audit");
    std::vector<u32> entries(size_t(p.n) * p.m);
    for (auto& e : entries) e = u32(rng.below(p.q));
    modq::ModMatrix A(p.q, p.n, size_t(p.m), std::move(entries));

    u64 qn = pow_u64(p.q, p.n);
    double eps_sum = 0.0, fid_sum = 0.0, cov_sum = 0.0, abort_sum = 0.0;
    json per_y = json::array();
    std::vector<u32> ydig;
    for (u64 yi = 0; yi < qn; ++yi) {
        amp::digits_of(yi, p.q, p.n, ydig);
        modq::ModVector y(p.q, ydig);
        isis::UniformityAudit audit;
        if (exhaustive) {
            audit = isis::uniformity_audit(A, y);
        } else {
            // Monte-Carlo p_y over sampled tapes against uniform on solutions.
            auto sols = isis::enumerate_solutions(A, y);
            std::map<std::vector<u32>, u64> hits;
            u64 aborts = 0;
            Rng ry = rng.fork("audit-y", yi);
            for (u64 t = 0; t < trials; ++t) {
                isis::SolverTape tape = isis::random_tape(p, ry);
                isis::SolverOutput res = isis::solve(A, y, tape);
                if (res.aborted) ++aborts;
                else ++hits[res.x.v];
            }
            audit.solutions = sols.size();
            audit.abort_mass = double(aborts) / double(trials);
            if (!sols.empty()) {
                double u = 1.0 / double(sols.size());
                double tv = audit.abort_mass, fid = 0.0;
                u64 covered = 0;
                for (const auto& s : sols) {
                    auto it = hits.find(s.v);
                    double ps = it == hits.end() ? 0.0 : double(it->second) / double(trials);
                    if (it != hits.end()) ++covered;
                    tv += std::abs(ps - u);
                    fid += std::sqrt(ps * u);
                }
                audit.epsilon = tv / 2.0;
                audit.fidelity = fid;
                audit.coverage = double(covered) / double(sols.size());
                audit.hits = covered;
            }
        }
        eps_sum += audit.epsilon;
        fid_sum += audit.fidelity;
        cov_sum += audit.coverage;
        abort_sum += audit.abort_mass;
        json row;
        row["y"] = driver::modvec_to_json(y);
        row["epsilon"] = audit.epsilon;
        row["fidelity"] = audit.fidelity;
        row["coverage"] = audit.coverage;
        row["solutions"] = audit.solutions;
        row["abort_mass"] = audit.abort_mass;
        per_y.push_back(std::move(row));
    }

    double eps_mean = eps_sum / double(qn);
    double fid_mean = fid_sum / double(qn);
    double abort_mean = abort_sum / double(qn);
    std::vector<Check> checks{
        driver::check_ge("fuchs_van_de_graaf", fid_mean, 1.0 - eps_mean, 1e-12)};

    // Wilson 95% interval on the abort mass; degenerate in exhaustive mode
    // where the mass is exact.
    double lo = abort_mean, hi = abort_mean;
    if (!exhaustive && trials > 0) {
        const double z = 1.959963984540054;
        double nn = double(trials) * double(qn);
        double denom = 1.0 + z * z / nn;
        double center = (abort_mean + z * z / (2.0 * nn)) / denom;
        double half = z * std::sqrt(abort_mean * (1.0 - abort_mean) / nn + z * z / (4.0 * nn * nn)) /
                      denom;
        lo = std::max(0.0, center - half);
        hi = std::min(1.0, center + half);
    }

    RunOutcome out;
    out.body = driver::base_body("audit-uniformity");
    out.body["digest"] = io::instance_digest(A, std::nullopt);
    out.body["seed"] = seed;
    json params;
    params["n"] = p.n;
    params["l"] = p.l;
    params["q"] = p.q;
    params["m"] = p.m;
    params["mode"] = exhaustive ? "exhaustive" : "trials";
    if (!exhaustive) params["trials"] = trials;
    out.body["params"] = params;
    out.body["epsilon_mean"] = eps_mean;
    out.body["fidelity_mean"] = fid_mean;
    out.body["coverage"] = cov_sum / double(qn);
    out.body["abort_mass"] = abort_mean;
    json ci = json::array();
    ci.push_back(lo);
    ci.push_back(hi);
    out.body["ci95"] = ci;
    out.body["per_y"] = per_y;
    out.body["checks"] = driver::checks_to_json(checks);
    out.pass = driver::all_pass(checks);
    out.body["pass"] = out.pass;
    return out;
}

RunOutcome run_abort_rate(u32 n, u32 l, u64 trials, u64 seed) {
    isis::SolverParams p = isis::SolverParams::make(n, l);
    isis::AbortEstimate est = isis::abort_probability(p, trials, seed);

    RunOutcome out;
    out.body = driver::base_body("abort-rate");
    out.body["seed"] = seed;
    json params;
    params["n"] = p.n;
    params["l"] = p.l;
    params["q"] = p.q;
    params["m"] = p.m;
    params["trials"] = trials;
    out.body["params"] = params;
    out.body["aborted"] = est.aborts;
    out.body["rate"] = est.rate;
    json ci = json::array();
    ci.push_back(est.lo);
    ci.push_back(est.hi);
    out.body["ci95"] = ci;
    out.body["pass"] = true;
    out.pass = true;
    return out;
}

RunOutcome run_forward(const std::string& instance_path, const std::string& f_arg,
                       const std::string& t_arg, const std::string& oracle_kind, u64 seed,
                       bool sampled, const std::string& dump_path) {
    io::Instance inst = io::load_instance(instance_path);
    u32 q = inst.q, n = inst.n, m = u32(inst.m);
    amp::AmplitudeTable f = io::parse_family(io::load_json_arg(f_arg), q, m);
    amp::TargetSet T = io::parse_target(io::load_json_arg(t_arg), q, m);

    red::SlweOracle oracle;
    if (oracle_kind == "pgm") {
        oracle = red::pgm_oracle(inst.A, f);
    } else if (oracle_kind == "biased") {
        oracle = red::symmetrize(red::biased_oracle(inst.A, f), inst.A);
    } else {
        fail(errc::bad_input, "unknown oracle '" + oracle_kind + "' (use pgm|biased)");
    }

    double eta = 1.0 - amp::mass_on(amp::fourier_of(f), T);
    double bound = red::forward_bound(oracle.p, eta);

    u64 qn = pow_u64(q, n);
    json per_y = json::array();
    double mean = 0.0, worst_post = 0.0, wall = 0.0;
    std::vector<u32> ydig;
    for (u64 yi = 0; yi < qn; ++yi) {
        amp::digits_of(yi, q, n, ydig);
        modq::ModVector y(q, ydig);
        Rng sampler = Rng::seeded(seed).fork("forward-sample", yi);
        red::ForwardResult r = red::forward_isis(inst.A, T, f, oracle, y, &sampler);
        mean += r.p_prime;
        wall += r.wall_ms;
        worst_post = std::max(worst_post, std::abs(r.post_prob - oracle.p));
        json row;
        row["y"] = driver::modvec_to_json(y);
        row["p_prime"] = r.p_prime;
        row["post_prob"] = r.post_prob;
        if (r.sample) row["sample"] = driver::modvec_to_json(*r.sample);
        if (sampled) {
            Rng demo = Rng::seeded(seed).fork("forward-demo", yi);
            red::SampledForwardResult sr = red::forward_isis_sampled(inst.A, T, f, oracle, y, demo);
            row["sampled_x"] = driver::modvec_to_json(sr.x);
            row["sampled_hit"] = sr.hit;
            row["attempts"] = sr.attempts;
        }
        per_y.push_back(std::move(row));
    }
    mean /= double(qn);

    if (!dump_path.empty()) {
        // Phased initial superposition for the instance's own y (or y = 0).
        modq::ModVector y = inst.y ? *inst.y : modq::ModVector::zeros(q, n);
        maybe_dump(dump_path,
                   red::detail::forward_initial_state(inst.A, f, oracle, y,
                                                      2 + oracle.work.size()));
    }

    std::vector<Check> checks{
        driver::check_ge("forward_bound", mean, bound, 1e-7),
        driver::check_abs("postselect_equals_p", worst_post, 0.0, 1e-9),
    };

    RunOutcome out;
    out.body = driver::base_body("forward");
    out.body["digest"] = inst.digest;
    out.body["seed"] = seed;
    out.body["oracle"] = oracle_kind;
    out.body["p"] = oracle.p;
    out.body["eta"] = eta;
    out.body["bound"] = bound;
    out.body["mean_p_prime"] = mean;
    out.body["margin"] = mean - bound;
    out.body["per_y"] = per_y;
    out.body["checks"] = driver::checks_to_json(checks);
    out.pass = driver::all_pass(checks);
    out.body["pass"] = out.pass;
    out.wall_ms = wall;
    return out;
}

RunOutcome run_reverse(const std::string& instance_path, const std::string& oracle_kind,
                       const std::string& f_arg, u64 seed) {
    io::Instance inst = io::load_instance(instance_path);
    u32 q = inst.q, n = inst.n, m = u32(inst.m);
    amp::AmplitudeTable f =
        f_arg.empty()
            ? amp::indicator_fourier_family(amp::TargetSet::binary(), q, m)
            : io::parse_family(io::load_json_arg(f_arg), q, m);

    amp::AmplitudeTable fhat = amp::fourier_of(f);
    std::vector<double> w = lat::all_weights(inst.A, fhat);
    double p_max = lat::pmax_from_weights(w, q, n);
    double qn = double(pow_u64(q, n));
    double esum = 0.0;
    for (double v : w) esum += std::sqrt(std::max(0.0, v) / qn);
    double eps = 1.0 - esum / double(w.size());

    red::IclweOracle oracle;
    double eps_uniformity = 0.0;
    if (oracle_kind == "perfect") {
        oracle = red::perfect_iclwe_oracle(inst.A, f);
    } else if (oracle_kind == "solver") {
        red::SolverOracleReport rep = red::iclwe_oracle_from_solver(inst.A, f, 64, seed);
        oracle = std::move(rep.oracle);
        eps_uniformity = rep.eps_mean;
    } else {
        fail(errc::bad_input, "unknown oracle '" + oracle_kind + "' (use solver|perfect)");
    }
    double bound_raw = 0.0;
    double bound = red::reverse_bound(eps, oracle.eps_prime, &bound_raw);

    u64 qni = pow_u64(q, n);
    json per_s = json::array();
    double mean = 0.0;
    std::vector<u32> sdig;
    for (u64 si = 0; si < qni; ++si) {
        amp::digits_of(si, q, n, sdig);
        red::ReverseResult r = red::reverse_slwe(inst.A, f, oracle, modq::ModVector(q, sdig));
        double succ = r.amp_success * r.amp_success;
        mean += succ;
        json row;
        row["s"] = si;
        row["success"] = succ;
        row["amp"] = r.amp_success;
        row["expected_amp"] = r.expected_amp;
        row["residual"] = r.residual;
        per_s.push_back(std::move(row));
    }
    mean /= double(qni);

    std::vector<Check> checks{
        driver::check_ge("reverse_bound", mean, bound, 1e-7),
        driver::check_le("below_pmax", mean, p_max, 1e-9),
    };
    if (oracle_kind == "perfect")
        checks.push_back(driver::check_abs("perfect_equals_pmax", mean, p_max, 1e-9));

    RunOutcome out;
    out.body = driver::base_body("reverse");
    out.body["digest"] = inst.digest;
    out.body["seed"] = seed;
    out.body["oracle"] = oracle_kind;
    out.body["p_max"] = p_max;
    out.body["eps"] = eps;
    out.body["eps_prime"] = oracle.eps_prime;
    out.body["gamma"] = oracle.gamma;
    if (oracle_kind == "solver") out.body["eps_uniformity"] = eps_uniformity;
    out.body["bound"] = bound;
    out.body["bound_raw"] = bound_raw;
    out.body["mean_success"] = mean;
    out.body["margin"] = mean - bound;
    out.body["per_s"] = per_s;
    out.body["checks"] = driver::checks_to_json(checks);
    out.pass = driver::all_pass(checks);
    out.body["pass"] = out.pass;
    return out;
}

RunOutcome run_end_to_end(u32 n, u32 l, u64 seed) {
    red::EndToEndReport rep = red::end_to_end(n, l, seed);
    std::vector<Check> checks{
        driver::check_ge("reverse_bound", rep.mean_success, rep.bound, 1e-7),
        driver::check_le("below_pmax", rep.mean_success, rep.p_max, 1e-9),
    };

    RunOutcome out;
    out.body = driver::base_body("end-to-end");
    out.body["digest"] = rep.digest;
    out.body["seed"] = seed;
    json params;
    params["n"] = rep.n;
    params["l"] = rep.l;
    params["q"] = rep.q;
    params["m"] = rep.m;
    out.body["params"] = params;
    out.body["solver_aborts"] = rep.solver_aborts;
    out.body["p_max"] = rep.p_max;
    out.body["eps"] = rep.eps;
    out.body["eps_prime"] = rep.eps_prime;
    out.body["eps_uniformity"] = rep.eps_uniformity;
    out.body["gamma"] = rep.gamma;
    out.body["bound"] = rep.bound;
    out.body["bound_raw"] = rep.bound_raw;
    out.body["success_s"] = driver::vec_to_json(rep.success_s);
    out.body["mean_success"] = rep.mean_success;
    out.body["margin"] = rep.margin;
    out.body["checks"] = driver::checks_to_json(checks);
    out.pass = driver::all_pass(checks);
    out.body["pass"] = out.pass;
    return out;
}

RunOutcome run_gen_instance(u32 q, u32 n, u64 m, u64 seed, const std::string& path) {
    io::Instance inst = io::gen_instance(q, n, m, seed);
    std::string text = io::dump17(io::instance_to_json(inst)) + "\n";
    if (!path.empty()) io::write_file(path, text);

    RunOutcome out;
    out.body = driver::base_body("gen-instance");
    out.body["digest"] = inst.digest;
    out.body["seed"] = seed;
    out.body["instance"] = io::instance_to_json(inst);
    out.body["pass"] = true;
    out.pass = true;
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact desk-scale lab for ISIS <-> superposed-LWE reductions"};
    app.require_subcommand(1);

    CommonOpts common;

    // identities
    auto* c_id = app.add_subcommand("identities", "Fourier-basis state identities on a random instance");
    u32 id_q = 2, id_n = 1, id_m = 3;
    std::string id_f = R"({"kind":"uniform"})";
    u64 id_seed = 1;
    c_id->add_option("--q", id_q, "modulus")->required();
    c_id->add_option("--n", id_n, "rows")->required();
    c_id->add_option("--m", id_m, "columns")->required();
    c_id->add_option("--f", id_f, "amplitude family (JSON or path)");
    c_id->add_option("--seed", id_seed, "seed");
    c_id->add_option("--dump-state", common.dump_state, "debug: dump |psi_0> to this file");
    add_common(c_id, common);

    // pgm
    auto* c_pgm = app.add_subcommand("pgm", "optimal-measurement success: direct vs formula");
    std::string pgm_inst, pgm_f = R"({"kind":"uniform"})";
    c_pgm->add_option("--instance", pgm_inst, "instance JSON file")->required();
    c_pgm->add_option("--f", pgm_f, "amplitude family (JSON or path)");
    add_common(c_pgm, common);

    // solve
    auto* c_solve = app.add_subcommand("solve", "run the recursive solver on one tape");
    std::string sv_inst, sv_tape = "random";
    u64 sv_seed = 1;
    c_solve->add_option("--instance", sv_inst, "instance JSON file")->required();
    c_solve->add_option("--tape", sv_tape, "tape hex, or 'random'");
    c_solve->add_option("--seed", sv_seed, "seed for random tape / missing y");
    add_common(c_solve, common);

    // recover
    auto* c_rec = app.add_subcommand("recover", "recover the tape from a solution");
    std::string rc_inst, rc_sol;
    c_rec->add_option("--instance", rc_inst, "instance JSON file (must carry y)")->required();
    c_rec->add_option("--solution", rc_sol, "solution vector, comma-separated")->required();
    add_common(c_rec, common);

    // audit-uniformity
    auto* c_audit = app.add_subcommand("audit-uniformity", "solution-uniformity audit over all y");
    u32 au_n = 1, au_l = 1;
    bool au_exhaustive = false;
    u64 au_trials = 1000, au_seed = 1;
    c_audit->add_option("--n", au_n, "n")->required();
    c_audit->add_option("--l", au_l, "l (q = 2^l)")->required();
    c_audit->add_flag("--exhaustive", au_exhaustive, "enumerate the whole tape space");
    c_audit->add_option("--trials", au_trials, "sampled tapes per y (when not exhaustive)");
    c_audit->add_option("--seed", au_seed, "seed");
    add_common(c_audit, common);

    // abort-rate
    auto* c_abort = app.add_subcommand("abort-rate", "Monte-Carlo abort probability over random A");
    u32 ab_n = 1, ab_l = 1;
    u64 ab_trials = 1000, ab_seed = 1;
    c_abort->add_option("--n", ab_n, "n")->required();
    c_abort->add_option("--l", ab_l, "l (q = 2^l)")->required();
    c_abort->add_option("--trials", ab_trials, "number of sampled matrices");
    c_abort->add_option("--seed", ab_seed, "seed");
    add_common(c_abort, common);

    // forward
    auto* c_fwd = app.add_subcommand("forward", "forward reduction pipeline with exact conditioning");
    std::string fw_inst, fw_f = R"({"kind":"uniform"})", fw_t = R"({"kind":"binary"})";
    std::string fw_oracle = "pgm";
    u64 fw_seed = 1;
    bool fw_sampled = false;
    c_fwd->add_option("--instance", fw_inst, "instance JSON file")->required();
    c_fwd->add_option("--f", fw_f, "amplitude family (JSON or path)");
    c_fwd->add_option("--T", fw_t, "target set (JSON or path)");
    c_fwd->add_option("--oracle", fw_oracle, "pgm | biased");
    c_fwd->add_option("--seed", fw_seed, "seed for output sampling");
    c_fwd->add_flag("--sampled", fw_sampled, "also run the repeat-until-success demo per y");
    c_fwd->add_option("--dump-state", common.dump_state, "debug: dump |psi_0> to this file");
    add_common(c_fwd, common);

    // reverse
    auto* c_rev = app.add_subcommand("reverse", "reverse pipeline: basis measurement against an oracle");
    std::string rv_inst, rv_oracle = "solver", rv_f;
    u64 rv_seed = 1;
    c_rev->add_option("--instance", rv_inst, "instance JSON file")->required();
    c_rev->add_option("--oracle", rv_oracle, "solver | perfect");
    c_rev->add_option("--f", rv_f, "amplitude family (JSON or path; default binary indicator)");
    c_rev->add_option("--seed", rv_seed, "seed");
    add_common(c_rev, common);

    // end-to-end
    auto* c_e2e = app.add_subcommand("end-to-end", "solver -> oracle -> reverse pipeline on a random instance");
    u32 ee_n = 1, ee_l = 1;
    u64 ee_seed = 1;
    c_e2e->add_option("--n", ee_n, "n")->required();
    c_e2e->add_option("--l", ee_l, "l (q = 2^l)")->required();
    c_e2e->add_option("--seed", ee_seed, "seed");
    add_common(c_e2e, common);

    // gen-instance
    auto* c_gen = app.add_subcommand("gen-instance", "sample a uniform instance file");
    u32 gi_q = 2, gi_n = 1;
    u64 gi_m = 3, gi_seed = 1;
    c_gen->add_option("--q", gi_q, "modulus")->required();
    c_gen->add_option("--n", gi_n, "rows")->required();
    c_gen->add_option("--m", gi_m, "columns")->required();
    c_gen->add_option("--seed", gi_seed, "seed");
    add_common(c_gen, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;  // usage error
    }

    try {
        apply_cap(common);
        auto t0 = std::chrono::steady_clock::now();
        RunOutcome out;
        if (*c_id) out = run_identities(id_q, id_n, id_m, id_f, id_seed, common.dump_state);
        else if (*c_pgm) out = run_pgm(pgm_inst, pgm_f);
        else if (*c_solve) out = run_solve(sv_inst, sv_tape, sv_seed);
        else if (*c_rec) out = run_recover(rc_inst, rc_sol);
        else if (*c_audit) out = run_audit(au_n, au_l, au_exhaustive, au_trials, au_seed);
        else if (*c_abort) out = run_abort_rate(ab_n, ab_l, ab_trials, ab_seed);
        else if (*c_fwd)
            out = run_forward(fw_inst, fw_f, fw_t, fw_oracle, fw_seed, fw_sampled,
                              common.dump_state);
        else if (*c_rev) out = run_reverse(rv_inst, rv_oracle, rv_f, rv_seed);
        else if (*c_e2e) out = run_end_to_end(ee_n, ee_l, ee_seed);
        else if (*c_gen) out = run_gen_instance(gi_q, gi_n, gi_m, gi_seed, common.json_path);
        out.wall_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                           .count();
        if (!*c_gen) driver::emit(out, common.json_path, common.quiet, std::cout);
        else driver::emit(out, "", common.quiet, std::cout);
        if (!common.csv_path.empty()) driver::csv_append(common.csv_path, out.body);
        return out.pass ? 0 : 1;
    } catch (const rdl::error& e) {
        json err;
        err["error"] = errc_name(e.code());
        err["message"] = e.what();
        std::cerr << io::dump17(err) << "\n";
        return 1;
    } catch (const std::exception& e) {
        json err;
        err["error"] = "internal";
        err["message"] = e.what();
        std::cerr << io::dump17(err) << "\n";
        return 1;
    }
}
