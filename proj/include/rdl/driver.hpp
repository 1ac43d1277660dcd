#pragma once

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <string>
#include <vector>

#include "rdl/json_io.hpp"
#include "rdl/reductions.hpp"

namespace rdl::driver {

using io::json;

constexpr const char* kVersion = "rdl 0.1.0";

// One asserted inequality: measured vs reference at an explicit tolerance.
struct Check {
    std::string name;
    std::string kind;  // "abs_diff" (|measured-reference| <= tol) or "ge" (measured >= reference - tol)
    double measured = 0.0;
    double reference = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

inline Check check_abs(std::string name, double measured, double reference, double tol) {
    Check c{std::move(name), "abs_diff", measured, reference, tol, false};
    c.pass = std::abs(measured - reference) <= tol;
    return c;
}

inline Check check_ge(std::string name, double measured, double reference, double tol) {
    Check c{std::move(name), "ge", measured, reference, tol, false};
    c.pass = measured >= reference - tol;
    return c;
}

inline Check check_le(std::string name, double measured, double reference, double tol) {
    Check c{std::move(name), "le", measured, reference, tol, false};
    c.pass = measured <= reference + tol;
    return c;
}

struct RunOutcome {
    json body;  // deterministic report body
    bool pass = true;
    double wall_ms = 0.0;
};

inline json checks_to_json(const std::vector<Check>& checks) {
    json arr = json::array();
    for (const auto& c : checks) {
        json j;
        j["name"] = c.name;
        j["kind"] = c.kind;
        j["measured"] = c.measured;
        j["reference"] = c.reference;
        j["tolerance"] = c.tolerance;
        j["pass"] = c.pass;
        arr.push_back(std::move(j));
    }
    return arr;
}

inline bool all_pass(const std::vector<Check>& checks) {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

inline json vec_to_json(const std::vector<double>& v) {
    json arr = json::array();
    for (double x : v) arr.push_back(x);
    return arr;
}

inline json modvec_to_json(const modq::ModVector& v) {
    json arr = json::array();
    for (u32 e : v.v) arr.push_back(e);
    return arr;
}

// ---------------------------------------------------------------------------
// Identity suite over one (A, f): the Fourier-basis forms of psi_s and W_y,
// both change-of-basis directions, and E_y[w_y] = q^n.

struct IdentityDeviations {
    double psi_fourier = 0.0;
    double w_fourier = 0.0;
    double psi_to_w = 0.0;
    double w_to_psi = 0.0;
    double mean_weight = 0.0;
};

inline IdentityDeviations identity_suite(const modq::ModMatrix& A, const amp::AmplitudeTable& f) {
    u32 q = A.modulus;
    u32 n = u32(A.rows), m = u32(A.cols);
    u64 qn = pow_u64(q, n);
    u64 qm = pow_u64(q, m);
    amp::AmplitudeTable fhat = amp::fourier_of(f);
    std::vector<double> w = lat::all_weights(A, fhat);

    IdentityDeviations dev;

    // Precompute psi_s and the syndrome of every x.
    std::vector<sv::StateVector> psis(qn);
    std::vector<u32> dg;
    for (u64 si = 0; si < qn; ++si) {
        amp::digits_of(si, q, n, dg);
        psis[si] = lat::build_psi(A, f, modq::ModVector(q, dg));
    }
    std::vector<u64> syndrome(qm);
    for (u64 xi = 0; xi < qm; ++xi) {
        amp::digits_of(xi, q, m, dg);
        syndrome[xi] = amp::index_of(modq::mat_vec_mul(A, modq::ModVector(q, dg)).v, q);
    }

    // psi-hat identity: QFT|psi_s>[x] = w^{(Ax).s} fhat(x).
    std::vector<u32> sdig, ydig;
    for (u64 si = 0; si < qn; ++si) {
        amp::digits_of(si, q, n, sdig);
        modq::ModVector s(q, sdig);
        sv::StateVector hat = sv::qft_register(psis[si], 0, sv::Direction::forward);
        double diff2 = 0.0;
        for (u64 xi = 0; xi < qm; ++xi) {
            amp::digits_of(syndrome[xi], q, n, ydig);
            cx want = lat::omega_pow(q, lat::dot_mod(modq::ModVector(q, ydig), s)) * fhat.value(xi);
            diff2 += std::norm(hat.amp[xi] - want);
        }
        dev.psi_fourier = std::max(dev.psi_fourier, std::sqrt(diff2));
    }

    // Definition-side W_y = (1/sqrt(w_y)) sum_s w^{-y.s} |psi_s>.
    std::vector<std::vector<cx>> wdef(qn);
    for (u64 yi = 0; yi < qn; ++yi) {
        if (w[yi] <= lat::kZeroWeight) continue;
        amp::digits_of(yi, q, n, ydig);
        modq::ModVector y(q, ydig);
        std::vector<cx> acc(qm, cx(0.0));
        for (u64 si = 0; si < qn; ++si) {
            amp::digits_of(si, q, n, sdig);
            cx ph = std::conj(lat::omega_pow(q, lat::dot_mod(y, modq::ModVector(q, sdig))));
            for (u64 v = 0; v < qm; ++v) acc[v] += ph * psis[si].amp[v];
        }
        double inv = 1.0 / std::sqrt(w[yi]);
        for (auto& v : acc) v *= inv;
        wdef[yi] = std::move(acc);
    }

    // W-hat identity: QFT of the definition form is supported on the fiber
    // with amplitudes (q^n / sqrt(w_y)) fhat(x).
    for (u64 yi = 0; yi < qn; ++yi) {
        if (wdef[yi].empty()) continue;
        sv::StateVector st{sv::RegisterLayout({sv::Register::qdigits(q, m)})};
        st.amp = wdef[yi];
        st = sv::qft_register(st, 0, sv::Direction::forward);
        double scale = double(qn) / std::sqrt(w[yi]);
        double diff2 = 0.0;
        for (u64 xi = 0; xi < qm; ++xi) {
            cx want = syndrome[xi] == yi ? fhat.value(xi) * scale : cx(0.0);
            diff2 += std::norm(st.amp[xi] - want);
        }
        dev.w_fourier = std::max(dev.w_fourier, std::sqrt(diff2));
    }

    // Change of basis, both directions, against build_w.
    std::vector<std::vector<cx>> wbuilt(qn);
    for (u64 yi = 0; yi < qn; ++yi) {
        if (w[yi] <= lat::kZeroWeight) continue;
        amp::digits_of(yi, q, n, ydig);
        auto [wy, weight] = lat::build_w(A, f, modq::ModVector(q, ydig));
        double diff2 = 0.0;
        for (u64 v = 0; v < qm; ++v) diff2 += std::norm(wy.amp[v] - wdef[yi][v]);
        dev.psi_to_w = std::max(dev.psi_to_w, std::sqrt(diff2));
        wbuilt[yi] = std::move(wy.amp);
    }
    for (u64 si = 0; si < qn; ++si) {
        amp::digits_of(si, q, n, sdig);
        modq::ModVector s(q, sdig);
        std::vector<cx> acc(qm, cx(0.0));
        for (u64 yi = 0; yi < qn; ++yi) {
            if (wbuilt[yi].empty()) continue;
            amp::digits_of(yi, q, n, ydig);
            cx ph = lat::omega_pow(q, lat::dot_mod(modq::ModVector(q, ydig), s)) *
                    std::sqrt(w[yi]);
            for (u64 v = 0; v < qm; ++v) acc[v] += ph * wbuilt[yi][v];
        }
        double diff2 = 0.0;
        double inv = 1.0 / double(qn);
        for (u64 v = 0; v < qm; ++v) diff2 += std::norm(acc[v] * inv - psis[si].amp[v]);
        dev.w_to_psi = std::max(dev.w_to_psi, std::sqrt(diff2));
    }

    double mean = 0.0;
    for (double v : w) mean += v;
    dev.mean_weight = mean / double(w.size());
    return dev;
}

inline std::vector<Check> identity_checks(const modq::ModMatrix& A, const amp::AmplitudeTable& f,
                                          double tol = 1e-9) {
    IdentityDeviations dev = identity_suite(A, f);
    double qn = double(pow_u64(A.modulus, u32(A.rows)));
    return {
        check_abs("psi_fourier", dev.psi_fourier, 0.0, tol),
        check_abs("w_fourier", dev.w_fourier, 0.0, tol),
        check_abs("psi_to_w", dev.psi_to_w, 0.0, tol),
        check_abs("w_to_psi", dev.w_to_psi, 0.0, tol),
        check_abs("mean_weight_qn", dev.mean_weight, qn, tol),
    };
}

// ---------------------------------------------------------------------------
// Report envelope: non-deterministic fields (timestamp, timings) stay outside
// the deterministic body.

inline std::string iso_timestamp() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

inline std::string envelope(const RunOutcome& out) {
    json j;
    j["timestamp"] = iso_timestamp();
    j["wall_ms"] = out.wall_ms;
    j["report"] = out.body;
    return io::dump17(j) + "\n";
}

inline void emit(const RunOutcome& out, const std::string& json_path, bool quiet,
                 std::ostream& os) {
    std::string text = envelope(out);
    if (!json_path.empty()) io::write_file(json_path, text);
    if (!quiet) os << text;
}

// Flat rows for bound-vs-measured plots.
inline void csv_append(const std::string& path, const json& body) {
    bool fresh = !std::ifstream(path).good();
    std::ofstream out(path, std::ios::app);
    require(bool(out), errc::bad_input, "cannot open CSV file " + path);
    if (fresh) out << "subcommand,digest,seed,name,kind,measured,reference,tolerance,pass\n";
    std::string sub = body.value("subcommand", "");
    std::string digest = body.value("digest", "");
    std::string seed = body.contains("seed") ? body.at("seed").dump() : "";
    if (body.contains("checks"))
        for (const auto& c : body.at("checks"))
            out << sub << ',' << digest << ',' << seed << ',' << c.at("name").get<std::string>()
                << ',' << c.at("kind").get<std::string>() << ','
                << io::format_double(c.at("measured").get<double>()) << ','
                << io::format_double(c.at("reference").get<double>()) << ','
                << io::format_double(c.at("tolerance").get<double>()) << ','
                << (c.at("pass").get<bool>() ? 1 : 0) << '\n';
}

inline json base_body(const std::string& subcommand) {
    json j;
    j["tool"] = kVersion;
    j["subcommand"] = subcommand;
    return j;
}

}  // namespace rdl::driver
