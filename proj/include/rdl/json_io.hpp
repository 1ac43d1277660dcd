#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdl/amplitude.hpp"
#include "rdl/modq.hpp"
#include "rdl/rng.hpp"
#include "rdl/util.hpp"

namespace rdl::io {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Deterministic serialization: insertion-ordered keys, doubles printed with
// 17 significant digits so every float round-trips.

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void dump17(const json& j, std::string& out) {
    switch (j.type()) {
        case json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                out += json(it.key()).dump();
                out += ':';
                dump17(it.value(), out);
            }
            out += '}';
            break;
        }
        case json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ',';
                first = false;
                dump17(v, out);
            }
            out += ']';
            break;
        }
        case json::value_t::number_float:
            out += format_double(j.get<double>());
            break;
        default:
            out += j.dump();
    }
}

inline std::string dump17(const json& j) {
    std::string out;
    dump17(j, out);
    return out;
}

// ---------------------------------------------------------------------------
// Instance files: {"q": ..., "n": ..., "m": ..., "A": [[...], ...], "y": [...]}.

struct Instance {
    u32 q = 2, n = 1;
    u64 m = 1;
    modq::ModMatrix A;
    std::optional<modq::ModVector> y;
    std::string digest;
};

inline std::string instance_digest(const modq::ModMatrix& A, const std::optional<modq::ModVector>& y) {
    std::string blob = std::to_string(A.modulus) + "|" + std::to_string(A.rows) + "|" +
                       std::to_string(A.cols);
    for (u32 e : A.a) blob += "," + std::to_string(e);
    if (y) {
        blob += "|y";
        for (u32 e : y->v) blob += "," + std::to_string(e);
    }
    return hex64(fnv1a(blob));
}

inline Instance parse_instance(const json& j) {
    require(j.is_object(), errc::bad_input, "instance must be a JSON object");
    for (const char* key : {"q", "n", "m", "A"})
        require(j.contains(key), errc::bad_input, std::string("instance missing field '") + key + "'");
    Instance inst;
    inst.q = j.at("q").get<u32>();
    inst.n = j.at("n").get<u32>();
    inst.m = j.at("m").get<u64>();
    require(inst.q >= 2, errc::bad_input, "instance needs q >= 2");
    require(inst.q <= (u32(1) << 16), errc::bad_input, "instance needs q <= 2^16");
    const json& rows = j.at("A");
    require(rows.is_array() && rows.size() == inst.n, errc::bad_input, "A must have n rows");
    std::vector<u32> entries;
    entries.reserve(size_t(inst.n) * inst.m);
    for (const auto& row : rows) {
        require(row.is_array() && row.size() == inst.m, errc::bad_input, "A row must have m entries");
        for (const auto& e : row) {
            require(e.is_number_integer(), errc::bad_input, "A entries must be integers");
            i64 v = e.get<i64>();
            require(v >= 0 && v < i64(inst.q), errc::bad_input,
                    "A entry " + std::to_string(v) + " outside [0, q)");
            entries.push_back(u32(v));
        }
    }
    inst.A = modq::ModMatrix(inst.q, inst.n, size_t(inst.m), std::move(entries));
    if (j.contains("y")) {
        const json& yv = j.at("y");
        require(yv.is_array() && yv.size() == inst.n, errc::bad_input, "y must have n entries");
        std::vector<u32> ye;
        for (const auto& e : yv) {
            i64 v = e.get<i64>();
            require(v >= 0 && v < i64(inst.q), errc::bad_input,
                    "y entry " + std::to_string(v) + " outside [0, q)");
            ye.push_back(u32(v));
        }
        inst.y = modq::ModVector(inst.q, std::move(ye));
    }
    inst.digest = instance_digest(inst.A, inst.y);
    return inst;
}

inline json instance_to_json(const Instance& inst) {
    json j;
    j["q"] = inst.q;
    j["n"] = inst.n;
    j["m"] = inst.m;
    json rows = json::array();
    for (size_t i = 0; i < inst.A.rows; ++i) {
        json row = json::array();
        for (size_t c = 0; c < inst.A.cols; ++c) row.push_back(inst.A(i, c));
        rows.push_back(std::move(row));
    }
    j["A"] = std::move(rows);
    if (inst.y) {
        json yv = json::array();
        for (u32 e : inst.y->v) yv.push_back(e);
        j["y"] = std::move(yv);
    }
    return j;
}

inline Instance gen_instance(u32 q, u32 n, u64 m, u64 seed, bool with_y = true) {
    require(q >= 2, errc::bad_input, "need q >= 2");
    Rng rng = Rng::seeded(seed).fork("gen-instance");
    Instance inst;
    inst.q = q;
    inst.n = n;
    inst.m = m;
    std::vector<u32> entries(size_t(n) * m);
    for (auto& e : entries) e = u32(rng.below(q));
    inst.A = modq::ModMatrix(q, n, size_t(m), std::move(entries));
    if (with_y) {
        std::vector<u32> yv(n);
        for (auto& e : yv) e = u32(rng.below(q));
        inst.y = modq::ModVector(q, std::move(yv));
    }
    inst.digest = instance_digest(inst.A, inst.y);
    return inst;
}

inline Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    require(bool(in), errc::bad_input, "cannot open instance file " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail(errc::bad_input, std::string("instance file is not valid JSON: ") + e.what());
    }
    return parse_instance(j);
}

// Accepts a file path or inline JSON (leading '{').
inline json load_json_arg(const std::string& arg) {
    std::string text = arg;
    if (!arg.empty() && arg[0] != '{' && arg[0] != '[') {
        std::ifstream in(arg);
        require(bool(in), errc::bad_input, "cannot open JSON file " + arg);
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    try {
        return json::parse(text);
    } catch (const std::exception& e) {
        fail(errc::bad_input, std::string("invalid JSON: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Target sets: {"kind":"binary"} | {"kind":"linf","bound":B} |
// {"kind":"explicit","elements":[[...],...]}.

inline amp::TargetSet parse_target(const json& j, u32 q, u32 m) {
    require(j.is_object() && j.contains("kind"), errc::bad_input, "target set needs a 'kind'");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "binary") return amp::TargetSet::binary();
    if (kind == "linf") {
        require(j.contains("bound"), errc::bad_input, "linf target needs 'bound'");
        return amp::TargetSet::linf_ball(j.at("bound").get<u64>());
    }
    if (kind == "explicit") {
        require(j.contains("elements") && j.at("elements").is_array(), errc::bad_input,
                "explicit target needs 'elements'");
        std::vector<modq::ModVector> elems;
        for (const auto& row : j.at("elements")) {
            require(row.is_array() && row.size() == m, errc::bad_input,
                    "explicit element must have m entries");
            std::vector<u32> v;
            for (const auto& e : row) {
                i64 x = e.get<i64>();
                require(x >= 0 && x < i64(q), errc::bad_input, "element entry outside [0, q)");
                v.push_back(u32(x));
            }
            elems.emplace_back(q, std::move(v));
        }
        return amp::TargetSet::explicit_set(std::move(elems));
    }
    fail(errc::bad_input, "unknown target kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Amplitude families: {"kind":"delta"} | {"kind":"uniform"} |
// {"kind":"indicator_fourier","T":...} | {"kind":"gaussian","sigma":s} |
// {"kind":"dense","re":[...],"im":[...]}.

inline amp::AmplitudeTable parse_family(const json& j, u32 q, u32 m) {
    require(j.is_object() && j.contains("kind"), errc::bad_input, "family needs a 'kind'");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "delta") return amp::delta_family(q, m);
    if (kind == "uniform") return amp::uniform_family(q, m);
    if (kind == "gaussian") {
        require(j.contains("sigma"), errc::bad_input, "gaussian family needs 'sigma'");
        return amp::gaussian_family(j.at("sigma").get<double>(), q, m);
    }
    if (kind == "indicator_fourier") {
        require(j.contains("T"), errc::bad_input, "indicator family needs 'T'");
        return amp::indicator_fourier_family(parse_target(j.at("T"), q, m), q, m);
    }
    if (kind == "dense") {
        require(j.contains("re") && j.contains("im"), errc::bad_input, "dense family needs re/im");
        const json& re = j.at("re");
        const json& im = j.at("im");
        u64 npts = pow_u64(q, m);
        require(re.is_array() && im.is_array() && re.size() == npts && im.size() == npts,
                errc::bad_input, "dense family arrays must have q^m entries");
        std::vector<cx> vals(npts);
        for (u64 i = 0; i < npts; ++i) vals[i] = cx(re[i].get<double>(), im[i].get<double>());
        return amp::dense_family(q, m, std::move(vals));
    }
    fail(errc::bad_input, "unknown family kind '" + kind + "'");
}

// Seeded random dense family, used by identity sweeps.
inline amp::AmplitudeTable random_dense_family(u32 q, u32 m, Rng& rng) {
    u64 npts = pow_u64(q, m);
    require(npts <= caps().dense, errc::cap_exceeded, "q^m exceeds dense cap");
    std::vector<cx> vals(npts);
    double norm2 = 0.0;
    for (auto& v : vals) {
        // Box-Muller from the seeded stream keeps the sweep reproducible.
        double u1 = std::max(rng.uniform01(), 1e-12);
        double u2 = rng.uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        v = cx(r * std::cos(2.0 * std::numbers::pi * u2), r * std::sin(2.0 * std::numbers::pi * u2));
        norm2 += std::norm(v);
    }
    double inv = 1.0 / std::sqrt(norm2);
    for (auto& v : vals) v *= inv;
    return amp::dense_family(q, m, std::move(vals));
}

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    require(bool(out), errc::bad_input, "cannot write file " + path);
    out << contents;
}

}  // namespace rdl::io
