#pragma once

#include <complex>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rdl {

using cx = std::complex<double>;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;

// Machine-readable failure categories; the CLI maps these to report fields.
enum class errc {
    bad_input,
    dimension_mismatch,
    modulus_mismatch,
    cap_exceeded,
    empty_fiber,
    zero_probability,
    not_reachable,
    precheck_failed,
    retry_limit,
    internal,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::bad_input: return "bad_input";
        case errc::dimension_mismatch: return "dimension_mismatch";
        case errc::modulus_mismatch: return "modulus_mismatch";
        case errc::cap_exceeded: return "cap_exceeded";
        case errc::empty_fiber: return "empty_fiber";
        case errc::zero_probability: return "zero_probability";
        case errc::not_reachable: return "not_reachable";
        case errc::precheck_failed: return "precheck_failed";
        case errc::retry_limit: return "retry_limit";
        case errc::internal: return "internal";
    }
    return "unknown";
}

class error : public std::runtime_error {
  public:
    error(errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
    errc code() const { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw error(code, msg); }

inline void require(bool ok, errc code, const std::string& msg) {
    if (!ok) fail(code, msg);
}

// Size caps. The dense cap bounds amplitude tables (q^m points) and is
// overridable via RDL_CAP or --cap; the state cap bounds joint registers.
struct Caps {
    u64 dense = u64(1) << 22;
    u64 state = u64(1) << 24;
};

inline Caps& caps() {
    static Caps c = [] {
        Caps init;
        if (const char* env = std::getenv("RDL_CAP")) {
            char* end = nullptr;
            unsigned long long v = std::strtoull(env, &end, 10);
            if (end && *end == '\0' && v > 0) init.dense = v;
        }
        return init;
    }();
    return c;
}

inline u64 pow_u64(u64 base, u32 exp) {
    u64 r = 1;
    for (u32 i = 0; i < exp; ++i) {
        if (base != 0 && r > ~u64(0) / base) fail(errc::cap_exceeded, "dimension overflow");
        r *= base;
    }
    return r;
}

// FNV-1a, used for instance digests in reports.
inline u64 fnv1a(std::string_view s, u64 h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(u64 v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

}  // namespace rdl
