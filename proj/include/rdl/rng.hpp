#pragma once

#include <random>
#include <string_view>

#include "rdl/util.hpp"

namespace rdl {

inline u64 splitmix64(u64 x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// One stream per run, forked per sub-task by label so parallel sweeps and
// reordered work never change what any sub-task draws.
class Rng {
  public:
    Rng fork(std::string_view label, u64 index = 0) const {
        u64 h = fnv1a(label);
        h = splitmix64(h ^ splitmix64(seed_mix_ ^ index * 0x9e3779b97f4a7c15ull));
        Rng child(h);
        child.seed_mix_ = h;
        return child;
    }

    u64 next() { return eng_(); }

    // Uniform in [0, bound) without modulo bias.
    u64 below(u64 bound) {
        require(bound > 0, errc::bad_input, "rng bound must be positive");
        u64 limit = ~u64(0) - ~u64(0) % bound;
        u64 v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % bound;
    }

    double uniform01() { return double(eng_() >> 11) * 0x1.0p-53; }

    static Rng seeded(u64 seed) {
        Rng r(splitmix64(seed));
        r.seed_mix_ = splitmix64(seed);
        return r;
    }

  private:
    explicit Rng(u64 raw) : eng_(raw) {}

    std::mt19937_64 eng_;
    u64 seed_mix_ = 0;
};

}  // namespace rdl
