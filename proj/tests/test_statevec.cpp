#include "helpers.hpp"

#include <sstream>

#include "rdl/json_io.hpp"
#include "rdl/lattice_states.hpp"
#include "rdl/statevec.hpp"

using namespace rdl;
using namespace rdl::sv;

namespace {

StateVector random_state(RegisterLayout layout, Rng& rng) {
    StateVector s(std::move(layout));
    double n2 = 0.0;
    for (auto& v : s.amp) {
        v = cx(rng.uniform01() - 0.5, rng.uniform01() - 0.5);
        n2 += std::norm(v);
    }
    for (auto& v : s.amp) v /= std::sqrt(n2);
    return s;
}

// Naive O(q^2)-per-digit DFT, independent of the library path.
std::vector<cx> naive_qft(const std::vector<cx>& in, u32 q, u32 m, int sign) {
    std::vector<cx> out(in.size(), cx(0.0));
    std::vector<u32> xd, yd;
    for (u64 x = 0; x < in.size(); ++x) {
        amp::digits_of(x, q, m, xd);
        for (u64 y = 0; y < in.size(); ++y) {
            amp::digits_of(y, q, m, yd);
            u64 dot = 0;
            for (u32 j = 0; j < m; ++j) dot += u64(xd[j]) * yd[j];
            double ang = sign * 2.0 * std::numbers::pi * double(dot % q) / double(q);
            out[x] += cx(std::cos(ang), std::sin(ang)) * in[y];
        }
    }
    double inv = 1.0 / std::sqrt(std::pow(double(q), double(m)));
    for (auto& v : out) v *= inv;
    return out;
}

}  // namespace

TEST_CASE("qft on basis states", "[statevec]") {
    RegisterLayout l({Register::qdigits(2, 1)});
    StateVector zero = basis_state(l, {0});
    StateVector h = qft_register(zero, 0, Direction::forward);
    double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(h.amp[0] - cx(r)) < 1e-12);
    CHECK(std::abs(h.amp[1] - cx(r)) < 1e-12);

    RegisterLayout l4({Register::qdigits(4, 1)});
    StateVector one = basis_state(l4, {1});
    StateVector f = qft_register(one, 0, Direction::forward);
    CHECK(std::abs(f.amp[0] - cx(0.5)) < 1e-12);
    CHECK(std::abs(f.amp[1] - cx(0.0, 0.5)) < 1e-12);
    CHECK(std::abs(f.amp[2] - cx(-0.5)) < 1e-12);
    CHECK(std::abs(f.amp[3] - cx(0.0, -0.5)) < 1e-12);
}

TEST_CASE("qft forward then inverse is identity; matches the naive DFT", "[statevec]") {
    Rng rng = Rng::seeded(3);
    for (u32 q : {2u, 3u, 4u}) {
        StateVector s = random_state(RegisterLayout({Register::qdigits(q, 2)}), rng);
        StateVector round =
            qft_register(qft_register(s, 0, Direction::forward), 0, Direction::inverse);
        CHECK(testutil::l2_diff(round.amp, s.amp) < 1e-10);

        StateVector fwd = qft_register(s, 0, Direction::forward);
        CHECK(testutil::l2_diff(fwd.amp, naive_qft(s.amp, q, 2, +1)) < 1e-12);
        CHECK(std::abs(norm(fwd) - 1.0) < 1e-10);
    }
}

TEST_CASE("qft leaves the bottom slot alone", "[statevec]") {
    RegisterLayout l({Register::qdigits(2, 2, /*bottom=*/true)});
    StateVector s(l);
    s.amp[4] = 1.0;  // the bottom index
    StateVector f = qft_register(s, 0, Direction::forward);
    CHECK(std::abs(f.amp[4] - cx(1.0)) < 1e-15);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(f.amp[i]) < 1e-15);
}

TEST_CASE("shift_register", "[statevec]") {
    Rng rng = Rng::seeded(4);
    StateVector s = random_state(RegisterLayout({Register::qdigits(3, 2)}), rng);

    StateVector same = shift_register(s, 0, modq::ModVector(3, {0, 0}));
    CHECK(testutil::l2_diff(same.amp, s.amp) < 1e-15);

    modq::ModVector z(3, {1, 2});
    modq::ModVector mz(3, {2, 1});
    StateVector round = shift_register(shift_register(s, 0, z), 0, mz);
    CHECK(testutil::l2_diff(round.amp, s.amp) < 1e-15);

    CHECK_THROWS_AS(shift_register(s, 0, modq::ModVector(3, {1})), error);
}

TEST_CASE("shifting psi_s by A^T(t-s) gives psi_t", "[statevec]") {
    Rng rng = Rng::seeded(12);
    modq::ModMatrix A = testutil::random_matrix(3, 1, 2, rng);
    amp::AmplitudeTable f = io::random_dense_family(3, 2, rng);
    modq::ModVector s(3, {1}), t(3, {2});
    StateVector psi_s = lat::build_psi(A, f, s);
    StateVector psi_t = lat::build_psi(A, f, t);
    modq::ModVector delta = modq::mat_vec_mul(modq::transpose(A), modq::vec_sub(t, s));
    StateVector shifted = shift_register(psi_s, 0, delta);
    CHECK(testutil::l2_diff(shifted.amp, psi_t.amp) < 1e-10);
}

TEST_CASE("controlled map to reference", "[statevec]") {
    SECTION("reference vector itself is a fixed point") {
        std::vector<cx> e0(4, cx(0.0));
        e0[0] = 1.0;
        ReferenceBranch b = make_reference_branch(e0);
        CHECK(b.trivial);
    }
    SECTION("balanced pair acts as the 2-point transform") {
        double r = 1.0 / std::sqrt(2.0);
        ReferenceBranch b = make_reference_branch({cx(r), cx(r)});
        RegisterLayout l({Register::qdigits(2, 1), Register::qdigits(2, 1)});
        std::map<u64, ReferenceBranch> branches{{0, b}, {1, b}};
        StateVector plus(l);
        plus.amp[0] = r;
        plus.amp[2] = r;  // (|0> + |1>)/sqrt2 on the first register, ctrl = second
        StateVector res = controlled_map_to_reference(plus, 1, 0, branches);
        CHECK(std::abs(res.amp[0] - cx(1.0)) < 1e-10);
        CHECK(std::abs(res.amp[2]) < 1e-10);
    }
    SECTION("orthogonality preserved on random pairs") {
        Rng rng = Rng::seeded(6);
        for (int trial = 0; trial < 20; ++trial) {
            RegisterLayout l({Register::qdigits(3, 1), Register::qdigits(3, 1)});
            StateVector a = random_state(l, rng);
            StateVector b = random_state(l, rng);
            // Gram-Schmidt so that <a|b> = 0
            cx ov = inner(a, b);
            for (size_t i = 0; i < b.amp.size(); ++i) b.amp[i] -= ov * a.amp[i];
            double nb = norm(b);
            for (auto& v : b.amp) v /= nb;

            std::vector<cx> v(3);
            double n2 = 0.0;
            for (auto& x : v) {
                x = cx(rng.uniform01() - 0.5, rng.uniform01() - 0.5);
                n2 += std::norm(x);
            }
            for (auto& x : v) x /= std::sqrt(n2);
            std::map<u64, ReferenceBranch> branches;
            for (u64 c = 0; c < 3; ++c) branches.emplace(c, make_reference_branch(v));

            StateVector ua = controlled_map_to_reference(a, 1, 0, branches);
            StateVector ub = controlled_map_to_reference(b, 1, 0, branches);
            CHECK(std::abs(inner(ua, ub)) < 1e-10);
            CHECK(std::abs(norm(ua) - 1.0) < 1e-10);

            StateVector back = controlled_map_to_reference(ua, 1, 0, branches, /*inverse=*/true);
            CHECK(testutil::l2_diff(back.amp, a.amp) < 1e-10);
        }
    }
    SECTION("non-unit branch vector rejected") {
        CHECK_THROWS_AS(make_reference_branch({cx(0.5), cx(0.5)}), error);
    }
}

TEST_CASE("measure_register", "[statevec]") {
    SECTION("product state measures the second register deterministically") {
        RegisterLayout l({Register::qdigits(2, 1), Register::qdigits(3, 1)});
        StateVector s = basis_state(l, {1, 2});
        std::vector<double> probs = measure_probs(s, 1);
        CHECK(std::abs(probs[2] - 1.0) < 1e-12);
        auto [p, collapsed] = collapse(s, 1, 2);
        CHECK(std::abs(p - 1.0) < 1e-12);
        CHECK(std::abs(norm(collapsed) - 1.0) < 1e-12);
    }
    SECTION("uniform superposition over Z_2") {
        RegisterLayout l({Register::qdigits(2, 1)});
        StateVector s = qft_register(basis_state(l, {0}), 0, Direction::forward);
        std::vector<double> probs = measure_probs(s, 0);
        CHECK(std::abs(probs[0] - 0.5) < 1e-12);
        CHECK(std::abs(probs[1] - 0.5) < 1e-12);
        double total = probs[0] + probs[1];
        CHECK(std::abs(total - 1.0) < 1e-9);
    }
    SECTION("zero-probability conditioning is an error") {
        RegisterLayout l({Register::qdigits(2, 1)});
        StateVector s = basis_state(l, {0});
        CHECK_THROWS_AS(collapse(s, 0, 1), error);
    }
    SECTION("sampling is seeded and collapses") {
        RegisterLayout l({Register::qdigits(2, 2)});
        Rng rng = Rng::seeded(1);
        StateVector s = random_state(l, rng);
        Rng r1 = Rng::seeded(77), r2 = Rng::seeded(77);
        auto [o1, c1] = sample_measure(s, 0, r1);
        auto [o2, c2] = sample_measure(s, 0, r2);
        CHECK(o1 == o2);
        CHECK(std::abs(norm(c1) - 1.0) < 1e-9);
    }
}

TEST_CASE("add_register and add_matrix_register are inverse pairs", "[statevec]") {
    Rng rng = Rng::seeded(8);
    RegisterLayout l({Register::qdigits(3, 2), Register::qdigits(3, 1)});
    StateVector s = random_state(l, rng);
    CHECK_THROWS_AS(add_register(s, 1, 0, +1), error);  // shapes differ

    RegisterLayout l2({Register::qdigits(3, 2), Register::qdigits(3, 2)});
    StateVector t = random_state(l2, rng);
    StateVector round2 = add_register(add_register(t, 1, 0, +1), 1, 0, -1);
    CHECK(testutil::l2_diff(round2.amp, t.amp) < 1e-15);

    modq::ModMatrix M = testutil::random_matrix(3, 1, 2, rng);
    StateVector u = random_state(l, rng);
    StateVector round3 = add_matrix_register(add_matrix_register(u, 0, 1, M, +1), 0, 1, M, -1);
    CHECK(testutil::l2_diff(round3.amp, u.amp) < 1e-15);
}

TEST_CASE("inner products", "[statevec]") {
    RegisterLayout l({Register::qdigits(3, 2)});
    StateVector a = basis_state(l, {4});
    CHECK(std::abs(inner(a, a) - cx(1.0)) < 1e-12);
    StateVector b = basis_state(l, {5});
    CHECK(std::abs(inner(a, b)) < 1e-12);
    RegisterLayout other({Register::qdigits(3, 1)});
    StateVector c = basis_state(other, {0});
    CHECK_THROWS_AS(inner(a, c), error);
}

TEST_CASE("W_y states from different syndromes are orthogonal", "[statevec]") {
    Rng rng = Rng::seeded(21);
    modq::ModMatrix A(2, 1, 3, {1, 1, 0});
    amp::AmplitudeTable f = io::random_dense_family(2, 3, rng);
    auto [w0, wt0] = lat::build_w(A, f, modq::ModVector(2, {0}));
    auto [w1, wt1] = lat::build_w(A, f, modq::ModVector(2, {1}));
    CHECK(std::abs(inner(w0, w1)) < 1e-10);
    CHECK(std::abs(inner(w0, w0) - cx(1.0)) < 1e-10);
}

TEST_CASE("dimension cap enforced", "[statevec]") {
    u64 saved = caps().state;
    caps().state = 1 << 8;
    CHECK_THROWS_AS(RegisterLayout({Register::qdigits(2, 9)}), error);
    caps().state = saved;
}

TEST_CASE("state dump round trip", "[statevec]") {
    Rng rng = Rng::seeded(31);
    RegisterLayout l({Register::qdigits(3, 2), Register::qdigits(2, 1, true)});
    StateVector s = random_state(l, rng);
    std::stringstream ss;
    dump_state(ss, s);
    StateVector back = load_state(ss);
    REQUIRE(back.layout.same_shape(s.layout));
    CHECK(testutil::l2_diff(back.amp, s.amp) == 0.0);
}
