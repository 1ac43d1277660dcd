#include "helpers.hpp"

#include <set>

#include "rdl/json_io.hpp"

using namespace rdl;
using namespace rdl::modq;
using testutil::rank_by_rowspan;
using testutil::solutions_by_enumeration;

TEST_CASE("mat_vec_mul basics", "[modq]") {
    ModMatrix A(2, 1, 3, {1, 0, 1});
    CHECK(mat_vec_mul(A, ModVector(2, {1, 1, 0})).v == std::vector<u32>{1});

    ModMatrix I4 = ModMatrix::identity(4, 3);
    ModVector x(4, {3, 1, 2});
    CHECK(mat_vec_mul(I4, x) == x);

    ModMatrix Z = ModMatrix::zeros(4, 2, 3);
    CHECK(mat_vec_mul(Z, x).v == std::vector<u32>{0, 0});

    CHECK_THROWS_AS(mat_vec_mul(A, x), error);                       // modulus mismatch
    CHECK_THROWS_AS(mat_vec_mul(A, ModVector(2, {1, 1})), error);    // dimension mismatch
    CHECK_THROWS_AS(ModVector(4, {4, 0}), error);                    // entry out of range
}

TEST_CASE("canonical lift round trip", "[modq]") {
    ModVector v(5, {0, 1, 2, 3, 4});
    CanonicalLift l = canonical_lift(v);
    CHECK(l.e == std::vector<i64>{0, 1, 2, -2, -1});
    CHECK(reduce(l) == v);

    ModVector w(4, {0, 1, 2, 3});
    CHECK(canonical_lift(w).e == std::vector<i64>{0, 1, -2, -1});
}

TEST_CASE("rank_gf2 examples and exhaustive oracle", "[modq]") {
    CHECK(rank_gf2(ModMatrix(2, 2, 3, {1, 0, 1, 0, 1, 1})) == 2);
    CHECK(rank_gf2(ModMatrix::zeros(2, 2, 3)) == 0);
    CHECK(rank_gf2(ModMatrix(2, 2, 3, {1, 0, 1, 1, 0, 1})) == 1);
    CHECK_THROWS_AS(rank_gf2(ModMatrix::zeros(3, 2, 2)), error);

    Rng rng = Rng::seeded(42);
    for (int trial = 0; trial < 50; ++trial) {
        size_t rows = 1 + rng.below(4), cols = 1 + rng.below(6);
        ModMatrix M = testutil::random_matrix(2, rows, cols, rng);
        CHECK(rank_gf2(M) == rank_by_rowspan(M));
    }
}

TEST_CASE("solve_affine_gf2 examples", "[modq]") {
    SECTION("invertible square system has a unique solution") {
        ModMatrix M(2, 2, 2, {1, 1, 0, 1});
        auto sol = solve_affine_gf2(M, ModVector(2, {1, 1}));
        REQUIRE(sol);
        CHECK(sol->kernel_basis.empty());
        CHECK(mat_vec_mul(M, sol->particular).v == std::vector<u32>{1, 1});
    }
    SECTION("underdetermined system matches the frozen example") {
        ModMatrix M(2, 1, 3, {1, 0, 1});
        auto sol = solve_affine_gf2(M, ModVector(2, {1}));
        REQUIRE(sol);
        CHECK(sol->particular.v == std::vector<u32>{1, 0, 0});
        REQUIRE(sol->kernel_basis.size() == 2);
        CHECK(sol->kernel_basis[0].v == std::vector<u32>{0, 1, 0});
        CHECK(sol->kernel_basis[1].v == std::vector<u32>{1, 0, 1});
    }
    SECTION("no solution if t outside the image") {
        CHECK_FALSE(solve_affine_gf2(ModMatrix::zeros(2, 1, 3), ModVector(2, {1})));
    }
    CHECK_THROWS_AS(solve_affine_gf2(ModMatrix(2, 1, 3, {1, 0, 1}), ModVector(2, {1, 0})), error);
}

TEST_CASE("solve_affine_gf2 equals exhaustive solution set", "[modq]") {
    Rng rng = Rng::seeded(7);
    for (int trial = 0; trial < 60; ++trial) {
        size_t rows = 1 + rng.below(5), cols = 1 + rng.below(8);
        ModMatrix M = testutil::random_matrix(2, rows, cols, rng);
        ModVector t = testutil::random_vector(2, rows, rng);
        auto truth = solutions_by_enumeration(M, t);
        auto sol = solve_affine_gf2(M, t);
        if (!sol) {
            CHECK(truth.empty());
            continue;
        }
        REQUIRE_FALSE(truth.empty());
        std::set<std::vector<u32>> got;
        u64 combos = u64(1) << sol->kernel_basis.size();
        for (u64 c = 0; c < combos; ++c) {
            ModVector x = sol->particular;
            for (size_t k = 0; k < sol->kernel_basis.size(); ++k)
                if ((c >> k) & 1) x = vec_add(x, sol->kernel_basis[k]);
            got.insert(x.v);
        }
        CHECK(got == truth);
    }
}

TEST_CASE("extend_full_rank_p1 traces", "[modq]") {
    ModMatrix A(2, 1, 3, {1, 0, 1});
    ModMatrix ext = extend_full_rank_p1(A, 2);
    CHECK(ext.rows == 2);
    CHECK(ext.row(0).v == std::vector<u32>{1, 0, 1});
    CHECK(ext.row(1).v == std::vector<u32>{1, 0, 0});
    CHECK(rank_gf2(ext) == 2);

    // already at target rank: unchanged
    CHECK(extend_full_rank_p1(A, 1) == A);

    // e_0 rejected, e_1 kept
    ModMatrix B(2, 1, 3, {1, 0, 0});
    ModMatrix extB = extend_full_rank_p1(B, 2);
    CHECK(extB.row(1).v == std::vector<u32>{0, 1, 0});

    // deterministic
    CHECK(extend_full_rank_p1(A, 2) == ext);

    CHECK_THROWS_AS(extend_full_rank_p1(ModMatrix::zeros(2, 1, 3), 2), error);
}

TEST_CASE("extend_to_invertible_p2 traces and stacking rank", "[modq]") {
    ModMatrix A(2, 1, 3, {1, 0, 1});
    ModMatrix B = extend_to_invertible_p2(A);
    REQUIRE(B.rows == 2);
    CHECK(B.row(0).v == std::vector<u32>{1, 0, 0});
    CHECK(B.row(1).v == std::vector<u32>{0, 1, 0});
    CHECK(rank_gf2(stack_rows(A, B)) == 3);

    // A already containing unit rows: B = remaining unit rows in index order
    ModMatrix C(2, 2, 5, {1, 0, 0, 0, 0, 0, 1, 0, 0, 0});
    ModMatrix BC = extend_to_invertible_p2(C);
    CHECK(BC.rows == 3);
    CHECK(rank_gf2(stack_rows(C, BC)) == 5);

    CHECK_THROWS_AS(extend_to_invertible_p2(ModMatrix(2, 2, 3, {1, 0, 1, 1, 0, 1})), error);

    Rng rng = Rng::seeded(11);
    for (int trial = 0; trial < 30; ++trial) {
        u32 n = 1 + u32(rng.below(3));
        ModMatrix M = testutil::random_matrix(2, n, 2 * n + 1, rng);
        if (rank_gf2(M) < n) continue;
        CHECK(rank_gf2(stack_rows(M, extend_to_invertible_p2(M))) == 2 * n + 1);
    }
}

TEST_CASE("instance files validate their entries", "[modq]") {
    auto good = io::json::parse(R"({"q":4,"n":1,"m":3,"A":[[0,1,3]],"y":[2]})");
    io::Instance inst = io::parse_instance(good);
    CHECK(inst.A.row(0).v == std::vector<u32>{0, 1, 3});
    REQUIRE(inst.y);
    CHECK(inst.y->v == std::vector<u32>{2});

    auto bad_entry = io::json::parse(R"({"q":4,"n":1,"m":3,"A":[[0,1,4]]})");
    CHECK_THROWS_WITH(io::parse_instance(bad_entry), Catch::Matchers::ContainsSubstring("outside"));
    auto bad_shape = io::json::parse(R"({"q":4,"n":2,"m":3,"A":[[0,1,2]]})");
    CHECK_THROWS_AS(io::parse_instance(bad_shape), error);
    auto missing = io::json::parse(R"({"q":4,"n":1,"m":3})");
    CHECK_THROWS_AS(io::parse_instance(missing), error);
}

TEST_CASE("block_split", "[modq]") {
    ModMatrix A(3, 1, 9, {0, 1, 2, 0, 1, 2, 0, 1, 2});
    auto blocks = block_split(A, 3);
    REQUIRE(blocks.size() == 3);
    for (const auto& b : blocks) {
        CHECK(b.rows == 1);
        CHECK(b.cols == 3);
        CHECK(b.row(0).v == std::vector<u32>{0, 1, 2});
    }
    CHECK(block_split(A, 9).at(0) == A);
    CHECK_THROWS_AS(block_split(A, 2), error);
}
