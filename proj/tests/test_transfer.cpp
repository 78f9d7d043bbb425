#include <doctest.h>

#include <cmath>

#include "glap/error.hpp"
#include "glap/transfer.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace glap;
using testutil::mat;

TEST_SUITE("transfer") {

TEST_CASE("span of e1, e2 in R^3") {
    const SemanticTable seen({0, 1}, mat({{1, 0}, {0, 1}, {0, 0}}));
    const SemanticTable unseen({2, 3, 4}, mat({{0, 1, 1}, {0, 1, 1}, {1, 0, 1}}));
    const auto r = check_transferability(seen, unseen);
    REQUIRE(r.per_class.size() == 3);
    CHECK(r.seen_rank == 2);
    CHECK(std::abs(r.per_class[0].relative_residual - 1.0) <= 1e-12);
    CHECK_FALSE(r.per_class[0].transferable);
    CHECK(r.per_class[1].relative_residual <= 1e-15);
    CHECK(r.per_class[1].transferable);
    // Projection of [1,1,1] is [1,1,0]; residual 1/sqrt(3).
    CHECK(std::abs(r.per_class[2].relative_residual - 1.0 / std::sqrt(3.0)) <= 1e-12);
    CHECK_FALSE(r.all_transferable());
}

TEST_CASE("errors") {
    const SemanticTable seen({0}, mat({{1}, {0}}));
    CHECK_THROWS_AS(check_transferability(seen, SemanticTable({1}, mat({{0}, {0}}))), InputError);
    CHECK_THROWS_AS(check_transferability(seen, SemanticTable({1}, mat({{1}, {0}, {0}}))), InputError);
    CHECK_THROWS_AS(check_transferability(seen, SemanticTable({1}, mat({{1}, {0}})), 0.0), InputError);
}

TEST_CASE("residual agrees with Gram-Schmidt oracle and is invariant to rescaling and recombination") {
    Rng rng(13);
    for (int trial = 0; trial < 40; ++trial) {
        const Eigen::Index a = 3 + static_cast<Eigen::Index>(rng.bits() % 10);
        const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng.bits() % static_cast<std::uint64_t>(a));
        const Eigen::MatrixXd Ks = testutil::gaussian(rng, a, k);
        const Eigen::MatrixXd Kt = testutil::gaussian(rng, a, 4);
        std::vector<ClassId> ids(static_cast<std::size_t>(k));
        for (Eigen::Index i = 0; i < k; ++i) ids[static_cast<std::size_t>(i)] = i;
        const SemanticTable s(ids, Ks);
        const SemanticTable u({100, 101, 102, 103}, Kt);
        const auto base = check_transferability(s, u);

        const Eigen::MatrixXd mix = testutil::gaussian(rng, k, k) + 3.0 * Eigen::MatrixXd::Identity(k, k);
        const auto recombined = check_transferability(SemanticTable(ids, Ks * mix), u);
        const auto rescaled = check_transferability(s, SemanticTable({100, 101, 102, 103}, 7.5 * Kt));
        for (std::size_t i = 0; i < 4; ++i) {
            const double r = base.per_class[i].relative_residual;
            CHECK(r >= 0.0);
            CHECK(r <= 1.0 + 1e-12);
            CHECK(std::abs(r - oracle::span_residual(Ks, Kt.col(static_cast<Eigen::Index>(i)))) <= 1e-9);
            CHECK(std::abs(r - recombined.per_class[i].relative_residual) <= 1e-9);
            CHECK(std::abs(r - rescaled.per_class[i].relative_residual) <= 1e-12);
            CHECK(base.per_class[i].transferable == (r <= base.tolerance));
        }
    }
}

TEST_CASE("full row rank seen matrix makes everything transferable") {
    Rng rng(17);
    const Eigen::MatrixXd Ks = testutil::gaussian(rng, 5, 8);
    const auto r = check_transferability(SemanticTable({0, 1, 2, 3, 4, 5, 6, 7}, Ks),
                                         SemanticTable({10, 11, 12}, testutil::gaussian(rng, 5, 3)));
    CHECK(r.seen_rank == 5);
    for (const auto& e : r.per_class) CHECK(e.relative_residual <= 1e-12);
    CHECK(r.all_transferable());
}

TEST_CASE("rank cutoff drops numerically dependent directions") {
    // Third column is e1 + 1e-13 e3: below the 1e-10 relative cutoff.
    const SemanticTable seen({0, 1, 2}, mat({{1, 0, 1}, {0, 1, 0}, {0, 0, 1e-13}}));
    const auto r = check_transferability(seen, SemanticTable({5}, mat({{0}, {0}, {1}})));
    CHECK(r.seen_rank == 2);
    CHECK(std::abs(r.per_class[0].relative_residual - 1.0) <= 1e-9);
}

}
