#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "glap/error.hpp"
#include "glap/model.hpp"
#include "glap/synth.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace glap;
using testutil::mat;
using testutil::vec;

TEST_SUITE("model") {

TEST_CASE("fit_combined at lambda = 1 is fit_linear_map") {
    Rng rng(1);
    const Eigen::MatrixXd X = testutil::gaussian(rng, 6, 30), K = testutil::gaussian(rng, 4, 30);
    const Eigen::MatrixXd Xv = testutil::gaussian(rng, 6, 12), Kv = testutil::gaussian(rng, 4, 12);
    CHECK(fit_combined(X, K, Xv, Kv, 1.0, 0.01).A == fit_linear_map(X, K, 0.01).A);
    CHECK(fit_combined(X, K, {}, {}, 1.0, 0.0).A == fit_linear_map(X, K, 0.0).A);
    const auto auto_eps = fit_combined(X, K, Xv, Kv, 1.0, std::nullopt);
    CHECK(auto_eps.ridge_eps == default_ridge_eps(X * X.transpose()));
    CHECK(auto_eps.A == fit_linear_map(X, K, auto_eps.ridge_eps).A);
}

TEST_CASE("fit_combined at lambda = 0 on a rank-1 virtual set") {
    const Eigen::MatrixXd Xv = mat({{1, 1, 1}, {0, 0, 0}});
    const Eigen::MatrixXd Kv = mat({{2, 2, 2}});
    const auto map = fit_combined({}, {}, Xv, Kv, 0.0, 1e-9);
    CHECK(oracle::rel_frobenius(map.A, oracle::linear_map(Xv, Kv, 1e-9)) <= 1e-12);
    CHECK(std::abs(map.A(0, 0) - 2.0) <= 1e-8);
    CHECK(map.A(0, 1) == 0.0);
}

TEST_CASE("fit_combined at lambda = 0 ignores the source operands") {
    Rng rng(2);
    const Eigen::MatrixXd Xv = testutil::gaussian(rng, 5, 20), Kv = testutil::gaussian(rng, 3, 20);
    const auto ref = fit_combined(testutil::gaussian(rng, 5, 9), testutil::gaussian(rng, 3, 9), Xv, Kv, 0.0, 0.1);
    const auto other = fit_combined(testutil::gaussian(rng, 5, 40), testutil::gaussian(rng, 3, 40), Xv, Kv, 0.0, 0.1);
    const auto none = fit_combined({}, {}, Xv, Kv, 0.0, 0.1);
    CHECK(ref.A == other.A);
    CHECK(ref.A == none.A);
}

TEST_CASE("fit_combined with identical operands collapses") {
    Rng rng(3);
    const Eigen::MatrixXd X = testutil::gaussian(rng, 5, 25), K = testutil::gaussian(rng, 2, 25);
    CHECK(fit_combined(X, K, X, K, 0.5, 1e-4).A == fit_linear_map(X, K, 1e-4).A);
}

TEST_CASE("fit_combined matches the explicit convex-combination oracle") {
    Rng rng(4);
    const Eigen::MatrixXd X = testutil::gaussian(rng, 5, 25), K = testutil::gaussian(rng, 2, 25);
    const Eigen::MatrixXd Xv = testutil::gaussian(rng, 5, 10), Kv = testutil::gaussian(rng, 2, 10);
    const double lambda = 0.3, eps = 0.05;
    const auto map = fit_combined(X, K, Xv, Kv, lambda, eps);
    oracle::Dense gram = oracle::to_dense(lambda * X * X.transpose() + (1 - lambda) * Xv * Xv.transpose());
    for (std::size_t i = 0; i < gram.size(); ++i) gram[i][i] += eps;
    const Eigen::MatrixXd cross = lambda * K * X.transpose() + (1 - lambda) * Kv * Xv.transpose();
    const Eigen::MatrixXd expected = oracle::from_dense(oracle::multiply(oracle::to_dense(cross), oracle::inverse(gram)));
    CHECK(oracle::rel_frobenius(map.A, expected) <= 1e-10);
}

TEST_CASE("fit_combined is continuous in lambda") {
    Rng rng(5);
    const Eigen::MatrixXd X = testutil::gaussian(rng, 5, 25), K = testutil::gaussian(rng, 2, 25);
    const Eigen::MatrixXd Xv = testutil::gaussian(rng, 5, 10), Kv = testutil::gaussian(rng, 2, 10);
    for (double lambda : {0.1, 0.5, 0.9}) {
        const auto a = fit_combined(X, K, Xv, Kv, lambda, 0.01).A;
        const auto b = fit_combined(X, K, Xv, Kv, lambda + 1e-6, 0.01).A;
        CHECK((a - b).norm() <= 1e-4 * a.norm());
    }
}

TEST_CASE("fit_combined errors") {
    Rng rng(6);
    const Eigen::MatrixXd X = testutil::gaussian(rng, 3, 5), K = testutil::gaussian(rng, 2, 5);
    CHECK_THROWS_AS(fit_combined(X, K, {}, {}, 0.5, 0.1), InputError);
    CHECK_THROWS_AS(fit_combined({}, {}, X, K, 0.5, 0.1), InputError);
    CHECK_THROWS_AS(fit_combined(X, K, X, K, 1.5, 0.1), InputError);
    CHECK_THROWS_AS(fit_combined(X, K, X, K, -0.1, 0.1), InputError);
    const Eigen::MatrixXd rank1 = mat({{1, 1}, {0, 0}});
    CHECK_THROWS_AS(fit_combined(rank1, mat({{1, 1}}), rank1, mat({{1, 1}}), 0.5, 0.0), SingularMatrixError);
}

TEST_CASE("strategy config validation") {
    for (Strategy s : {Strategy::Baseline, Strategy::Glap1, Strategy::Glap2, Strategy::Glap3}) {
        CHECK_NOTHROW(validate_config(StrategyConfig::for_strategy(s)));
    }
    auto c = StrategyConfig::for_strategy(Strategy::Baseline);
    c.lambda = 0.5;
    CHECK_THROWS_AS(validate_config(c), InputError);
    c = StrategyConfig::for_strategy(Strategy::Glap2);
    c.lambda = 1.0;
    CHECK_THROWS_AS(validate_config(c), InputError);
    c = StrategyConfig::for_strategy(Strategy::Glap1);
    c.npc = 0;
    CHECK_THROWS_AS(validate_config(c), InputError);
    c = StrategyConfig::for_strategy(Strategy::Glap1);
    c.sigma2 = -1.0;
    CHECK_THROWS_AS(validate_config(c), InputError);
    CHECK_THROWS_AS(parse_strategy("glap4"), InputError);
}

TEST_CASE("baseline on a self-map split learns the identity") {
    Rng rng(7);
    ZslSplit split;
    const Eigen::MatrixXd protos = testutil::gaussian(rng, 4, 6);
    split.seen = SemanticTable({0, 1, 2, 3, 4, 5}, protos);
    split.unseen = SemanticTable({6, 7}, testutil::gaussian(rng, 4, 2));
    split.source.features.resize(4, 12);
    for (Eigen::Index j = 0; j < 12; ++j) {
        split.source.features.col(j) = protos.col(j % 6);
        split.source.labels.push_back(j % 6);
    }
    auto cfg = StrategyConfig::for_strategy(Strategy::Baseline);
    cfg.ridge_eps = 0.0;
    const auto model = train(split, cfg);
    CHECK(oracle::rel_frobenius(model.map.A, Eigen::MatrixXd::Identity(4, 4)) <= 1e-10);
    CHECK(model.provenance.source_columns == 12);
    CHECK(model.provenance.virtual_columns == 0);
}

TEST_CASE("train rejects an invalid split") {
    auto split = testutil::tiny_split();
    split.unseen = SemanticTable({1, 2}, split.unseen.vectors());
    CHECK_THROWS_AS(train(split, StrategyConfig::for_strategy(Strategy::Glap2)), InputError);
}

TEST_CASE("predict examples") {
    GlapModel model;
    model.map.A = Eigen::MatrixXd::Identity(2, 2);
    model.unseen = SemanticTable({0, 1}, Eigen::MatrixXd::Identity(2, 2));
    SUBCASE("nearest candidate") {
        const auto p = predict(model, mat({{0.9}, {0.1}}));
        CHECK(p.labels == LabelVector{0});
        CHECK(p.scores.rows() == 2);
    }
    SUBCASE("exact tie goes to the lower id regardless of entry order") {
        model.unseen = SemanticTable({5, 3}, Eigen::MatrixXd::Identity(2, 2));
        const auto p = predict(model, mat({{0.5}, {0.5}}));
        CHECK(p.labels == LabelVector{3});
        model.config.metric = Metric::Cosine;
        CHECK(predict(model, mat({{0.5}, {0.5}})).labels == LabelVector{3});
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(predict(model, mat({{1}, {2}, {3}})), InputError);
    }
    SUBCASE("cosine falls back to euclidean on a zero projection") {
        model.config.metric = Metric::Cosine;
        model.unseen = SemanticTable({0, 1}, mat({{0.1, 3}, {0, 0}}));
        const auto p = predict(model, mat({{0, 2}, {0, 0}}));
        CHECK(p.euclidean_fallback == std::vector<bool>{true, false});
        CHECK(p.labels[0] == 0);  // nearest by distance
        CHECK(p.scores(0, 0) == doctest::Approx(0.1));
        CHECK(p.scores(0, 1) == doctest::Approx(1.0));  // cosine similarity
    }
}

TEST_CASE("predict invariances") {
    Rng rng(8);
    GlapModel model;
    model.map.A = testutil::gaussian(rng, 3, 5);
    model.unseen = SemanticTable({4, 9, 1, 6}, testutil::gaussian(rng, 3, 4));
    const Eigen::MatrixXd X = testutil::gaussian(rng, 5, 50);
    const auto base = predict(model, X);

    SUBCASE("instance order") {
        const Eigen::MatrixXd Xr = X.rowwise().reverse();
        const auto rev = predict(model, Xr);
        CHECK(LabelVector(rev.labels.rbegin(), rev.labels.rend()) == base.labels);
    }
    SUBCASE("squared and unsquared distances pick the same class") {
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            Eigen::Index best_sq = 0;
            double best = INFINITY;
            for (Eigen::Index c = 0; c < 4; ++c) {
                const double sq = base.scores(c, j) * base.scores(c, j);
                if (sq < best) {
                    best = sq;
                    best_sq = c;
                }
            }
            CHECK(model.unseen.class_ids()[static_cast<std::size_t>(best_sq)] == base.labels[static_cast<std::size_t>(j)]);
        }
    }
    SUBCASE("shared constant semantic component with a zero map row") {
        GlapModel padded = model;
        padded.map.A.conservativeResize(4, Eigen::NoChange);
        padded.map.A.row(3).setZero();
        Eigen::MatrixXd v = model.unseen.vectors();
        v.conservativeResize(4, Eigen::NoChange);
        v.row(3).setConstant(2.5);
        padded.unseen = SemanticTable(model.unseen.class_ids(), v);
        CHECK(predict(padded, X).labels == base.labels);
    }
}

TEST_CASE("round trip through the generator") {
    // A fitted on noiseless virtual data maps each generated center to its own class.
    SyntheticConfig cfg;
    cfg.obs_noise = 0.2;
    const auto world = generate_synthetic_split(cfg);
    auto sc = StrategyConfig::for_strategy(Strategy::Glap1);
    sc.sigma2 = 0.0;
    sc.npc = 3;
    const auto model = train(world.split, sc);
    const auto weights = reconstruct_weights(world.split.seen, world.split.unseen, sc.reg);
    const auto means = compute_class_means(world.split.source.features, world.split.source.labels, world.split.seen);
    const auto p = predict(model, means.means * weights.W);
    CHECK(p.labels == world.split.unseen.class_ids());
}

TEST_CASE("glap1 with unseen vectors equal to seen vectors samples the seen means") {
    auto split = testutil::tiny_split();
    split.seen = SemanticTable({0, 1}, mat({{1, 0}, {0, 1}, {0, 0}}));
    split.unseen = SemanticTable({2, 3}, mat({{0, 1}, {1, 0}, {0, 0}}));
    const RegularizerSpec reg{RegularizerKind::L1, 1e-9};
    const auto w = reconstruct_weights(split.seen, split.unseen, reg);
    const auto means = compute_class_means(split.source.features, split.source.labels, split.seen);
    const auto v = generate_virtual(means, w, split.unseen, 2, 0.0, 0);
    CHECK((v.features.col(0) - means.means.col(1)).norm() <= 1e-8);
    CHECK((v.features.col(2) - means.means.col(0)).norm() <= 1e-8);

    auto cfg = StrategyConfig::for_strategy(Strategy::Glap1);
    cfg.sigma2 = 0.0;
    cfg.reg = reg;
    cfg.npc = 2;
    cfg.ridge_eps = 1e-6;
    const auto model = train(split, cfg);
    CHECK(model.provenance.virtual_columns == 4);
    CHECK(predict(model, means.means).labels == LabelVector{3, 2});
}

TEST_CASE("glap3 with singleton seen classes equals glap2 at one half") {
    SyntheticConfig cfg;
    cfg.samples_per_class = 1;
    const auto world = generate_synthetic_split(cfg);
    auto g2 = StrategyConfig::for_strategy(Strategy::Glap2);
    auto g3 = StrategyConfig::for_strategy(Strategy::Glap3);
    g2.seed = g3.seed = 5;
    g2.sigma2 = g3.sigma2 = 0.05;
    const auto m2 = train(world.split, g2);
    const auto m3 = train(world.split, g3);
    CHECK(m3.map.A == m2.map.A);
    CHECK(m3.provenance.mean_columns == cfg.n_seen);
}

TEST_CASE("train and predict are bitwise deterministic") {
    const auto world = generate_synthetic_split(SyntheticConfig{});
    for (Strategy s : {Strategy::Baseline, Strategy::Glap1, Strategy::Glap2, Strategy::Glap3}) {
        auto cfg = StrategyConfig::for_strategy(s);
        cfg.seed = 11;
        const auto a = train(world.split, cfg);
        const auto b = train(world.split, cfg, Execution::ClassParallel);
        CHECK(a.map.A == b.map.A);
        CHECK(predict(a, world.test.features).scores == predict(b, world.test.features).scores);
    }
}

}
