#include <doctest.h>

#include "glap/error.hpp"
#include "glap/synth.hpp"
#include "glap/transfer.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace glap;

TEST_SUITE("synth") {

TEST_CASE("world shapes and ids") {
    SyntheticConfig cfg;
    cfg.samples_per_class = 4;
    const auto w = generate_synthetic_split(cfg);
    CHECK(w.split.source.features.rows() == cfg.feature_dim);
    CHECK(w.split.source.features.cols() == cfg.n_seen * 4);
    CHECK(w.test.features.cols() == cfg.n_unseen * 4);
    CHECK(w.split.seen.dim() == cfg.semantic_dim);
    CHECK(w.split.unseen.class_ids().front() == cfg.n_seen);
    CHECK(validate_split(w.split).ok());
    for (Eigen::Index i = 0; i < w.mixing_weights.cols(); ++i) {
        CHECK(w.mixing_weights.col(i).minCoeff() > 0.0);
        CHECK(w.mixing_weights.col(i).sum() == doctest::Approx(1.0));
    }
}

TEST_CASE("noiseless convex worlds satisfy the transferability property") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SyntheticConfig cfg;
        cfg.obs_noise = 0.0;
        cfg.seed = seed;
        const auto w = generate_synthetic_split(cfg);
        const auto r = check_transferability(w.split.seen, w.split.unseen);
        for (const auto& e : r.per_class) CHECK(e.relative_residual <= 1e-8);
    }
}

TEST_CASE("gaussian prototypes escape the seen span when a > k") {
    SyntheticConfig cfg;
    cfg.mixing = Mixing::GaussianPrototypes;
    cfg.latent_dim = 12;
    cfg.semantic_dim = 20;
    cfg.n_seen = 4;
    const auto w = generate_synthetic_split(cfg);
    const auto r = check_transferability(w.split.seen, w.split.unseen);
    bool any = false;
    for (std::size_t i = 0; i < r.per_class.size(); ++i) {
        const double o = oracle::span_residual(w.split.seen.vectors(), w.split.unseen.vectors().col(static_cast<Eigen::Index>(i)));
        CHECK(std::abs(o - r.per_class[i].relative_residual) <= 1e-9);
        any = any || o > r.tolerance;
    }
    CHECK(any);
}

TEST_CASE("same seed, same world") {
    const auto a = generate_synthetic_split(SyntheticConfig{});
    const auto b = generate_synthetic_split(SyntheticConfig{});
    CHECK(a.split.source.features == b.split.source.features);
    CHECK(a.test.features == b.test.features);
    CHECK(a.split.unseen.vectors() == b.split.unseen.vectors());
    SyntheticConfig other;
    other.seed = 8;
    CHECK(generate_synthetic_split(other).split.source.features != a.split.source.features);
}

TEST_CASE("config validation") {
    SyntheticConfig cfg;
    cfg.n_unseen = 1;
    CHECK_THROWS_AS(validate_config(cfg), InputError);
    cfg = SyntheticConfig{};
    cfg.feature_dim = 5;
    CHECK(validate_config(cfg).size() == 1);
}

TEST_CASE("accuracy and confusion") {
    const LabelVector truth{3, 3, 4, 4, 4};
    SUBCASE("perfect predictions") {
        CHECK(accuracy(truth, truth) == 1.0);
        const auto cm = confusion_matrix(truth, truth, {3, 4});
        CHECK(cm(0, 0) == 2);
        CHECK(cm(1, 1) == 3);
        CHECK(cm(0, 1) == 0);
    }
    SUBCASE("single-class truth") {
        const LabelVector all3{3, 3, 3, 3, 3};
        const LabelVector pred{3, 4, 3, 4, 4};
        CHECK(accuracy(all3, pred) == 2.0 / 5.0);
    }
    CHECK_THROWS_AS(accuracy(truth, {3}), InputError);
}

TEST_CASE("evaluate_strategies reports exact counts") {
    SyntheticConfig cfg;
    cfg.samples_per_class = 20;
    const auto w = generate_synthetic_split(cfg);
    const auto report = evaluate_strategies(w.split, w.test, default_strategies());
    REQUIRE(report.results.size() == 4);
    for (const auto& r : report.results) {
        const auto model = train(w.split, r.config);
        const auto pred = predict(model, w.test.features);
        CHECK(r.accuracy == oracle::count_accuracy(w.test.labels, pred.labels));
        CHECK(r.correct == r.confusion.trace());
        CHECK(r.total == static_cast<Eigen::Index>(w.test.labels.size()));
        for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) CHECK(r.confusion.row(i).sum() == 20);
    }
}

TEST_CASE("trials are reproducible and thread-count independent") {
    SyntheticConfig cfg;
    cfg.samples_per_class = 20;
    const auto a = evaluate_trials(cfg, default_strategies(), 3, 4, 1);
    const auto b = evaluate_trials(cfg, default_strategies(), 3, 4, 3);
    REQUIRE(a.strategies.size() == b.strategies.size());
    for (std::size_t s = 0; s < a.strategies.size(); ++s) {
        CHECK(a.strategies[s].accuracies == b.strategies[s].accuracies);
        CHECK(a.strategies[s].mean_accuracy == b.strategies[s].mean_accuracy);
    }
    CHECK(a.world_seeds == b.world_seeds);
    CHECK(a.world_seeds[0] != a.world_seeds[1]);
}

TEST_CASE("single-value npc sweep equals one evaluation") {
    SyntheticConfig cfg;
    cfg.samples_per_class = 20;
    const auto w = generate_synthetic_split(cfg);
    const auto base = StrategyConfig::for_strategy(Strategy::Glap2);
    const auto sweep = npc_sweep(w.split, w.test, base, {1});
    auto g1 = StrategyConfig::for_strategy(Strategy::Glap1);
    auto g2 = base;
    g1.npc = g2.npc = 1;
    const auto direct = evaluate_strategies(w.split, w.test, {g1, g2});
    REQUIRE(sweep.size() == 1);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(sweep[0].results[i].accuracy == direct.results[i].accuracy);
        CHECK(sweep[0].results[i].confusion == direct.results[i].confusion);
    }
    CHECK_THROWS_AS(npc_sweep(w.split, w.test, base, {5, 1}), InputError);
    CHECK_THROWS_AS(npc_sweep(w.split, w.test, base, {0}), InputError);
}

TEST_CASE("with lambda = 0 and sigma2 = 0 predictions do not depend on npc") {
    SyntheticConfig cfg;
    cfg.samples_per_class = 30;
    const auto w = generate_synthetic_split(cfg);
    auto c = StrategyConfig::for_strategy(Strategy::Glap1);
    c.sigma2 = 0.0;
    LabelVector reference;
    for (int npc : {1, 2, 7, 50, 200}) {
        c.npc = npc;
        const auto labels = predict(train(w.split, c), w.test.features).labels;
        if (reference.empty()) reference = labels;
        CHECK(labels == reference);
    }
}

}
