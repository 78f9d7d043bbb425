#include "glap/synth.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "glap/error.hpp"
#include "glap/rng.hpp"

namespace glap {

std::string to_string(Mixing m) {
    return m == Mixing::ConvexCombination ? "convex" : "gaussian";
}

Mixing parse_mixing(const std::string& name) {
    if (name == "convex") return Mixing::ConvexCombination;
    if (name == "gaussian") return Mixing::GaussianPrototypes;
    throw InputError("unknown mixing '" + name + "' (expected convex or gaussian)");
}

std::vector<std::string> validate_config(const SyntheticConfig& cfg) {
    auto fail = [](const std::string& m) { throw InputError(m); };
    if (cfg.latent_dim < 1 || cfg.feature_dim < 1 || cfg.semantic_dim < 1) fail("dimensions must be positive");
    if (cfg.n_seen < 2) fail("need at least 2 seen classes");
    if (cfg.n_unseen < 2) fail("need at least 2 unseen classes");
    if (cfg.samples_per_class < 1) fail("samples_per_class must be positive");
    if (!std::isfinite(cfg.obs_noise) || cfg.obs_noise < 0.0) fail("obs_noise must be finite and non-negative");
    std::vector<std::string> warnings;
    if (cfg.feature_dim < cfg.latent_dim) {
        warnings.push_back("feature_dim < latent_dim: class means cannot be recovered exactly");
    }
    return warnings;
}

namespace {

// Independent substreams of the world seed.
enum Stream : std::uint64_t { kSeenProto = 1, kFeatureProj, kSemanticProj, kUnseenProto, kSource, kTest };

Eigen::MatrixXd gaussian_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = scale * rng.normal();
    return m;
}

LabeledFeatures sample_instances(Rng& rng, const Eigen::MatrixXd& centers, ClassId first_id, int per_class,
                                 double noise) {
    LabeledFeatures out;
    const Eigen::Index d = centers.rows();
    out.features.resize(d, centers.cols() * per_class);
    for (Eigen::Index c = 0; c < centers.cols(); ++c) {
        for (int s = 0; s < per_class; ++s) {
            const Eigen::Index col = c * per_class + s;
            for (Eigen::Index r = 0; r < d; ++r) out.features(r, col) = centers(r, c) + noise * rng.normal();
            out.labels.push_back(first_id + c);
        }
    }
    return out;
}

std::vector<ClassId> id_range(ClassId first, int count) {
    std::vector<ClassId> ids(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) ids[static_cast<std::size_t>(i)] = first + i;
    return ids;
}

}  // namespace

SyntheticWorld generate_synthetic_split(const SyntheticConfig& cfg) {
    validate_config(cfg);
    const int m = cfg.latent_dim;
    const int k = cfg.n_seen;
    const int l = cfg.n_unseen;
    const double proj_scale = 1.0 / std::sqrt(static_cast<double>(m));
    auto stream = [&](Stream s) { return Rng(derive_seed(cfg.seed, s)); };

    SyntheticWorld w;
    {
        Rng rng = stream(kSeenProto);
        w.seen_prototypes = gaussian_matrix(rng, m, k, 1.0);
    }
    {
        Rng rng = stream(kFeatureProj);
        w.feature_projection = gaussian_matrix(rng, cfg.feature_dim, m, proj_scale);
    }
    {
        Rng rng = stream(kSemanticProj);
        w.semantic_projection = gaussian_matrix(rng, cfg.semantic_dim, m, proj_scale);
    }
    {
        Rng rng = stream(kUnseenProto);
        if (cfg.mixing == Mixing::ConvexCombination) {
            // Uniform on the simplex: normalized exponential draws.
            w.mixing_weights.resize(k, l);
            for (int i = 0; i < l; ++i) {
                for (int j = 0; j < k; ++j) w.mixing_weights(j, i) = -std::log(rng.uniform());
                w.mixing_weights.col(i) /= w.mixing_weights.col(i).sum();
            }
            w.unseen_prototypes = w.seen_prototypes * w.mixing_weights;
        } else {
            w.unseen_prototypes = gaussian_matrix(rng, m, l, 1.0);
        }
    }

    const Eigen::MatrixXd seen_sem = w.semantic_projection * w.seen_prototypes;
    const Eigen::MatrixXd unseen_sem = w.semantic_projection * w.unseen_prototypes;
    w.split.seen = SemanticTable(id_range(0, k), seen_sem);
    w.split.unseen = SemanticTable(id_range(k, l), unseen_sem);

    {
        Rng rng = stream(kSource);
        w.split.source = sample_instances(rng, w.feature_projection * w.seen_prototypes, 0,
                                          cfg.samples_per_class, cfg.obs_noise);
    }
    {
        Rng rng = stream(kTest);
        w.test = sample_instances(rng, w.feature_projection * w.unseen_prototypes, k, cfg.samples_per_class,
                                  cfg.obs_noise);
    }
    return w;
}

double accuracy(const LabelVector& truth, const LabelVector& predicted) {
    if (truth.size() != predicted.size()) throw InputError("accuracy: label vectors differ in length");
    if (truth.empty()) throw InputError("accuracy: no instances");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

Eigen::MatrixXi confusion_matrix(const LabelVector& truth, const LabelVector& predicted,
                                 const std::vector<ClassId>& classes) {
    if (truth.size() != predicted.size()) throw InputError("confusion: label vectors differ in length");
    std::unordered_map<ClassId, Eigen::Index> pos;
    for (std::size_t i = 0; i < classes.size(); ++i) pos.emplace(classes[i], static_cast<Eigen::Index>(i));
    const auto n = static_cast<Eigen::Index>(classes.size());
    Eigen::MatrixXi cm = Eigen::MatrixXi::Zero(n, n);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto t = pos.find(truth[i]);
        const auto p = pos.find(predicted[i]);
        if (t == pos.end() || p == pos.end()) throw InputError("confusion: label outside the class list");
        ++cm(t->second, p->second);
    }
    return cm;
}

EvalReport evaluate_strategies(const ZslSplit& split, const LabeledFeatures& test,
                               const std::vector<StrategyConfig>& configs) {
    if (test.features.cols() == 0) throw InputError("empty test set");
    EvalReport report;
    report.unseen_ids = split.unseen.class_ids();
    for (const auto& cfg : configs) {
        const GlapModel model = train(split, cfg);
        const Prediction pred = predict(model, test.features);
        StrategyResult r;
        r.name = to_string(cfg.strategy);
        r.config = model.config;
        r.total = static_cast<Eigen::Index>(test.labels.size());
        for (std::size_t i = 0; i < test.labels.size(); ++i) r.correct += test.labels[i] == pred.labels[i];
        r.accuracy = accuracy(test.labels, pred.labels);
        r.confusion = confusion_matrix(test.labels, pred.labels, report.unseen_ids);
        report.results.push_back(std::move(r));
    }
    return report;
}

std::vector<StrategyConfig> default_strategies() {
    return {StrategyConfig::for_strategy(Strategy::Baseline), StrategyConfig::for_strategy(Strategy::Glap1),
            StrategyConfig::for_strategy(Strategy::Glap2), StrategyConfig::for_strategy(Strategy::Glap3)};
}

const StrategySummary& TrialsReport::summary(const std::string& name) const {
    for (const auto& s : strategies)
        if (s.name == name) return s;
    throw InputError("no strategy named '" + name + "' in report");
}

TrialsReport evaluate_trials(const SyntheticConfig& base, const std::vector<StrategyConfig>& configs,
                             std::uint64_t master_seed, int n_trials, int threads) {
    if (n_trials < 1) throw InputError("need at least one trial");
    validate_config(base);
    for (const auto& c : configs) validate_config(c);

    TrialsReport report;
    report.config = base;
    report.master_seed = master_seed;
    report.trials.resize(static_cast<std::size_t>(n_trials));
    for (int t = 0; t < n_trials; ++t) report.world_seeds.push_back(derive_seed(master_seed, static_cast<std::uint64_t>(t)));

    auto run_trial = [&](int t) {
        SyntheticConfig cfg = base;
        cfg.seed = report.world_seeds[static_cast<std::size_t>(t)];
        const SyntheticWorld world = generate_synthetic_split(cfg);
        std::vector<StrategyConfig> trial_configs = configs;
        for (auto& c : trial_configs) c.seed = derive_seed(c.seed, static_cast<std::uint64_t>(t));
        report.trials[static_cast<std::size_t>(t)] = evaluate_strategies(world.split, world.test, trial_configs);
    };

    if (threads > 1) {
        std::atomic<int> next{0};
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_trials));
        {
            std::vector<std::jthread> pool;
            for (int i = 0; i < std::min(threads, n_trials); ++i) {
                pool.emplace_back([&] {
                    for (int t = next++; t < n_trials; t = next++) {
                        try {
                            run_trial(t);
                        } catch (...) {
                            errors[static_cast<std::size_t>(t)] = std::current_exception();
                        }
                    }
                });
            }
        }
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    } else {
        for (int t = 0; t < n_trials; ++t) run_trial(t);
    }

    for (std::size_t s = 0; s < configs.size(); ++s) {
        StrategySummary summary;
        summary.name = to_string(configs[s].strategy);
        for (const auto& trial : report.trials) summary.accuracies.push_back(trial.results[s].accuracy);
        double sum = 0.0;
        for (double a : summary.accuracies) sum += a;
        summary.mean_accuracy = sum / static_cast<double>(n_trials);
        if (n_trials > 1) {
            double ss = 0.0;
            for (double a : summary.accuracies) ss += (a - summary.mean_accuracy) * (a - summary.mean_accuracy);
            summary.std_accuracy = std::sqrt(ss / static_cast<double>(n_trials - 1));
        }
        report.strategies.push_back(std::move(summary));
    }
    return report;
}

namespace {

std::vector<StrategyConfig> sweep_configs(const StrategyConfig& base, int npc, bool with_baseline) {
    std::vector<StrategyConfig> out;
    if (with_baseline) {
        StrategyConfig b = base;
        b.strategy = Strategy::Baseline;
        b.lambda = 1.0;
        b.npc = npc;
        out.push_back(b);
    }
    StrategyConfig g1 = base;
    g1.strategy = Strategy::Glap1;
    g1.lambda = 0.0;
    g1.npc = npc;
    StrategyConfig g2 = base;
    g2.strategy = Strategy::Glap2;
    g2.lambda = base.strategy == Strategy::Glap2 ? base.lambda : 0.5;
    g2.npc = npc;
    out.push_back(g1);
    out.push_back(g2);
    return out;
}

void check_npc_values(const std::vector<int>& npc_values) {
    if (npc_values.empty()) throw InputError("npc sweep needs at least one value");
    for (std::size_t i = 0; i < npc_values.size(); ++i) {
        if (npc_values[i] <= 0) throw InputError("npc values must be positive");
        if (i > 0 && npc_values[i] <= npc_values[i - 1]) throw InputError("npc values must be strictly ascending");
    }
}

}  // namespace

std::vector<NpcPoint> npc_sweep(const SyntheticConfig& world, const StrategyConfig& base,
                                const std::vector<int>& npc_values, std::uint64_t master_seed, int n_trials,
                                int threads) {
    check_npc_values(npc_values);
    std::vector<NpcPoint> out;
    for (int npc : npc_values) {
        out.push_back({npc, evaluate_trials(world, sweep_configs(base, npc, true), master_seed, n_trials, threads)});
    }
    return out;
}

std::vector<EvalReport> npc_sweep(const ZslSplit& split, const LabeledFeatures& test, const StrategyConfig& base,
                                  const std::vector<int>& npc_values) {
    check_npc_values(npc_values);
    std::vector<EvalReport> out;
    for (int npc : npc_values) out.push_back(evaluate_strategies(split, test, sweep_configs(base, npc, false)));
    return out;
}

}  // namespace glap
