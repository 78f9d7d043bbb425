#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glap/dataset.hpp"
#include "glap/model.hpp"

namespace glap {

enum class Mixing {
    ConvexCombination,   // unseen prototypes are convex combinations of seen ones
    GaussianPrototypes,  // unseen prototypes drawn independently
};

std::string to_string(Mixing m);
Mixing parse_mixing(const std::string& name);

struct SyntheticConfig {
    int latent_dim = 10;
    int feature_dim = 50;
    int semantic_dim = 20;
    int n_seen = 15;
    int n_unseen = 5;
    int samples_per_class = 100;
    double obs_noise = 0.5;
    Mixing mixing = Mixing::ConvexCombination;
    std::uint64_t seed = 7;
};

/// Throws InputError on invalid values. Returns warnings (e.g. d < m).
std::vector<std::string> validate_config(const SyntheticConfig& cfg);

struct SyntheticWorld {
    ZslSplit split;
    LabeledFeatures test;  // held-out unseen-class instances
    Eigen::MatrixXd seen_prototypes;    // m x k
    Eigen::MatrixXd unseen_prototypes;  // m x l
    Eigen::MatrixXd mixing_weights;     // k x l, ConvexCombination only
    Eigen::MatrixXd feature_projection;   // d x m
    Eigen::MatrixXd semantic_projection;  // a x m
};

/// Linear Gaussian world: prototypes z ~ N(0, I_m), P_x and P_k with N(0, 1/m)
/// entries, noiseless semantics k = P_k z and features x = P_x z + noise * g.
/// Seen classes get ids 0..k-1, unseen k..k+l-1; each class receives
/// samples_per_class instances (source for seen, test for unseen).
SyntheticWorld generate_synthetic_split(const SyntheticConfig& cfg);

struct StrategyResult {
    std::string name;
    StrategyConfig config;
    double accuracy = 0.0;
    Eigen::Index correct = 0;
    Eigen::Index total = 0;
    /// Rows: true class, columns: predicted class, both in unseen-table order.
    Eigen::MatrixXi confusion;
};

struct EvalReport {
    std::vector<ClassId> unseen_ids;
    std::vector<StrategyResult> results;
};

/// Exact fraction of matching labels.
double accuracy(const LabelVector& truth, const LabelVector& predicted);

Eigen::MatrixXi confusion_matrix(const LabelVector& truth, const LabelVector& predicted,
                                 const std::vector<ClassId>& classes);

EvalReport evaluate_strategies(const ZslSplit& split, const LabeledFeatures& test,
                               const std::vector<StrategyConfig>& configs);

struct StrategySummary {
    std::string name;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    std::vector<double> accuracies;  // one per trial
};

struct TrialsReport {
    SyntheticConfig config;
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> world_seeds;
    std::vector<StrategySummary> strategies;
    std::vector<EvalReport> trials;

    const StrategySummary& summary(const std::string& name) const;
};

/// Runs every strategy on `n_trials` worlds. Trial t uses world seed
/// derive_seed(master_seed, t) and virtual-sampling seed
/// derive_seed(config.seed, t). Trials run in parallel when `threads` > 1;
/// the report does not depend on it.
TrialsReport evaluate_trials(const SyntheticConfig& base, const std::vector<StrategyConfig>& configs,
                             std::uint64_t master_seed, int n_trials, int threads = 1);

/// Baseline, Glap1, Glap2 and Glap3 with default settings.
std::vector<StrategyConfig> default_strategies();

struct NpcPoint {
    int npc = 0;
    TrialsReport report;
};

/// Baseline, Glap1 and Glap2 (derived from `base`) at every npc value, over
/// the same worlds and seeds.
std::vector<NpcPoint> npc_sweep(const SyntheticConfig& world, const StrategyConfig& base,
                                const std::vector<int>& npc_values, std::uint64_t master_seed,
                                int n_trials, int threads = 1);

/// Single-world sweep: one EvalReport per npc value, with Glap1 and Glap2
/// derived from `base`.
std::vector<EvalReport> npc_sweep(const ZslSplit& split, const LabeledFeatures& test,
                                  const StrategyConfig& base, const std::vector<int>& npc_values);

inline const std::vector<int> kDefaultNpcValues{1, 5, 10, 20, 50, 100, 200};

}  // namespace glap
