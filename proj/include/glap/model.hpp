#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glap/dataset.hpp"
#include "glap/prototype.hpp"
#include "glap/solvers.hpp"

namespace glap {

enum class Strategy {
    Baseline,  // source data only (lambda = 1)
    Glap1,     // virtual unseen data only (lambda = 0)
    Glap2,     // source and virtual data
    Glap3,     // seen class means and virtual data, lambda = 1/2
};

enum class Metric { Euclidean, Cosine };

std::string to_string(Strategy s);
std::string to_string(Metric m);
Strategy parse_strategy(const std::string& name);
Metric parse_metric(const std::string& name);

struct StrategyConfig {
    Strategy strategy = Strategy::Glap2;
    double lambda = 0.5;
    int npc = 50;
    /// Unset: default_sigma2() of the source data.
    std::optional<double> sigma2;
    RegularizerSpec reg;
    /// Unset: default_ridge_eps() of the combined gram.
    std::optional<double> ridge_eps;
    std::uint64_t seed = 0;
    Metric metric = Metric::Euclidean;
    LassoOptions lasso;

    /// Config for `s` with its canonical lambda (1, 0, 1/2, 1/2).
    static StrategyConfig for_strategy(Strategy s);
};

/// Throws InputError if the config is inconsistent.
void validate_config(const StrategyConfig& config);

struct Provenance {
    Eigen::Index source_columns = 0;
    Eigen::Index virtual_columns = 0;
    Eigen::Index mean_columns = 0;
};

struct GlapModel {
    LinearMap map;
    SemanticTable unseen;
    StrategyConfig config;  // sigma2 and ridge_eps hold the resolved values
    Provenance provenance;
    /// Scale each test instance to unit l2 norm before projecting.
    bool normalize_features = false;
};

/// A = (l C + (1-l) Cv)(l G + (1-l) Gv + eps I)^-1 with G = X X^T, C = K X^T
/// and Gv, Cv the same products over the virtual data. Operands with zero
/// weight are not touched; lambda = 1 reduces to fit_linear_map exactly.
/// Unset ridge_eps resolves to default_ridge_eps of the combined gram.
LinearMap fit_combined(const FeatureMatrix& X, const Eigen::MatrixXd& K, const Eigen::MatrixXd& Xv,
                       const Eigen::MatrixXd& Kv, double lambda, std::optional<double> ridge_eps);

GlapModel train(const ZslSplit& split, const StrategyConfig& config,
                Execution exec = Execution::Sequential);

struct Prediction {
    LabelVector labels;
    /// n_unseen x N. Euclidean: distance to each candidate (lower wins).
    /// Cosine: cosine similarity (higher wins) except for flagged instances.
    Eigen::MatrixXd scores;
    /// Instances whose projection had zero norm under Cosine; these rows were
    /// scored with Euclidean distance instead.
    std::vector<bool> euclidean_fallback;
};

/// Nearest unseen semantic vector to A x for each column x. Exact ties go to
/// the lowest class id.
Prediction predict(const GlapModel& model, const FeatureMatrix& X_test);

/// Core of predict() on projected semantics S (a x N).
Prediction classify_semantics(const Eigen::MatrixXd& S, const SemanticTable& candidates, Metric metric);

}  // namespace glap
