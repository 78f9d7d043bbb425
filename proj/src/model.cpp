#include "glap/model.hpp"

#include <cmath>

#include "glap/error.hpp"

namespace glap {

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::Baseline: return "baseline";
        case Strategy::Glap1: return "glap1";
        case Strategy::Glap2: return "glap2";
        case Strategy::Glap3: return "glap3";
    }
    return "unknown";
}

std::string to_string(Metric m) { return m == Metric::Euclidean ? "euclidean" : "cosine"; }

Strategy parse_strategy(const std::string& name) {
    if (name == "baseline") return Strategy::Baseline;
    if (name == "glap1") return Strategy::Glap1;
    if (name == "glap2") return Strategy::Glap2;
    if (name == "glap3") return Strategy::Glap3;
    throw InputError("unknown strategy '" + name + "' (expected baseline, glap1, glap2 or glap3)");
}

Metric parse_metric(const std::string& name) {
    if (name == "euclidean") return Metric::Euclidean;
    if (name == "cosine") return Metric::Cosine;
    throw InputError("unknown metric '" + name + "' (expected euclidean or cosine)");
}

StrategyConfig StrategyConfig::for_strategy(Strategy s) {
    StrategyConfig c;
    c.strategy = s;
    switch (s) {
        case Strategy::Baseline: c.lambda = 1.0; break;
        case Strategy::Glap1: c.lambda = 0.0; break;
        case Strategy::Glap2:
        case Strategy::Glap3: c.lambda = 0.5; break;
    }
    return c;
}

void validate_config(const StrategyConfig& c) {
    auto fail = [](const std::string& m) { throw InputError(m); };
    if (!std::isfinite(c.lambda) || c.lambda < 0.0 || c.lambda > 1.0) fail("lambda must lie in [0, 1]");
    switch (c.strategy) {
        case Strategy::Baseline:
            if (c.lambda != 1.0) fail("baseline requires lambda = 1");
            break;
        case Strategy::Glap1:
            if (c.lambda != 0.0) fail("glap1 requires lambda = 0");
            break;
        case Strategy::Glap2:
            if (c.lambda <= 0.0 || c.lambda >= 1.0) fail("glap2 requires 0 < lambda < 1");
            break;
        case Strategy::Glap3:
            if (c.lambda != 0.5) fail("glap3 requires lambda = 0.5");
            break;
    }
    if (c.npc <= 0) fail("npc must be positive");
    if (c.sigma2 && (!std::isfinite(*c.sigma2) || *c.sigma2 < 0.0)) fail("sigma2 must be finite and non-negative");
    if (c.ridge_eps && (!std::isfinite(*c.ridge_eps) || *c.ridge_eps < 0.0)) {
        fail("ridge_eps must be finite and non-negative");
    }
    if (!std::isfinite(c.reg.weight) || c.reg.weight < 0.0) fail("regularizer weight must be non-negative");
    if (c.reg.kind == RegularizerKind::L2 && c.reg.weight == 0.0) fail("l2 regularizer weight must be positive");
    if (c.lasso.max_iter <= 0 || !(c.lasso.tol > 0.0)) fail("lasso needs max_iter > 0 and tol > 0");
}

LinearMap fit_combined(const FeatureMatrix& X, const Eigen::MatrixXd& K, const Eigen::MatrixXd& Xv,
                       const Eigen::MatrixXd& Kv, double lambda, std::optional<double> ridge_eps) {
    if (!std::isfinite(lambda) || lambda < 0.0 || lambda > 1.0) throw InputError("lambda must lie in [0, 1]");
    if (lambda > 0.0 && X.cols() == 0) throw InputError("source data required when lambda > 0");
    if (lambda < 1.0 && Xv.cols() == 0) throw InputError("virtual data required when lambda < 1");
    if (X.cols() != K.cols()) throw InputError("source features and semantics disagree on instance count");
    if (Xv.cols() != Kv.cols()) throw InputError("virtual features and semantics disagree on instance count");

    if (lambda == 1.0) {
        return fit_linear_map(X, K, ridge_eps ? *ridge_eps : default_ridge_eps(X * X.transpose()));
    }
    if (lambda == 0.0) {
        return fit_linear_map(Xv, Kv, ridge_eps ? *ridge_eps : default_ridge_eps(Xv * Xv.transpose()));
    }
    if (X.rows() != Xv.rows()) {
        throw InputError("source features have d=" + std::to_string(X.rows()) + ", virtual features d=" +
                         std::to_string(Xv.rows()));
    }
    if (K.rows() != Kv.rows()) {
        throw InputError("source semantics have a=" + std::to_string(K.rows()) + ", virtual semantics a=" +
                         std::to_string(Kv.rows()));
    }
    const Eigen::MatrixXd gram = lambda * (X * X.transpose()) + (1.0 - lambda) * (Xv * Xv.transpose());
    const Eigen::MatrixXd cross = lambda * (K * X.transpose()) + (1.0 - lambda) * (Kv * Xv.transpose());
    const double eps = ridge_eps ? *ridge_eps : default_ridge_eps(gram);
    LinearMap map;
    map.A = solve_gram_system(gram, cross, eps);
    map.bias = Eigen::VectorXd::Zero(K.rows());
    map.ridge_eps = eps;
    return map;
}

namespace {

Eigen::MatrixXd source_semantics(const ZslSplit& split) {
    const auto& labels = split.source.labels;
    Eigen::MatrixXd K(split.seen.dim(), static_cast<Eigen::Index>(labels.size()));
    for (std::size_t j = 0; j < labels.size(); ++j) {
        K.col(static_cast<Eigen::Index>(j)) = split.seen.vectors().col(split.seen.index_of(labels[j]));
    }
    return K;
}

}  // namespace

GlapModel train(const ZslSplit& split, const StrategyConfig& config, Execution exec) {
    validate_config(config);
    const ValidationReport report = validate_split(split);
    if (!report.ok()) throw InputError("invalid split: " + report.summary());

    GlapModel model;
    model.unseen = split.unseen;
    model.config = config;

    const FeatureMatrix& X = split.source.features;
    if (config.strategy == Strategy::Baseline) {
        model.map = fit_combined(X, source_semantics(split), {}, {}, 1.0, config.ridge_eps);
        model.config.ridge_eps = model.map.ridge_eps;
        model.provenance.source_columns = X.cols();
        return model;
    }

    const ReconstructionWeights weights = reconstruct_weights(split.seen, split.unseen, config.reg, config.lasso);
    const ClassMeans means = compute_class_means(X, split.source.labels, split.seen);
    const double sigma2 = config.sigma2 ? *config.sigma2 : default_sigma2(X, split.source.labels, means);
    const VirtualDataset virt =
        generate_virtual(means, weights, split.unseen, config.npc, sigma2, config.seed, exec);
    model.config.sigma2 = sigma2;
    model.provenance.virtual_columns = virt.size();

    switch (config.strategy) {
        case Strategy::Glap1:
            model.map = fit_combined({}, {}, virt.features, virt.semantics, 0.0, config.ridge_eps);
            break;
        case Strategy::Glap2:
            model.map = fit_combined(X, source_semantics(split), virt.features, virt.semantics, config.lambda,
                                     config.ridge_eps);
            model.provenance.source_columns = X.cols();
            break;
        case Strategy::Glap3:
            model.map = fit_combined(means.means, split.seen.vectors(), virt.features, virt.semantics, 0.5,
                                     config.ridge_eps);
            model.provenance.mean_columns = means.means.cols();
            break;
        case Strategy::Baseline: break;
    }
    model.config.ridge_eps = model.map.ridge_eps;
    return model;
}

Prediction classify_semantics(const Eigen::MatrixXd& S, const SemanticTable& candidates, Metric metric) {
    if (S.rows() != candidates.dim()) {
        throw InputError("projected semantics have a=" + std::to_string(S.rows()) + ", candidates a=" +
                         std::to_string(candidates.dim()));
    }
    if (candidates.empty()) throw InputError("no candidate classes");

    const Eigen::Index n = S.cols();
    const Eigen::Index l = candidates.size();
    const auto& ids = candidates.class_ids();
    const Eigen::MatrixXd& K = candidates.vectors();
    const Eigen::VectorXd knorm = K.colwise().norm();

    Prediction out;
    out.labels.resize(static_cast<std::size_t>(n));
    out.scores.resize(l, n);
    out.euclidean_fallback.assign(static_cast<std::size_t>(n), false);

    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::VectorXd s = S.col(j);
        const double snorm = s.norm();
        const bool euclid = metric == Metric::Euclidean || snorm == 0.0;
        out.euclidean_fallback[static_cast<std::size_t>(j)] = metric == Metric::Cosine && euclid;

        Eigen::Index best = -1;
        double best_key = 0.0;
        for (Eigen::Index c = 0; c < l; ++c) {
            double key;  // lower is better
            if (euclid) {
                key = (s - K.col(c)).squaredNorm();
                out.scores(c, j) = std::sqrt(key);
            } else {
                const double sim = knorm(c) == 0.0 ? 0.0 : s.dot(K.col(c)) / (snorm * knorm(c));
                out.scores(c, j) = sim;
                key = -sim;
            }
            const auto id = ids[static_cast<std::size_t>(c)];
            if (best < 0 || key < best_key ||
                (key == best_key && id < ids[static_cast<std::size_t>(best)])) {
                best = c;
                best_key = key;
            }
        }
        out.labels[static_cast<std::size_t>(j)] = ids[static_cast<std::size_t>(best)];
    }
    return out;
}

Prediction predict(const GlapModel& model, const FeatureMatrix& X_test) {
    if (X_test.rows() != model.map.feature_dim()) {
        throw InputError("feature dimension mismatch: model expects d=" + std::to_string(model.map.feature_dim()) +
                         ", got d=" + std::to_string(X_test.rows()));
    }
    const Eigen::MatrixXd S =
        model.normalize_features ? model.map.apply(normalize_columns(X_test)) : model.map.apply(X_test);
    return classify_semantics(S, model.unseen, model.config.metric);
}

}  // namespace glap
