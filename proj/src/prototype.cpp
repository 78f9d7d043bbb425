#include "glap/prototype.hpp"

#include <cmath>
#include <thread>

#include "glap/error.hpp"
#include "glap/rng.hpp"

namespace glap {

ClassMeans compute_class_means(const FeatureMatrix& features, const LabelVector& labels,
                               const SemanticTable& seen) {
    if (static_cast<Eigen::Index>(labels.size()) != features.cols()) {
        throw InputError("class means: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(features.cols()) + " instances");
    }
    const Eigen::Index k = seen.size();
    ClassMeans out;
    out.means = Eigen::MatrixXd::Zero(features.rows(), k);
    out.class_ids = seen.class_ids();
    out.counts.assign(static_cast<std::size_t>(k), 0);

    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        const Eigen::Index c = seen.index_of(labels[static_cast<std::size_t>(j)]);
        out.means.col(c) += features.col(j);
        ++out.counts[static_cast<std::size_t>(c)];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
        const auto n = out.counts[static_cast<std::size_t>(c)];
        if (n == 0) {
            throw InputError("seen class " + std::to_string(out.class_ids[static_cast<std::size_t>(c)]) +
                             " has no training instances");
        }
        out.means.col(c) /= static_cast<double>(n);
    }
    return out;
}

ReconstructionWeights reconstruct_weights(const SemanticTable& seen, const SemanticTable& unseen,
                                          const RegularizerSpec& reg, const LassoOptions& lasso) {
    if (seen.dim() != unseen.dim()) {
        throw InputError("semantic dimension mismatch: seen a=" + std::to_string(seen.dim()) +
                         ", unseen a=" + std::to_string(unseen.dim()));
    }
    ReconstructionWeights out;
    out.regularizer = reg;
    out.W.resize(seen.size(), unseen.size());
    for (Eigen::Index i = 0; i < unseen.size(); ++i) {
        const Eigen::VectorXd target = unseen.vectors().col(i);
        out.W.col(i) = reg.kind == RegularizerKind::L2
                           ? solve_weights_l2(seen.vectors(), target, reg.weight)
                           : solve_weights_l1(seen.vectors(), target, reg.weight, lasso);
    }
    return out;
}

double within_class_variance(const FeatureMatrix& features, const LabelVector& labels,
                             const ClassMeans& means) {
    if (features.cols() == 0 || features.rows() == 0) return 0.0;
    std::unordered_map<ClassId, Eigen::Index> position;
    for (std::size_t c = 0; c < means.class_ids.size(); ++c) {
        position.emplace(means.class_ids[c], static_cast<Eigen::Index>(c));
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        const auto it = position.find(labels[static_cast<std::size_t>(j)]);
        if (it == position.end()) throw InputError("label " + std::to_string(labels[static_cast<std::size_t>(j)]) +
                                                   " has no class mean");
        total += (features.col(j) - means.means.col(it->second)).squaredNorm();
    }
    return total / static_cast<double>(features.cols() * features.rows());
}

double default_sigma2(const FeatureMatrix& features, const LabelVector& labels, const ClassMeans& means) {
    return 0.1 * within_class_variance(features, labels, means);
}

VirtualDataset generate_virtual(const ClassMeans& means, const ReconstructionWeights& weights,
                                const SemanticTable& unseen, int npc, double sigma2, std::uint64_t seed,
                                Execution exec) {
    if (npc <= 0) throw InputError("npc must be positive, got " + std::to_string(npc));
    if (!std::isfinite(sigma2) || sigma2 < 0.0) throw InputError("sigma2 must be finite and non-negative");
    if (weights.W.cols() != unseen.size()) {
        throw InputError("reconstruction weights have " + std::to_string(weights.W.cols()) + " columns for " +
                         std::to_string(unseen.size()) + " unseen classes");
    }
    if (weights.W.rows() != means.means.cols()) {
        throw InputError("reconstruction weights have " + std::to_string(weights.W.rows()) + " rows for " +
                         std::to_string(means.means.cols()) + " seen class means");
    }

    const Eigen::Index d = means.means.rows();
    const Eigen::Index l = unseen.size();
    const double sigma = std::sqrt(sigma2);

    VirtualDataset out;
    out.sigma2 = sigma2;
    out.seed = seed;
    out.npc = npc;
    out.features.resize(d, l * npc);
    out.semantics.resize(unseen.dim(), l * npc);
    out.labels.resize(static_cast<std::size_t>(l * npc));

    const Eigen::MatrixXd centers = means.means * weights.W;

    auto fill_class = [&](Eigen::Index i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        for (int s = 0; s < npc; ++s) {
            const Eigen::Index col = i * npc + s;
            for (Eigen::Index r = 0; r < d; ++r) {
                out.features(r, col) = centers(r, i) + sigma * rng.normal();
            }
            out.semantics.col(col) = unseen.vectors().col(i);
            out.labels[static_cast<std::size_t>(col)] = unseen.class_ids()[static_cast<std::size_t>(i)];
        }
    };

    if (exec == Execution::ClassParallel && l > 1) {
        std::vector<std::jthread> workers;
        workers.reserve(static_cast<std::size_t>(l));
        for (Eigen::Index i = 0; i < l; ++i) workers.emplace_back(fill_class, i);
    } else {
        for (Eigen::Index i = 0; i < l; ++i) fill_class(i);
    }
    return out;
}

}  // namespace glap
