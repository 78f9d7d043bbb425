#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "glap/dataset.hpp"
#include "glap/solvers.hpp"

namespace glap {

/// Per-seen-class mean features, one column per class in seen-table order.
struct ClassMeans {
    Eigen::MatrixXd means;  // d x k
    std::vector<ClassId> class_ids;
    std::vector<Eigen::Index> counts;
};

/// Column i expresses unseen class i as a combination of seen classes.
struct ReconstructionWeights {
    Eigen::MatrixXd W;  // k x l
    RegularizerSpec regularizer;
};

struct VirtualDataset {
    Eigen::MatrixXd features;   // d x M
    Eigen::MatrixXd semantics;  // a x M
    LabelVector labels;
    double sigma2 = 0.0;
    std::uint64_t seed = 0;
    int npc = 0;

    Eigen::Index size() const noexcept { return features.cols(); }
    bool empty() const noexcept { return features.cols() == 0; }
};

/// Throws InputError naming the first seen class without instances, or on a
/// label that is not in `seen`.
ClassMeans compute_class_means(const FeatureMatrix& features, const LabelVector& labels,
                               const SemanticTable& seen);

ReconstructionWeights reconstruct_weights(const SemanticTable& seen, const SemanticTable& unseen,
                                          const RegularizerSpec& reg, const LassoOptions& lasso = {});

/// Pooled per-coordinate within-class variance of the source features (ML
/// estimate, divides by N), averaged over coordinates.
double within_class_variance(const FeatureMatrix& features, const LabelVector& labels,
                             const ClassMeans& means);

/// 0.1 x within_class_variance.
double default_sigma2(const FeatureMatrix& features, const LabelVector& labels, const ClassMeans& means);

enum class Execution { Sequential, ClassParallel };

/// Draws npc instances per unseen class from N(means * w_i, sigma2 I). Class i
/// uses its own generator seeded with derive_seed(seed, i), so the output
/// does not depend on `exec`. Instances are grouped by class in unseen-table
/// order; semantic columns are exact copies of the unseen vectors.
VirtualDataset generate_virtual(const ClassMeans& means, const ReconstructionWeights& weights,
                                const SemanticTable& unseen, int npc, double sigma2, std::uint64_t seed,
                                Execution exec = Execution::Sequential);

}  // namespace glap
