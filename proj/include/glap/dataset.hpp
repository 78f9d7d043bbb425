#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace glap {

using ClassId = std::int64_t;

/// d x N, one instance per column.
using FeatureMatrix = Eigen::MatrixXd;
using LabelVector = std::vector<ClassId>;

/// Per-class semantic vectors (attributes or word vectors), stored as the
/// columns of an a x n matrix in entry order.
class SemanticTable {
public:
    SemanticTable() = default;

    /// Throws InputError if the id count differs from the column count or ids
    /// repeat or are negative.
    SemanticTable(std::vector<ClassId> class_ids, Eigen::MatrixXd vectors);

    const std::vector<ClassId>& class_ids() const noexcept { return class_ids_; }
    const Eigen::MatrixXd& vectors() const noexcept { return vectors_; }

    Eigen::Index size() const noexcept { return vectors_.cols(); }
    Eigen::Index dim() const noexcept { return vectors_.rows(); }
    bool empty() const noexcept { return class_ids_.empty(); }

    bool contains(ClassId id) const { return index_.count(id) != 0; }
    /// Dense position of `id`; throws InputError if absent.
    Eigen::Index index_of(ClassId id) const;
    Eigen::VectorXd vector(Eigen::Index i) const { return vectors_.col(i); }

    /// Copy with every vector scaled to unit l2 norm (zero vectors untouched).
    SemanticTable normalized() const;

private:
    std::vector<ClassId> class_ids_;
    Eigen::MatrixXd vectors_;
    std::unordered_map<ClassId, Eigen::Index> index_;
};

struct LabeledFeatures {
    FeatureMatrix features;
    LabelVector labels;
};

struct ZslSplit {
    LabeledFeatures source;
    SemanticTable seen;
    SemanticTable unseen;
};

enum class Violation {
    EmptyFeatures,
    NonFiniteFeatures,
    LabelCountMismatch,
    UnknownLabel,
    OverlappingClassIds,
    SemanticDimensionMismatch,
    EmptySemanticTable,
    NonFiniteSemantics,
    AllZeroSemantics,
};

std::string to_string(Violation v);

struct ValidationIssue {
    Violation kind;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const noexcept { return issues.empty(); }
    bool has(Violation kind) const;
    std::string summary() const;
};

/// Lists every violated invariant of the split. Never throws.
ValidationReport validate_split(const ZslSplit& split);

/// Averages per-image semantic columns (a x N) into one entry per distinct
/// label, ordered by ascending class id.
SemanticTable aggregate_per_image_semantics(const FeatureMatrix& features, const LabelVector& labels,
                                            const Eigen::MatrixXd& per_image);

/// Scales every column to unit l2 norm (zero columns untouched).
FeatureMatrix normalize_columns(const FeatureMatrix& features);

}  // namespace glap
