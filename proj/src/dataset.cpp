#include "glap/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "glap/error.hpp"

namespace glap {

SemanticTable::SemanticTable(std::vector<ClassId> class_ids, Eigen::MatrixXd vectors)
    : class_ids_(std::move(class_ids)), vectors_(std::move(vectors)) {
    if (static_cast<Eigen::Index>(class_ids_.size()) != vectors_.cols()) {
        throw InputError("semantic table: " + std::to_string(class_ids_.size()) + " class ids but " +
                         std::to_string(vectors_.cols()) + " vectors");
    }
    for (Eigen::Index i = 0; i < vectors_.cols(); ++i) {
        const ClassId id = class_ids_[static_cast<std::size_t>(i)];
        if (id < 0) {
            throw InputError("semantic table: negative class id " + std::to_string(id));
        }
        if (!index_.emplace(id, i).second) {
            throw InputError("semantic table: duplicate class id " + std::to_string(id));
        }
    }
}

Eigen::Index SemanticTable::index_of(ClassId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        throw InputError("class id " + std::to_string(id) + " not in semantic table");
    }
    return it->second;
}

SemanticTable SemanticTable::normalized() const {
    Eigen::MatrixXd v = vectors_;
    for (Eigen::Index i = 0; i < v.cols(); ++i) {
        const double n = v.col(i).norm();
        if (n > 0.0) v.col(i) /= n;
    }
    return SemanticTable(class_ids_, std::move(v));
}

std::string to_string(Violation v) {
    switch (v) {
        case Violation::EmptyFeatures: return "empty feature matrix";
        case Violation::NonFiniteFeatures: return "non-finite feature value";
        case Violation::LabelCountMismatch: return "label count mismatch";
        case Violation::UnknownLabel: return "label not in seen semantics";
        case Violation::OverlappingClassIds: return "overlapping class ids";
        case Violation::SemanticDimensionMismatch: return "semantic dimension mismatch";
        case Violation::EmptySemanticTable: return "empty semantic table";
        case Violation::NonFiniteSemantics: return "non-finite semantic value";
        case Violation::AllZeroSemantics: return "all semantic vectors are zero";
    }
    return "unknown violation";
}

bool ValidationReport::has(Violation kind) const {
    return std::any_of(issues.begin(), issues.end(), [kind](const auto& i) { return i.kind == kind; });
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < issues.size(); ++i) {
        if (i) os << "; ";
        os << issues[i].message;
    }
    return os.str();
}

namespace {

void check_table(const SemanticTable& table, const char* name, ValidationReport& report) {
    if (table.empty()) {
        report.issues.push_back({Violation::EmptySemanticTable, std::string("empty semantic table: ") + name});
        return;
    }
    if (!table.vectors().allFinite()) {
        report.issues.push_back({Violation::NonFiniteSemantics, std::string("non-finite semantic value in ") + name});
        return;
    }
    if (table.vectors().cwiseAbs().maxCoeff() == 0.0) {
        report.issues.push_back({Violation::AllZeroSemantics, std::string("all semantic vectors are zero in ") + name});
    }
}

}  // namespace

ValidationReport validate_split(const ZslSplit& split) {
    ValidationReport report;
    const auto& X = split.source.features;
    const auto& labels = split.source.labels;

    if (X.rows() == 0 || X.cols() == 0) {
        report.issues.push_back({Violation::EmptyFeatures, "empty feature matrix"});
    } else if (!X.allFinite()) {
        report.issues.push_back({Violation::NonFiniteFeatures, "non-finite feature value"});
    }
    if (static_cast<Eigen::Index>(labels.size()) != X.cols()) {
        report.issues.push_back({Violation::LabelCountMismatch,
                                 "label count mismatch: " + std::to_string(labels.size()) + " labels for " +
                                     std::to_string(X.cols()) + " instances"});
    }
    std::set<ClassId> unknown;
    for (ClassId id : labels) {
        if (!split.seen.contains(id)) unknown.insert(id);
    }
    if (!unknown.empty()) {
        report.issues.push_back({Violation::UnknownLabel,
                                 "label not in seen semantics: " + std::to_string(*unknown.begin())});
    }

    check_table(split.seen, "seen", report);
    check_table(split.unseen, "unseen", report);

    for (ClassId id : split.unseen.class_ids()) {
        if (split.seen.contains(id)) {
            report.issues.push_back({Violation::OverlappingClassIds,
                                     "overlapping class ids: " + std::to_string(id) + " is both seen and unseen"});
            break;
        }
    }
    if (!split.seen.empty() && !split.unseen.empty() && split.seen.dim() != split.unseen.dim()) {
        report.issues.push_back({Violation::SemanticDimensionMismatch,
                                 "semantic dimension mismatch: seen a=" + std::to_string(split.seen.dim()) +
                                     ", unseen a=" + std::to_string(split.unseen.dim())});
    }
    return report;
}

SemanticTable aggregate_per_image_semantics(const FeatureMatrix& features, const LabelVector& labels,
                                            const Eigen::MatrixXd& per_image) {
    const Eigen::Index n = features.cols();
    if (static_cast<Eigen::Index>(labels.size()) != n || per_image.cols() != n) {
        throw InputError("per-image semantics: expected " + std::to_string(n) + " columns, got " +
                         std::to_string(per_image.cols()) + " semantic columns and " +
                         std::to_string(labels.size()) + " labels");
    }
    if (!per_image.allFinite()) {
        throw InputError("per-image semantics: non-finite value");
    }
    std::map<ClassId, std::vector<Eigen::Index>> members;
    for (Eigen::Index j = 0; j < n; ++j) members[labels[static_cast<std::size_t>(j)]].push_back(j);

    std::vector<ClassId> ids;
    Eigen::MatrixXd vectors(per_image.rows(), static_cast<Eigen::Index>(members.size()));
    Eigen::Index c = 0;
    for (const auto& [id, cols] : members) {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(per_image.rows());
        for (Eigen::Index j : cols) sum += per_image.col(j);
        vectors.col(c++) = sum / static_cast<double>(cols.size());
        ids.push_back(id);
    }
    return SemanticTable(std::move(ids), std::move(vectors));
}

FeatureMatrix normalize_columns(const FeatureMatrix& features) {
    FeatureMatrix out = features;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const double n = out.col(j).norm();
        if (n > 0.0) out.col(j) /= n;
    }
    return out;
}

}  // namespace glap
