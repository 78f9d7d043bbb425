#include "glap/transfer.hpp"

#include <algorithm>
#include <cmath>

#include "glap/error.hpp"

namespace glap {

bool TransferReport::all_transferable() const {
    return std::all_of(per_class.begin(), per_class.end(), [](const auto& e) { return e.transferable; });
}

TransferReport check_transferability(const SemanticTable& seen, const SemanticTable& unseen, double tolerance) {
    if (!(tolerance > 0.0) || !std::isfinite(tolerance)) {
        throw InputError("transfer tolerance must be positive");
    }
    if (seen.dim() != unseen.dim()) {
        throw InputError("semantic dimension mismatch: seen a=" + std::to_string(seen.dim()) +
                         ", unseen a=" + std::to_string(unseen.dim()));
    }

    TransferReport report;
    report.tolerance = tolerance;

    Eigen::MatrixXd basis(seen.dim(), 0);
    if (seen.size() > 0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(seen.vectors(), Eigen::ComputeThinU);
        const auto& sv = svd.singularValues();
        Eigen::Index rank = 0;
        if (sv.size() > 0 && sv(0) > 0.0) {
            const double cutoff = kRankCutoff * sv(0);
            while (rank < sv.size() && sv(rank) > cutoff) ++rank;
        }
        basis = svd.matrixU().leftCols(rank);
        report.seen_rank = rank;
    }

    for (Eigen::Index i = 0; i < unseen.size(); ++i) {
        const Eigen::VectorXd k = unseen.vectors().col(i);
        const ClassId id = unseen.class_ids()[static_cast<std::size_t>(i)];
        const double norm = k.norm();
        if (norm == 0.0) {
            throw InputError("unseen class " + std::to_string(id) + " has a zero semantic vector");
        }
        const Eigen::VectorXd residual = k - basis * (basis.transpose() * k);
        const double rel = residual.norm() / norm;
        report.per_class.push_back({id, rel, rel <= tolerance});
    }
    return report;
}

}  // namespace glap
