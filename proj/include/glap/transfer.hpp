#pragma once

#include <vector>

#include "glap/dataset.hpp"

namespace glap {

struct TransferEntry {
    ClassId class_id;
    double relative_residual;
    bool transferable;
};

struct TransferReport {
    std::vector<TransferEntry> per_class;
    double tolerance = 1e-6;
    Eigen::Index seen_rank = 0;

    bool all_transferable() const;
};

inline constexpr double kDefaultTransferTolerance = 1e-6;
/// Singular values below this fraction of the largest are treated as zero.
inline constexpr double kRankCutoff = 1e-10;

/// For every unseen vector, the relative distance ||k - P k|| / ||k|| to the
/// column space of the seen semantic matrix, using an SVD basis truncated at
/// kRankCutoff. A class is transferable iff its residual is <= tolerance.
/// Throws InputError on a zero unseen vector or a dimension mismatch.
TransferReport check_transferability(const SemanticTable& seen, const SemanticTable& unseen,
                                     double tolerance = kDefaultTransferTolerance);

}  // namespace glap
