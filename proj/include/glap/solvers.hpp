#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "glap/dataset.hpp"

namespace glap {

/// Linear image-to-semantic map s = A x + bias. The bias is always zero here.
struct LinearMap {
    Eigen::MatrixXd A;  // a x d
    Eigen::VectorXd bias;
    double ridge_eps = 0.0;

    Eigen::Index semantic_dim() const noexcept { return A.rows(); }
    Eigen::Index feature_dim() const noexcept { return A.cols(); }
    Eigen::MatrixXd apply(const FeatureMatrix& X) const { return A * X; }
};

enum class RegularizerKind { L2, L1 };

struct RegularizerSpec {
    RegularizerKind kind = RegularizerKind::L2;
    double weight = 1e-3;
};

struct LassoOptions {
    int max_iter = 10000;
    double tol = 1e-8;
};

/// Ridge used when the caller does not pin one: 1e-6 * trace(G) / dim(G).
double default_ridge_eps(const Eigen::MatrixXd& gram);

/// Solves A (G + eps I) = C for A, where G is the symmetric d x d gram and C
/// the a x d cross term. With eps = 0 a rank-deficient G raises
/// SingularMatrixError carrying the numerical rank.
Eigen::MatrixXd solve_gram_system(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& cross, double ridge_eps);

/// A = K X^T (X X^T + eps I)^-1.
LinearMap fit_linear_map(const FeatureMatrix& X, const Eigen::MatrixXd& K, double ridge_eps);

/// Minimizer of ||k_t - K_s w||^2 + weight ||w||^2 (weight > 0).
Eigen::VectorXd solve_weights_l2(const Eigen::MatrixXd& Ks, const Eigen::VectorXd& kt, double weight);

/// Cyclic coordinate descent for ||k_t - K_s w||^2 + weight ||w||_1, started at
/// w = 0 and visiting coordinates by index. Stops once the KKT violation is at
/// most `opts.tol`; throws ConvergenceError otherwise. Zero columns of K_s keep
/// a zero coefficient. When a sweep leaves the support and signs unchanged, an
/// active-set step follows: it moves toward the least-squares solution on that
/// sign orthant (or along a null direction when the support is rank
/// deficient), dropping coordinates that reach zero. The step is kept only if
/// it does not raise the objective. If `objective_trace` is given it receives
/// the objective value after every sweep.
Eigen::VectorXd solve_weights_l1(const Eigen::MatrixXd& Ks, const Eigen::VectorXd& kt, double weight,
                                 const LassoOptions& opts = {},
                                 std::vector<double>* objective_trace = nullptr);

/// Largest KKT violation of `w` for the l1 problem above.
double lasso_kkt_violation(const Eigen::MatrixXd& Ks, const Eigen::VectorXd& kt, double weight,
                           const Eigen::VectorXd& w);

double lasso_objective(const Eigen::MatrixXd& Ks, const Eigen::VectorXd& kt, double weight,
                       const Eigen::VectorXd& w);

}  // namespace glap
