#include "glap/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "glap/error.hpp"

namespace glap {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw InputError(msg);
}

std::string dims(Eigen::Index r, Eigen::Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

}  // namespace

double default_ridge_eps(const Eigen::MatrixXd& gram) {
    if (gram.rows() == 0) return 0.0;
    return 1e-6 * gram.trace() / static_cast<double>(gram.rows());
}

Eigen::MatrixXd solve_gram_system(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& cross, double ridge_eps) {
    require(gram.rows() == gram.cols(), "gram matrix must be square, got " + dims(gram.rows(), gram.cols()));
    require(cross.cols() == gram.rows(),
            "cross term is " + dims(cross.rows(), cross.cols()) + " but gram is " + dims(gram.rows(), gram.cols()));
    require(std::isfinite(ridge_eps) && ridge_eps >= 0.0, "ridge_eps must be finite and non-negative");
    const Eigen::Index d = gram.rows();

    if (ridge_eps == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
        if (qr.rank() < d) throw SingularMatrixError(qr.rank(), d);
    }
    Eigen::MatrixXd system = gram;
    system.diagonal().array() += ridge_eps;
    Eigen::LLT<Eigen::MatrixXd> llt(system);
    if (llt.info() != Eigen::Success) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(system);
        throw SingularMatrixError(qr.rank(), d);
    }
    // A G = C  <=>  G A^T = C^T for symmetric G.
    return llt.solve(cross.transpose()).transpose();
}

LinearMap fit_linear_map(const FeatureMatrix& X, const Eigen::MatrixXd& K, double ridge_eps) {
    require(X.cols() == K.cols(), "features have " + std::to_string(X.cols()) + " instances but semantics have " +
                                      std::to_string(K.cols()));
    require(X.cols() > 0, "no training instances");
    const Eigen::MatrixXd gram = X * X.transpose();
    const Eigen::MatrixXd cross = K * X.transpose();
    LinearMap map;
    map.A = solve_gram_system(gram, cross, ridge_eps);
    map.bias = Eigen::VectorXd::Zero(K.rows());
    map.ridge_eps = ridge_eps;
    return map;
}

Eigen::VectorXd solve_weights_l2(const Eigen::MatrixXd& Ks, const Eigen::VectorXd& kt, double weight) {
    require(Ks.rows() == kt.size(), "semantic dimension mismatch: K_s has " + std::to_string(Ks.rows()) +
                                        " rows, target has " + std::to_string(kt.size()));
    require(std::isfinite(weight) && weight > 0.0, "l2 weight must be positive");
    Eigen::MatrixXd system = Ks.transpose() * Ks;
    system.diagonal().array() += weight;
    return system.llt().solve(Ks.transpose() * kt);
}

double lasso_objective(const Eigen::MatrixXd& Ks, const Eigen::VectorXd& kt, double weight,
                       const Eigen::VectorXd& w) {
    return (kt - Ks * w).squaredNorm() + weight * w.lpNorm<1>();
}

double lasso_kkt_violation(const Eigen::MatrixXd& Ks, const Eigen::VectorXd& kt, double weight,
                           const Eigen::VectorXd& w) {
    const Eigen::VectorXd grad = 2.0 * (Ks.transpose() * (Ks * w - kt));
    double worst = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        const double v = w(j) == 0.0 ? std::max(0.0, std::abs(grad(j)) - weight)
                                     : std::abs(grad(j) + weight * (w(j) > 0.0 ? 1.0 : -1.0));
        worst = std::max(worst, v);
    }
    return worst;
}

namespace {

// Signs of w, or empty when w is zero.
std::vector<signed char> sign_pattern(const Eigen::VectorXd& w) {
    std::vector<signed char> p(static_cast<std::size_t>(w.size()));
    bool any = false;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        p[static_cast<std::size_t>(j)] = static_cast<signed char>((w(j) > 0.0) - (w(j) < 0.0));
        any = any || w(j) != 0.0;
    }
    if (!any) p.clear();
    return p;
}

// One active-set move on the support and signs of w. On that orthant the
// objective is a smooth quadratic, so moving toward its minimizer (or along a
// null direction of K_A when the support is rank deficient) never increases it.
// A move that hits zero in some coordinate drops it and continues on the
// smaller support. Returns false once the minimizer is reached unblocked.
bool orthant_move(const Eigen::MatrixXd& Ks, const Eigen::VectorXd& kt, double weight, Eigen::VectorXd& w) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < w.size(); ++j)
        if (w(j) != 0.0) active.push_back(j);
    if (active.empty()) return false;

    const auto n = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd KA(Ks.rows(), n);
    Eigen::VectorXd signs(n), wa(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index j = active[static_cast<std::size_t>(i)];
        KA.col(i) = Ks.col(j);
        wa(i) = w(j);
        signs(i) = w(j) > 0.0 ? 1.0 : -1.0;
    }

    Eigen::VectorXd direction;
    double t = 1.0;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(KA);
    if (lu.rank() == n) {
        direction = (KA.transpose() * KA).llt().solve(KA.transpose() * kt - 0.5 * weight * signs) - wa;
    } else {
        direction = lu.kernel().col(0);
        if (signs.dot(direction) > 0.0) direction = -direction;
        t = std::numeric_limits<double>::infinity();
    }
    if (!direction.allFinite()) return false;

    Eigen::Index blocking = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (direction(i) * signs(i) < 0.0) {
            const double ti = -wa(i) / direction(i);
            if (ti < t) {
                t = ti;
                blocking = i;
            }
        }
    }
    if (!std::isfinite(t)) return false;

    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index j = active[static_cast<std::size_t>(i)];
        const double v = wa(i) + t * direction(i);
        w(j) = (i == blocking || v * signs(i) <= 0.0) ? 0.0 : v;
    }
    return blocking >= 0;
}

Eigen::VectorXd support_step(const Eigen::MatrixXd& Ks, const Eigen::VectorXd& kt, double weight,
                             Eigen::VectorXd w) {
    for (Eigen::Index pass = 0; pass <= w.size(); ++pass)
        if (!orthant_move(Ks, kt, weight, w)) break;
    return w;
}

}  // namespace

Eigen::VectorXd solve_weights_l1(const Eigen::MatrixXd& Ks, const Eigen::VectorXd& kt, double weight,
                                 const LassoOptions& opts, std::vector<double>* objective_trace) {
    require(Ks.rows() == kt.size(), "semantic dimension mismatch: K_s has " + std::to_string(Ks.rows()) +
                                        " rows, target has " + std::to_string(kt.size()));
    require(std::isfinite(weight) && weight >= 0.0, "l1 weight must be non-negative");
    require(opts.max_iter > 0 && opts.tol > 0.0, "lasso needs max_iter > 0 and tol > 0");

    const Eigen::Index k = Ks.cols();
    const Eigen::VectorXd col_sq = Ks.colwise().squaredNorm();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
    const double half = 0.5 * weight;

    double violation = lasso_kkt_violation(Ks, kt, weight, w);
    if (violation <= opts.tol) return w;

    std::vector<signed char> pattern;
    for (int sweep = 0; sweep < opts.max_iter; ++sweep) {
        Eigen::VectorXd residual = kt - Ks * w;
        for (Eigen::Index j = 0; j < k; ++j) {
            if (col_sq(j) == 0.0) continue;
            const double rho = Ks.col(j).dot(residual) + col_sq(j) * w(j);
            const double updated = soft_threshold(rho, half) / col_sq(j);
            const double delta = updated - w(j);
            if (delta != 0.0) {
                residual.noalias() -= delta * Ks.col(j);
                w(j) = updated;
            }
        }
        double objective = lasso_objective(Ks, kt, weight, w);
        violation = lasso_kkt_violation(Ks, kt, weight, w);

        // Once a sweep leaves the support and signs unchanged, take an
        // active-set step; keep it only if it does not raise the objective.
        auto current = sign_pattern(w);
        if (violation > opts.tol && current == pattern) {
            const Eigen::VectorXd candidate = support_step(Ks, kt, weight, w);
            const double cand_objective = lasso_objective(Ks, kt, weight, candidate);
            if (cand_objective <= objective) {
                w = candidate;
                objective = cand_objective;
                violation = lasso_kkt_violation(Ks, kt, weight, w);
                current = sign_pattern(w);
            }
        }
        pattern = std::move(current);

        if (objective_trace) objective_trace->push_back(objective);
        if (violation <= opts.tol) return w;
    }
    throw ConvergenceError(opts.max_iter, violation);
}

}  // namespace glap
