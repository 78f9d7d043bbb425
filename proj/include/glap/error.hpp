#pragma once

#include <stdexcept>
#include <string>

namespace glap {

/// Malformed input: bad dimensions, unknown ids, unparsable files.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure in a solver.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularMatrixError : public NumericalError {
public:
    SingularMatrixError(long rank, long size)
        : NumericalError("singular system: gram matrix has rank " + std::to_string(rank) +
                         " < " + std::to_string(size) + " (set a positive ridge_eps)"),
          rank_(rank), size_(size) {}

    long rank() const noexcept { return rank_; }
    long size() const noexcept { return size_; }

private:
    long rank_;
    long size_;
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(int iterations, double kkt_violation)
        : NumericalError("coordinate descent did not converge after " + std::to_string(iterations) +
                         " sweeps (KKT violation " + std::to_string(kkt_violation) + ")"),
          iterations_(iterations), kkt_violation_(kkt_violation) {}

    int iterations() const noexcept { return iterations_; }
    double kkt_violation() const noexcept { return kkt_violation_; }

private:
    int iterations_;
    double kkt_violation_;
};

}  // namespace glap
