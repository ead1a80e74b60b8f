#pragma once

#include <stdexcept>
#include <string>

namespace tori {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A loop-operator denominator |k ± Omega_j| fell below gamma / [j]^tau.
/// Signals a stale or missing Diophantine certificate for the current eps.
struct SmallDenominatorError : SolverError {
    SmallDenominatorError(int j_slot_, int k_, double value_)
        : SolverError("small denominator at tail slot " + std::to_string(j_slot_) +
                      ", k=" + std::to_string(k_) + ", |k±Omega|=" + std::to_string(value_)),
          j_slot(j_slot_), k(k_), value(value_) {}
    int j_slot;
    int k;
    double value;
};

struct NoContractionError : SolverError {
    using SolverError::SolverError;
};

struct SingularHessianError : SolverError {
    using SolverError::SolverError;
};

struct NonConvergenceError : SolverError {
    using SolverError::SolverError;
};

/// Kernel-equation consistency certificate |beta| exceeded its tolerance
/// (Hamiltonians do not commute, or the truncation is too coarse).
struct BetaNotSmallError : SolverError {
    BetaNotSmallError(double beta_, double tol_)
        : SolverError("beta residual " + std::to_string(beta_) + " exceeds tolerance " +
                      std::to_string(tol_)),
          beta(beta_), tol(tol_) {}
    double beta;
    double tol;
};

struct DegenerateDenominatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StepRejectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FitDegenerateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tori
