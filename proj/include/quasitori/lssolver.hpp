#pragma once

#include <vector>

#include "quasitori/core.hpp"
#include "quasitori/loops.hpp"

namespace tori {

/// Unimodular integer matrix with first row n (gcd(n) = +-1 required).
Eigen::MatrixXi unimodular_completion(const VectorXi& n);

/// Equivalent system with n = e1: H_hat^(i) = sum_l M_il H^(l), actions
/// I_hat = M I, angles phi_hat = M^{-T} phi, frequency tables and oracles
/// transformed accordingly.
CommutingSystem normalize_n(const CommutingSystem& sys);

/// eps in the normalized frame: eps_hat = M^{-T} eps (n_hat + eps_hat and
/// n + eps describe the same tilde-Hamiltonian).
VectorXd eps_to_normalized(const CommutingSystem& sys_original, const VectorXd& eps);

/// Omega_tilde_j(eps) = (1 + eps_1) Omega_j^(1) + sum_{l>=2} eps_l Omega_j^(l);
/// requires n = e1.
VectorXd build_tilde_frequencies(const CommutingSystem& sys, const VectorXd& eps);

/// Forward loop operator: d/dt on I and phi rows, the rotation block
/// [d/dt, Omega; -Omega, d/dt] on tail pairs (diagonal in time-Fourier modes).
LoopTrajectory apply_loop_operator(const VectorXd& tilde_omega, const LoopTrajectory& loop);

/// Per-mode inverse of the loop operator on the range: I/phi modes divide by
/// ik, tail pairs solve the 2x2 block. Throws SmallDenominatorError when a
/// denominator violates the gamma/[j]^tau floor (stale certificate).
RangeElement invert_loop_operator(const VectorXd& tilde_omega, const RangeElement& w, double gamma,
                                  double tau);

/// The nonlinear operator Theta evaluated around the drifting reference
/// (0, e1 t, 0, 0) + (a, psi, 0, 0) + w(t), collocated on 4*(k_max+1) times:
///   I' = -mu dF~/dphi + beta,  phi' = eps + mu dF~/dI,
///   p' = -mu dF~/dq,           q' = +mu dF~/dp,
/// with F~ = (1+eps_1) F^(1) + sum_{l>=2} eps_l F^(l). Requires n = e1.
LoopTrajectory theta_map(const CommutingSystem& sys, const VectorXd& eps, const VectorXd& beta,
                         const RangeElement& w, const KernelElement& kernel);

struct RangeSolveResult {
    RangeElement w;
    int iterations = 0;
    double residual = 0.0;        // ||L w - P Theta(w + kernel)||_{T,s,sigma}
    double last_step = 0.0;
    double contraction = 0.0;     // measured step ratio
};

/// Fixed-point iteration w <- L^{-1} P Theta(w + kernel) from w = 0 until the
/// step norm falls below tol. Throws NoContractionError when the step ratio
/// exceeds 1 three times in a row.
RangeSolveResult solve_range(const CommutingSystem& sys, const VectorXd& eps,
                             const KernelElement& kernel, double tol, int max_iter = 64);

struct AveragedNonlinearity {
    double value = 0.0;
    VectorXd grad;
    MatrixXd hess;
};

/// <F_n>(a, psi) = (1/2pi) int F_n(a, n t + psi, 0, 0) dt with
/// F_n = sum_l n_l F^(l)|_{mu=0}; trapezoid quadrature (exact for the model
/// quartics). The Hessian differentiates the analytic gradient average by
/// Richardson extrapolation; it only ever preconditions Newton steps.
AveragedNonlinearity averaged_nonlinearity(const CommutingSystem& sys, const VectorXd& a,
                                           const VectorXd& psi, int quad_points = 32);

struct AStarResult {
    VectorXd a;
    bool on_boundary = false;  // touched the boundary of the positive domain
    int iterations = 0;
};

/// Newton solve of eps/mu = -d<F_n>/da.
AStarResult solve_a_star(const CommutingSystem& sys, const VectorXd& eps_over_mu,
                         const VectorXd& a_guess);

struct KernelSolveResult {
    VectorXd a;
    VectorXd alpha;          // (a - a_star)/mu
    VectorXd beta;           // consistency certificate, must be ~0
    RangeElement w;
    double kernel_residual = 0.0;
    double range_residual = 0.0;
    int newton_iterations = 0;
};

/// Outer Newton on the mean action a around a_star; every residual evaluation
/// re-solves the range equation at the current a. beta is evaluated explicitly
/// afterwards and must satisfy |beta| <= beta_tol (else BetaNotSmallError).
KernelSolveResult solve_kernel(const CommutingSystem& sys, const VectorXd& eps,
                               const VectorXd& psi, double tol, double beta_tol = 1e-8,
                               const VectorXd* a_star_hint = nullptr);

struct TorusResult {
    VectorXd eps;            // normalized frame
    double mu = 0.0;
    VectorXd a_star;
    int psi_grid = 0;        // points per angle; grid has psi_grid^r nodes
    std::vector<VectorXd> psi;       // flattened grid nodes
    std::vector<VectorXd> alpha;     // correction per node
    std::vector<VectorXd> beta;      // certificate per node
    std::vector<LoopTrajectory> loops;  // zeta = kernel + w per node
    std::vector<PhasePoint> z0;      // loop value at t = 0 (angles = psi + theta(0))
    double beta_residual = 0.0;      // max |beta|
    double range_residual = 0.0;
    double kernel_residual = 0.0;
    double distance_to_reference = 0.0;  // max graph gap to (a*, ., 0, 0)
    double loop_bound_constant = 0.0;    // max ||zeta - (a*,psi,0,0)||_{T,s,sigma} / mu
    VectorXd frequencies;    // predicted flow frequencies, filled by model-aware callers

    int grid_size() const { return static_cast<int>(psi.size()); }
};

/// Kernel + range solve on an equispaced psi grid of psi_grid^r nodes,
/// assembling the invariant-torus data and its distance to the reference.
TorusResult assemble_torus(const CommutingSystem& sys, const VectorXd& eps, int psi_grid,
                           double tol, double beta_tol = 1e-8);

/// Empirical contraction threshold: largest mu (within factor ~2) for which
/// the range solve still contracts at the given eps/mu ray and kernel.
double discover_mu_star(CommutingSystem sys, const VectorXd& eps_over_mu, const VectorXd& psi,
                        double tol, double mu_hi = 1.0);

}  // namespace tori
