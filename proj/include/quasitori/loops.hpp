#pragma once

#include <Eigen/Core>

#include "quasitori/core.hpp"
#include "quasitori/fourier.hpp"

namespace tori {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;

/// Where the analytic weight e^{2 sigma |.|} acts in the loop norm: on the
/// time index k (as the paper prints it) or on the spatial weight index.
enum class SigmaWeight { TimeModes, SpaceModes };

/// A 2*pi-periodic loop zeta(t) stored as time-Fourier coefficients per
/// component, k = -k_max .. k_max. Loops are relative to the drifting
/// reference (0, e1 t, 0, 0), so every stored component is genuinely periodic.
/// Reality: coef(., -k) = conj coef(., k).
struct LoopTrajectory {
    int r = 0;
    int n_tail = 0;
    int k_max = 0;
    VectorXd weight_index;  // tail weights, copied from the owning system
    MatrixXcd coef;         // (2r + 2 n_tail) x (2 k_max + 1)

    static LoopTrajectory zero(int r, int n_tail, int k_max, const VectorXd& weight_index);

    int n_components() const { return 2 * r + 2 * n_tail; }
    int n_cols() const { return 2 * k_max + 1; }
    int col(int k) const { return k + k_max; }

    int row_I(int l) const { return l; }
    int row_phi(int l) const { return r + l; }
    int row_p(int j) const { return 2 * r + j; }
    int row_q(int j) const { return 2 * r + n_tail + j; }

    Complex& I(int l, int k) { return coef(row_I(l), col(k)); }
    Complex& phi(int l, int k) { return coef(row_phi(l), col(k)); }
    Complex& p(int j, int k) { return coef(row_p(j), col(k)); }
    Complex& q(int j, int k) { return coef(row_q(j), col(k)); }
    Complex I(int l, int k) const { return coef(row_I(l), col(k)); }
    Complex phi(int l, int k) const { return coef(row_phi(l), col(k)); }
    Complex p(int j, int k) const { return coef(row_p(j), col(k)); }
    Complex q(int j, int k) const { return coef(row_q(j), col(k)); }

    /// Average coef(k) with conj coef(-k); removes roundoff asymmetry.
    void enforce_reality();

    /// zeta(t) as a phase point (angles on the covering space).
    PhasePoint at_time(double t) const;

    LoopTrajectory& operator+=(const LoopTrajectory& o) { coef += o.coef; return *this; }
    LoopTrajectory& operator-=(const LoopTrajectory& o) { coef -= o.coef; return *this; }
    LoopTrajectory& operator*=(double c) { coef *= c; return *this; }
};

/// Norm of Eq.-style sum_k (1+k^2) [ sum_l (|I_lk|^2 + |phi_lk|^2)
///   + sum_tail (|p_jk|^2 + |q_jk|^2) [j]^{2s} W ], with W = e^{2 sigma |k|}
/// (TimeModes, printed form) or e^{2 sigma w_j} (SpaceModes diagnostic).
double loop_norm(const LoopTrajectory& loop, double s, double sigma,
                 SigmaWeight mode = SigmaWeight::TimeModes);

/// Mean actions and angles (a, psi): the Q-projection of a loop.
struct KernelElement {
    VectorXd a;
    VectorXd psi;
};

/// Loops with zero-mean I and phi components; same storage as LoopTrajectory.
using RangeElement = LoopTrajectory;

/// Q takes the k=0 coefficients of (I, phi) and drops everything else;
/// P is the complement (k=0 of I/phi removed, tail untouched).
std::pair<KernelElement, RangeElement> project_kernel(const LoopTrajectory& loop);

bool is_range_element(const LoopTrajectory& loop, double tol = 1e-13);

/// Per-component samples on the uniform grid t_i = 2*pi*i/n (rows follow the
/// LoopTrajectory layout). n = ft.size() must be >= 2*k_max + 1.
MatrixXd loop_samples(const LoopTrajectory& loop, const FourierTransform& ft);

/// Inverse of loop_samples: analyze each row and truncate to k_max.
LoopTrajectory loop_from_samples(const MatrixXd& samples, int r, int n_tail, int k_max,
                                 const VectorXd& weight_index, const FourierTransform& ft);

}  // namespace tori
