#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "quasitori/errors.hpp"

namespace tori {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

/// Galerkin/weight parameters shared by all modules.
///
/// Tail slots are indexed j = j_min .. j_max in the abstract model; model
/// builders map them onto physical mode indices and supply the per-slot
/// weight index used by the [j]^s and e^{sigma j} factors.
struct TruncationParams {
    int r = 1;
    int j_min = 2;
    int j_max = 2;
    int k_max = 16;
    double s = 1.0;
    double sigma = 0.0;
    double tau = 1.0;
    double gamma = 0.1;

    int n_tail() const { return j_max - j_min + 1; }
    void validate(int smoothing_d) const;
};

/// One truncated pair sequence (p_j, q_j) over the tail slots.
struct WeightedSeq {
    VectorXd p;
    VectorXd q;

    static WeightedSeq zero(int n) { return {VectorXd::Zero(n), VectorXd::Zero(n)}; }
    int size() const { return static_cast<int>(p.size()); }
};

/// norm^2 = sum_j max(1,w_j)^{2s} e^{2 sigma w_j} (p_j^2 + q_j^2),
/// w_j the per-slot weight index (physical |j| for models, abstract j otherwise).
double weighted_norm_sq(const WeightedSeq& seq, const VectorXd& weight_index, double s,
                        double sigma);

/// z = (I, phi, p, q). Angles are stored on the covering space (plain reals,
/// 2*pi periodic); reduce mod 2*pi only for torus-membership comparisons.
struct PhasePoint {
    VectorXd I;
    VectorXd phi;
    WeightedSeq tail;

    static PhasePoint zero(int r, int n_tail);
    int r() const { return static_cast<int>(I.size()); }
    int n_tail() const { return tail.size(); }

    PhasePoint& operator+=(const PhasePoint& o);
    PhasePoint& operator*=(double c);
};
PhasePoint operator+(PhasePoint a, const PhasePoint& b);
PhasePoint operator-(const PhasePoint& a, const PhasePoint& b);
PhasePoint operator*(double c, PhasePoint a);

/// Full phase-space norm: ||I||^2 + ||phi||^2 + ||p||^2_{s,sigma} + ||q||^2_{s,sigma}.
double phase_norm(const PhasePoint& z, const VectorXd& weight_index, double s, double sigma);

/// Distance with angle components wrapped to (-pi, pi].
double phase_dist(const PhasePoint& a, const PhasePoint& b, const VectorXd& weight_index,
                  double s, double sigma);

/// Weak scalar product: plain Euclidean pairing of all components.
double weak_dot(const PhasePoint& a, const PhasePoint& b);

/// Poisson tensor J(I, phi, p, q) = (-phi, I, -q, p).
PhasePoint poisson_tensor_apply(const PhasePoint& z);

/// Value and gradient oracles for one nonlinearity F^(l)_mu; gradients are
/// taken w.r.t. the weak scalar product and must be analytic (finite
/// differences stay in test code).
struct Nonlinearity {
    std::function<double(const PhasePoint&, double mu)> value;
    std::function<PhasePoint(const PhasePoint&, double mu)> grad;

    bool empty() const { return !value && !grad; }
};

/// Optional structure attached by model builders: the exact flow of the
/// nonlinear part alone (positions frozen in the underlying field variables),
/// acting on the flat (p, q) layout [excited pairs 0..r-1, tail slots after].
/// Enables the splitting integrator in the verify module.
struct SplitKick {
    std::function<void(VectorXd& p, VectorXd& q, double strength)> apply;
};

/// r Hamiltonians H^(l) = I_l + sum_j Omega_j^(l) (p_j^2+q_j^2)/2 + mu F^(l).
struct CommutingSystem {
    TruncationParams trunc;
    MatrixXd Omega;          // r x n_tail
    VectorXd weight_index;   // n_tail
    std::vector<Nonlinearity> F;  // size r; empty oracles mean F^(l) = 0
    VectorXi n_vec;          // the integer vector of (A.3)/(A.4)
    double mu = 0.0;
    int smoothing_d = 0;     // declared d of the smoothing assumption
    std::string label;

    // model extras (empty for table-built systems)
    VectorXd f_coef;         // F^(l) = f_coef[l] * F_base when F_base is set
    Nonlinearity F_base;     // shared base nonlinearity of the model chain
    SplitKick kick;          // exact kick for the flow of F_base

    // Action frame: stored actions are I_hat = frame_M * I_flat where I_flat
    // are the excited-pair actions (p^2+q^2)/2; identity until normalize_n.
    MatrixXd frame_M;

    int r() const { return trunc.r; }
    int n_tail() const { return trunc.n_tail(); }
    void validate() const;
    bool has_nonlinearity() const;
    bool has_base() const { return !F_base.empty() && f_coef.size() == trunc.r; }
    MatrixXd frame() const {
        return frame_M.size() > 0 ? frame_M : MatrixXd::Identity(trunc.r, trunc.r);
    }

    double F_value(int l, const PhasePoint& z) const;
    PhasePoint F_grad(int l, const PhasePoint& z) const;
};

/// H^(l)(z) = I_l + sum_j Omega_j^(l) (p_j^2+q_j^2)/2 + mu F^(l)(z); l is 0-based.
double hamiltonian_value(const CommutingSystem& sys, int l, const PhasePoint& z);

/// Gradient of H^(l) w.r.t. the weak scalar product.
PhasePoint hamiltonian_grad(const CommutingSystem& sys, int l, const PhasePoint& z);

/// {H^(l1), H^(l2)}(z) = <grad H^(l1), J grad H^(l2)>. Zero (up to roundoff
/// and truncation) for a valid commuting system.
double poisson_bracket(const CommutingSystem& sys, int l1, int l2, const PhasePoint& z);

}  // namespace tori
