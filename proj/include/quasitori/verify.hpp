#pragma once

#include "quasitori/core.hpp"
#include "quasitori/lssolver.hpp"

namespace tori {

/// One Hamiltonian flow to integrate: sum_l coefficients_l H^(l).
struct FlowSpec {
    VectorXd coefficients;
    double t_final = 2.0 * M_PI;
    int steps = 4000;
    int integrator_order = 4;   // 2 (Strang) or 4 (triple-jump composition)
    double drift_budget = 1e-8; // StepRejection beyond this energy drift
};

struct Trajectory {
    std::vector<double> times;
    std::vector<PhasePoint> points;
    double energy_drift = 0.0;
};

/// Flat (p, q) pairs in the layout [excited 0..r-1, tail slots]; the excited
/// pairs carry the original-frame actions, converted through sys.frame().
void flat_pairs_from_phase(const CommutingSystem& sys, const PhasePoint& z, VectorXd& p,
                           VectorXd& q);
PhasePoint phase_from_flat_pairs(const CommutingSystem& sys, const VectorXd& p, const VectorXd& q);

/// Symmetric splitting integrator: the quadratic part rotates every pair
/// exactly, the nonlinear part applies the model's exact kick. Reversible,
/// order 2 or 4. Throws StepRejectionError when the energy drift exceeds the
/// budget (monitored at checkpoints).
Trajectory integrate_flow(const CommutingSystem& sys, const FlowSpec& spec, const PhasePoint& z0,
                          int n_saves = 1);

/// Spectral-in-psi interpolant of the solved family z(0; psi): evaluates
/// torus points at arbitrary angles, inverts the angle chart, and measures
/// distances to the torus.
class TorusChart {
public:
    TorusChart(const CommutingSystem& sys, const TorusResult& torus);

    int r() const { return r_; }
    PhasePoint z0_at(const VectorXd& psi) const;
    VectorXd theta0_at(const VectorXd& psi) const;

    /// psi solving phi(z) = psi + theta0(psi) mod 2*pi, continued from guess.
    VectorXd psi_label(const PhasePoint& z, const VectorXd& guess) const;

    /// Angle-matched distance of z to the torus (upper bound on the true
    /// distance; exact to chart accuracy for points near the torus).
    double distance_to(const PhasePoint& z, const VectorXd& label_guess) const;

    /// Plain nearest stored node distance, for reporting.
    double nearest_node_distance(const PhasePoint& z) const;

private:
    const CommutingSystem* sys_;
    const TorusResult* torus_;
    int r_ = 0, g_ = 0, n_fields_ = 0;
    MatrixXcd coef_;                // n_fields x g^r
    std::vector<VectorXi> kvecs_;
    VectorXd field_at(const VectorXd& psi) const;
};

struct PeriodicOrbitCheck {
    double residual = 0.0;           // ||z(2 pi) - z(0)||_{s,sigma} after removing the e1 drift
    VectorXd winding;                // unwrapped angle advance / 2 pi
    double max_loop_deviation = 0.0; // sup_t distance to the stored loop
    double energy_drift = 0.0;
};

/// Integrates the tilde-Hamiltonian flow (coefficients e1 + eps) over one
/// 2*pi period from the stored initial point of the given grid node.
PeriodicOrbitCheck check_periodic_orbit(const CommutingSystem& sys, const VectorXd& eps,
                                        const TorusResult& torus, int node, int steps = 4000,
                                        int integrator_order = 4);

struct InvarianceReport {
    double max_distance = 0.0;
    double max_nearest_node_distance = 0.0;
    double period_residual = 0.0;    // filled by callers running the periodic check
    VectorXd measured_frequencies;
    double energy_drift = 0.0;
};

/// Evolves sample torus points under each flow and measures the largest
/// distance back to the torus at checkpoints.
InvarianceReport check_invariance(const CommutingSystem& sys, const TorusResult& torus,
                                  const std::vector<FlowSpec>& flows, int n_samples);

struct FrequencyFit {
    VectorXd freq;
    VectorXd stderr;
};

/// Kronecker frequencies of the flow on the torus: integrates, recovers the
/// psi-label of every sample through the chart, and fits the linear drift.
FrequencyFit measure_frequencies(const CommutingSystem& sys, const TorusResult& torus,
                                 const FlowSpec& flow, int n_saves = 256);

}  // namespace tori
