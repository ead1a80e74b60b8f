#pragma once

#include <memory>

#include "quasitori/core.hpp"

namespace tori {

/// Nonlinear wave equation u_tt - u_xx + m u = -u^3 on the 2*pi circle,
/// excited modes fixed to the physical pair {+1, -1}.
struct NlwConfig {
    double m = 1.0;        // mass, in (0, 4/3); constant-type masses come from construct_mass
    double mu = 1e-3;
    int j_phys_max = 16;   // physical Galerkin cutoff (|j| <= j_phys_max)
    int k_max = 32;
    double s = 1.0;
    double sigma = 0.0;
    double tau = 1.0;
    double gamma = 0.01;

    void validate() const;
};

/// Two-polarization beam u_tt + u_xxxx + m u = -u (u^2+v^2) (and v alike),
/// excited modes fixed to polarization 1, j = 1, 2, 3.
struct BeamConfig {
    double m = 1.0;        // mass, in (0, 4)
    double mu = 1e-3;
    int j_phys_max = 8;
    int k_max = 32;
    double s = 1.0;
    double sigma = 0.0;
    double tau = 2.0;
    double gamma = 0.005;

    void validate() const;
};

/// r = 2 system of Eq.-(e.4) form with n = (1, 1): H^(1,2) = (K1 ± w1 K2)/(2 w1),
/// tail frequencies (w_j ± j w1)/(2 w1) over physical modes (0, ±2, ±3, ...).
CommutingSystem build_nlw(const NlwConfig& cfg);

/// r = 3 system with n = e1 built from the energy, momentum and polarization
/// generators; both polarizations enter the tail.
CommutingSystem build_beam(const BeamConfig& cfg);

/// omega_j for the two dispersion laws.
double nlw_omega(int j, double m);
double beam_omega(int j, double m);

/// Closed-form averaged nonlinearity c (a1^2 + 4 a1 a_{-1} + a_{-1}^2) of the
/// NLW model, in the original-frame actions; c = nlw_averaged_constant(m).
double nlw_averaged_form(double a1, double a_neg1, double m);
double nlw_averaged_constant(double m);

/// Beam analog: (1/(8 pi D)) [sum (a_j/w_j)^2 + 4 sum_{j<k} (a_j/w_j)(a_k/w_k)].
double beam_averaged_form(const Eigen::Vector3d& a, double m);

/// Flow frequencies of K^(1) on the torus labeled by eps (original frame).
Eigen::Vector2d torus_frequencies_nlw(const Eigen::Vector2d& eps, double m);
Eigen::Vector3d torus_frequencies_beam(const Eigen::Vector3d& eps, double m);

/// Rows map (K^(1), ...) to (H^(1), ...): H = C K. Used by tests and by the
/// frequency-measurement helpers to express K-flows in system Hamiltonians.
Eigen::Matrix2d nlw_K_to_H(double m);
Eigen::Matrix3d beam_K_to_H(double m);

/// Physical mode index per tail slot (signed), e.g. (0, 2, -2, 3, -3, ...).
std::vector<int> nlw_tail_modes(int j_phys_max);
/// Beam tail slots as (polarization, signed mode) pairs.
std::vector<std::pair<int, int>> beam_tail_modes(int j_phys_max);

/// Collocation chain of the NLW model, exposed for tests: maps between phase
/// points, flat mode pairs, field coefficients and grid samples.
class NlwChain {
public:
    NlwChain(double m, int j_phys_max);

    int n_flat() const { return 2 * J_ + 1; }  // modes -J..J
    int flat_index(int j) const { return j + J_; }
    int grid_size() const { return n_x_; }

    /// Excited action-angle + tail slots -> flat (p, q) over physical modes.
    void flat_from_phase(const PhasePoint& z, VectorXd& p, VectorXd& q) const;
    PhasePoint phase_from_flat(const VectorXd& p, const VectorXd& q) const;

    /// (p, q) -> (U_j, u_j) Fourier pairs of the displacement field.
    void field_pairs_from_flat(const VectorXd& p, const VectorXd& q, VectorXd& U,
                               VectorXd& u) const;
    void flat_from_field_pairs(const VectorXd& U, const VectorXd& u, VectorXd& p,
                               VectorXd& q) const;

    /// Grid samples of u (basis-weighted synthesis of u_j / sqrt(omega_j)).
    VectorXd field_samples(const VectorXd& u_pairs) const;
    /// Inverse of field_samples (exact for band-limited fields).
    VectorXd field_pairs_from_samples(const VectorXd& samples) const;

    double F_base_value(const PhasePoint& z) const;
    PhasePoint F_base_grad(const PhasePoint& z) const;
    /// Exact kick of the F_base flow: u frozen, U_j -= strength * dF/du_j.
    void kick(VectorXd& p, VectorXd& q, double strength) const;

    double omega(int j) const { return omega_[std::abs(j)]; }
    const std::vector<int>& tail_modes() const { return tail_; }

private:
    int J_;
    int n_x_;
    double m_;
    std::vector<double> omega_;
    std::vector<int> tail_;
};

/// Same idea for the beam; flat layout is (pol-1 pairs -J..J, pol-2 pairs -J..J).
class BeamChain {
public:
    BeamChain(double m, int j_phys_max);

    int n_flat() const { return 2 * (2 * J_ + 1); }
    int flat_index(int pol, int j) const { return (pol - 1) * (2 * J_ + 1) + j + J_; }
    int grid_size() const { return n_x_; }

    void flat_from_phase(const PhasePoint& z, VectorXd& p, VectorXd& q) const;
    PhasePoint phase_from_flat(const VectorXd& p, const VectorXd& q) const;

    double F_base_value(const PhasePoint& z) const;
    PhasePoint F_base_grad(const PhasePoint& z) const;
    void kick(VectorXd& p, VectorXd& q, double strength) const;

    /// u and v samples on the collocation grid, for tests.
    void field_samples(const PhasePoint& z, VectorXd& u, VectorXd& v) const;

    double omega(int j) const { return omega_[std::abs(j)]; }
    const std::vector<std::pair<int, int>>& tail_modes() const { return tail_; }

private:
    void fields_from_flat(const VectorXd& p, const VectorXd& q, VectorXd& U, VectorXd& u,
                          VectorXd& V, VectorXd& v) const;
    void flat_from_fields(const VectorXd& U, const VectorXd& u, const VectorXd& V,
                          const VectorXd& v, VectorXd& p, VectorXd& q) const;

    int J_;
    int n_x_;
    double m_;
    std::vector<double> omega_;
    std::vector<std::pair<int, int>> tail_;

    friend CommutingSystem build_beam(const BeamConfig&);
};

}  // namespace tori
