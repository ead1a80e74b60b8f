#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "quasitori/core.hpp"

namespace tori {

/// Finite prefix of a continued-fraction expansion x = [a0; a1, a2, ...].
struct ContinuedFraction {
    std::int64_t a0 = 0;
    std::vector<std::int64_t> partial_quotients;
    /// Set when convergent denominators outgrew the reliable double mantissa
    /// range before n_terms quotients were produced.
    bool precision_exhausted = false;

    /// Convergents p_k/q_k via p_k = a_k p_{k-1} + p_{k-2} (index 0 = a0/1).
    std::vector<std::pair<std::int64_t, std::int64_t>> convergents() const;
    double value() const;
};

/// First n_terms partial quotients of x > 0 by the floor/reciprocal recurrence.
/// Terminates early at rational inputs or at the precision flag.
ContinuedFraction cf_expand(double x, int n_terms);

/// Value of [a0; a1..aQ, t, t, ...]-style numbers: the prefix is taken from
/// `prefix`, the infinite tail repeats `pattern` (entries >= 1).
double cf_with_periodic_tail(const ContinuedFraction& prefix, int keep_quotients,
                             const std::vector<int>& pattern);

struct DiophantineResult {
    bool accepted = false;
    double margin = 0.0;  // min over the scanned window of [j]^tau * |k sum(n) - sum (n+eps) Omega_j|
    int worst_slot = -1;  // tail slot attaining the minimum
    int worst_k = 0;
    int j_scanned = 0;    // weight index range actually covered
    int k_scanned = 0;
};

/// Truncated check of the nonresonance condition: accepted iff
///   |k sum_l n_l - sum_l (n_l + eps_l) Omega_j^(l)| >= gamma / [j]^tau
/// for every tail slot and every integer |k| <= k_max. The scan certifies a
/// finite window only; margins for affine-in-j tails grow linearly outside it.
DiophantineResult diophantine_check(const CommutingSystem& sys, const VectorXd& eps, double gamma,
                                    double tau, int k_max);

/// Brute-force variant used as the test oracle (explicit (slot, k) loop).
DiophantineResult diophantine_scan_bruteforce(const CommutingSystem& sys, const VectorXd& eps,
                                              double gamma, double tau, int k_max);

/// NLW mass with nu(m) = 1/sqrt(1+m) of constant type: keeps the first Q
/// partial quotients of nu(target_m) and replaces the rest by the periodic
/// `tail_pattern` (default all ones). Fails when the result leaves
/// [target_m - delta, target_m + delta].
double construct_mass(double target_m, double delta, int keep_quotients,
                      const std::vector<int>& tail_pattern = {1});

struct EpsilonCandidate {
    VectorXd eps;
    double gamma_eff = 0.0;      // achieved weighted margin
    int verified_j_max = 0;
    int verified_k_max = 0;
};

struct EpsilonSample {
    std::vector<EpsilonCandidate> accepted;
    int total = 0;
    double rejection_fraction = 0.0;
};

/// Uniform samples in the ball B_radius filtered through diophantine_check.
/// When fixed_eps_minus is set (r = 2 only), samples run along the line
/// eps = (e+ + e-, e+ - e-) with e- fixed — the resonant-torus mode.
EpsilonSample sample_nonresonant_eps(const CommutingSystem& sys, double radius, int count,
                                     double gamma, double tau, int k_max, std::uint64_t seed,
                                     std::optional<double> fixed_eps_minus = std::nullopt);

}  // namespace tori
