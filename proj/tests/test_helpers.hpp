#pragma once

#include <random>

#include "quasitori/core.hpp"
#include "quasitori/models.hpp"

namespace tori::testing {

/// r = 2 table system with zero nonlinearity: Omega_j^(1) = j + 1/2,
/// Omega_j^(2) = 2 j, abstract tail j = 3..j_max.
inline CommutingSystem table_system(int j_max = 12, double mu = 0.0) {
    CommutingSystem sys;
    sys.trunc.r = 2;
    sys.trunc.j_min = 3;
    sys.trunc.j_max = j_max;
    sys.trunc.k_max = 8;
    sys.trunc.tau = 0.0;
    sys.trunc.gamma = 0.1;
    sys.mu = mu;
    sys.smoothing_d = 1;
    sys.n_vec = Eigen::VectorXi(2);
    sys.n_vec << 1, 0;
    const int n = sys.trunc.n_tail();
    sys.Omega.resize(2, n);
    sys.weight_index.resize(n);
    for (int i = 0; i < n; ++i) {
        const double j = sys.trunc.j_min + i;
        sys.Omega(0, i) = j + 0.5;
        sys.Omega(1, i) = 2.0 * j;
        sys.weight_index[i] = j;
    }
    sys.frame_M = Eigen::MatrixXd::Identity(2, 2);
    return sys;
}

inline PhasePoint random_point(int r, int n_tail, std::mt19937& rng, double action_lo = 0.5,
                               double action_hi = 1.5, double tail_scale = 0.1) {
    std::uniform_real_distribution<double> act(action_lo, action_hi);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    PhasePoint z = PhasePoint::zero(r, n_tail);
    for (int l = 0; l < r; ++l) {
        z.I[l] = act(rng);
        z.phi[l] = ang(rng);
    }
    for (int j = 0; j < n_tail; ++j) {
        z.tail.p[j] = tail_scale * amp(rng) / (1.0 + j);
        z.tail.q[j] = tail_scale * amp(rng) / (1.0 + j);
    }
    return z;
}

}  // namespace tori::testing
