#pragma once

#include <functional>
#include <string>
#include <vector>

#include "quasitori/config.hpp"
#include "quasitori/core.hpp"
#include "quasitori/lssolver.hpp"
#include "quasitori/records.hpp"
#include "quasitori/verify.hpp"

namespace tori {

/// A built model in both frames plus bookkeeping for records.
struct ModelBundle {
    std::string model;
    double m_effective = 0.0;
    CommutingSystem original;
    CommutingSystem normalized;
};

ModelBundle build_model(const RunConfig& c);

JsonValue config_echo(const RunConfig& c);

/// Flow coefficient vectors (in the normalized frame) of the original
/// Hamiltonians H^(1..r).
std::vector<VectorXd> original_hamiltonian_flows(const ModelBundle& bundle);

/// K^(1)-flow coefficients in the normalized frame plus the closed-form
/// frequency prediction for the model (empty for custom tables).
struct FrequencyTarget {
    VectorXd flow_coefficients;
    VectorXd predicted;
    bool available = false;
};
FrequencyTarget frequency_target(const ModelBundle& bundle, const VectorXd& eps_original);

/// Deterministic index-parallel map; worker errors rethrow after join.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

int cmd_check_resonance(const RunConfig& c);
int cmd_solve(const RunConfig& c);
int cmd_verify(const RunConfig& c, const std::string& record_path);
int cmd_sweep(const RunConfig& c);

}  // namespace tori
