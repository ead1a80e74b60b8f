#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quasitori/errors.hpp"

namespace tori {

/// Flat sectioned config text: [section] headers, key = value lines, '#'
/// comments. Unknown keys or sections are errors (no silent typo absorption).
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
    std::vector<int> get_ints(const std::string& section, const std::string& key) const;

    /// Throws ConfigError listing any key never read by a getter.
    void reject_unknown() const;

private:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool consumed = false;
    };
    std::string origin_;
    std::map<std::string, std::map<std::string, Entry>> sections_;
    const Entry* find(const std::string& section, const std::string& key) const;
};

/// Effective run parameters; every field has a default and is echoed into
/// outputs so records are self-describing.
struct RunConfig {
    // model
    std::string model = "nlw";  // nlw | beam | custom-table
    double m = 1.0;
    double mu = 1e-3;
    bool construct_mass = false;
    double mass_target = 1.0;
    double mass_delta = 0.05;
    int mass_quotients = 8;
    std::string mass_tail = "ones";  // ones | one-two
    // custom-table model
    int custom_r = 1;
    std::vector<int> custom_n = {1};
    int custom_j_min = 2;
    int custom_j_max = 64;
    std::vector<std::pair<double, double>> custom_omega_affine = {{1.0, 0.5}};

    // truncation
    int j_phys_max = 16;
    int k_max = 32;
    double s = 1.0;
    double sigma = 0.0;
    double tau = 1.0;
    double gamma = 0.01;

    // resonance
    int scan_k_max = 400;
    double sample_radius = 1e-3;
    int sample_count = 0;
    std::optional<double> fixed_eps_minus;
    std::vector<double> eps_explicit;      // empty = unset
    std::vector<double> eps_over_mu;       // empty = unset

    // solver
    int psi_grid = 8;
    double tol = 1e-11;
    double beta_tol = 1e-8;
    int max_iter = 64;

    // verify
    double t_final = 10.0;
    int steps_per_period = 8000;
    int steps_per_unit = 1500;
    int integrator_order = 4;
    int n_samples = 8;
    double drift_budget = 1e-8;
    double budget_period_residual = 1e-6;
    double budget_beta = 1e-8;
    double budget_invariance_factor = 50.0;
    bool do_measure_frequencies = true;

    // sweep
    std::vector<double> mu_values = {1e-3, 5e-4, 2.5e-4};

    // run
    std::uint64_t seed = 12345;
    int threads = 1;
    std::string out_dir = "out";

    static RunConfig from_file(const std::string& path);
    static RunConfig from_config(const ConfigFile& cf);
};

}  // namespace tori
