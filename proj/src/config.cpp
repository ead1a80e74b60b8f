#include "quasitori/config.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

namespace tori {

namespace {
std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}
}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
    ConfigFile cf;
    cf.origin_ = origin;
    std::stringstream ss(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(line_no) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty section name");
            cf.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        if (section.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": key outside a section");
        auto& sec = cf.sections_[section];
        if (sec.count(key))
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                              "'");
        sec[key] = Entry{value, line_no, false};
    }
    return cf;
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section,
                                          const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.consumed = true;
    return &k->second;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    const Entry* e = find(section, key);
    return e ? e->value : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    try {
        size_t pos = 0;
        const double v = std::stod(e->value, &pos);
        if (pos != e->value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ":" + std::to_string(e->line) + ": field '" + section + "." +
                          key + "' is not a number: '" + e->value + "'");
    }
}

int ConfigFile::get_int(const std::string& section, const std::string& key, int fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    try {
        size_t pos = 0;
        const long v = std::stol(e->value, &pos);
        if (pos != e->value.size()) throw std::invalid_argument("trailing");
        return static_cast<int>(v);
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ":" + std::to_string(e->line) + ": field '" + section + "." +
                          key + "' is not an integer: '" + e->value + "'");
    }
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
    const Entry* e = find(section, key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    throw ConfigError(origin_ + ":" + std::to_string(e->line) + ": field '" + section + "." + key +
                      "' is not a boolean: '" + e->value + "'");
}

std::vector<double> ConfigFile::get_doubles(const std::string& section,
                                            const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e || e->value.empty()) return {};
    std::vector<double> out;
    for (const std::string& part : split(e->value, ',')) {
        try {
            out.push_back(std::stod(part));
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ":" + std::to_string(e->line) + ": field '" + section +
                              "." + key + "' has a non-numeric entry: '" + part + "'");
        }
    }
    return out;
}

std::vector<int> ConfigFile::get_ints(const std::string& section, const std::string& key) const {
    const Entry* e = find(section, key);
    if (!e || e->value.empty()) return {};
    std::vector<int> out;
    for (const std::string& part : split(e->value, ',')) {
        try {
            out.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ":" + std::to_string(e->line) + ": field '" + section +
                              "." + key + "' has a non-integer entry: '" + part + "'");
        }
    }
    return out;
}

void ConfigFile::reject_unknown() const {
    for (const auto& [section, entries] : sections_) {
        for (const auto& [key, entry] : entries) {
            if (!entry.consumed)
                throw ConfigError(origin_ + ":" + std::to_string(entry.line) + ": unknown key '" +
                                  section + "." + key + "'");
        }
    }
}

RunConfig RunConfig::from_file(const std::string& path) {
    return from_config(ConfigFile::parse_file(path));
}

RunConfig RunConfig::from_config(const ConfigFile& cf) {
    RunConfig c;
    c.model = cf.get_string("model", "type", c.model);
    if (c.model != "nlw" && c.model != "beam" && c.model != "custom-table")
        throw ConfigError("model.type must be nlw, beam or custom-table");
    c.m = cf.get_double("model", "m", c.m);
    c.mu = cf.get_double("model", "mu", c.mu);
    c.construct_mass = cf.get_bool("model", "construct_mass", c.construct_mass);
    c.mass_target = cf.get_double("model", "mass_target", c.m);
    c.mass_delta = cf.get_double("model", "mass_delta", c.mass_delta);
    c.mass_quotients = cf.get_int("model", "mass_quotients", c.mass_quotients);
    c.mass_tail = cf.get_string("model", "mass_tail", c.mass_tail);
    if (c.mass_tail != "ones" && c.mass_tail != "one-two")
        throw ConfigError("model.mass_tail must be 'ones' or 'one-two'");
    c.custom_r = cf.get_int("model", "r", c.custom_r);
    if (cf.has("model", "n")) c.custom_n = cf.get_ints("model", "n");
    c.custom_j_min = cf.get_int("model", "j_min", c.custom_j_min);
    c.custom_j_max = cf.get_int("model", "j_max", c.custom_j_max);
    if (cf.has("model", "omega_affine")) {
        c.custom_omega_affine.clear();
        const std::string spec = cf.get_string("model", "omega_affine", "");
        std::stringstream ss(spec);
        std::string row;
        while (std::getline(ss, row, ';')) {
            const auto parts = split(row, ',');
            if (parts.size() != 2)
                throw ConfigError("model.omega_affine rows must be 'slope,offset'");
            c.custom_omega_affine.emplace_back(std::stod(parts[0]), std::stod(parts[1]));
        }
    }

    c.j_phys_max = cf.get_int("truncation", "j_phys_max", c.j_phys_max);
    c.k_max = cf.get_int("truncation", "k_max", c.k_max);
    c.s = cf.get_double("truncation", "s", c.s);
    c.sigma = cf.get_double("truncation", "sigma", c.sigma);
    c.tau = cf.get_double("truncation", "tau", c.model == "beam" ? 2.0 : c.tau);
    c.gamma = cf.get_double("truncation", "gamma", c.gamma);

    c.scan_k_max = cf.get_int("resonance", "scan_k_max", c.scan_k_max);
    c.sample_radius = cf.get_double("resonance", "sample_radius", c.sample_radius);
    c.sample_count = cf.get_int("resonance", "sample_count", c.sample_count);
    if (cf.has("resonance", "fixed_eps_minus"))
        c.fixed_eps_minus = cf.get_double("resonance", "fixed_eps_minus", 0.0);
    c.eps_explicit = cf.get_doubles("resonance", "eps");
    c.eps_over_mu = cf.get_doubles("resonance", "eps_over_mu");

    c.psi_grid = cf.get_int("solver", "psi_grid", c.psi_grid);
    c.tol = cf.get_double("solver", "tol", c.tol);
    c.beta_tol = cf.get_double("solver", "beta_tol", c.beta_tol);
    c.max_iter = cf.get_int("solver", "max_iter", c.max_iter);

    c.t_final = cf.get_double("verify", "t_final", c.t_final);
    c.steps_per_period = cf.get_int("verify", "steps_per_period", c.steps_per_period);
    c.steps_per_unit = cf.get_int("verify", "steps_per_unit", c.steps_per_unit);
    c.integrator_order = cf.get_int("verify", "integrator_order", c.integrator_order);
    c.n_samples = cf.get_int("verify", "n_samples", c.n_samples);
    c.drift_budget = cf.get_double("verify", "drift_budget", c.drift_budget);
    c.budget_period_residual =
        cf.get_double("verify", "budget_period_residual", c.budget_period_residual);
    c.budget_beta = cf.get_double("verify", "budget_beta", c.budget_beta);
    c.budget_invariance_factor =
        cf.get_double("verify", "budget_invariance_factor", c.budget_invariance_factor);
    c.do_measure_frequencies =
        cf.get_bool("verify", "measure_frequencies", c.do_measure_frequencies);

    if (cf.has("sweep", "mu_values")) c.mu_values = cf.get_doubles("sweep", "mu_values");

    c.seed = static_cast<std::uint64_t>(cf.get_int("run", "seed", static_cast<int>(c.seed)));
    c.threads = cf.get_int("run", "threads", c.threads);
    c.out_dir = cf.get_string("run", "out", c.out_dir);

    cf.reject_unknown();
    if (!(c.tol > 0.0) || !(c.beta_tol > 0.0) || !(c.gamma > 0.0))
        throw ConfigError("tolerances and gamma must be positive");
    return c;
}

}  // namespace tori
