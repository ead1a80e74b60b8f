#include "quasitori/runner.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "quasitori/models.hpp"
#include "quasitori/resonance.hpp"

namespace tori {

namespace {

CommutingSystem build_custom_table(const RunConfig& c) {
    CommutingSystem sys;
    sys.trunc.r = c.custom_r;
    sys.trunc.j_min = c.custom_j_min;
    sys.trunc.j_max = c.custom_j_max;
    sys.trunc.k_max = c.k_max;
    sys.trunc.s = c.s;
    sys.trunc.sigma = c.sigma;
    sys.trunc.tau = c.tau;
    sys.trunc.gamma = c.gamma;
    sys.mu = c.mu;
    sys.smoothing_d = static_cast<int>(std::ceil(std::max(0.0, c.tau)));
    sys.label = "custom-table";
    if (static_cast<int>(c.custom_n.size()) != c.custom_r)
        throw ConfigError("custom-table: n must have r entries");
    sys.n_vec.resize(c.custom_r);
    for (int l = 0; l < c.custom_r; ++l) sys.n_vec[l] = c.custom_n[l];
    if (static_cast<int>(c.custom_omega_affine.size()) != c.custom_r)
        throw ConfigError("custom-table: omega_affine needs one row per Hamiltonian");
    const int n_tail = sys.trunc.n_tail();
    sys.Omega.resize(c.custom_r, n_tail);
    sys.weight_index.resize(n_tail);
    for (int i = 0; i < n_tail; ++i) {
        const double j = static_cast<double>(c.custom_j_min + i);
        sys.weight_index[i] = j;
        for (int l = 0; l < c.custom_r; ++l)
            sys.Omega(l, i) = c.custom_omega_affine[l].first * j + c.custom_omega_affine[l].second;
    }
    sys.frame_M = MatrixXd::Identity(c.custom_r, c.custom_r);
    sys.validate();
    return sys;
}

std::vector<int> mass_tail_pattern(const RunConfig& c) {
    if (c.mass_tail == "one-two") return {1, 2};
    return {1};
}

}  // namespace

ModelBundle build_model(const RunConfig& c) {
    ModelBundle bundle;
    bundle.model = c.model;
    if (c.model == "nlw") {
        NlwConfig cfg;
        cfg.mu = c.mu;
        cfg.j_phys_max = c.j_phys_max;
        cfg.k_max = c.k_max;
        cfg.s = c.s;
        cfg.sigma = c.sigma;
        cfg.tau = c.tau;
        cfg.gamma = c.gamma;
        cfg.m = c.construct_mass
                    ? construct_mass(c.mass_target, c.mass_delta, c.mass_quotients,
                                     mass_tail_pattern(c))
                    : c.m;
        bundle.m_effective = cfg.m;
        bundle.original = build_nlw(cfg);
    } else if (c.model == "beam") {
        if (c.construct_mass)
            throw ConfigError("construct_mass applies to the nlw model only");
        BeamConfig cfg;
        cfg.m = c.m;
        cfg.mu = c.mu;
        cfg.j_phys_max = c.j_phys_max;
        cfg.k_max = c.k_max;
        cfg.s = c.s;
        cfg.sigma = c.sigma;
        cfg.tau = c.tau;
        cfg.gamma = c.gamma;
        bundle.m_effective = cfg.m;
        bundle.original = build_beam(cfg);
    } else {
        bundle.original = build_custom_table(c);
        bundle.m_effective = c.m;
    }
    bundle.normalized = normalize_n(bundle.original);
    return bundle;
}

JsonValue config_echo(const RunConfig& c) {
    JsonValue e = JsonValue::object();
    JsonValue model = JsonValue::object();
    model.set("type", JsonValue::str(c.model))
        .set("m", JsonValue::number(c.m))
        .set("mu", JsonValue::number(c.mu))
        .set("construct_mass", JsonValue::boolean(c.construct_mass))
        .set("mass_target", JsonValue::number(c.mass_target))
        .set("mass_delta", JsonValue::number(c.mass_delta))
        .set("mass_quotients", JsonValue::integer(c.mass_quotients))
        .set("mass_tail", JsonValue::str(c.mass_tail));
    e.set("model", std::move(model));
    JsonValue tr = JsonValue::object();
    tr.set("j_phys_max", JsonValue::integer(c.j_phys_max))
        .set("k_max", JsonValue::integer(c.k_max))
        .set("s", JsonValue::number(c.s))
        .set("sigma", JsonValue::number(c.sigma))
        .set("tau", JsonValue::number(c.tau))
        .set("gamma", JsonValue::number(c.gamma));
    e.set("truncation", std::move(tr));
    JsonValue rs = JsonValue::object();
    rs.set("scan_k_max", JsonValue::integer(c.scan_k_max))
        .set("sample_radius", JsonValue::number(c.sample_radius))
        .set("sample_count", JsonValue::integer(c.sample_count));
    if (c.fixed_eps_minus) rs.set("fixed_eps_minus", JsonValue::number(*c.fixed_eps_minus));
    if (!c.eps_explicit.empty())
        rs.set("eps", JsonValue::vec(Eigen::Map<const VectorXd>(c.eps_explicit.data(),
                                                                c.eps_explicit.size())));
    if (!c.eps_over_mu.empty())
        rs.set("eps_over_mu", JsonValue::vec(Eigen::Map<const VectorXd>(c.eps_over_mu.data(),
                                                                        c.eps_over_mu.size())));
    e.set("resonance", std::move(rs));
    JsonValue so = JsonValue::object();
    so.set("psi_grid", JsonValue::integer(c.psi_grid))
        .set("tol", JsonValue::number(c.tol))
        .set("beta_tol", JsonValue::number(c.beta_tol))
        .set("max_iter", JsonValue::integer(c.max_iter));
    e.set("solver", std::move(so));
    JsonValue ve = JsonValue::object();
    ve.set("t_final", JsonValue::number(c.t_final))
        .set("steps_per_period", JsonValue::integer(c.steps_per_period))
        .set("steps_per_unit", JsonValue::integer(c.steps_per_unit))
        .set("integrator_order", JsonValue::integer(c.integrator_order))
        .set("n_samples", JsonValue::integer(c.n_samples))
        .set("drift_budget", JsonValue::number(c.drift_budget))
        .set("budget_period_residual", JsonValue::number(c.budget_period_residual))
        .set("budget_beta", JsonValue::number(c.budget_beta))
        .set("budget_invariance_factor", JsonValue::number(c.budget_invariance_factor))
        .set("measure_frequencies", JsonValue::boolean(c.do_measure_frequencies));
    e.set("verify", std::move(ve));
    JsonValue run = JsonValue::object();
    run.set("seed", JsonValue::integer(static_cast<long long>(c.seed)))
        .set("threads", JsonValue::integer(c.threads))
        .set("out", JsonValue::str(c.out_dir));
    e.set("run", std::move(run));
    return e;
}

std::vector<VectorXd> original_hamiltonian_flows(const ModelBundle& bundle) {
    const MatrixXd M = bundle.normalized.frame() * bundle.original.frame().inverse();
    const MatrixXd Minv = M.inverse();  // H = Minv * H_hat
    std::vector<VectorXd> flows;
    for (int l = 0; l < bundle.original.r(); ++l)
        flows.push_back(Minv.row(l).transpose());
    return flows;
}

FrequencyTarget frequency_target(const ModelBundle& bundle, const VectorXd& eps_original) {
    FrequencyTarget t;
    const int r = bundle.original.r();
    if (bundle.model == "nlw") {
        const double w1 = nlw_omega(1, bundle.m_effective);
        t.flow_coefficients = VectorXd::Zero(r);
        t.flow_coefficients[0] = w1;  // K1 = w1 * Hhat1
        t.predicted = torus_frequencies_nlw(eps_original, bundle.m_effective);
        t.available = true;
    } else if (bundle.model == "beam") {
        const Eigen::Matrix3d C = beam_K_to_H(bundle.m_effective);
        const Eigen::Matrix3d Cinv = C.inverse();  // K = Cinv * H, already n = e1
        t.flow_coefficients = Cinv.row(0).transpose();
        t.predicted = torus_frequencies_beam(eps_original, bundle.m_effective);
        t.available = true;
    }
    return t;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, threads);
    if (threads == 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

struct Candidate {
    VectorXd eps;       // original frame
    VectorXd eps_hat;   // normalized frame
    double margin = 0.0;
    bool accepted = false;
    DiophantineResult check;
};

Candidate check_candidate(const ModelBundle& bundle, const RunConfig& c, const VectorXd& eps) {
    Candidate cand;
    cand.eps = eps;
    cand.eps_hat = eps_to_normalized(bundle.original, eps);
    cand.check = diophantine_check(bundle.normalized, cand.eps_hat, c.gamma, c.tau, c.scan_k_max);
    cand.margin = cand.check.margin;
    cand.accepted = cand.check.accepted;
    return cand;
}

/// Samples original-frame eps in the ball (or along the fixed eps_minus line)
/// and certifies the normalized system.
std::vector<Candidate> sample_candidates(const ModelBundle& bundle, const RunConfig& c,
                                         int count, int* rejected_out) {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const int r = bundle.original.r();
    std::vector<Candidate> out;
    int rejected = 0;
    for (int i = 0; i < count; ++i) {
        VectorXd eps(r);
        if (c.fixed_eps_minus) {
            if (r != 2) throw ConfigError("fixed_eps_minus requires an r = 2 model");
            const double ep = c.sample_radius * unit(rng);
            eps[0] = ep + *c.fixed_eps_minus;
            eps[1] = ep - *c.fixed_eps_minus;
        } else {
            do {
                for (int l = 0; l < r; ++l) eps[l] = unit(rng);
            } while (eps.squaredNorm() > 1.0);
            eps *= c.sample_radius;
        }
        Candidate cand = check_candidate(bundle, c, eps);
        if (cand.accepted)
            out.push_back(std::move(cand));
        else
            ++rejected;
    }
    if (rejected_out) *rejected_out = rejected;
    return out;
}

JsonValue candidate_record(const Candidate& cand, const RunConfig& c) {
    JsonValue rec = JsonValue::object();
    rec.set("type", JsonValue::str("candidate"))
        .set("eps", JsonValue::vec(cand.eps))
        .set("eps_normalized", JsonValue::vec(cand.eps_hat))
        .set("accepted", JsonValue::boolean(cand.accepted))
        .set("margin", JsonValue::number(cand.margin))
        .set("worst_slot", JsonValue::integer(cand.check.worst_slot))
        .set("worst_k", JsonValue::integer(cand.check.worst_k))
        .set("scan_j_max", JsonValue::integer(cand.check.j_scanned))
        .set("scan_k_max", JsonValue::integer(c.scan_k_max))
        .set("gamma", JsonValue::number(c.gamma))
        .set("tau", JsonValue::number(c.tau));
    return rec;
}

std::vector<Candidate> gather_candidates(const ModelBundle& bundle, const RunConfig& c) {
    std::vector<Candidate> list;
    if (!c.eps_explicit.empty()) {
        if (static_cast<int>(c.eps_explicit.size()) != bundle.original.r())
            throw ConfigError("resonance.eps must have r entries");
        list.push_back(check_candidate(
            bundle, c, Eigen::Map<const VectorXd>(c.eps_explicit.data(), c.eps_explicit.size())));
    } else if (!c.eps_over_mu.empty()) {
        if (static_cast<int>(c.eps_over_mu.size()) != bundle.original.r())
            throw ConfigError("resonance.eps_over_mu must have r entries");
        const VectorXd rho = Eigen::Map<const VectorXd>(c.eps_over_mu.data(), c.eps_over_mu.size());
        list.push_back(check_candidate(bundle, c, c.mu * rho));
    } else {
        auto sampled = sample_candidates(bundle, c, std::max(1, c.sample_count), nullptr);
        if (!sampled.empty()) list.push_back(sampled.front());
    }
    return list;
}

JsonValue torus_record(const ModelBundle& bundle, const RunConfig& c, const Candidate& cand,
                       const TorusResult& torus, const FrequencyTarget& freq) {
    JsonValue rec = JsonValue::object();
    rec.set("type", JsonValue::str("torus"))
        .set("status", JsonValue::str("ok"))
        .set("model", JsonValue::str(bundle.model))
        .set("m_effective", JsonValue::number(bundle.m_effective))
        .set("mu", JsonValue::number(torus.mu))
        .set("eps", JsonValue::vec(cand.eps))
        .set("eps_normalized", JsonValue::vec(cand.eps_hat))
        .set("margin", JsonValue::number(cand.margin))
        .set("a_star", JsonValue::vec(torus.a_star))
        .set("psi_grid", JsonValue::integer(torus.psi_grid))
        .set("beta_residual", JsonValue::number(torus.beta_residual))
        .set("range_residual", JsonValue::number(torus.range_residual))
        .set("kernel_residual", JsonValue::number(torus.kernel_residual))
        .set("distance_to_reference", JsonValue::number(torus.distance_to_reference))
        .set("loop_bound_constant", JsonValue::number(torus.loop_bound_constant));
    if (freq.available) rec.set("predicted_frequencies", JsonValue::vec(freq.predicted));
    JsonValue nodes = JsonValue::array();
    for (int node = 0; node < torus.grid_size(); ++node) {
        const PhasePoint& z0 = torus.z0[node];
        const VectorXd a_node = torus.a_star + torus.mu * torus.alpha[node];
        JsonValue nv = JsonValue::object();
        nv.set("psi", JsonValue::vec(torus.psi[node]))
            .set("alpha", JsonValue::vec(torus.alpha[node]))
            .set("beta", JsonValue::vec(torus.beta[node]))
            .set("dI0", JsonValue::vec(z0.I - a_node))
            .set("theta0", JsonValue::vec(z0.phi - torus.psi[node]))
            .set("p0", JsonValue::vec(z0.tail.p))
            .set("q0", JsonValue::vec(z0.tail.q));
        nodes.push(std::move(nv));
    }
    rec.set("per_psi", std::move(nodes));
    rec.set("seed", JsonValue::integer(static_cast<long long>(c.seed)));
    rec.set("config", config_echo(c));
    return rec;
}

}  // namespace

int cmd_check_resonance(const RunConfig& c) {
    const ModelBundle bundle = build_model(c);
    RecordWriter out(c.out_dir + "/resonance.jsonl");
    JsonValue header = JsonValue::object();
    header.set("type", JsonValue::str("config"))
        .set("command", JsonValue::str("check-resonance"))
        .set("m_effective", JsonValue::number(bundle.m_effective))
        .set("config", config_echo(c));
    out.write_line(header.dump());
    if (c.construct_mass) {
        JsonValue mass = JsonValue::object();
        mass.set("type", JsonValue::str("mass"))
            .set("target", JsonValue::number(c.mass_target))
            .set("m", JsonValue::number(bundle.m_effective))
            .set("nu", JsonValue::number(1.0 / std::sqrt(1.0 + bundle.m_effective)));
        out.write_line(mass.dump());
    }

    int accepted = 0, total = 0;
    if (!c.eps_explicit.empty()) {
        const Candidate cand = check_candidate(
            bundle, c, Eigen::Map<const VectorXd>(c.eps_explicit.data(), c.eps_explicit.size()));
        out.write_line(candidate_record(cand, c).dump());
        ++total;
        accepted += cand.accepted ? 1 : 0;
    }
    if (c.sample_count > 0) {
        int rejected = 0;
        const auto cands = sample_candidates(bundle, c, c.sample_count, &rejected);
        for (const Candidate& cand : cands) out.write_line(candidate_record(cand, c).dump());
        total += c.sample_count;
        accepted += static_cast<int>(cands.size());
    }
    JsonValue summary = JsonValue::object();
    summary.set("type", JsonValue::str("summary"))
        .set("total", JsonValue::integer(total))
        .set("accepted", JsonValue::integer(accepted))
        .set("rejection_fraction",
             JsonValue::number(total > 0 ? 1.0 - static_cast<double>(accepted) / total : 0.0));
    out.write_line(summary.dump());
    return 0;
}

int cmd_solve(const RunConfig& c) {
    const ModelBundle bundle = build_model(c);
    const std::vector<Candidate> candidates = gather_candidates(bundle, c);
    RecordWriter out(c.out_dir + "/torus.jsonl");

    std::vector<std::string> lines(candidates.size());
    std::vector<std::vector<double>> csv_rows(candidates.size());
    std::vector<int> status(candidates.size(), 0);
    parallel_for(static_cast<int>(candidates.size()), c.threads, [&](int i) {
        const Candidate& cand = candidates[i];
        if (!cand.accepted) {
            JsonValue rec = JsonValue::object();
            rec.set("type", JsonValue::str("torus"))
                .set("status", JsonValue::str("rejected_resonance"))
                .set("eps", JsonValue::vec(cand.eps))
                .set("margin", JsonValue::number(cand.margin))
                .set("config", config_echo(c));
            lines[i] = rec.dump();
            status[i] = 1;
            return;
        }
        try {
            const TorusResult torus =
                assemble_torus(bundle.normalized, cand.eps_hat, c.psi_grid, c.tol, c.beta_tol);
            const FrequencyTarget freq = frequency_target(bundle, cand.eps);
            lines[i] = torus_record(bundle, c, cand, torus, freq).dump();
            csv_rows[i] = {torus.mu,
                           cand.eps.lpNorm<Eigen::Infinity>(),
                           cand.margin,
                           torus.beta_residual,
                           torus.range_residual,
                           torus.distance_to_reference,
                           torus.loop_bound_constant};
        } catch (const std::exception& err) {
            JsonValue rec = JsonValue::object();
            rec.set("type", JsonValue::str("torus"))
                .set("status", JsonValue::str("error"))
                .set("error", JsonValue::str(err.what()))
                .set("eps", JsonValue::vec(cand.eps))
                .set("config", config_echo(c));
            lines[i] = rec.dump();
            status[i] = 1;
        }
    });
    for (const std::string& line : lines) out.write_line(line);
    std::vector<std::vector<double>> rows;
    for (auto& row : csv_rows)
        if (!row.empty()) rows.push_back(row);
    write_csv(c.out_dir + "/torus_summary.csv",
              {"mu", "eps_inf", "margin", "beta_residual", "range_residual",
               "distance_to_reference", "loop_bound_constant"},
              rows);
    int rc = candidates.empty() ? 1 : 0;
    for (int s : status) rc = rc != 0 ? rc : s;
    return rc;
}

namespace {

TorusResult torus_from_record(const nlohmann::json& rec, const CommutingSystem& sys) {
    TorusResult torus;
    torus.mu = rec.at("mu").get<double>();
    const auto eps = rec.at("eps_normalized").get<std::vector<double>>();
    torus.eps = Eigen::Map<const VectorXd>(eps.data(), eps.size());
    const auto astar = rec.at("a_star").get<std::vector<double>>();
    torus.a_star = Eigen::Map<const VectorXd>(astar.data(), astar.size());
    torus.psi_grid = rec.at("psi_grid").get<int>();
    torus.beta_residual = rec.at("beta_residual").get<double>();
    torus.range_residual = rec.at("range_residual").get<double>();
    const int r = sys.r();
    for (const auto& nv : rec.at("per_psi")) {
        auto getv = [&](const char* key) {
            const auto v = nv.at(key).get<std::vector<double>>();
            return VectorXd(Eigen::Map<const VectorXd>(v.data(), v.size()));
        };
        const VectorXd psi = getv("psi");
        const VectorXd alpha = getv("alpha");
        const VectorXd beta = getv("beta");
        const VectorXd dI0 = getv("dI0");
        const VectorXd theta0 = getv("theta0");
        const VectorXd p0 = getv("p0");
        const VectorXd q0 = getv("q0");
        PhasePoint z0 = PhasePoint::zero(r, sys.n_tail());
        z0.I = torus.a_star + torus.mu * alpha + dI0;
        z0.phi = psi + theta0;
        z0.tail.p = p0;
        z0.tail.q = q0;
        torus.psi.push_back(psi);
        torus.alpha.push_back(alpha);
        torus.beta.push_back(beta);
        torus.z0.push_back(z0);
    }
    return torus;
}

RunConfig config_from_echo(const nlohmann::json& echo, const RunConfig& fallback) {
    RunConfig c = fallback;
    const auto& model = echo.at("model");
    c.model = model.at("type").get<std::string>();
    c.m = model.at("m").get<double>();
    c.mu = model.at("mu").get<double>();
    c.construct_mass = model.at("construct_mass").get<bool>();
    c.mass_target = model.at("mass_target").get<double>();
    c.mass_delta = model.at("mass_delta").get<double>();
    c.mass_quotients = model.at("mass_quotients").get<int>();
    c.mass_tail = model.at("mass_tail").get<std::string>();
    const auto& tr = echo.at("truncation");
    c.j_phys_max = tr.at("j_phys_max").get<int>();
    c.k_max = tr.at("k_max").get<int>();
    c.s = tr.at("s").get<double>();
    c.sigma = tr.at("sigma").get<double>();
    c.tau = tr.at("tau").get<double>();
    c.gamma = tr.at("gamma").get<double>();
    return c;
}

}  // namespace

int cmd_verify(const RunConfig& c, const std::string& record_path) {
    std::ifstream in(record_path);
    if (!in) throw ConfigError("cannot open torus record: " + record_path);
    RecordWriter out(c.out_dir + "/invariance.jsonl");

    int rc = 0;
    bool any = false;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const nlohmann::json rec = nlohmann::json::parse(line);
        if (rec.value("type", "") != "torus") continue;
        if (rec.value("status", "") != "ok") continue;
        any = true;

        RunConfig rc_cfg = config_from_echo(rec.at("config"), c);
        rc_cfg.m = rec.at("m_effective").get<double>();
        rc_cfg.construct_mass = false;  // m_effective already resolved
        rc_cfg.mu = rec.at("mu").get<double>();
        const ModelBundle bundle = build_model(rc_cfg);
        const CommutingSystem& sys = bundle.normalized;
        const TorusResult torus = torus_from_record(rec, sys);

        const PeriodicOrbitCheck per = check_periodic_orbit(
            sys, torus.eps, torus, 0, c.steps_per_period, c.integrator_order);

        std::vector<FlowSpec> flows;
        for (const VectorXd& coef : original_hamiltonian_flows(bundle)) {
            FlowSpec flow;
            flow.coefficients = coef;
            flow.t_final = c.t_final;
            flow.steps = std::max(16, static_cast<int>(std::lround(c.t_final * c.steps_per_unit)));
            flow.integrator_order = c.integrator_order;
            flow.drift_budget = c.drift_budget;
            flows.push_back(flow);
        }
        InvarianceReport report = check_invariance(sys, torus, flows, c.n_samples);
        report.period_residual = per.residual;

        const bool period_ok = per.residual <= c.budget_period_residual;
        const bool beta_ok = torus.beta_residual <= c.budget_beta;
        const bool invariance_ok =
            report.max_distance <= c.budget_invariance_factor * std::max(per.residual, 1e-13);
        bool winding_ok = std::abs(per.winding[0] - 1.0) < 0.25;
        for (int l = 1; l < sys.r(); ++l) winding_ok = winding_ok && std::abs(per.winding[l]) < 0.25;

        JsonValue jrep = JsonValue::object();
        jrep.set("type", JsonValue::str("invariance"))
            .set("mu", JsonValue::number(torus.mu))
            .set("eps", JsonValue::vec(torus.eps))
            .set("period_residual", JsonValue::number(per.residual))
            .set("winding", JsonValue::vec(per.winding))
            .set("max_loop_deviation", JsonValue::number(per.max_loop_deviation))
            .set("max_distance", JsonValue::number(report.max_distance))
            .set("max_nearest_node_distance",
                 JsonValue::number(report.max_nearest_node_distance))
            .set("energy_drift",
                 JsonValue::number(std::max(report.energy_drift, per.energy_drift)))
            .set("beta_residual", JsonValue::number(torus.beta_residual))
            .set("period_ok", JsonValue::boolean(period_ok))
            .set("beta_ok", JsonValue::boolean(beta_ok))
            .set("invariance_ok", JsonValue::boolean(invariance_ok))
            .set("winding_ok", JsonValue::boolean(winding_ok));

        bool freq_ok = true;
        if (c.do_measure_frequencies) {
            const auto eps_vec = rec.at("eps").get<std::vector<double>>();
            const VectorXd eps_orig = Eigen::Map<const VectorXd>(eps_vec.data(), eps_vec.size());
            const FrequencyTarget target = frequency_target(bundle, eps_orig);
            if (target.available) {
                FlowSpec flow;
                flow.coefficients = target.flow_coefficients;
                flow.t_final = c.t_final;
                flow.steps =
                    std::max(16, static_cast<int>(std::lround(c.t_final * c.steps_per_unit)));
                flow.integrator_order = c.integrator_order;
                flow.drift_budget = c.drift_budget;
                const FrequencyFit fit = measure_frequencies(sys, torus, flow);
                report.measured_frequencies = fit.freq;
                const double rel =
                    (fit.freq - target.predicted).norm() / std::max(target.predicted.norm(), 1e-300);
                freq_ok = rel <= 1e-6;
                jrep.set("measured_frequencies", JsonValue::vec(fit.freq))
                    .set("predicted_frequencies", JsonValue::vec(target.predicted))
                    .set("frequency_rel_error", JsonValue::number(rel))
                    .set("frequency_ok", JsonValue::boolean(freq_ok));
            }
        }
        const bool pass = period_ok && beta_ok && invariance_ok && winding_ok && freq_ok;
        jrep.set("pass", JsonValue::boolean(pass));
        out.write_line(jrep.dump());
        if (!pass) rc = 1;
    }
    if (!any) throw ConfigError("no usable torus record in " + record_path);
    return rc;
}

int cmd_sweep(const RunConfig& c) {
    if (c.eps_over_mu.empty())
        throw ConfigError("sweep requires resonance.eps_over_mu (eps scales with mu)");
    const int n = static_cast<int>(c.mu_values.size());
    std::vector<std::string> lines(n);
    std::vector<std::vector<double>> rows(n);
    std::vector<int> status(n, 0);
    parallel_for(n, c.threads, [&](int i) {
        RunConfig ci = c;
        ci.mu = c.mu_values[i];
        const ModelBundle bundle = build_model(ci);
        const VectorXd rho = Eigen::Map<const VectorXd>(c.eps_over_mu.data(), c.eps_over_mu.size());
        const Candidate cand = check_candidate(bundle, ci, ci.mu * rho);
        if (!cand.accepted) {
            status[i] = 1;
            JsonValue rec = JsonValue::object();
            rec.set("type", JsonValue::str("torus"))
                .set("status", JsonValue::str("rejected_resonance"))
                .set("mu", JsonValue::number(ci.mu))
                .set("eps", JsonValue::vec(cand.eps))
                .set("margin", JsonValue::number(cand.margin))
                .set("config", config_echo(ci));
            lines[i] = rec.dump();
            return;
        }
        const TorusResult torus =
            assemble_torus(bundle.normalized, cand.eps_hat, ci.psi_grid, ci.tol, ci.beta_tol);
        const FrequencyTarget freq = frequency_target(bundle, cand.eps);
        lines[i] = torus_record(bundle, ci, cand, torus, freq).dump();
        rows[i] = {ci.mu,
                   torus.distance_to_reference,
                   torus.loop_bound_constant,
                   torus.beta_residual,
                   torus.range_residual,
                   torus.kernel_residual};
    });
    RecordWriter out(c.out_dir + "/sweep.jsonl");
    for (const auto& line : lines) out.write_line(line);
    std::vector<std::vector<double>> csv;
    for (auto& row : rows)
        if (!row.empty()) csv.push_back(row);
    write_csv(c.out_dir + "/sweep_summary.csv",
              {"mu", "distance_to_reference", "loop_bound_constant", "beta_residual",
               "range_residual", "kernel_residual"},
              csv);
    int rc = 0;
    for (int s : status) rc = rc != 0 ? rc : s;
    return rc;
}

}  // namespace tori
