#include "quasitori/verify.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace tori {

namespace {
double wrap_pi(double d) {
    constexpr double two_pi = 2.0 * M_PI;
    d = std::fmod(d, two_pi);
    if (d > M_PI) d -= two_pi;
    if (d <= -M_PI) d += two_pi;
    return d;
}
}  // namespace

void flat_pairs_from_phase(const CommutingSystem& sys, const PhasePoint& z, VectorXd& p,
                           VectorXd& q) {
    const int r = sys.r();
    const int n = r + sys.n_tail();
    p.resize(n);
    q.resize(n);
    const MatrixXd M = sys.frame();
    const VectorXd I_flat = M.fullPivLu().solve(z.I);
    const VectorXd phi_flat = M.transpose() * z.phi;
    for (int l = 0; l < r; ++l) {
        if (I_flat[l] < 0.0)
            throw ModelError("flat_pairs_from_phase: negative excited action in the flat frame");
        const double amp = std::sqrt(2.0 * I_flat[l]);
        p[l] = amp * std::cos(phi_flat[l]);
        q[l] = amp * std::sin(phi_flat[l]);
    }
    p.tail(sys.n_tail()) = z.tail.p;
    q.tail(sys.n_tail()) = z.tail.q;
}

PhasePoint phase_from_flat_pairs(const CommutingSystem& sys, const VectorXd& p, const VectorXd& q) {
    const int r = sys.r();
    PhasePoint z = PhasePoint::zero(r, sys.n_tail());
    VectorXd I_flat(r), phi_flat(r);
    for (int l = 0; l < r; ++l) {
        I_flat[l] = 0.5 * (p[l] * p[l] + q[l] * q[l]);
        phi_flat[l] = std::atan2(q[l], p[l]);
    }
    const MatrixXd M = sys.frame();
    z.I = M * I_flat;
    z.phi = M.transpose().fullPivLu().solve(phi_flat);
    z.tail.p = p.tail(sys.n_tail());
    z.tail.q = q.tail(sys.n_tail());
    return z;
}

namespace {

struct Splitter {
    VectorXd rate;       // rotation per pair
    double kick_scale;   // strength multiplier per unit time
    const SplitKick* kick;

    void rotate(VectorXd& p, VectorXd& q, double h) const {
        for (int i = 0; i < rate.size(); ++i) {
            const double c = std::cos(rate[i] * h), s = std::sin(rate[i] * h);
            const double pi = p[i], qi = q[i];
            p[i] = c * pi - s * qi;
            q[i] = s * pi + c * qi;
        }
    }
    void strang(VectorXd& p, VectorXd& q, double h) const {
        if (kick && kick->apply && kick_scale != 0.0) {
            kick->apply(p, q, 0.5 * h * kick_scale);
            rotate(p, q, h);
            kick->apply(p, q, 0.5 * h * kick_scale);
        } else {
            rotate(p, q, h);
        }
    }
    void step(VectorXd& p, VectorXd& q, double h, int order) const {
        if (order <= 2) {
            strang(p, q, h);
            return;
        }
        static const double w1 = 1.0 / (2.0 - std::cbrt(2.0));
        static const double w0 = 1.0 - 2.0 * w1;
        strang(p, q, w1 * h);
        strang(p, q, w0 * h);
        strang(p, q, w1 * h);
    }
};

Splitter make_splitter(const CommutingSystem& sys, const VectorXd& alpha) {
    if (alpha.size() != sys.r()) throw ModelError("flow coefficients size mismatch");
    if (sys.has_nonlinearity() && !sys.has_base() && sys.mu != 0.0)
        throw ModelError("integrate_flow requires a model split structure (or zero nonlinearity)");
    Splitter sp;
    sp.rate.resize(sys.r() + sys.n_tail());
    sp.rate.head(sys.r()) = sys.frame().transpose() * alpha;
    sp.rate.tail(sys.n_tail()) = sys.Omega.transpose() * alpha;
    sp.kick_scale = sys.has_base() ? sys.mu * sys.f_coef.dot(alpha) : 0.0;
    sp.kick = &sys.kick;
    return sp;
}

double combined_energy(const CommutingSystem& sys, const VectorXd& alpha, const PhasePoint& z) {
    double e = 0.0;
    for (int l = 0; l < sys.r(); ++l)
        if (alpha[l] != 0.0) e += alpha[l] * hamiltonian_value(sys, l, z);
    return e;
}

}  // namespace

Trajectory integrate_flow(const CommutingSystem& sys, const FlowSpec& spec, const PhasePoint& z0,
                          int n_saves) {
    if (spec.steps < 1) throw ModelError("integrate_flow: steps must be >= 1");
    const Splitter sp = make_splitter(sys, spec.coefficients);
    VectorXd p, q;
    flat_pairs_from_phase(sys, z0, p, q);

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.points.push_back(z0);
    const double e0 = combined_energy(sys, spec.coefficients, z0);

    const int saves = std::max(1, n_saves);
    const int check_every = std::max(1, spec.steps / 64);
    const double h = spec.t_final / spec.steps;
    int next_save = 1;
    for (int i = 1; i <= spec.steps; ++i) {
        sp.step(p, q, h, spec.integrator_order);
        const bool save_now = i * static_cast<long long>(saves) >= next_save * static_cast<long long>(spec.steps);
        const bool check_now = i % check_every == 0 || i == spec.steps;
        if (save_now || check_now) {
            const PhasePoint z = phase_from_flat_pairs(sys, p, q);
            if (check_now) {
                const double drift = std::abs(combined_energy(sys, spec.coefficients, z) - e0);
                traj.energy_drift = std::max(traj.energy_drift, drift);
                if (drift > spec.drift_budget)
                    throw StepRejectionError("integrate_flow: energy drift " +
                                             std::to_string(drift) + " exceeds budget");
            }
            if (save_now) {
                traj.times.push_back(i * h);
                traj.points.push_back(z);
                ++next_save;
            }
        }
    }
    return traj;
}

// ---------------------------------------------------------------------------
// TorusChart

TorusChart::TorusChart(const CommutingSystem& sys, const TorusResult& torus)
    : sys_(&sys), torus_(&torus) {
    r_ = sys.r();
    g_ = torus.psi_grid;
    const int n_tail = sys.n_tail();
    n_fields_ = 2 * r_ + 2 * n_tail;
    const int n_nodes = torus.grid_size();

    // field rows: I (r), theta0 = phi(0)-psi (r), tail p, tail q
    MatrixXd values(n_fields_, n_nodes);
    for (int node = 0; node < n_nodes; ++node) {
        const PhasePoint& z = torus.z0[node];
        for (int l = 0; l < r_; ++l) {
            values(l, node) = z.I[l];
            values(r_ + l, node) = z.phi[l] - torus.psi[node][l];
        }
        for (int j = 0; j < n_tail; ++j) {
            values(2 * r_ + j, node) = z.tail.p[j];
            values(2 * r_ + n_tail + j, node) = z.tail.q[j];
        }
    }

    // r-dimensional DFT over the psi grid (last index fastest, as assembled)
    kvecs_.resize(n_nodes);
    for (int c = 0; c < n_nodes; ++c) {
        VectorXi k(r_);
        int idx = c;
        for (int d = r_ - 1; d >= 0; --d) {
            int b = idx % g_;
            idx /= g_;
            k[d] = b <= g_ / 2 ? b : b - g_;
        }
        kvecs_[c] = k;
    }
    coef_ = MatrixXcd::Zero(n_fields_, n_nodes);
    for (int c = 0; c < n_nodes; ++c) {
        for (int node = 0; node < n_nodes; ++node) {
            double phase = 0.0;
            int idx = node;
            for (int d = r_ - 1; d >= 0; --d) {
                const int i_d = idx % g_;
                idx /= g_;
                phase -= 2.0 * M_PI * kvecs_[c][d] * i_d / g_;
            }
            const Complex e(std::cos(phase), std::sin(phase));
            coef_.col(c) += values.col(node) * e;
        }
    }
    coef_ /= static_cast<double>(n_nodes);
}

VectorXd TorusChart::field_at(const VectorXd& psi) const {
    VectorXcd acc = VectorXcd::Zero(n_fields_);
    for (size_t c = 0; c < kvecs_.size(); ++c) {
        double phase = 0.0;
        for (int d = 0; d < r_; ++d) phase += kvecs_[c][d] * psi[d];
        acc += coef_.col(c) * Complex(std::cos(phase), std::sin(phase));
    }
    return acc.real();
}

PhasePoint TorusChart::z0_at(const VectorXd& psi) const {
    const VectorXd f = field_at(psi);
    const int n_tail = sys_->n_tail();
    PhasePoint z = PhasePoint::zero(r_, n_tail);
    for (int l = 0; l < r_; ++l) {
        z.I[l] = f[l];
        z.phi[l] = psi[l] + f[r_ + l];
    }
    z.tail.p = f.segment(2 * r_, n_tail);
    z.tail.q = f.segment(2 * r_ + n_tail, n_tail);
    return z;
}

VectorXd TorusChart::theta0_at(const VectorXd& psi) const {
    return field_at(psi).segment(r_, r_);
}

VectorXd TorusChart::psi_label(const PhasePoint& z, const VectorXd& guess) const {
    VectorXd psi = guess;
    for (int it = 0; it < 50; ++it) {
        const VectorXd theta = theta0_at(psi);
        VectorXd delta(r_);
        for (int l = 0; l < r_; ++l) delta[l] = wrap_pi(z.phi[l] - psi[l] - theta[l]);
        psi += delta;
        if (delta.lpNorm<Eigen::Infinity>() < 1e-13) return psi;
    }
    throw FitDegenerateError("psi_label: angle fixed point did not converge");
}

double TorusChart::distance_to(const PhasePoint& z, const VectorXd& label_guess) const {
    const VectorXd psi = psi_label(z, label_guess);
    return phase_dist(z, z0_at(psi), sys_->weight_index, sys_->trunc.s, sys_->trunc.sigma);
}

double TorusChart::nearest_node_distance(const PhasePoint& z) const {
    double best = std::numeric_limits<double>::infinity();
    for (const PhasePoint& node : torus_->z0)
        best = std::min(best,
                        phase_dist(z, node, sys_->weight_index, sys_->trunc.s, sys_->trunc.sigma));
    return best;
}

// ---------------------------------------------------------------------------

PeriodicOrbitCheck check_periodic_orbit(const CommutingSystem& sys, const VectorXd& eps,
                                        const TorusResult& torus, int node, int steps,
                                        int integrator_order) {
    FlowSpec spec;
    spec.coefficients = eps;
    spec.coefficients[0] += 1.0;
    spec.t_final = 2.0 * M_PI;
    spec.steps = steps;
    spec.integrator_order = integrator_order;

    const int n_saves = 64;
    const Trajectory traj = integrate_flow(sys, spec, torus.z0[node], n_saves);

    PeriodicOrbitCheck out;
    out.energy_drift = traj.energy_drift;

    // unwrapped angle advance across saves
    const int r = sys.r();
    VectorXd unwrapped = VectorXd::Zero(r);
    VectorXd prev = traj.points.front().phi;
    out.max_loop_deviation = 0.0;
    for (size_t i = 1; i < traj.points.size(); ++i) {
        for (int l = 0; l < r; ++l) {
            unwrapped[l] += wrap_pi(traj.points[i].phi[l] - prev[l]);
        }
        prev = traj.points[i].phi;
        // pointwise deviation from the stored loop (drift added back)
        PhasePoint zl = torus.loops[node].at_time(traj.times[i]);
        zl.phi[0] += traj.times[i];
        out.max_loop_deviation = std::max(
            out.max_loop_deviation,
            phase_dist(traj.points[i], zl, sys.weight_index, sys.trunc.s, sys.trunc.sigma));
    }
    out.winding = unwrapped / (2.0 * M_PI);

    PhasePoint diff = traj.points.back() - traj.points.front();
    for (int l = 0; l < r; ++l) {
        diff.phi[l] = wrap_pi(diff.phi[l] - (l == 0 ? 2.0 * M_PI : 0.0));
    }
    out.residual = phase_norm(diff, sys.weight_index, sys.trunc.s, sys.trunc.sigma);
    return out;
}

InvarianceReport check_invariance(const CommutingSystem& sys, const TorusResult& torus,
                                  const std::vector<FlowSpec>& flows, int n_samples) {
    const TorusChart chart(sys, torus);
    InvarianceReport report;
    const int n_nodes = torus.grid_size();
    const int stride = std::max(1, n_nodes / std::max(1, n_samples));
    for (const FlowSpec& flow : flows) {
        const int checkpoints = std::max<int>(8, static_cast<int>(std::ceil(2.0 * flow.t_final)));
        for (int node = 0; node < n_nodes; node += stride) {
            const Trajectory traj = integrate_flow(sys, flow, torus.z0[node], checkpoints);
            report.energy_drift = std::max(report.energy_drift, traj.energy_drift);
            VectorXd guess = torus.psi[node];
            for (size_t i = 1; i < traj.points.size(); ++i) {
                guess = chart.psi_label(traj.points[i], guess);
                report.max_distance =
                    std::max(report.max_distance, chart.distance_to(traj.points[i], guess));
            }
            report.max_nearest_node_distance = std::max(
                report.max_nearest_node_distance, chart.nearest_node_distance(traj.points.back()));
        }
    }
    return report;
}

FrequencyFit measure_frequencies(const CommutingSystem& sys, const TorusResult& torus,
                                 const FlowSpec& flow, int n_saves) {
    const TorusChart chart(sys, torus);
    const Trajectory traj = integrate_flow(sys, flow, torus.z0[0], n_saves);
    const int r = sys.r();
    const int n = static_cast<int>(traj.points.size());

    // psi labels continued along the trajectory
    MatrixXd labels(n, r);
    VectorXd guess = torus.psi[0];
    labels.row(0) = guess.transpose();
    for (int i = 1; i < n; ++i) {
        const VectorXd label = chart.psi_label(traj.points[i], guess);
        if ((label - guess).lpNorm<Eigen::Infinity>() > M_PI / 2.0)
            throw FitDegenerateError("measure_frequencies: sampling too sparse to unwind angles");
        labels.row(i) = label.transpose();
        guess = label;
    }

    // least-squares linear drift per component
    FrequencyFit fit;
    fit.freq.resize(r);
    fit.stderr.resize(r);
    VectorXd t(n);
    for (int i = 0; i < n; ++i) t[i] = traj.times[i];
    const double tbar = t.mean();
    const VectorXd tc = t.array() - tbar;
    const double denom = tc.squaredNorm();
    if (denom <= 0.0) throw FitDegenerateError("measure_frequencies: degenerate time grid");
    for (int l = 0; l < r; ++l) {
        const VectorXd y = labels.col(l);
        const double slope = tc.dot(y) / denom;
        const double intercept = y.mean() - slope * tbar;
        const VectorXd resid = y - (intercept + slope * t.array()).matrix();
        const double var = resid.squaredNorm() / std::max(1, n - 2);
        fit.freq[l] = slope;
        fit.stderr[l] = std::sqrt(var / denom);
    }
    return fit;
}

}  // namespace tori
