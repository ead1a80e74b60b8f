#include "quasitori/models.hpp"

#include <cmath>

#include "quasitori/fourier.hpp"

namespace tori {

using Eigen::VectorXcd;

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
const double kSqrtPi = std::sqrt(M_PI);
const double kSqrt2Pi = std::sqrt(2.0 * M_PI);

// Orthonormal basis coefficients of a real field from grid samples:
// slot +j ~ cos(jx)/sqrt(pi), slot -j ~ sin(jx)/sqrt(pi), slot 0 ~ 1/sqrt(2 pi).
// Exact for fields band-limited to |j| <= J when the grid resolves them.
VectorXd basis_coefs_from_samples(const VectorXd& samples, int J) {
    const int n = static_cast<int>(samples.size());
    VectorXcd bins;
    cached_transform(n).analyze(samples, bins);
    VectorXd c(2 * J + 1);
    c[J] = kSqrt2Pi * bins[0].real();  // slot layout: c[j + J]
    for (int j = 1; j <= J; ++j) {
        c[J + j] = 2.0 * kSqrtPi * bins[j].real();
        c[J - j] = -2.0 * kSqrtPi * bins[j].imag();
    }
    return c;
}

VectorXd samples_from_basis_coefs(const VectorXd& c, int J, int n) {
    VectorXcd bins = VectorXcd::Zero(n);
    bins[0] = Complex(c[J] / kSqrt2Pi, 0.0);
    for (int j = 1; j <= J; ++j) {
        const Complex cj(c[J + j] / (2.0 * kSqrtPi), -c[J - j] / (2.0 * kSqrtPi));
        bins[j] = cj;
        bins[n - j] = std::conj(cj);
    }
    VectorXd out;
    cached_transform(n).synthesize(bins, out);
    return out;
}

void action_angle_to_pair(double I, double phi, double& p, double& q) {
    if (I < 0.0) throw ModelError("action out of range (negative excited action)");
    const double amp = std::sqrt(2.0 * I);
    p = amp * std::cos(phi);
    q = amp * std::sin(phi);
}
}  // namespace

double nlw_omega(int j, double m) { return std::sqrt(static_cast<double>(j) * j + m); }

double beam_omega(int j, double m) {
    const double j2 = static_cast<double>(j) * j;
    return std::sqrt(j2 * j2 + m);
}

void NlwConfig::validate() const {
    if (!(m > 0.0))
        throw ModelError("nlw: m <= 0 unsupported (zero-mode frequency sqrt(m) degenerates)");
    if (!(m < 4.0 / 3.0)) throw ModelError("nlw: m must lie in (0, 4/3)");
    if (j_phys_max < 2) throw ModelError("nlw: j_phys_max must be >= 2");
    if (k_max < 1) throw ModelError("nlw: k_max must be >= 1");
}

void BeamConfig::validate() const {
    if (!(m > 0.0)) throw ModelError("beam: m <= 0 unsupported (zero-mode frequency)");
    if (!(m < 4.0)) throw ModelError("beam: m must lie in (0, 4)");
    if (j_phys_max < 3) throw ModelError("beam: j_phys_max must cover the excited modes 1..3");
    if (k_max < 1) throw ModelError("beam: k_max must be >= 1");
}

std::vector<int> nlw_tail_modes(int j_phys_max) {
    std::vector<int> tail{0};
    for (int j = 2; j <= j_phys_max; ++j) {
        tail.push_back(j);
        tail.push_back(-j);
    }
    return tail;
}

std::vector<std::pair<int, int>> beam_tail_modes(int j_phys_max) {
    std::vector<std::pair<int, int>> tail;
    auto add = [&](int j) {
        if (!(j == 1 || j == 2 || j == 3)) tail.emplace_back(1, j);
        tail.emplace_back(2, j);
    };
    add(0);
    for (int j = 1; j <= j_phys_max; ++j) {
        add(j);
        add(-j);
    }
    return tail;
}

// ---------------------------------------------------------------------------
// NLW chain

NlwChain::NlwChain(double m, int j_phys_max)
    : J_(j_phys_max), n_x_(4 * j_phys_max + 2), m_(m), tail_(nlw_tail_modes(j_phys_max)) {
    omega_.resize(J_ + 1);
    for (int j = 0; j <= J_; ++j) omega_[j] = nlw_omega(j, m);
}

void NlwChain::flat_from_phase(const PhasePoint& z, VectorXd& p, VectorXd& q) const {
    p = VectorXd::Zero(n_flat());
    q = VectorXd::Zero(n_flat());
    action_angle_to_pair(z.I[0], z.phi[0], p[flat_index(1)], q[flat_index(1)]);
    action_angle_to_pair(z.I[1], z.phi[1], p[flat_index(-1)], q[flat_index(-1)]);
    for (size_t i = 0; i < tail_.size(); ++i) {
        p[flat_index(tail_[i])] = z.tail.p[i];
        q[flat_index(tail_[i])] = z.tail.q[i];
    }
}

PhasePoint NlwChain::phase_from_flat(const VectorXd& p, const VectorXd& q) const {
    PhasePoint z = PhasePoint::zero(2, static_cast<int>(tail_.size()));
    const double p1 = p[flat_index(1)], q1 = q[flat_index(1)];
    const double pm = p[flat_index(-1)], qm = q[flat_index(-1)];
    z.I[0] = 0.5 * (p1 * p1 + q1 * q1);
    z.I[1] = 0.5 * (pm * pm + qm * qm);
    z.phi[0] = std::atan2(q1, p1);
    z.phi[1] = std::atan2(qm, pm);
    for (size_t i = 0; i < tail_.size(); ++i) {
        z.tail.p[i] = p[flat_index(tail_[i])];
        z.tail.q[i] = q[flat_index(tail_[i])];
    }
    return z;
}

void NlwChain::field_pairs_from_flat(const VectorXd& p, const VectorXd& q, VectorXd& U,
                                     VectorXd& u) const {
    U.resize(n_flat());
    u.resize(n_flat());
    U[flat_index(0)] = p[flat_index(0)];
    u[flat_index(0)] = q[flat_index(0)];
    for (int j = -J_; j <= J_; ++j) {
        if (j == 0) continue;
        u[flat_index(j)] = (p[flat_index(j)] + q[flat_index(-j)]) / kSqrt2;
        U[flat_index(j)] = (p[flat_index(-j)] - q[flat_index(j)]) / kSqrt2;
    }
}

void NlwChain::flat_from_field_pairs(const VectorXd& U, const VectorXd& u, VectorXd& p,
                                     VectorXd& q) const {
    p.resize(n_flat());
    q.resize(n_flat());
    p[flat_index(0)] = U[flat_index(0)];
    q[flat_index(0)] = u[flat_index(0)];
    for (int j = -J_; j <= J_; ++j) {
        if (j == 0) continue;
        p[flat_index(j)] = (u[flat_index(j)] + U[flat_index(-j)]) / kSqrt2;
        q[flat_index(j)] = (u[flat_index(-j)] - U[flat_index(j)]) / kSqrt2;
    }
}

VectorXd NlwChain::field_samples(const VectorXd& u_pairs) const {
    VectorXd c(n_flat());
    for (int j = -J_; j <= J_; ++j)
        c[flat_index(j)] = u_pairs[flat_index(j)] / std::sqrt(omega_[std::abs(j)]);
    return samples_from_basis_coefs(c, J_, n_x_);
}

VectorXd NlwChain::field_pairs_from_samples(const VectorXd& samples) const {
    VectorXd c = basis_coefs_from_samples(samples, J_);
    VectorXd u(n_flat());
    for (int j = -J_; j <= J_; ++j)
        u[flat_index(j)] = c[flat_index(j)] * std::sqrt(omega_[std::abs(j)]);
    return u;
}

double NlwChain::F_base_value(const PhasePoint& z) const {
    VectorXd p, q, U, u;
    flat_from_phase(z, p, q);
    field_pairs_from_flat(p, q, U, u);
    const VectorXd ux = field_samples(u);
    double acc = 0.0;
    for (int i = 0; i < n_x_; ++i) {
        const double s2 = ux[i] * ux[i];
        acc += s2 * s2;
    }
    return acc * (2.0 * M_PI / n_x_) * 0.25;
}

PhasePoint NlwChain::F_base_grad(const PhasePoint& z) const {
    VectorXd p, q, U, u;
    flat_from_phase(z, p, q);
    field_pairs_from_flat(p, q, U, u);
    const VectorXd ux = field_samples(u);
    const VectorXd cubed = ux.array().cube();
    const VectorXd dF_dc = basis_coefs_from_samples(cubed, J_);

    // dF/du_j, then back through the pair map to flat (p, q).
    VectorXd dF_du(n_flat());
    for (int j = -J_; j <= J_; ++j)
        dF_du[flat_index(j)] = dF_dc[flat_index(j)] / std::sqrt(omega_[std::abs(j)]);
    VectorXd gp = VectorXd::Zero(n_flat()), gq = VectorXd::Zero(n_flat());
    gq[flat_index(0)] = dF_du[flat_index(0)];
    for (int j = -J_; j <= J_; ++j) {
        if (j == 0) continue;
        gp[flat_index(j)] = dF_du[flat_index(j)] / kSqrt2;
        gq[flat_index(j)] = dF_du[flat_index(-j)] / kSqrt2;
    }

    PhasePoint g = PhasePoint::zero(2, static_cast<int>(tail_.size()));
    const int ex[2] = {flat_index(1), flat_index(-1)};
    for (int l = 0; l < 2; ++l) {
        const double pf = p[ex[l]], qf = q[ex[l]];
        const double two_i = pf * pf + qf * qf;
        if (two_i <= 0.0) throw ModelError("gradient singular at zero excited action");
        g.I[l] = (pf * gp[ex[l]] + qf * gq[ex[l]]) / two_i;
        g.phi[l] = pf * gq[ex[l]] - qf * gp[ex[l]];
    }
    for (size_t i = 0; i < tail_.size(); ++i) {
        g.tail.p[i] = gp[flat_index(tail_[i])];
        g.tail.q[i] = gq[flat_index(tail_[i])];
    }
    return g;
}

void NlwChain::kick(VectorXd& p, VectorXd& q, double strength) const {
    VectorXd U, u;
    field_pairs_from_flat(p, q, U, u);
    const VectorXd ux = field_samples(u);
    const VectorXd cubed = ux.array().cube();
    const VectorXd dF_dc = basis_coefs_from_samples(cubed, J_);
    for (int j = -J_; j <= J_; ++j)
        U[flat_index(j)] -= strength * dF_dc[flat_index(j)] / std::sqrt(omega_[std::abs(j)]);
    flat_from_field_pairs(U, u, p, q);
}

CommutingSystem build_nlw(const NlwConfig& cfg) {
    cfg.validate();
    auto chain = std::make_shared<NlwChain>(cfg.m, cfg.j_phys_max);
    const auto& tail = chain->tail_modes();
    const int n_tail = static_cast<int>(tail.size());
    const double w1 = nlw_omega(1, cfg.m);

    CommutingSystem sys;
    sys.trunc.r = 2;
    sys.trunc.j_min = 3;
    sys.trunc.j_max = 2 + n_tail;
    sys.trunc.k_max = cfg.k_max;
    sys.trunc.s = cfg.s;
    sys.trunc.sigma = cfg.sigma;
    sys.trunc.tau = cfg.tau;
    sys.trunc.gamma = cfg.gamma;
    sys.mu = cfg.mu;
    sys.smoothing_d = 1;
    sys.label = "nlw";
    sys.n_vec = VectorXi(2);
    sys.n_vec << 1, 1;
    sys.frame_M = MatrixXd::Identity(2, 2);

    sys.Omega.resize(2, n_tail);
    sys.weight_index.resize(n_tail);
    for (int i = 0; i < n_tail; ++i) {
        const int j = tail[i];
        const double wj = nlw_omega(std::abs(j), cfg.m);
        sys.Omega(0, i) = (wj + j * w1) / (2.0 * w1);
        sys.Omega(1, i) = (wj - j * w1) / (2.0 * w1);
        sys.weight_index[i] = std::abs(j);
    }

    sys.f_coef = VectorXd::Constant(2, 1.0 / (2.0 * w1));
    sys.F_base.value = [chain](const PhasePoint& z, double) { return chain->F_base_value(z); };
    sys.F_base.grad = [chain](const PhasePoint& z, double) { return chain->F_base_grad(z); };
    // abstract pair layout [excited, tail slots] -> physical mode layout
    std::vector<int> phys(2 + n_tail);
    phys[0] = chain->flat_index(1);
    phys[1] = chain->flat_index(-1);
    for (int i = 0; i < n_tail; ++i) phys[2 + i] = chain->flat_index(tail[i]);
    sys.kick.apply = [chain, phys](VectorXd& p, VectorXd& q, double strength) {
        VectorXd pp(chain->n_flat()), qq(chain->n_flat());
        for (size_t i = 0; i < phys.size(); ++i) {
            pp[phys[i]] = p[i];
            qq[phys[i]] = q[i];
        }
        chain->kick(pp, qq, strength);
        for (size_t i = 0; i < phys.size(); ++i) {
            p[i] = pp[phys[i]];
            q[i] = qq[phys[i]];
        }
    };
    sys.validate();
    return sys;
}

// ---------------------------------------------------------------------------
// Beam chain

BeamChain::BeamChain(double m, int j_phys_max)
    : J_(j_phys_max), n_x_(4 * j_phys_max + 2), m_(m), tail_(beam_tail_modes(j_phys_max)) {
    omega_.resize(J_ + 1);
    for (int j = 0; j <= J_; ++j) omega_[j] = beam_omega(j, m);
}

void BeamChain::flat_from_phase(const PhasePoint& z, VectorXd& p, VectorXd& q) const {
    p = VectorXd::Zero(n_flat());
    q = VectorXd::Zero(n_flat());
    for (int l = 0; l < 3; ++l) {
        const int idx = flat_index(1, l + 1);
        action_angle_to_pair(z.I[l], z.phi[l], p[idx], q[idx]);
    }
    for (size_t i = 0; i < tail_.size(); ++i) {
        const int idx = flat_index(tail_[i].first, tail_[i].second);
        p[idx] = z.tail.p[i];
        q[idx] = z.tail.q[i];
    }
}

PhasePoint BeamChain::phase_from_flat(const VectorXd& p, const VectorXd& q) const {
    PhasePoint z = PhasePoint::zero(3, static_cast<int>(tail_.size()));
    for (int l = 0; l < 3; ++l) {
        const int idx = flat_index(1, l + 1);
        z.I[l] = 0.5 * (p[idx] * p[idx] + q[idx] * q[idx]);
        z.phi[l] = std::atan2(q[idx], p[idx]);
    }
    for (size_t i = 0; i < tail_.size(); ++i) {
        const int idx = flat_index(tail_[i].first, tail_[i].second);
        z.tail.p[i] = p[idx];
        z.tail.q[i] = q[idx];
    }
    return z;
}

// Flat (p,q) -> polarization pairs (P,Q) -> field Fourier pairs (U,u), (V,v).
void BeamChain::fields_from_flat(const VectorXd& p, const VectorXd& q, VectorXd& U, VectorXd& u,
                                 VectorXd& V, VectorXd& v) const {
    const int n1 = 2 * J_ + 1;
    VectorXd P1(n1), Q1(n1), P2(n1), Q2(n1);
    for (int j = -J_; j <= J_; ++j) {
        const int i = j + J_;
        const double p1 = p[flat_index(1, j)], q1 = q[flat_index(1, j)];
        const double p2 = p[flat_index(2, j)], q2 = q[flat_index(2, j)];
        P1[i] = (p1 - q2) / kSqrt2;
        Q1[i] = (p2 + q1) / kSqrt2;
        P2[i] = (p2 - q1) / kSqrt2;
        Q2[i] = (p1 + q2) / kSqrt2;
    }
    U.resize(n1);
    u.resize(n1);
    V.resize(n1);
    v.resize(n1);
    U[J_] = P1[J_];
    u[J_] = Q1[J_];
    V[J_] = P2[J_];
    v[J_] = Q2[J_];
    for (int j = -J_; j <= J_; ++j) {
        if (j == 0) continue;
        u[j + J_] = (P1[j + J_] + Q1[-j + J_]) / kSqrt2;
        U[j + J_] = (P1[-j + J_] - Q1[j + J_]) / kSqrt2;
        v[j + J_] = (P2[j + J_] + Q2[-j + J_]) / kSqrt2;
        V[j + J_] = (P2[-j + J_] - Q2[j + J_]) / kSqrt2;
    }
}

void BeamChain::flat_from_fields(const VectorXd& U, const VectorXd& u, const VectorXd& V,
                                 const VectorXd& v, VectorXd& p, VectorXd& q) const {
    const int n1 = 2 * J_ + 1;
    VectorXd P1(n1), Q1(n1), P2(n1), Q2(n1);
    P1[J_] = U[J_];
    Q1[J_] = u[J_];
    P2[J_] = V[J_];
    Q2[J_] = v[J_];
    for (int j = -J_; j <= J_; ++j) {
        if (j == 0) continue;
        P1[j + J_] = (u[j + J_] + U[-j + J_]) / kSqrt2;
        Q1[j + J_] = (u[-j + J_] - U[j + J_]) / kSqrt2;
        P2[j + J_] = (v[j + J_] + V[-j + J_]) / kSqrt2;
        Q2[j + J_] = (v[-j + J_] - V[j + J_]) / kSqrt2;
    }
    p.resize(n_flat());
    q.resize(n_flat());
    for (int j = -J_; j <= J_; ++j) {
        const int i = j + J_;
        p[flat_index(1, j)] = (P1[i] + Q2[i]) / kSqrt2;
        q[flat_index(1, j)] = (Q1[i] - P2[i]) / kSqrt2;
        p[flat_index(2, j)] = (P2[i] + Q1[i]) / kSqrt2;
        q[flat_index(2, j)] = (Q2[i] - P1[i]) / kSqrt2;
    }
}

void BeamChain::field_samples(const PhasePoint& z, VectorXd& us, VectorXd& vs) const {
    VectorXd p, q, U, u, V, v;
    flat_from_phase(z, p, q);
    fields_from_flat(p, q, U, u, V, v);
    VectorXd cu(2 * J_ + 1), cv(2 * J_ + 1);
    for (int j = -J_; j <= J_; ++j) {
        cu[j + J_] = u[j + J_] / std::sqrt(omega_[std::abs(j)]);
        cv[j + J_] = v[j + J_] / std::sqrt(omega_[std::abs(j)]);
    }
    us = samples_from_basis_coefs(cu, J_, n_x_);
    vs = samples_from_basis_coefs(cv, J_, n_x_);
}

double BeamChain::F_base_value(const PhasePoint& z) const {
    VectorXd us, vs;
    field_samples(z, us, vs);
    double acc = 0.0;
    for (int i = 0; i < n_x_; ++i) {
        const double w = us[i] * us[i] + vs[i] * vs[i];
        acc += w * w;
    }
    return acc * (2.0 * M_PI / n_x_) * 0.25;
}

PhasePoint BeamChain::F_base_grad(const PhasePoint& z) const {
    VectorXd p, q, U, u, V, v;
    flat_from_phase(z, p, q);
    fields_from_flat(p, q, U, u, V, v);
    const int n1 = 2 * J_ + 1;
    VectorXd cu(n1), cv(n1);
    for (int j = -J_; j <= J_; ++j) {
        cu[j + J_] = u[j + J_] / std::sqrt(omega_[std::abs(j)]);
        cv[j + J_] = v[j + J_] / std::sqrt(omega_[std::abs(j)]);
    }
    const VectorXd us = samples_from_basis_coefs(cu, J_, n_x_);
    const VectorXd vs = samples_from_basis_coefs(cv, J_, n_x_);
    VectorXd gu(n_x_), gv(n_x_);
    for (int i = 0; i < n_x_; ++i) {
        const double w = us[i] * us[i] + vs[i] * vs[i];
        gu[i] = us[i] * w;
        gv[i] = vs[i] * w;
    }
    const VectorXd dF_dcu = basis_coefs_from_samples(gu, J_);
    const VectorXd dF_dcv = basis_coefs_from_samples(gv, J_);

    // dF/d(P,Q) per polarization, then back to flat (p,q).
    VectorXd dU(n1), du(n1), dV(n1), dv(n1);  // dF/du_j etc.
    for (int j = -J_; j <= J_; ++j) {
        du[j + J_] = dF_dcu[j + J_] / std::sqrt(omega_[std::abs(j)]);
        dv[j + J_] = dF_dcv[j + J_] / std::sqrt(omega_[std::abs(j)]);
    }
    VectorXd dP1 = VectorXd::Zero(n1), dQ1 = VectorXd::Zero(n1);
    VectorXd dP2 = VectorXd::Zero(n1), dQ2 = VectorXd::Zero(n1);
    dQ1[J_] = du[J_];
    dQ2[J_] = dv[J_];
    for (int j = -J_; j <= J_; ++j) {
        if (j == 0) continue;
        dP1[j + J_] = du[j + J_] / kSqrt2;
        dQ1[j + J_] = du[-j + J_] / kSqrt2;
        dP2[j + J_] = dv[j + J_] / kSqrt2;
        dQ2[j + J_] = dv[-j + J_] / kSqrt2;
    }
    VectorXd gp(n_flat()), gq(n_flat());
    for (int j = -J_; j <= J_; ++j) {
        const int i = j + J_;
        gp[flat_index(1, j)] = (dP1[i] + dQ2[i]) / kSqrt2;
        gq[flat_index(1, j)] = (dQ1[i] - dP2[i]) / kSqrt2;
        gp[flat_index(2, j)] = (dQ1[i] + dP2[i]) / kSqrt2;
        gq[flat_index(2, j)] = (-dP1[i] + dQ2[i]) / kSqrt2;
    }

    PhasePoint g = PhasePoint::zero(3, static_cast<int>(tail_.size()));
    for (int l = 0; l < 3; ++l) {
        const int idx = flat_index(1, l + 1);
        const double pf = p[idx], qf = q[idx];
        const double two_i = pf * pf + qf * qf;
        if (two_i <= 0.0) throw ModelError("gradient singular at zero excited action");
        g.I[l] = (pf * gp[idx] + qf * gq[idx]) / two_i;
        g.phi[l] = pf * gq[idx] - qf * gp[idx];
    }
    for (size_t i = 0; i < tail_.size(); ++i) {
        const int idx = flat_index(tail_[i].first, tail_[i].second);
        g.tail.p[i] = gp[idx];
        g.tail.q[i] = gq[idx];
    }
    return g;
}

void BeamChain::kick(VectorXd& p, VectorXd& q, double strength) const {
    VectorXd U, u, V, v;
    fields_from_flat(p, q, U, u, V, v);
    const int n1 = 2 * J_ + 1;
    VectorXd cu(n1), cv(n1);
    for (int j = -J_; j <= J_; ++j) {
        cu[j + J_] = u[j + J_] / std::sqrt(omega_[std::abs(j)]);
        cv[j + J_] = v[j + J_] / std::sqrt(omega_[std::abs(j)]);
    }
    const VectorXd us = samples_from_basis_coefs(cu, J_, n_x_);
    const VectorXd vs = samples_from_basis_coefs(cv, J_, n_x_);
    VectorXd gu(n_x_), gv(n_x_);
    for (int i = 0; i < n_x_; ++i) {
        const double w = us[i] * us[i] + vs[i] * vs[i];
        gu[i] = us[i] * w;
        gv[i] = vs[i] * w;
    }
    const VectorXd dF_dcu = basis_coefs_from_samples(gu, J_);
    const VectorXd dF_dcv = basis_coefs_from_samples(gv, J_);
    for (int j = -J_; j <= J_; ++j) {
        const double sw = std::sqrt(omega_[std::abs(j)]);
        U[j + J_] -= strength * dF_dcu[j + J_] / sw;
        V[j + J_] -= strength * dF_dcv[j + J_] / sw;
    }
    flat_from_fields(U, u, V, v, p, q);
}

CommutingSystem build_beam(const BeamConfig& cfg) {
    cfg.validate();
    const double w1 = beam_omega(1, cfg.m), w2 = beam_omega(2, cfg.m), w3 = beam_omega(3, cfg.m);
    const double D = w3 - 2.0 * w2 + w1;
    if (std::abs(D) < 1e-9)
        throw DegenerateDenominatorError("beam: omega3 - 2 omega2 + omega1 vanishes");

    auto chain = std::make_shared<BeamChain>(cfg.m, cfg.j_phys_max);
    const auto& tail = chain->tail_modes();
    const int n_tail = static_cast<int>(tail.size());

    CommutingSystem sys;
    sys.trunc.r = 3;
    sys.trunc.j_min = 4;
    sys.trunc.j_max = 3 + n_tail;
    sys.trunc.k_max = cfg.k_max;
    sys.trunc.s = cfg.s;
    sys.trunc.sigma = cfg.sigma;
    sys.trunc.tau = cfg.tau;
    sys.trunc.gamma = cfg.gamma;
    sys.mu = cfg.mu;
    sys.smoothing_d = 2;
    sys.label = "beam";
    sys.n_vec = VectorXi::Zero(3);
    sys.n_vec[0] = 1;
    sys.frame_M = MatrixXd::Identity(3, 3);

    // H^(l) = (A_l K1 + B_l K2 + C_l K3)/D; tail frequency of slot (pol, j) is
    // A_l omega_|j| + B_l j + C_l sigma_pol.
    const double A[3] = {1.0, -2.0, 1.0};
    const double B[3] = {w2 - w3, w3 - w1, w1 - w2};
    const double C[3] = {2.0 * w3 - 3.0 * w2, 3.0 * w1 - w3, w2 - 2.0 * w1};

    sys.Omega.resize(3, n_tail);
    sys.weight_index.resize(n_tail);
    for (int i = 0; i < n_tail; ++i) {
        const int pol = tail[i].first;
        const int j = tail[i].second;
        const double sig = pol == 1 ? 1.0 : -1.0;
        const double wj = beam_omega(std::abs(j), cfg.m);
        for (int l = 0; l < 3; ++l) sys.Omega(l, i) = (A[l] * wj + B[l] * j + C[l] * sig) / D;
        sys.weight_index[i] = std::abs(j);
    }

    sys.f_coef.resize(3);
    for (int l = 0; l < 3; ++l) sys.f_coef[l] = A[l] / D;
    sys.F_base.value = [chain](const PhasePoint& z, double) { return chain->F_base_value(z); };
    sys.F_base.grad = [chain](const PhasePoint& z, double) { return chain->F_base_grad(z); };
    std::vector<int> phys(3 + n_tail);
    for (int l = 0; l < 3; ++l) phys[l] = chain->flat_index(1, l + 1);
    for (int i = 0; i < n_tail; ++i)
        phys[3 + i] = chain->flat_index(tail[i].first, tail[i].second);
    sys.kick.apply = [chain, phys](VectorXd& p, VectorXd& q, double strength) {
        VectorXd pp(chain->n_flat()), qq(chain->n_flat());
        for (size_t i = 0; i < phys.size(); ++i) {
            pp[phys[i]] = p[i];
            qq[phys[i]] = q[i];
        }
        chain->kick(pp, qq, strength);
        for (size_t i = 0; i < phys.size(); ++i) {
            p[i] = pp[phys[i]];
            q[i] = qq[phys[i]];
        }
    };
    sys.validate();
    return sys;
}

// ---------------------------------------------------------------------------
// Closed forms

double nlw_averaged_constant(double m) {
    const double w1 = nlw_omega(1, m);
    return 3.0 / (16.0 * M_PI * w1 * w1 * w1);
}

double nlw_averaged_form(double a1, double a_neg1, double m) {
    return nlw_averaged_constant(m) * (a1 * a1 + 4.0 * a1 * a_neg1 + a_neg1 * a_neg1);
}

double beam_averaged_form(const Eigen::Vector3d& a, double m) {
    const double D = beam_omega(3, m) - 2.0 * beam_omega(2, m) + beam_omega(1, m);
    Eigen::Vector3d b;
    for (int l = 0; l < 3; ++l) b[l] = a[l] / beam_omega(l + 1, m);
    const double quad = b.squaredNorm() + 4.0 * (b[0] * b[1] + b[1] * b[2] + b[0] * b[2]);
    return quad / (8.0 * M_PI * D);
}

Eigen::Vector2d torus_frequencies_nlw(const Eigen::Vector2d& eps, double m) {
    const double w1 = nlw_omega(1, m);
    const double ep = 0.5 * (eps[0] + eps[1]);
    const double em = 0.5 * (eps[0] - eps[1]);
    const double den = 1.0 + ep;
    if (std::abs(den) < 1e-12)
        throw DegenerateDenominatorError("nlw frequencies: 1 + (eps1+eps2)/2 vanishes");
    return {w1 / den, -w1 * em / den};
}

Eigen::Vector3d torus_frequencies_beam(const Eigen::Vector3d& eps, double m) {
    const double w1 = beam_omega(1, m), w2 = beam_omega(2, m), w3 = beam_omega(3, m);
    const double D = w3 - 2.0 * w2 + w1;
    const double den = 1.0 + eps[0] - 2.0 * eps[1] + eps[2];
    if (std::abs(den) < 1e-12)
        throw DegenerateDenominatorError("beam frequencies: 1 + eps1 - 2 eps2 + eps3 vanishes");
    // alpha solving K1 = a1 Htilde + a2 K2 + a3 K3 (unique expansion through
    // the K->H combination rows).
    Eigen::Vector3d out;
    out[0] = D / den;
    out[1] = -((1.0 + eps[0]) * (w2 - w3) + eps[1] * (w3 - w1) + eps[2] * (w1 - w2)) / den;
    out[2] = -((2.0 + 2.0 * eps[0] - eps[1]) * w3 - (3.0 + 3.0 * eps[0] - eps[2]) * w2 +
               (3.0 * eps[1] - 2.0 * eps[2]) * w1) /
             den;
    return out;
}

Eigen::Matrix2d nlw_K_to_H(double m) {
    const double w1 = nlw_omega(1, m);
    Eigen::Matrix2d C;
    C << 1.0 / (2.0 * w1), 0.5, 1.0 / (2.0 * w1), -0.5;
    return C;
}

Eigen::Matrix3d beam_K_to_H(double m) {
    const double w1 = beam_omega(1, m), w2 = beam_omega(2, m), w3 = beam_omega(3, m);
    const double D = w3 - 2.0 * w2 + w1;
    Eigen::Matrix3d C;
    C << 1.0, w2 - w3, 2.0 * w3 - 3.0 * w2,
        -2.0, w3 - w1, 3.0 * w1 - w3,
        1.0, w1 - w2, w2 - 2.0 * w1;
    return C / D;
}

}  // namespace tori
