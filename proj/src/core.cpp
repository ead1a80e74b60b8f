#include "quasitori/core.hpp"

#include <cmath>

namespace tori {

void TruncationParams::validate(int smoothing_d) const {
    if (r < 1) throw ModelError("truncation: r must be >= 1");
    if (!(j_max >= j_min && j_min >= 1)) throw ModelError("truncation: need j_max >= j_min >= 1");
    if (k_max < 1) throw ModelError("truncation: k_max must be >= 1");
    if (!(gamma > 0.0)) throw ModelError("truncation: gamma must be > 0");
    if (tau > smoothing_d)
        throw ModelError("truncation: tau exceeds the declared smoothing order d");
}

double weighted_norm_sq(const WeightedSeq& seq, const VectorXd& weight_index, double s,
                        double sigma) {
    double acc = 0.0;
    for (int i = 0; i < seq.size(); ++i) {
        const double w = weight_index[i];
        const double wt = std::pow(std::max(1.0, w), 2.0 * s) * std::exp(2.0 * sigma * w);
        acc += wt * (seq.p[i] * seq.p[i] + seq.q[i] * seq.q[i]);
    }
    return acc;
}

PhasePoint PhasePoint::zero(int r, int n_tail) {
    return {VectorXd::Zero(r), VectorXd::Zero(r), WeightedSeq::zero(n_tail)};
}

PhasePoint& PhasePoint::operator+=(const PhasePoint& o) {
    I += o.I;
    phi += o.phi;
    tail.p += o.tail.p;
    tail.q += o.tail.q;
    return *this;
}

PhasePoint& PhasePoint::operator*=(double c) {
    I *= c;
    phi *= c;
    tail.p *= c;
    tail.q *= c;
    return *this;
}

PhasePoint operator+(PhasePoint a, const PhasePoint& b) { return a += b; }

PhasePoint operator-(const PhasePoint& a, const PhasePoint& b) {
    PhasePoint out = a;
    out.I -= b.I;
    out.phi -= b.phi;
    out.tail.p -= b.tail.p;
    out.tail.q -= b.tail.q;
    return out;
}

PhasePoint operator*(double c, PhasePoint a) { return a *= c; }

double phase_norm(const PhasePoint& z, const VectorXd& weight_index, double s, double sigma) {
    return std::sqrt(z.I.squaredNorm() + z.phi.squaredNorm() +
                     weighted_norm_sq(z.tail, weight_index, s, sigma));
}

namespace {
double wrap_angle(double d) {
    constexpr double two_pi = 2.0 * M_PI;
    d = std::fmod(d, two_pi);
    if (d > M_PI) d -= two_pi;
    if (d <= -M_PI) d += two_pi;
    return d;
}
}  // namespace

double phase_dist(const PhasePoint& a, const PhasePoint& b, const VectorXd& weight_index,
                  double s, double sigma) {
    PhasePoint d = a - b;
    for (int l = 0; l < d.r(); ++l) d.phi[l] = wrap_angle(d.phi[l]);
    return phase_norm(d, weight_index, s, sigma);
}

double weak_dot(const PhasePoint& a, const PhasePoint& b) {
    return a.I.dot(b.I) + a.phi.dot(b.phi) + a.tail.p.dot(b.tail.p) + a.tail.q.dot(b.tail.q);
}

PhasePoint poisson_tensor_apply(const PhasePoint& z) {
    PhasePoint out;
    out.I = -z.phi;
    out.phi = z.I;
    out.tail.p = -z.tail.q;
    out.tail.q = z.tail.p;
    return out;
}

void CommutingSystem::validate() const {
    trunc.validate(smoothing_d);
    if (Omega.rows() != trunc.r || Omega.cols() != trunc.n_tail())
        throw ModelError("system: Omega table shape mismatch");
    if (weight_index.size() != trunc.n_tail())
        throw ModelError("system: weight_index size mismatch");
    if (n_vec.size() != trunc.r) throw ModelError("system: n_vec size mismatch");
    if (!F.empty() && static_cast<int>(F.size()) != trunc.r)
        throw ModelError("system: need one nonlinearity oracle per Hamiltonian");
}

bool CommutingSystem::has_nonlinearity() const {
    if (has_base()) return true;
    for (const auto& f : F)
        if (!f.empty()) return true;
    return false;
}

double CommutingSystem::F_value(int l, const PhasePoint& z) const {
    if (has_base()) return f_coef[l] * F_base.value(z, mu);
    if (F.empty() || F[l].empty()) return 0.0;
    return F[l].value(z, mu);
}

PhasePoint CommutingSystem::F_grad(int l, const PhasePoint& z) const {
    if (has_base()) {
        PhasePoint g = F_base.grad(z, mu);
        g *= f_coef[l];
        return g;
    }
    if (F.empty() || F[l].empty()) return PhasePoint::zero(r(), n_tail());
    return F[l].grad(z, mu);
}

double hamiltonian_value(const CommutingSystem& sys, int l, const PhasePoint& z) {
    if (l < 0 || l >= sys.r()) throw ModelError("hamiltonian_value: index out of range");
    double tail = 0.0;
    for (int i = 0; i < sys.n_tail(); ++i)
        tail += sys.Omega(l, i) * 0.5 * (z.tail.p[i] * z.tail.p[i] + z.tail.q[i] * z.tail.q[i]);
    return z.I[l] + tail + sys.mu * sys.F_value(l, z);
}

PhasePoint hamiltonian_grad(const CommutingSystem& sys, int l, const PhasePoint& z) {
    if (l < 0 || l >= sys.r()) throw ModelError("hamiltonian_grad: index out of range");
    PhasePoint g = PhasePoint::zero(sys.r(), sys.n_tail());
    g.I[l] = 1.0;
    g.tail.p = sys.Omega.row(l).transpose().cwiseProduct(z.tail.p);
    g.tail.q = sys.Omega.row(l).transpose().cwiseProduct(z.tail.q);
    if (sys.has_nonlinearity()) {
        PhasePoint gf = sys.F_grad(l, z);
        gf *= sys.mu;
        g += gf;
    }
    return g;
}

double poisson_bracket(const CommutingSystem& sys, int l1, int l2, const PhasePoint& z) {
    const PhasePoint g1 = hamiltonian_grad(sys, l1, z);
    const PhasePoint g2 = hamiltonian_grad(sys, l2, z);
    return weak_dot(g1, poisson_tensor_apply(g2));
}

}  // namespace tori
