#include "quasitori/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace tori {

namespace {
// Largest denominator for which |x - p/q| <= 1/q^2 is still resolvable in
// doubles: q^2 eps ~ 1 -> q ~ 2^26.
constexpr double kMaxReliableDen = 6.7e7;
}  // namespace

std::vector<std::pair<std::int64_t, std::int64_t>> ContinuedFraction::convergents() const {
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    std::int64_t pm1 = 1, qm1 = 0;  // p_{-1}, q_{-1}
    std::int64_t p = a0, q = 1;
    out.emplace_back(p, q);
    for (std::int64_t a : partial_quotients) {
        const std::int64_t pn = a * p + pm1;
        const std::int64_t qn = a * q + qm1;
        pm1 = p;
        qm1 = q;
        p = pn;
        q = qn;
        out.emplace_back(p, q);
    }
    return out;
}

double ContinuedFraction::value() const {
    const auto conv = convergents();
    return static_cast<double>(conv.back().first) / static_cast<double>(conv.back().second);
}

ContinuedFraction cf_expand(double x, int n_terms) {
    if (!(x > 0.0)) throw ModelError("cf_expand: x must be positive");
    if (n_terms < 1) throw ModelError("cf_expand: n_terms must be >= 1");
    ContinuedFraction cf;
    cf.a0 = static_cast<std::int64_t>(std::floor(x));
    double frac = x - std::floor(x);
    double q_prev = 0.0, q_cur = 1.0;
    for (int k = 1; k < n_terms; ++k) {
        if (frac < 1e-14) break;  // rational within resolution
        const double y = 1.0 / frac;
        const double a = std::floor(y);
        const double q_next = a * q_cur + q_prev;
        if (q_next > kMaxReliableDen) {
            cf.precision_exhausted = true;
            break;
        }
        cf.partial_quotients.push_back(static_cast<std::int64_t>(a));
        q_prev = q_cur;
        q_cur = q_next;
        frac = y - a;
    }
    return cf;
}

double cf_with_periodic_tail(const ContinuedFraction& prefix, int keep_quotients,
                             const std::vector<int>& pattern) {
    if (pattern.empty()) throw ModelError("cf tail pattern must be nonempty");
    for (int b : pattern)
        if (b < 1) throw ModelError("cf tail pattern entries must be >= 1");
    // Fixed point of the pattern's Moebius map: t = (A t + B) / (C t + D).
    double A = 1, B = 0, C = 0, D = 1;
    for (int b : pattern) {
        const double An = A * b + B, Cn = C * b + D;
        B = A;
        D = C;
        A = An;
        C = Cn;
    }
    const double disc = (A - D) * (A - D) + 4.0 * B * C;
    const double t = ((A - D) + std::sqrt(disc)) / (2.0 * C);
    // x = (t p_n + p_{n-1}) / (t q_n + q_{n-1}) through the kept prefix.
    double pm1 = 1, qm1 = 0;
    double p = static_cast<double>(prefix.a0), q = 1;
    const int keep = std::min<int>(keep_quotients, static_cast<int>(prefix.partial_quotients.size()));
    for (int k = 0; k < keep; ++k) {
        const double a = static_cast<double>(prefix.partial_quotients[k]);
        const double pn = a * p + pm1, qn = a * q + qm1;
        pm1 = p;
        qm1 = q;
        p = pn;
        q = qn;
    }
    return (t * p + pm1) / (t * q + qm1);
}

namespace {

double weight_pow(double w, double tau) { return std::pow(std::max(1.0, w), tau); }

// |k S - T| minimized over k in [-k_max, k_max]: closed form via the nearest
// admissible k (cross-checked against the explicit scan in tests).
double min_over_k(double S, double T, int k_max, int& k_arg) {
    if (S == 0.0) {
        k_arg = 0;
        return std::abs(T);
    }
    double best = std::numeric_limits<double>::infinity();
    k_arg = 0;
    const double k0 = T / S;
    for (double kc : {std::floor(k0), std::ceil(k0)}) {
        const double k = std::clamp(kc, static_cast<double>(-k_max), static_cast<double>(k_max));
        const double v = std::abs(k * S - T);
        if (v < best) {
            best = v;
            k_arg = static_cast<int>(k);
        }
    }
    return best;
}

DiophantineResult scan_impl(const CommutingSystem& sys, const VectorXd& eps, double gamma,
                            double tau, int k_max, bool brute) {
    if (eps.size() != sys.r()) throw ModelError("diophantine_check: eps size mismatch");
    DiophantineResult res;
    res.k_scanned = k_max;
    double S = 0.0;
    for (int l = 0; l < sys.r(); ++l) S += static_cast<double>(sys.n_vec[l]);
    VectorXd coef(sys.r());
    for (int l = 0; l < sys.r(); ++l) coef[l] = static_cast<double>(sys.n_vec[l]) + eps[l];

    res.margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < sys.n_tail(); ++i) {
        const double T = coef.dot(sys.Omega.col(i));
        const double w = sys.weight_index[i];
        double v;
        int k_arg = 0;
        if (brute) {
            v = std::numeric_limits<double>::infinity();
            for (int k = -k_max; k <= k_max; ++k) {
                const double cand = std::abs(k * S - T);
                if (cand < v) {
                    v = cand;
                    k_arg = k;
                }
            }
        } else {
            v = min_over_k(S, T, k_max, k_arg);
        }
        const double weighted = weight_pow(w, tau) * v;
        if (weighted < res.margin) {
            res.margin = weighted;
            res.worst_slot = i;
            res.worst_k = k_arg;
        }
        res.j_scanned = std::max(res.j_scanned, static_cast<int>(std::lround(w)));
    }
    res.accepted = res.margin >= gamma;
    return res;
}

}  // namespace

DiophantineResult diophantine_check(const CommutingSystem& sys, const VectorXd& eps, double gamma,
                                    double tau, int k_max) {
    return scan_impl(sys, eps, gamma, tau, k_max, /*brute=*/false);
}

DiophantineResult diophantine_scan_bruteforce(const CommutingSystem& sys, const VectorXd& eps,
                                              double gamma, double tau, int k_max) {
    return scan_impl(sys, eps, gamma, tau, k_max, /*brute=*/true);
}

double construct_mass(double target_m, double delta, int keep_quotients,
                      const std::vector<int>& tail_pattern) {
    if (!(target_m > -1.0 && target_m < 4.0 / 3.0))
        throw ModelError("construct_mass: target mass must lie in (-1, 4/3)");
    if (!(delta > 0.0)) throw ModelError("construct_mass: delta must be > 0");
    if (keep_quotients < 0) throw ModelError("construct_mass: Q must be >= 0");
    const double nu_bar = 1.0 / std::sqrt(1.0 + target_m);
    const ContinuedFraction cf = cf_expand(nu_bar, keep_quotients + 2);
    const double nu = cf_with_periodic_tail(cf, keep_quotients, tail_pattern);
    const double m = 1.0 / (nu * nu) - 1.0;
    if (std::abs(m - target_m) > delta)
        throw ModelError("construct_mass: Q too small to stay within delta of the target");
    return m;
}

EpsilonSample sample_nonresonant_eps(const CommutingSystem& sys, double radius, int count,
                                     double gamma, double tau, int k_max, std::uint64_t seed,
                                     std::optional<double> fixed_eps_minus) {
    if (!(radius > 0.0)) throw ModelError("sample_nonresonant_eps: radius must be > 0");
    if (fixed_eps_minus && sys.r() != 2)
        throw ModelError("fixed eps_minus sampling requires r = 2");
    EpsilonSample out;
    out.total = count;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    int rejected = 0;
    for (int i = 0; i < count; ++i) {
        VectorXd eps(sys.r());
        if (fixed_eps_minus) {
            const double ep = radius * unit(rng);
            eps[0] = ep + *fixed_eps_minus;
            eps[1] = ep - *fixed_eps_minus;
        } else {
            // uniform in the ball by rejection
            do {
                for (int l = 0; l < sys.r(); ++l) eps[l] = unit(rng);
            } while (eps.squaredNorm() > 1.0);
            eps *= radius;
        }
        const DiophantineResult check = diophantine_check(sys, eps, gamma, tau, k_max);
        if (check.accepted) {
            out.accepted.push_back(
                {eps, check.margin, sys.trunc.j_max, k_max});
        } else {
            ++rejected;
        }
    }
    out.rejection_fraction = count > 0 ? static_cast<double>(rejected) / count : 0.0;
    return out;
}

}  // namespace tori
