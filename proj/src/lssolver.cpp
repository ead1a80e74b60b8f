#include "quasitori/lssolver.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "quasitori/fourier.hpp"

namespace tori {

namespace {

void require_e1(const CommutingSystem& sys, const char* who) {
    if (sys.n_vec[0] != 1) throw ModelError(std::string(who) + ": system must have n = e1");
    for (int l = 1; l < sys.r(); ++l)
        if (sys.n_vec[l] != 0) throw ModelError(std::string(who) + ": system must have n = e1");
}

// extended gcd: a x + b y = g >= 0
void egcd(long long a, long long b, long long& g, long long& x, long long& y) {
    if (b == 0) {
        g = std::llabs(a);
        x = a >= 0 ? 1 : -1;
        y = 0;
        return;
    }
    long long x1, y1;
    egcd(b, a % b, g, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
}

}  // namespace

Eigen::MatrixXi unimodular_completion(const VectorXi& n) {
    const int r = static_cast<int>(n.size());
    if (r == 0) throw ModelError("unimodular_completion: empty vector");
    long long g_all = 0;
    for (int i = 0; i < r; ++i) g_all = std::gcd(g_all, static_cast<long long>(std::abs(n[i])));
    if (g_all != 1)
        throw ModelError("unimodular_completion: gcd(n) != 1, no unimodular completion");
    if (r == 1) {
        Eigen::MatrixXi M(1, 1);
        M(0, 0) = n[0];
        return M;
    }
    VectorXi rest = n.tail(r - 1);
    long long g_rest = 0;
    for (int i = 0; i < r - 1; ++i) g_rest = std::gcd(g_rest, static_cast<long long>(std::abs(rest[i])));
    Eigen::MatrixXi M = Eigen::MatrixXi::Zero(r, r);
    if (g_rest == 0) {
        // n = (+-1, 0, ..., 0)
        M(0, 0) = n[0];
        for (int i = 1; i < r; ++i) M(i, i) = 1;
        return M;
    }
    VectorXi a = rest / static_cast<int>(g_rest);
    const Eigen::MatrixXi M1 = unimodular_completion(a);
    long long g, x, y;
    egcd(n[0], g_rest, g, x, y);  // x n0 + y g_rest = 1
    M(0, 0) = n[0];
    M.block(0, 1, 1, r - 1) = rest.transpose();
    M(1, 0) = static_cast<int>(-y);
    M.block(1, 1, 1, r - 1) = static_cast<int>(x) * a.transpose();
    M.block(2, 1, r - 2, r - 1) = M1.bottomRows(r - 2);
    return M;
}

CommutingSystem normalize_n(const CommutingSystem& sys) {
    sys.validate();
    bool already = sys.n_vec[0] == 1;
    for (int l = 1; l < sys.r(); ++l) already = already && sys.n_vec[l] == 0;
    if (already) return sys;

    const Eigen::MatrixXi Mi = unimodular_completion(sys.n_vec);
    const MatrixXd M = Mi.cast<double>();
    const MatrixXd Minv = M.inverse();
    const MatrixXd MinvT = Minv.transpose();

    CommutingSystem out = sys;
    out.Omega = M * sys.Omega;
    out.n_vec = VectorXi::Zero(sys.r());
    out.n_vec[0] = 1;
    out.frame_M = M * sys.frame();
    if (sys.f_coef.size() > 0) out.f_coef = M * sys.f_coef;

    const int r = sys.r();
    auto pull_back = [M, Minv, r](const PhasePoint& zh) {
        PhasePoint z = zh;
        z.I = Minv * zh.I;
        z.phi = M.transpose() * zh.phi;
        return z;
    };
    auto push_grad = [M, MinvT](PhasePoint g) {
        g.I = MinvT * g.I;
        g.phi = M * g.phi;
        return g;
    };

    if (!sys.F_base.empty()) {
        const Nonlinearity base = sys.F_base;
        out.F_base.value = [base, pull_back](const PhasePoint& zh, double mu) {
            return base.value(pull_back(zh), mu);
        };
        out.F_base.grad = [base, pull_back, push_grad](const PhasePoint& zh, double mu) {
            return push_grad(base.grad(pull_back(zh), mu));
        };
    }
    if (!sys.F.empty()) {
        out.F.clear();
        out.F.resize(r);
        for (int i = 0; i < r; ++i) {
            std::vector<Nonlinearity> orig = sys.F;
            VectorXd row = M.row(i).transpose();
            out.F[i].value = [orig, row, pull_back, r](const PhasePoint& zh, double mu) {
                const PhasePoint z = pull_back(zh);
                double v = 0.0;
                for (int l = 0; l < r; ++l)
                    if (!orig[l].empty() && row[l] != 0.0) v += row[l] * orig[l].value(z, mu);
                return v;
            };
            out.F[i].grad = [orig, row, pull_back, push_grad, r](const PhasePoint& zh, double mu) {
                const PhasePoint z = pull_back(zh);
                PhasePoint acc;
                bool first = true;
                for (int l = 0; l < r; ++l) {
                    if (orig[l].empty() || row[l] == 0.0) continue;
                    PhasePoint g = orig[l].grad(z, mu);
                    g *= row[l];
                    if (first) {
                        acc = g;
                        first = false;
                    } else {
                        acc += g;
                    }
                }
                if (first) acc = PhasePoint::zero(static_cast<int>(zh.I.size()), zh.n_tail());
                return push_grad(acc);
            };
        }
    }
    return out;
}

VectorXd eps_to_normalized(const CommutingSystem& sys_original, const VectorXd& eps) {
    const Eigen::MatrixXi Mi = unimodular_completion(sys_original.n_vec);
    const MatrixXd M = Mi.cast<double>();
    return M.transpose().fullPivLu().solve(eps);
}

VectorXd build_tilde_frequencies(const CommutingSystem& sys, const VectorXd& eps) {
    require_e1(sys, "build_tilde_frequencies");
    VectorXd coef = eps;
    coef[0] += 1.0;
    return sys.Omega.transpose() * coef;
}

LoopTrajectory apply_loop_operator(const VectorXd& tilde_omega, const LoopTrajectory& loop) {
    LoopTrajectory out = loop;
    for (int k = -loop.k_max; k <= loop.k_max; ++k) {
        const Complex ik(0.0, static_cast<double>(k));
        for (int l = 0; l < loop.r; ++l) {
            out.I(l, k) = ik * loop.I(l, k);
            out.phi(l, k) = ik * loop.phi(l, k);
        }
        for (int j = 0; j < loop.n_tail; ++j) {
            const double om = tilde_omega[j];
            out.p(j, k) = ik * loop.p(j, k) + om * loop.q(j, k);
            out.q(j, k) = -om * loop.p(j, k) + ik * loop.q(j, k);
        }
    }
    return out;
}

RangeElement invert_loop_operator(const VectorXd& tilde_omega, const RangeElement& w, double gamma,
                                  double tau) {
    RangeElement out = w;
    for (int l = 0; l < w.r; ++l) {
        out.I(l, 0) = 0.0;
        out.phi(l, 0) = 0.0;
    }
    for (int k = -w.k_max; k <= w.k_max; ++k) {
        const Complex ik(0.0, static_cast<double>(k));
        if (k != 0) {
            for (int l = 0; l < w.r; ++l) {
                out.I(l, k) = w.I(l, k) / ik;
                out.phi(l, k) = w.phi(l, k) / ik;
            }
        }
        for (int j = 0; j < w.n_tail; ++j) {
            const double om = tilde_omega[j];
            const double dk = static_cast<double>(k);
            const double denom_floor =
                gamma / std::pow(std::max(1.0, w.weight_index[j]), tau);
            const double small = std::min(std::abs(dk - om), std::abs(dk + om));
            if (small < denom_floor) throw SmallDenominatorError(j, k, small);
            const double det = om * om - dk * dk;
            const Complex pj = w.p(j, k), qj = w.q(j, k);
            out.p(j, k) = (ik * pj - om * qj) / det;
            out.q(j, k) = (om * pj + ik * qj) / det;
        }
    }
    return out;
}

LoopTrajectory theta_map(const CommutingSystem& sys, const VectorXd& eps, const VectorXd& beta,
                         const RangeElement& w, const KernelElement& kernel) {
    require_e1(sys, "theta_map");
    const int r = sys.r();
    const int n_tail = sys.n_tail();
    const int k_max = sys.trunc.k_max;
    const double mu = sys.mu;

    VectorXd coef = eps;  // F~ combination (1+eps1, eps2, ...)
    coef[0] += 1.0;

    LoopTrajectory theta = LoopTrajectory::zero(r, n_tail, k_max, sys.weight_index);
    if (mu == 0.0 || !sys.has_nonlinearity()) {
        for (int l = 0; l < r; ++l) {
            theta.I(l, 0) = beta.size() > 0 ? beta[l] : 0.0;
            theta.phi(l, 0) = eps[l];
        }
        return theta;
    }

    const int n_t = 4 * (k_max + 1);
    const FourierTransform& ft = cached_transform(n_t);
    const MatrixXd in = loop_samples(w, ft);
    MatrixXd out(w.n_components(), n_t);

    const bool base = sys.has_base();
    const double base_scale = base ? coef.dot(sys.f_coef) : 0.0;

    PhasePoint z = PhasePoint::zero(r, n_tail);
    for (int i = 0; i < n_t; ++i) {
        const double t = 2.0 * M_PI * i / n_t;
        for (int l = 0; l < r; ++l) {
            z.I[l] = kernel.a[l] + in(w.row_I(l), i);
            z.phi[l] = kernel.psi[l] + in(w.row_phi(l), i) + (l == 0 ? t : 0.0);
        }
        for (int j = 0; j < n_tail; ++j) {
            z.tail.p[j] = in(w.row_p(j), i);
            z.tail.q[j] = in(w.row_q(j), i);
        }
        PhasePoint g;
        if (base) {
            g = sys.F_base.grad(z, mu);
            g *= base_scale;
        } else {
            g = PhasePoint::zero(r, n_tail);
            for (int l = 0; l < r; ++l) {
                if (sys.F[l].empty() || coef[l] == 0.0) continue;
                PhasePoint gl = sys.F[l].grad(z, mu);
                gl *= coef[l];
                g += gl;
            }
        }
        for (int l = 0; l < r; ++l) {
            out(w.row_I(l), i) = -mu * g.phi[l] + (beta.size() > 0 ? beta[l] : 0.0);
            out(w.row_phi(l), i) = eps[l] + mu * g.I[l];
        }
        for (int j = 0; j < n_tail; ++j) {
            out(w.row_p(j), i) = -mu * g.tail.q[j];
            out(w.row_q(j), i) = mu * g.tail.p[j];
        }
    }
    return loop_from_samples(out, r, n_tail, k_max, sys.weight_index, ft);
}

RangeSolveResult solve_range(const CommutingSystem& sys, const VectorXd& eps,
                             const KernelElement& kernel, double tol, int max_iter) {
    require_e1(sys, "solve_range");
    const VectorXd tilde = build_tilde_frequencies(sys, eps);
    const double s = sys.trunc.s;

    RangeSolveResult res;
    res.w = LoopTrajectory::zero(sys.r(), sys.n_tail(), sys.trunc.k_max, sys.weight_index);
    double prev_step = std::numeric_limits<double>::infinity();
    int bad_streak = 0;
    for (int iter = 1; iter <= max_iter; ++iter) {
        const LoopTrajectory theta = theta_map(sys, eps, VectorXd(), res.w, kernel);
        const RangeElement p_theta = project_kernel(theta).second;
        RangeElement w_next = invert_loop_operator(tilde, p_theta, sys.trunc.gamma, sys.trunc.tau);
        LoopTrajectory diff = w_next;
        diff -= res.w;
        const double step = loop_norm(diff, s, 0.0);
        res.iterations = iter;
        res.last_step = step;
        if (!std::isfinite(step)) throw NoContractionError("range iteration diverged (nan)");
        if (std::isfinite(prev_step) && prev_step > 0.0) {
            res.contraction = step / prev_step;
            bad_streak = step > prev_step ? bad_streak + 1 : 0;
            if (bad_streak >= 3)
                throw NoContractionError("range iteration expanding (mu too large or margin too small)");
        }
        res.w = std::move(w_next);
        prev_step = step;
        if (step <= tol) break;
        if (iter == max_iter)
            throw NonConvergenceError("solve_range: no convergence within max_iter");
    }
    const LoopTrajectory theta = theta_map(sys, eps, VectorXd(), res.w, kernel);
    const RangeElement p_theta = project_kernel(theta).second;
    LoopTrajectory resid = apply_loop_operator(tilde, res.w);
    resid -= p_theta;
    res.residual = loop_norm(resid, s, 0.0);
    return res;
}

AveragedNonlinearity averaged_nonlinearity(const CommutingSystem& sys, const VectorXd& a,
                                           const VectorXd& psi, int quad_points) {
    const int r = sys.r();
    VectorXd nvec = sys.n_vec.cast<double>();

    auto mean_value_grad = [&](const VectorXd& aa, double& value, VectorXd& grad) {
        value = 0.0;
        grad = VectorXd::Zero(r);
        PhasePoint z = PhasePoint::zero(r, sys.n_tail());
        z.I = aa;
        const bool base = sys.has_base();
        const double scale = base ? nvec.dot(sys.f_coef) : 0.0;
        for (int i = 0; i < quad_points; ++i) {
            const double t = 2.0 * M_PI * i / quad_points;
            z.phi = psi + nvec * t;
            if (!sys.has_nonlinearity()) continue;
            if (base) {
                value += scale * sys.F_base.value(z, 0.0);
                PhasePoint g = sys.F_base.grad(z, 0.0);
                grad += scale * g.I;
            } else {
                for (int l = 0; l < r; ++l) {
                    if (sys.F[l].empty() || nvec[l] == 0.0) continue;
                    value += nvec[l] * sys.F[l].value(z, 0.0);
                    grad += nvec[l] * sys.F[l].grad(z, 0.0).I;
                }
            }
        }
        value /= quad_points;
        grad /= quad_points;
    };

    AveragedNonlinearity out;
    mean_value_grad(a, out.value, out.grad);

    // Hessian: Richardson-extrapolated central differences of the analytic
    // gradient average (preconditioner only; residuals stay analytic).
    out.hess = MatrixXd::Zero(r, r);
    double v_dummy;
    VectorXd gp, gm;
    for (int j = 0; j < r; ++j) {
        const double h1 = 1e-4 * std::max(1.0, std::abs(a[j]));
        VectorXd col1, col2;
        for (int pass = 0; pass < 2; ++pass) {
            const double h = pass == 0 ? h1 : 0.5 * h1;
            VectorXd ap = a, am = a;
            ap[j] += h;
            am[j] -= h;
            mean_value_grad(ap, v_dummy, gp);
            mean_value_grad(am, v_dummy, gm);
            VectorXd col = (gp - gm) / (2.0 * h);
            (pass == 0 ? col1 : col2) = col;
        }
        out.hess.col(j) = (4.0 * col2 - col1) / 3.0;
    }
    out.hess = 0.5 * (out.hess + out.hess.transpose()).eval();
    return out;
}

AStarResult solve_a_star(const CommutingSystem& sys, const VectorXd& eps_over_mu,
                         const VectorXd& a_guess) {
    AStarResult res;
    res.a = a_guess;
    const VectorXd psi = VectorXd::Zero(sys.r());
    for (int it = 1; it <= 50; ++it) {
        res.iterations = it;
        const AveragedNonlinearity avg = averaged_nonlinearity(sys, res.a, psi);
        const VectorXd residual = avg.grad + eps_over_mu;
        if (residual.lpNorm<Eigen::Infinity>() <= 1e-12) break;
        Eigen::FullPivLU<MatrixXd> lu(avg.hess);
        if (!lu.isInvertible())
            throw SingularHessianError("solve_a_star: averaged Hessian is singular");
        res.a += lu.solve(-residual);
        if (it == 50) throw NonConvergenceError("solve_a_star: Newton did not converge");
    }
    const VectorXd a_orig = sys.frame().fullPivLu().solve(res.a);
    res.on_boundary = a_orig.minCoeff() < 1e-10;
    return res;
}

KernelSolveResult solve_kernel(const CommutingSystem& sys, const VectorXd& eps,
                               const VectorXd& psi, double tol, double beta_tol,
                               const VectorXd* a_star_hint) {
    require_e1(sys, "solve_kernel");
    const int r = sys.r();
    const double mu = sys.mu;

    KernelSolveResult res;
    if (mu == 0.0) {
        if (eps.lpNorm<Eigen::Infinity>() > 0.0)
            throw ModelError("solve_kernel: mu = 0 admits only eps = 0");
        res.a = a_star_hint ? *a_star_hint : VectorXd::Ones(r);
        res.alpha = VectorXd::Zero(r);
        res.beta = VectorXd::Zero(r);
        res.w = LoopTrajectory::zero(r, sys.n_tail(), sys.trunc.k_max, sys.weight_index);
        return res;
    }

    VectorXd a_star;
    if (a_star_hint) {
        a_star = *a_star_hint;
    } else {
        a_star = solve_a_star(sys, eps / mu, VectorXd::Ones(r)).a;
    }
    const MatrixXd hess = averaged_nonlinearity(sys, a_star, VectorXd::Zero(r)).hess;
    Eigen::FullPivLU<MatrixXd> lu(hess);
    if (!lu.isInvertible())
        throw SingularHessianError("solve_kernel: averaged Hessian is singular at a_star");

    VectorXd a = a_star;
    RangeSolveResult rs;
    VectorXd G(r), minus_beta(r);
    for (int it = 1; it <= 30; ++it) {
        res.newton_iterations = it;
        rs = solve_range(sys, eps, {a, psi}, tol);
        const LoopTrajectory theta = theta_map(sys, eps, VectorXd(), rs.w, {a, psi});
        const KernelElement q_theta = project_kernel(theta).first;
        G = q_theta.psi;
        minus_beta = q_theta.a;
        res.kernel_residual = G.lpNorm<Eigen::Infinity>();
        if (res.kernel_residual <= tol) break;
        a += lu.solve(-G / mu);
        if (it == 30) throw NonConvergenceError("solve_kernel: Newton did not converge");
    }
    res.a = a;
    res.alpha = (a - a_star) / mu;
    res.beta = -minus_beta;
    res.w = rs.w;
    res.range_residual = rs.residual;
    if (res.beta.lpNorm<Eigen::Infinity>() > beta_tol)
        throw BetaNotSmallError(res.beta.lpNorm<Eigen::Infinity>(), beta_tol);
    return res;
}

TorusResult assemble_torus(const CommutingSystem& sys, const VectorXd& eps, int psi_grid,
                           double tol, double beta_tol) {
    require_e1(sys, "assemble_torus");
    if (psi_grid < 1) throw ModelError("assemble_torus: psi_grid must be >= 1");
    const int r = sys.r();
    const double mu = sys.mu;

    TorusResult res;
    res.eps = eps;
    res.mu = mu;
    res.psi_grid = psi_grid;
    if (mu != 0.0) {
        res.a_star = solve_a_star(sys, eps / mu, VectorXd::Ones(r)).a;
    } else {
        res.a_star = VectorXd::Ones(r);
    }

    int n_nodes = 1;
    for (int d = 0; d < r; ++d) n_nodes *= psi_grid;

    for (int node = 0; node < n_nodes; ++node) {
        VectorXd psi(r);
        int idx = node;
        for (int d = r - 1; d >= 0; --d) {
            psi[d] = 2.0 * M_PI * (idx % psi_grid) / psi_grid;
            idx /= psi_grid;
        }
        KernelSolveResult ks = solve_kernel(sys, eps, psi, tol, beta_tol, &res.a_star);

        LoopTrajectory zeta = ks.w;
        for (int l = 0; l < r; ++l) {
            zeta.I(l, 0) += ks.a[l];
            zeta.phi(l, 0) += psi[l];
        }
        const PhasePoint z0 = zeta.at_time(0.0);

        PhasePoint gap = z0;
        gap.I -= res.a_star;
        gap.phi.setZero();  // the reference torus spans every angle
        const double dist =
            phase_norm(gap, sys.weight_index, sys.trunc.s, sys.trunc.sigma);

        if (mu != 0.0) {
            LoopTrajectory rel = zeta;
            for (int l = 0; l < r; ++l) {
                rel.I(l, 0) -= res.a_star[l];
                rel.phi(l, 0) -= psi[l];
            }
            res.loop_bound_constant = std::max(
                res.loop_bound_constant,
                loop_norm(rel, sys.trunc.s, sys.trunc.sigma) / std::abs(mu));
        }

        res.psi.push_back(psi);
        res.alpha.push_back(ks.alpha);
        res.beta.push_back(ks.beta);
        res.loops.push_back(std::move(zeta));
        res.z0.push_back(z0);
        res.beta_residual = std::max(res.beta_residual, ks.beta.lpNorm<Eigen::Infinity>());
        res.range_residual = std::max(res.range_residual, ks.range_residual);
        res.kernel_residual = std::max(res.kernel_residual, ks.kernel_residual);
        res.distance_to_reference = std::max(res.distance_to_reference, dist);
    }
    return res;
}

double discover_mu_star(CommutingSystem sys, const VectorXd& eps_over_mu, const VectorXd& psi,
                        double tol, double mu_hi) {
    require_e1(sys, "discover_mu_star");
    const AStarResult astar = [&] {
        CommutingSystem probe = sys;
        probe.mu = 1.0;  // a_star depends only on eps/mu
        return solve_a_star(probe, eps_over_mu, VectorXd::Ones(sys.r()));
    }();
    auto contracts = [&](double mu) {
        sys.mu = mu;
        try {
            solve_range(sys, mu * eps_over_mu, {astar.a, psi}, tol);
            return true;
        } catch (const NoContractionError&) {
            return false;
        } catch (const SmallDenominatorError&) {
            return false;
        } catch (const ModelError&) {
            return false;
        } catch (const NonConvergenceError&) {
            return false;
        }
    };
    double lo = 0.0, hi = mu_hi;
    double mu = 1e-4;
    while (mu < mu_hi && contracts(mu)) {
        lo = mu;
        mu *= 2.0;
    }
    hi = std::min(mu, mu_hi);
    for (int it = 0; it < 10; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (contracts(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace tori
