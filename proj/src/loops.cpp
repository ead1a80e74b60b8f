#include "quasitori/loops.hpp"

#include <cmath>

namespace tori {

LoopTrajectory LoopTrajectory::zero(int r, int n_tail, int k_max, const VectorXd& weight_index) {
    LoopTrajectory loop;
    loop.r = r;
    loop.n_tail = n_tail;
    loop.k_max = k_max;
    loop.weight_index = weight_index;
    loop.coef = MatrixXcd::Zero(2 * r + 2 * n_tail, 2 * k_max + 1);
    return loop;
}

void LoopTrajectory::enforce_reality() {
    for (int row = 0; row < n_components(); ++row) {
        coef(row, col(0)) = Complex(coef(row, col(0)).real(), 0.0);
        for (int k = 1; k <= k_max; ++k) {
            const Complex avg = 0.5 * (coef(row, col(k)) + std::conj(coef(row, col(-k))));
            coef(row, col(k)) = avg;
            coef(row, col(-k)) = std::conj(avg);
        }
    }
}

PhasePoint LoopTrajectory::at_time(double t) const {
    PhasePoint z = PhasePoint::zero(r, n_tail);
    const auto eval = [&](int row) {
        return eval_fourier_series(coef.row(row).transpose(), k_max, t).real();
    };
    for (int l = 0; l < r; ++l) {
        z.I[l] = eval(row_I(l));
        z.phi[l] = eval(row_phi(l));
    }
    for (int j = 0; j < n_tail; ++j) {
        z.tail.p[j] = eval(row_p(j));
        z.tail.q[j] = eval(row_q(j));
    }
    return z;
}

double loop_norm(const LoopTrajectory& loop, double s, double sigma, SigmaWeight mode) {
    double acc = 0.0;
    VectorXd tail_wt(loop.n_tail);
    for (int j = 0; j < loop.n_tail; ++j) {
        const double w = loop.weight_index[j];
        tail_wt[j] = std::pow(std::max(1.0, w), 2.0 * s) *
                     (mode == SigmaWeight::SpaceModes ? std::exp(2.0 * sigma * w) : 1.0);
    }
    for (int k = -loop.k_max; k <= loop.k_max; ++k) {
        const double sob = 1.0 + static_cast<double>(k) * k;
        const double time_wt =
            mode == SigmaWeight::TimeModes ? std::exp(2.0 * sigma * std::abs(k)) : 1.0;
        double slice = 0.0;
        for (int l = 0; l < loop.r; ++l)
            slice += std::norm(loop.I(l, k)) + std::norm(loop.phi(l, k));
        double tail = 0.0;
        for (int j = 0; j < loop.n_tail; ++j)
            tail += (std::norm(loop.p(j, k)) + std::norm(loop.q(j, k))) * tail_wt[j];
        acc += sob * (slice + tail * time_wt);
    }
    return std::sqrt(acc);
}

std::pair<KernelElement, RangeElement> project_kernel(const LoopTrajectory& loop) {
    KernelElement kernel;
    kernel.a.resize(loop.r);
    kernel.psi.resize(loop.r);
    RangeElement range = loop;
    for (int l = 0; l < loop.r; ++l) {
        kernel.a[l] = loop.I(l, 0).real();
        kernel.psi[l] = loop.phi(l, 0).real();
        range.I(l, 0) = 0.0;
        range.phi(l, 0) = 0.0;
    }
    return {kernel, range};
}

bool is_range_element(const LoopTrajectory& loop, double tol) {
    for (int l = 0; l < loop.r; ++l)
        if (std::abs(loop.I(l, 0)) > tol || std::abs(loop.phi(l, 0)) > tol) return false;
    return true;
}

MatrixXd loop_samples(const LoopTrajectory& loop, const FourierTransform& ft) {
    const int n = ft.size();
    if (n < loop.n_cols()) throw ModelError("loop_samples: grid too coarse for k_max");
    MatrixXd samples(loop.n_components(), n);
    VectorXcd bins(n);
    VectorXd row(n);
    for (int comp = 0; comp < loop.n_components(); ++comp) {
        bins.setZero();
        bins[0] = loop.coef(comp, loop.col(0));
        for (int k = 1; k <= loop.k_max; ++k) {
            bins[k] = loop.coef(comp, loop.col(k));
            bins[n - k] = loop.coef(comp, loop.col(-k));
        }
        ft.synthesize(bins, row);
        samples.row(comp) = row.transpose();
    }
    return samples;
}

LoopTrajectory loop_from_samples(const MatrixXd& samples, int r, int n_tail, int k_max,
                                 const VectorXd& weight_index, const FourierTransform& ft) {
    const int n = ft.size();
    if (samples.cols() != n) throw ModelError("loop_from_samples: sample count mismatch");
    if (n < 2 * k_max + 1) throw ModelError("loop_from_samples: grid too coarse for k_max");
    LoopTrajectory loop = LoopTrajectory::zero(r, n_tail, k_max, weight_index);
    VectorXcd bins(n);
    VectorXd row(n);
    for (int comp = 0; comp < loop.n_components(); ++comp) {
        row = samples.row(comp).transpose();
        ft.analyze(row, bins);
        loop.coef(comp, loop.col(0)) = bins[0];
        for (int k = 1; k <= k_max; ++k) {
            loop.coef(comp, loop.col(k)) = bins[k];
            loop.coef(comp, loop.col(-k)) = bins[n - k];
        }
    }
    loop.enforce_reality();
    return loop;
}

}  // namespace tori
