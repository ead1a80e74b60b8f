#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

namespace tori {

using Complex = std::complex<double>;

/// Discrete Fourier transforms between n uniform samples on a period and
/// complex coefficients, with the convention
///     x(t_i) = sum_k c_k e^{i k t_i},   t_i = 2*pi*i/n,
/// so analyze() returns c_k = (1/n) sum_i x_i e^{-i k t_i} for k = 0..n-1
/// (k and k-n label the same bin). Backed by FFTW with deterministic
/// (FFTW_ESTIMATE) plans.
class FourierTransform {
public:
    explicit FourierTransform(int n);
    ~FourierTransform();

    FourierTransform(const FourierTransform&) = delete;
    FourierTransform& operator=(const FourierTransform&) = delete;

    int size() const { return n_; }

    /// Real samples -> coefficients c_0..c_{n-1} (Hermitian: c_{n-k} = conj c_k).
    void analyze(const Eigen::VectorXd& samples, Eigen::VectorXcd& coefs) const;

    /// Coefficients (full bins) -> real samples; imaginary parts are discarded.
    void synthesize(const Eigen::VectorXcd& coefs, Eigen::VectorXd& samples) const;

private:
    int n_;
    void* plan_fwd_;   // fftw_plan
    void* plan_bwd_;
    Complex* buf_in_;  // fftw-allocated work arrays
    Complex* buf_out_;
};

/// Evaluate sum_{k=-K..K} c_k e^{ikt} at a single (arbitrary) time.
Complex eval_fourier_series(const Eigen::VectorXcd& coefs_sym, int k_max, double t);

/// Thread-local cache keyed by size; lets immutable systems share transform
/// sizes across worker threads without sharing FFTW buffers.
const FourierTransform& cached_transform(int n);

}  // namespace tori
