#include "quasitori/fourier.hpp"

#include <map>
#include <memory>
#include <mutex>

#include <fftw3.h>

namespace tori {

namespace {
// FFTW plan creation is not thread-safe; execution on the plan's own buffers
// is serialized per FourierTransform instance by the callers (one instance
// per solve context).
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

FourierTransform::FourierTransform(int n) : n_(n) {
    buf_in_ = reinterpret_cast<Complex*>(fftw_alloc_complex(static_cast<size_t>(n)));
    buf_out_ = reinterpret_cast<Complex*>(fftw_alloc_complex(static_cast<size_t>(n)));
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_fwd_ = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(buf_in_),
                                 reinterpret_cast<fftw_complex*>(buf_out_), FFTW_FORWARD,
                                 FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(buf_in_),
                                 reinterpret_cast<fftw_complex*>(buf_out_), FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
}

FourierTransform::~FourierTransform() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
    fftw_free(buf_in_);
    fftw_free(buf_out_);
}

void FourierTransform::analyze(const Eigen::VectorXd& samples, Eigen::VectorXcd& coefs) const {
    for (int i = 0; i < n_; ++i) buf_in_[i] = Complex(samples[i], 0.0);
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    coefs.resize(n_);
    const double inv = 1.0 / n_;
    for (int i = 0; i < n_; ++i) coefs[i] = buf_out_[i] * inv;
}

void FourierTransform::synthesize(const Eigen::VectorXcd& coefs, Eigen::VectorXd& samples) const {
    for (int i = 0; i < n_; ++i) buf_in_[i] = coefs[i];
    fftw_execute(static_cast<fftw_plan>(plan_bwd_));
    samples.resize(n_);
    for (int i = 0; i < n_; ++i) samples[i] = buf_out_[i].real();
}

const FourierTransform& cached_transform(int n) {
    thread_local std::map<int, std::unique_ptr<FourierTransform>> cache;
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, std::make_unique<FourierTransform>(n)).first;
    return *it->second;
}

Complex eval_fourier_series(const Eigen::VectorXcd& coefs_sym, int k_max, double t) {
    Complex sum = coefs_sym[k_max];  // k = 0 entry
    const Complex rot(std::cos(t), std::sin(t));
    Complex ep = 1.0, em = 1.0;
    for (int k = 1; k <= k_max; ++k) {
        ep *= rot;
        em *= std::conj(rot);
        sum += coefs_sym[k_max + k] * ep + coefs_sym[k_max - k] * em;
    }
    return sum;
}

}  // namespace tori
