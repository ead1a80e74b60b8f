#include <doctest.h>

#include <random>

#include "quasitori/fourier.hpp"

using namespace tori;
using Eigen::VectorXcd;
using Eigen::VectorXd;

TEST_SUITE_BEGIN("fourier");

namespace {
// naive DFT oracle with the library convention x_i = sum_k c_k e^{ik t_i}
VectorXcd naive_analyze(const VectorXd& x) {
    const int n = static_cast<int>(x.size());
    VectorXcd c(n);
    for (int k = 0; k < n; ++k) {
        Complex acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double phase = -2.0 * M_PI * k * i / n;
            acc += x[i] * Complex(std::cos(phase), std::sin(phase));
        }
        c[k] = acc / static_cast<double>(n);
    }
    return c;
}
}  // namespace

TEST_CASE("analyze matches the naive DFT") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int n : {8, 21, 132}) {
        VectorXd x(n);
        for (int i = 0; i < n; ++i) x[i] = dist(rng);
        const FourierTransform& ft = cached_transform(n);
        VectorXcd c;
        ft.analyze(x, c);
        const VectorXcd ref = naive_analyze(x);
        CHECK((c - ref).lpNorm<Eigen::Infinity>() < 1e-13);
        VectorXd back;
        ft.synthesize(c, back);
        CHECK((back - x).lpNorm<Eigen::Infinity>() < 1e-13);
    }
}

TEST_CASE("hermitian symmetry of real input") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int n = 20;
    VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = dist(rng);
    VectorXcd c;
    cached_transform(n).analyze(x, c);
    for (int k = 1; k < n; ++k) CHECK(std::abs(c[k] - std::conj(c[n - k])) < 1e-14);
}

TEST_CASE("eval_fourier_series agrees with grid synthesis") {
    const int k_max = 5;
    VectorXcd coefs(2 * k_max + 1);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    coefs[k_max] = dist(rng);
    for (int k = 1; k <= k_max; ++k) {
        coefs[k_max + k] = Complex(dist(rng), dist(rng));
        coefs[k_max - k] = std::conj(coefs[k_max + k]);
    }
    const int n = 32;
    VectorXcd bins = VectorXcd::Zero(n);
    bins[0] = coefs[k_max];
    for (int k = 1; k <= k_max; ++k) {
        bins[k] = coefs[k_max + k];
        bins[n - k] = coefs[k_max - k];
    }
    VectorXd samples;
    cached_transform(n).synthesize(bins, samples);
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * M_PI * i / n;
        CHECK(eval_fourier_series(coefs, k_max, t).real() ==
              doctest::Approx(samples[i]).epsilon(1e-13));
    }
}

TEST_SUITE_END();
