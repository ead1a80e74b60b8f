#include <doctest.h>

#include <random>

#include "quasitori/core.hpp"
#include "test_helpers.hpp"

using namespace tori;
using tori::testing::random_point;
using tori::testing::table_system;

TEST_SUITE_BEGIN("core");

TEST_CASE("truncation invariants are enforced") {
    TruncationParams t;
    t.r = 2;
    t.j_min = 3;
    t.j_max = 10;
    t.k_max = 4;
    t.tau = 1.0;
    t.gamma = 0.1;
    CHECK_NOTHROW(t.validate(1));
    SUBCASE("j ordering") {
        t.j_max = 2;
        CHECK_THROWS_AS(t.validate(1), ModelError);
    }
    SUBCASE("gamma positive") {
        t.gamma = 0.0;
        CHECK_THROWS_AS(t.validate(1), ModelError);
    }
    SUBCASE("tau bounded by the smoothing order") { CHECK_THROWS_AS(t.validate(0), ModelError); }
}

TEST_CASE("weighted norm matches the definition") {
    WeightedSeq seq = WeightedSeq::zero(3);
    seq.p << 1.0, 0.5, 0.0;
    seq.q << 0.0, 0.5, 2.0;
    VectorXd w(3);
    w << 0.0, 2.0, 3.0;  // weight indices ([0] = max(1,0) = 1)
    const double s = 1.5, sigma = 0.1;
    double expect = 0.0;
    expect += std::pow(1.0, 3.0) * std::exp(0.0) * 1.0;
    expect += std::pow(2.0, 3.0) * std::exp(0.4) * 0.5;
    expect += std::pow(3.0, 3.0) * std::exp(0.6) * 4.0;
    CHECK(weighted_norm_sq(seq, w, s, sigma) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("norm monotone in s and sigma") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        WeightedSeq seq = WeightedSeq::zero(6);
        VectorXd w(6);
        for (int i = 0; i < 6; ++i) {
            seq.p[i] = dist(rng);
            seq.q[i] = dist(rng);
            w[i] = 1.0 + i;
        }
        const double n_low = weighted_norm_sq(seq, w, 1.0, 0.0);
        const double n_high_s = weighted_norm_sq(seq, w, 1.7, 0.0);
        const double n_high_sig = weighted_norm_sq(seq, w, 1.0, 0.2);
        CHECK(n_high_s >= n_low);
        CHECK(n_high_sig >= n_low);
    }
}

TEST_CASE("poisson tensor examples") {
    PhasePoint z = PhasePoint::zero(1, 1);
    CHECK(phase_norm(poisson_tensor_apply(z), VectorXd::Ones(1), 1.0, 0.0) == 0.0);

    z.I[0] = 1.0;
    const PhasePoint jz = poisson_tensor_apply(z);
    CHECK(jz.I[0] == 0.0);
    CHECK(jz.phi[0] == 1.0);
    CHECK(jz.tail.p[0] == 0.0);
    CHECK(jz.tail.q[0] == 0.0);
}

TEST_CASE("J squared is minus the identity") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const PhasePoint z = random_point(2, 5, rng);
        const PhasePoint jjz = poisson_tensor_apply(poisson_tensor_apply(z));
        PhasePoint sum = jjz + z;
        CHECK(phase_norm(sum, VectorXd::Ones(5), 0.0, 0.0) < 1e-15);
    }
}

TEST_CASE("J is antisymmetric for the weak product") {
    std::mt19937 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const PhasePoint z = random_point(3, 4, rng);
        const PhasePoint w = random_point(3, 4, rng);
        CHECK(weak_dot(z, poisson_tensor_apply(w)) ==
              doctest::Approx(-weak_dot(poisson_tensor_apply(z), w)).epsilon(1e-14));
    }
}

TEST_CASE("hamiltonian value trivial cases") {
    CommutingSystem sys = table_system();
    PhasePoint z = PhasePoint::zero(2, sys.n_tail());
    z.I << 0.7, -0.2;
    CHECK(hamiltonian_value(sys, 0, z) == 0.7);
    CHECK(hamiltonian_value(sys, 1, z) == -0.2);
    CHECK_THROWS_AS(hamiltonian_value(sys, 2, z), ModelError);

    // single excited tail slot: Omega = 3, p = q = 1 contributes 3
    CommutingSystem one = sys;
    one.trunc.r = 1;
    one.trunc.j_min = 2;
    one.trunc.j_max = 2;
    one.n_vec = Eigen::VectorXi::Ones(1);
    one.Omega = Eigen::MatrixXd::Constant(1, 1, 3.0);
    one.weight_index = VectorXd::Constant(1, 2.0);
    one.frame_M = Eigen::MatrixXd::Identity(1, 1);
    PhasePoint y = PhasePoint::zero(1, 1);
    y.tail.p[0] = 1.0;
    y.tail.q[0] = 1.0;
    CHECK(hamiltonian_value(one, 0, y) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("bracket antisymmetry and vanishing for quadratic systems") {
    CommutingSystem sys = table_system();
    std::mt19937 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const PhasePoint z = random_point(2, sys.n_tail(), rng);
        const double b01 = poisson_bracket(sys, 0, 1, z);
        const double b10 = poisson_bracket(sys, 1, 0, z);
        CHECK(std::abs(poisson_bracket(sys, 0, 0, z)) < 1e-15);
        CHECK(std::abs(b01) < 1e-13);  // mu = 0: quadratic integrable parts commute
        CHECK(b01 == doctest::Approx(-b10).epsilon(1e-12));
    }
}

TEST_SUITE_END();
