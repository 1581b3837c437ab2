#include "l2sk/dynamics.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace l2sk;

namespace {
const PhysicalConstants kC;
}

TEST_CASE("alpha/beta series values at t=0") {
    const AlphaBeta ab = alpha_beta(0.0, kC);
    // hand evaluation of the truncated series at e = 0.0549, phi = 0
    CHECK(std::abs(ab.alpha - (-0.051886)) < 1e-6);
    CHECK(std::abs(ab.beta - 0.117335) < 1e-6);

    PhysicalConstants c0 = kC;
    c0.ecc = 0.0;
    c0.phi = 1.3;
    const AlphaBeta zero = alpha_beta(0.0, c0);
    CHECK(zero.alpha == 0.0);
    CHECK(zero.beta == 0.0);
    CHECK(zero.beta_dot == 0.0);
}

TEST_CASE("alpha/beta zero-mean structure over one period") {
    // trapezoid mean over [0, 2pi]; the cosine terms integrate to zero, the
    // constant 0.5 e^2 term in alpha survives.
    const int n = 20000;
    double mean_a = 0.0;
    double mean_b = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * M_PI * i / n;
        const AlphaBeta ab = alpha_beta(t, kC);
        mean_a += ab.alpha;
        mean_b += ab.beta;
    }
    mean_a /= n;
    mean_b /= n;
    CHECK(std::abs(mean_a - 0.5 * kC.ecc * kC.ecc) < 1e-12);
    CHECK(std::abs(mean_b) < 1e-12);
}

TEST_CASE("beta_dot is the analytic derivative of the truncated beta") {
    const double h = 1e-6;
    for (double t : {0.0, 0.7, 2.5, 5.9}) {
        const double fd =
            (alpha_beta(t + h, kC).beta - alpha_beta(t - h, kC).beta) / (2.0 * h);
        CHECK(alpha_beta(t, kC).beta_dot == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("series perturbation keeps xi2 = xi1^2 exactly") {
    for (double t : {0.0, 1.1, 4.2}) {
        const Vec4 xi = series_perturbation(t, kC);
        CHECK(xi(1) == xi(0) * xi(0));
    }
}

TEST_CASE("srp disturbance partition") {
    const Vec3 d0 = srp_disturbance(0.0, kC);
    CHECK(d0(0) == doctest::Approx(kC.srp_accel).epsilon(1e-14));
    CHECK(d0(1) == doctest::Approx(0.0).scale(kC.srp_accel));
    CHECK(d0(2) == 0.0);

    const Vec3 dq = srp_disturbance(M_PI / (2.0 * kC.zeta), kC);
    CHECK(dq(0) == doctest::Approx(0.0).scale(kC.srp_accel));
    CHECK(dq(1) == doctest::Approx(kC.srp_accel).epsilon(1e-12));

    PhysicalConstants c0 = kC;
    c0.srp_accel = 0.0;
    CHECK(srp_disturbance(0.33, c0).norm() == 0.0);

    for (double t : {0.1, 0.9, 3.3, 8.8}) {
        const Vec3 d = srp_disturbance(t, kC);
        CHECK(d(0) + d(1) == doctest::Approx(kC.srp_accel).epsilon(1e-14));
        CHECK(d(0) >= 0.0);
        CHECK(d(1) >= 0.0);
    }
}

TEST_CASE("libration points match the quoted Earth-Moon values") {
    const LibrationPoints lp = libration_points(kC);
    CHECK(std::abs(lp.l2 - 1.155682) < 1e-6);
    CHECK(std::abs(lp.l1 - 0.8369147) < 1e-6);
    CHECK(std::abs(lp.l3 - (-1.0050627)) < 1e-6);
}

TEST_CASE("vector field: equilibrium, kinematics, singularity guard") {
    const LibrationPoints lp = libration_points(kC);
    Vec6 qstar = Vec6::Zero();
    qstar(0) = 1.155682; // the 6-digit quoted value
    CHECK(vector_field(qstar, Vec4::Zero(), Vec3::Zero(), Vec3::Zero(), kC).norm() < 1e-5);

    qstar(0) = lp.l2; // root-found equilibrium
    CHECK(vector_field(qstar, Vec4::Zero(), Vec3::Zero(), Vec3::Zero(), kC).norm() < 1e-12);

    Vec6 q;
    q << 0.9, 0.1, -0.2, 0.03, -0.01, 0.2;
    const Vec6 f = vector_field(q, Vec4::Zero(), Vec3::Zero(), Vec3::Zero(), kC);
    CHECK(f.head<3>() == q.tail<3>());

    Vec6 at_moon = Vec6::Zero();
    at_moon(0) = 1.0 - kC.mu;
    CHECK_THROWS_AS(vector_field(at_moon, Vec4::Zero(), Vec3::Zero(), Vec3::Zero(), kC),
                    SingularStateError);
}

TEST_CASE("z -> -z equivariance of the unperturbed dynamics") {
    Vec6 q;
    q << 1.05, 0.08, 0.11, 0.02, -0.04, 0.05;
    Vec6 qf = q;
    qf(2) = -qf(2);
    qf(5) = -qf(5);
    const Vec6 f = vector_field(q, Vec4::Zero(), Vec3::Zero(), Vec3::Zero(), kC);
    const Vec6 ff = vector_field(qf, Vec4::Zero(), Vec3::Zero(), Vec3::Zero(), kC);
    CHECK(ff(0) == doctest::Approx(f(0)).epsilon(1e-15));
    CHECK(ff(1) == doctest::Approx(f(1)).epsilon(1e-15));
    CHECK(ff(2) == doctest::Approx(-f(2)).epsilon(1e-15));
    CHECK(ff(3) == doctest::Approx(f(3)).epsilon(1e-15));
    CHECK(ff(4) == doctest::Approx(f(4)).epsilon(1e-15));
    CHECK(ff(5) == doctest::Approx(-f(5)).epsilon(1e-15));
}

TEST_CASE("linearization at L2: eta, block structure, spectrum") {
    const LinearModel lm = linearize_at_l2(kC);
    // The quoted eta = 3.194075 is inconsistent with the quoted L2 for any
    // mu near the Earth-Moon value; the formula gives 3.1904252.
    CHECK(lm.eta == doctest::Approx(3.1904252).epsilon(1e-6));
    CHECK(lm.a_matrix(3, 0) == doctest::Approx(1.0 + 2.0 * lm.eta).epsilon(1e-12));
    CHECK(lm.a_matrix.block<3, 3>(0, 3).isIdentity(0.0));
    CHECK(lm.a_matrix.block<3, 3>(0, 0).isZero(0.0));

    const Eigen::EigenSolver<Mat6> es(lm.a_matrix);
    bool has_unstable = false;
    bool has_oscillatory = false;
    for (int i = 0; i < 6; ++i) {
        const std::complex<double> ev = es.eigenvalues()(i);
        if (ev.real() > 1e-9 && std::abs(ev.imag()) < 1e-9) has_unstable = true;
        if (std::abs(ev.real()) < 1e-9 && std::abs(ev.imag()) > 1.0) has_oscillatory = true;
    }
    CHECK(has_unstable);
    CHECK(has_oscillatory);
}

TEST_CASE("finite-difference Jacobian matches linearize_at_l2") {
    const LinearModel lm = linearize_at_l2(kC);
    Vec6 qstar = Vec6::Zero();
    qstar(0) = lm.l2;
    const double h = 1e-6;
    Mat6 fd;
    for (int j = 0; j < 6; ++j) {
        Vec6 qp = qstar;
        Vec6 qm = qstar;
        qp(j) += h;
        qm(j) -= h;
        fd.col(j) = (vector_field(qp, Vec4::Zero(), Vec3::Zero(), Vec3::Zero(), kC) -
                     vector_field(qm, Vec4::Zero(), Vec3::Zero(), Vec3::Zero(), kC)) /
                    (2.0 * h);
    }
    CHECK((fd - lm.a_matrix).norm() / lm.a_matrix.norm() < 1e-6);
}

TEST_CASE("analytic state Jacobian matches finite differences off-equilibrium") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    for (int trial = 0; trial < 5; ++trial) {
        Vec6 q;
        q << 1.1 + dist(rng), dist(rng), dist(rng), dist(rng), dist(rng), dist(rng);
        Vec4 xi = 0.1 * Vec4(dist(rng), dist(rng), dist(rng), dist(rng));
        xi(3) *= 0.01;
        const Mat6 a = state_jacobian(q, xi, kC);
        const double h = 1e-6;
        Mat6 fd;
        for (int j = 0; j < 6; ++j) {
            Vec6 qp = q;
            Vec6 qm = q;
            qp(j) += h;
            qm(j) -= h;
            fd.col(j) = (vector_field(qp, xi, Vec3::Zero(), Vec3::Zero(), kC) -
                         vector_field(qm, xi, Vec3::Zero(), Vec3::Zero(), kC)) /
                        (2.0 * h);
        }
        CHECK((fd - a).norm() / a.norm() < 1e-8);
    }
}

TEST_CASE("analytic P(q) = df/dxi matches finite differences") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-0.05, 0.05);
    // step per column: the xi4 direction shifts the primaries by 1/mu, so a
    // smaller step keeps the central-difference truncation below the target
    const double hs[4] = {1e-7, 1e-7, 1e-7, 3e-8};
    for (int trial = 0; trial < 5; ++trial) {
        Vec6 q;
        q << 1.13 + dist(rng), dist(rng), dist(rng), dist(rng), dist(rng), dist(rng);
        const Mat64 p = xi_jacobian(q, kC);
        Mat64 fd;
        for (int j = 0; j < 4; ++j) {
            Vec4 xp = Vec4::Zero();
            Vec4 xm = Vec4::Zero();
            xp(j) += hs[j];
            xm(j) -= hs[j];
            fd.col(j) = (vector_field(q, xp, Vec3::Zero(), Vec3::Zero(), kC) -
                         vector_field(q, xm, Vec3::Zero(), Vec3::Zero(), kC)) /
                        (2.0 * hs[j]);
        }
        CHECK((fd - p).norm() / p.norm() < 1e-8);
    }
}
