#include "l2sk/sampled.hpp"

#include "l2sk/exosystem.hpp"

#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

using namespace l2sk;

namespace {
const PhysicalConstants kC;
const SamplingConfig kCfg;
} // namespace

TEST_CASE("sr_map identity at delta = 0 and determinism") {
    Vec6 q;
    q << 1.1, 0.01, 0.05, 0.0, 0.1, 0.0;
    const Vec3 u(0.01, 0.0, -0.02);
    CHECK(sr_map(q, Vec4::Zero(), u, 0.0, kCfg, kC) == q);

    const Vec6 a = sr_map(q, Vec4::Zero(), u, kCfg.delta_bar(), kCfg, kC);
    const Vec6 b = sr_map(q, Vec4::Zero(), u, kCfg.delta_bar(), kCfg, kC);
    CHECK(a == b); // bit-identical
}

TEST_CASE("sr_map agrees with the matrix exponential of the tangent model") {
    const LinearModel lm = linearize_at_l2(kC);
    Vec6 qstar = Vec6::Zero();
    qstar(0) = lm.l2;

    const double delta = kCfg.delta_bar();
    const Mat6 expm = (lm.a_matrix * delta).exp();
    for (double scale : {1e-6, 1e-5, 1e-4}) {
        Vec6 dq;
        dq << scale, 0.3 * scale, -0.5 * scale, 0.0, 0.2 * scale, 0.1 * scale;
        const Vec6 flowed = sr_map(qstar + dq, Vec4::Zero(), Vec3::Zero(), delta, kCfg, kC);
        const Vec6 lin = qstar + expm * dq;
        // remainder is quadratic in the displacement
        CHECK((flowed - lin).norm() < 50.0 * scale * scale + 1e-13);
    }
}

TEST_CASE("integrator self-convergence is fourth order") {
    Vec6 q;
    q << 1.12, 0.03, 0.08, 0.02, 0.18, -0.01;
    const Vec3 u(0.05, -0.1, 0.02);
    const Vec4 xi(0.05, 0.0025, 0.02, -0.0005);

    // Step sizes coarse enough that the truncation error sits well above
    // roundoff: tie the nominal half-period to the integration interval.
    const double delta = 0.05;
    SamplingConfig base = kCfg;
    base.delta = 2.0 * delta;

    SamplingConfig fine = base;
    fine.substeps = 160; // 10x oversampled reference
    const Vec6 ref = sr_map(q, xi, u, delta, fine, kC);

    SamplingConfig c8 = base;
    c8.substeps = 8;
    SamplingConfig c16 = base;
    c16.substeps = 16;
    const double e8 = (sr_map(q, xi, u, delta, c8, kC) - ref).norm();
    const double e16 = (sr_map(q, xi, u, delta, c16, kC) - ref).norm();
    CHECK(e16 > 1e-15);
    const double ratio = e8 / e16;
    CHECK(ratio > 8.0);   // nominal 16 for a 4th-order method
    CHECK(ratio < 40.0);
}

TEST_CASE("default substeps keep the flow below 1e-10 of an oversampled reference") {
    Vec6 q;
    q << 1.15, 0.0, 0.1, 0.0, 0.2, 0.0;
    const Vec3 u(0.0, 0.05, 0.0);
    SamplingConfig fine = kCfg;
    fine.substeps = 160;
    const Vec6 a = sr_map(q, Vec4::Zero(), u, kCfg.delta_bar(), kCfg, kC);
    const Vec6 b = sr_map(q, Vec4::Zero(), u, kCfg.delta_bar(), fine, kC);
    CHECK((a - b).norm() < 1e-10);
}

TEST_CASE("semigroup under equal holds") {
    Vec6 q;
    q << 1.1, -0.02, 0.04, 0.05, 0.12, 0.03;
    const Vec3 u(0.02, 0.03, -0.01);
    const Vec4 xi(0.08, 0.0064, -0.03, -0.0004);
    const double a = 0.004;
    const double b = 0.006;
    const Vec6 once = sr_map(q, xi, u, a + b, kCfg, kC);
    const Vec6 twice = sr_map(sr_map(q, xi, u, a, kCfg, kC), xi, u, b, kCfg, kC);
    CHECK((once - twice).norm() <= 1e-10);
}

TEST_CASE("mr_map composition") {
    Vec6 q;
    q << 1.13, 0.02, 0.07, -0.03, 0.16, 0.02;
    const Vec4 xi(0.04, 0.0016, 0.01, -0.0003);
    const Vec3 u1(0.1, 0.0, -0.05);
    const Vec3 u2(-0.02, 0.08, 0.01);
    const double delta = kCfg.delta;

    SUBCASE("equal holds reduce to the single-rate map") {
        const Vec6 a = mr_map(q, xi, u1, u1, delta, kCfg, kC);
        const Vec6 b = sr_map(q, xi, u1, delta, kCfg, kC);
        CHECK((a - b).norm() < 1e-11);
    }
    SUBCASE("piecewise-constant single pass equals the composition") {
        const Vec6 composed = mr_map(q, xi, u1, u2, delta, kCfg, kC);
        const Vec6 direct =
            sr_map(sr_map(q, xi, u1, 0.5 * delta, kCfg, kC), xi, u2, 0.5 * delta, kCfg, kC);
        CHECK((composed - direct).norm() == 0.0);
    }
    SUBCASE("short delta approaches identity") {
        const Vec6 near = mr_map(q, xi, u1, u2, 1e-9, kCfg, kC);
        CHECK((near - q).norm() < 1e-8);
    }
}

TEST_CASE("relative-degree probe") {
    Vec6 q;
    q << 1.15, 0.01, 0.1, 0.0, 0.18, 0.0;
    const Vec4 xi = Vec4::Zero();

    // continuous-time first derivative has no feedthrough: C B = 0 exactly
    CHECK((output_matrix() * input_matrix()).norm() == 0.0);

    const double d1 = 0.01;
    const Mat3 s1 = relative_degree_probe(q, xi, d1, kCfg, kC);
    const Mat3 s2 = relative_degree_probe(q, xi, 0.5 * d1, kCfg, kC);

    // leading term (delta^2/2) C (df/dq) B = (delta^2/2) I
    CHECK((s1 - 0.5 * d1 * d1 * Mat3::Identity()).norm() < 0.1 * 0.5 * d1 * d1);
    const double ratio = s1.norm() / s2.norm();
    CHECK(ratio > 3.6);
    CHECK(ratio < 4.4);
    CHECK(std::abs(s1.determinant()) > 1e-18);
}

TEST_CASE("plant mode differs from hold mode when e > 0") {
    const LinearModel lm = linearize_at_l2(kC);
    Vec6 q = Vec6::Zero();
    q(0) = lm.l2;
    q(2) = 0.05;
    const Vec3 u = Vec3::Zero();
    const double dt = kCfg.delta_bar();

    const Vec4 xi0 = series_perturbation(0.0, kC);
    const Vec6 held = sr_map(q, xi0, u, dt, kCfg, kC);
    const Vec6 truth = plant_step(q, 0.0, u, dt, kCfg, kC, PlantMode{true, false});
    CHECK((held - truth).norm() > 0.0);

    PhysicalConstants c0 = kC;
    c0.ecc = 0.0;
    const Vec6 circ_truth = plant_step(q, 0.0, u, dt, kCfg, c0, PlantMode{true, false});
    const Vec6 circ_held = sr_map(q, Vec4::Zero(), u, dt, kCfg, c0);
    CHECK((circ_truth - circ_held).norm() < 1e-13);

    // srp changes the trajectory when enabled
    const Vec6 with_srp = plant_step(q, 0.0, u, dt, kCfg, kC, PlantMode{true, true});
    CHECK((with_srp - truth).norm() > 0.0);
}
