#pragma once

#include "l2sk/constants.hpp"
#include "l2sk/types.hpp"

namespace l2sk {

// ---------------------------------------------------------------------------
// Elliptic RTBP vector field with eccentricity perturbation and SRP.
//
// State q = (x y z vx vy vz) in the distance-normalized rotating frame.
// The eccentricity perturbation enters as xi = (beta, beta^2, beta_dot,
// mu(1-mu)alpha); xi = 0 recovers the circular problem.
// ---------------------------------------------------------------------------

struct AlphaBeta {
    double alpha;
    double beta;
    double beta_dot;
};

/// Periodic eccentricity series truncated after the e^2 terms; beta_dot is
/// the analytic derivative of the truncated beta.
AlphaBeta alpha_beta(double t, const PhysicalConstants& c);

/// xi(t) assembled from the truncated series. The second component is the
/// square of the truncated beta so xi2 == xi1^2 holds exactly.
Vec4 series_perturbation(double t, const PhysicalConstants& c);

/// SRP disturbance d = srp_accel * (cos^2(zeta t), sin^2(zeta t), 0).
Vec3 srp_disturbance(double t, const PhysicalConstants& c);

/// Shifted primary positions d1, d2 as functions of xi4.
Vec3 primary_pos_1(double xi4, const PhysicalConstants& c);
Vec3 primary_pos_2(double xi4, const PhysicalConstants& c);

/// Full vector field qdot = f(q, xi) + B(u + d).
/// Throws SingularStateError inside the guard radius of either primary.
Vec6 vector_field(const Vec6& q, const Vec4& xi, const Vec3& u, const Vec3& d,
                  const PhysicalConstants& c);

/// Acceleration block f2(q, xi) alone.
Vec3 accel_f2(const Vec6& q, const Vec4& xi, const PhysicalConstants& c);

/// d f2 / d p and d f2 / d pdot at (q, xi).
Mat3 f2_jacobian_pos(const Vec6& q, const Vec4& xi, const PhysicalConstants& c);
Mat3 f2_jacobian_vel(const Vec4& xi);

/// Full 6x6 state Jacobian df/dq at (q, xi).
Mat6 state_jacobian(const Vec6& q, const Vec4& xi, const PhysicalConstants& c);

/// P(q) = df/dxi at xi = 0 (analytic; the gravity columns come from the
/// xi4-dependence of the primary positions).
Mat64 xi_jacobian(const Vec6& q, const PhysicalConstants& c);

struct LibrationPoints {
    double l1;
    double l2;
    double l3;
};

/// x-coordinates of the collinear equilibria of the circular problem,
/// obtained by bracketed root-finding on the equilibrium condition.
LibrationPoints libration_points(const PhysicalConstants& c);

struct LinearModel {
    Mat6 a_matrix;
    double eta;
    double l2;
};

/// Linear tangent model at q* = (L2 0 0 0 0 0) of the circular problem:
/// A = [[0 I],[A21 A22]], A21 = diag(1+2eta, 1-eta, -eta).
LinearModel linearize_at_l2(const PhysicalConstants& c);

inline Mat63 input_matrix() {
    Mat63 b = Mat63::Zero();
    b.block<3, 3>(3, 0).setIdentity();
    return b;
}

inline Mat36 output_matrix() {
    Mat36 cm = Mat36::Zero();
    cm.block<3, 3>(0, 0).setIdentity();
    return cm;
}

} // namespace l2sk
