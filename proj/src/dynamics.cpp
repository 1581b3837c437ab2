#include "l2sk/dynamics.hpp"

#include <cmath>

namespace l2sk {

namespace {

// In-plane coupling matrices of the rotating frame.
//   M = diag(-1,-1,0), N = [[0,-1,0],[1,0,0],[0,0,0]]
inline Vec3 apply_m(const Vec3& v) { return Vec3(-v.x(), -v.y(), 0.0); }
inline Vec3 apply_n(const Vec3& v) { return Vec3(-v.y(), v.x(), 0.0); }

inline Vec3 gravity_term(const Vec3& p, const Vec3& d, double coeff) {
    const Vec3 r = p - d;
    const double rn = r.norm();
    return -(coeff / (rn * rn * rn)) * r;
}

// d/dp of -coeff * (p-d)/|p-d|^3  =  -coeff * (I/r^3 - 3 rr^T / r^5)
inline Mat3 gravity_jacobian(const Vec3& p, const Vec3& d, double coeff) {
    const Vec3 r = p - d;
    const double r2 = r.squaredNorm();
    const double rn = std::sqrt(r2);
    const double inv3 = 1.0 / (r2 * rn);
    const double inv5 = inv3 / r2;
    return -coeff * (inv3 * Mat3::Identity() - 3.0 * inv5 * (r * r.transpose()));
}

inline void check_not_singular(const Vec3& p, const Vec3& d1, const Vec3& d2) {
    if ((p - d1).norm() <= kPrimaryGuardRadius || (p - d2).norm() <= kPrimaryGuardRadius)
        throw SingularStateError("state inside guard radius of a primary");
}

double collinear_residual(double x, double mu) {
    const double r1 = x + mu;
    const double r2 = x - 1.0 + mu;
    return x - (1.0 - mu) * r1 / std::pow(std::abs(r1), 3)
             - mu * r2 / std::pow(std::abs(r2), 3);
}

double bisect_collinear(double lo, double hi, double mu) {
    double flo = collinear_residual(lo, mu);
    double fhi = collinear_residual(hi, mu);
    if (flo * fhi > 0.0)
        throw std::runtime_error("libration point bracket does not straddle a root");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = collinear_residual(mid, mu);
        if (fm == 0.0 || hi - lo < 1e-15) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

AlphaBeta alpha_beta(double t, const PhysicalConstants& c) {
    const double e = c.ecc;
    const double ph = t + c.phi;
    AlphaBeta ab;
    ab.alpha = -e * std::cos(ph) + 0.5 * e * e * (1.0 + std::cos(2.0 * ph));
    ab.beta = 2.0 * e * std::cos(ph) + 2.5 * e * e * std::cos(2.0 * ph);
    ab.beta_dot = -2.0 * e * std::sin(ph) - 5.0 * e * e * std::sin(2.0 * ph);
    return ab;
}

Vec4 series_perturbation(double t, const PhysicalConstants& c) {
    const AlphaBeta ab = alpha_beta(t, c);
    return Vec4(ab.beta, ab.beta * ab.beta, ab.beta_dot,
                c.mu * (1.0 - c.mu) * ab.alpha);
}

Vec3 srp_disturbance(double t, const PhysicalConstants& c) {
    const double co = std::cos(c.zeta * t);
    const double si = std::sin(c.zeta * t);
    return Vec3(c.srp_accel * co * co, c.srp_accel * si * si, 0.0);
}

Vec3 primary_pos_1(double xi4, const PhysicalConstants& c) {
    return Vec3(-c.mu - xi4 / (1.0 - c.mu), 0.0, 0.0);
}

Vec3 primary_pos_2(double xi4, const PhysicalConstants& c) {
    return Vec3(1.0 - c.mu + xi4 / c.mu, 0.0, 0.0);
}

Vec3 accel_f2(const Vec6& q, const Vec4& xi, const PhysicalConstants& c) {
    const Vec3 p = q.head<3>();
    const Vec3 v = q.tail<3>();
    const Vec3 d1 = primary_pos_1(xi(3), c);
    const Vec3 d2 = primary_pos_2(xi(3), c);
    check_not_singular(p, d1, d2);

    // Pulsation coupling acts on the libration-anchored displacement.
    const Vec3 pt = p - Vec3(c.pulsation_anchor_x, 0.0, 0.0);
    Vec3 a = -apply_m(p) - 2.0 * apply_n(v);
    a -= xi(0) * (2.0 * apply_m(pt) + 2.0 * apply_n(v));
    a -= xi(1) * apply_m(pt);
    a -= xi(2) * apply_n(v);
    a += gravity_term(p, d1, 1.0 - c.mu);
    a += gravity_term(p, d2, c.mu);
    return a;
}

Vec6 vector_field(const Vec6& q, const Vec4& xi, const Vec3& u, const Vec3& d,
                  const PhysicalConstants& c) {
    Vec6 qdot;
    qdot.head<3>() = q.tail<3>();
    qdot.tail<3>() = accel_f2(q, xi, c) + u + d;
    return qdot;
}

Mat3 f2_jacobian_pos(const Vec6& q, const Vec4& xi, const PhysicalConstants& c) {
    const Vec3 p = q.head<3>();
    const Vec3 d1 = primary_pos_1(xi(3), c);
    const Vec3 d2 = primary_pos_2(xi(3), c);
    check_not_singular(p, d1, d2);

    Mat3 mmat = Mat3::Zero();
    mmat(0, 0) = -1.0;
    mmat(1, 1) = -1.0;
    Mat3 j = -(1.0 + 2.0 * xi(0) + xi(1)) * mmat;
    j += gravity_jacobian(p, d1, 1.0 - c.mu);
    j += gravity_jacobian(p, d2, c.mu);
    return j;
}

Mat3 f2_jacobian_vel(const Vec4& xi) {
    Mat3 nmat = Mat3::Zero();
    nmat(0, 1) = -1.0;
    nmat(1, 0) = 1.0;
    return -(2.0 + 2.0 * xi(0) + xi(2)) * nmat;
}

Mat6 state_jacobian(const Vec6& q, const Vec4& xi, const PhysicalConstants& c) {
    Mat6 j = Mat6::Zero();
    j.block<3, 3>(0, 3).setIdentity();
    j.block<3, 3>(3, 0) = f2_jacobian_pos(q, xi, c);
    j.block<3, 3>(3, 3) = f2_jacobian_vel(xi);
    return j;
}

Mat64 xi_jacobian(const Vec6& q, const PhysicalConstants& c) {
    const Vec3 p = q.head<3>();
    const Vec3 v = q.tail<3>();
    const Vec3 d1 = primary_pos_1(0.0, c);
    const Vec3 d2 = primary_pos_2(0.0, c);
    check_not_singular(p, d1, d2);

    const Vec3 pt = p - Vec3(c.pulsation_anchor_x, 0.0, 0.0);
    Mat64 pj = Mat64::Zero();
    pj.block<3, 1>(3, 0) = -(2.0 * apply_m(pt) + 2.0 * apply_n(v));
    pj.block<3, 1>(3, 1) = -apply_m(pt);
    pj.block<3, 1>(3, 2) = -apply_n(v);
    // Gravity depends on xi4 through the shifted primaries:
    //   d d1/dxi4 = (-1/(1-mu), 0, 0),  d d2/dxi4 = (1/mu, 0, 0).
    const Mat3 g1 = gravity_jacobian(p, d1, 1.0 - c.mu);
    const Mat3 g2 = gravity_jacobian(p, d2, c.mu);
    pj.block<3, 1>(3, 3) =
        -g1 * Vec3(-1.0 / (1.0 - c.mu), 0.0, 0.0) - g2 * Vec3(1.0 / c.mu, 0.0, 0.0);
    return pj;
}

LibrationPoints libration_points(const PhysicalConstants& c) {
    if (!(c.mu > 0.0 && c.mu < 0.5)) throw ConfigError("mu must be in (0, 0.5)");
    LibrationPoints lp;
    lp.l1 = bisect_collinear(c.mu + 1e-9, 1.0 - c.mu - 1e-9, c.mu);
    lp.l2 = bisect_collinear(1.0 - c.mu + 1e-9, 2.0, c.mu);
    lp.l3 = bisect_collinear(-2.0, -c.mu - 1e-9, c.mu);
    return lp;
}

LinearModel linearize_at_l2(const PhysicalConstants& c) {
    const double l2 = libration_points(c).l2;
    const double eta = (1.0 - c.mu) / std::pow(l2 + c.mu, 3)
                     + c.mu / std::pow(l2 - 1.0 + c.mu, 3);
    LinearModel lm;
    lm.eta = eta;
    lm.l2 = l2;
    lm.a_matrix = Mat6::Zero();
    lm.a_matrix.block<3, 3>(0, 3).setIdentity();
    lm.a_matrix(3, 0) = 1.0 + 2.0 * eta;
    lm.a_matrix(4, 1) = 1.0 - eta;
    lm.a_matrix(5, 2) = -eta;
    lm.a_matrix(3, 4) = 2.0;
    lm.a_matrix(4, 3) = -2.0;
    return lm;
}

} // namespace l2sk
