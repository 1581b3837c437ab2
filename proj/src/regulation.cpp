#include "l2sk/regulation.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace l2sk {

Mat36 place_poles(const LinearModel& lm, const std::array<double, 6>& poles) {
    Mat36 k;
    const Mat3 a21 = lm.a_matrix.block<3, 3>(3, 0);
    const Mat3 a22 = lm.a_matrix.block<3, 3>(3, 3);
    Mat3 stiff = Mat3::Zero();
    Mat3 damp = Mat3::Zero();
    for (int i = 0; i < 3; ++i) {
        const double l1 = poles[2 * i];
        const double l2 = poles[2 * i + 1];
        if (!(l1 < 0.0 && l2 < 0.0))
            throw ConfigError("closed-loop poles must be strictly negative");
        stiff(i, i) = l1 * l2;
        damp(i, i) = -(l1 + l2);
    }
    k.block<3, 3>(0, 0) = -(a21 + stiff);
    k.block<3, 3>(0, 3) = -(a22 + damp);
    return k;
}

Mat6 default_design_matrix(double delta_bar, double rho) {
    if (!(delta_bar > 0.0)) throw ConfigError("delta_bar must be > 0");
    if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rho must be in [0, 1)");
    return -((1.0 - rho) / delta_bar) * Mat6::Identity();
}

Vec3 friend_control_c(const Vec4& w, const ExoMatrices& m, const PhysicalConstants& c) {
    const Vec6 piw = steady_state_pi(w, m);
    const Vec6 f0 = vector_field(piw, Vec4::Zero(), Vec3::Zero(), Vec3::Zero(), c);
    const Vec6 pxi = xi_jacobian(piw, c) * perturbation_xi(w, m);
    const Vec6 manifold_rate = m.pi * (m.s * w);
    return (manifold_rate - f0 - pxi).tail<3>();
}

Vec3 ct_regulation_feedback(const Vec6& q, const Vec4& w, const RegulatorGains& g,
                            const ExoMatrices& m, const PhysicalConstants& c) {
    return friend_control_c(w, m, c) + g.k_matrix * (q - steady_state_pi(w, m));
}

Vec3 feedback_linearization(const Vec6& q, const Vec4& w, const Mat3& kp,
                            const Mat3& kd, const ExoMatrices& m,
                            const PhysicalConstants& c) {
    const Vec3 nu = reference_nu(w, m);
    const Vec3 nu_dot = m.t_nu * (m.s * w);
    const Vec3 nu_ddot = m.t_nu * (m.s * (m.s * w));
    const Vec3 p = q.head<3>();
    const Vec3 pdot = q.tail<3>();
    return -accel_f2(q, Vec4::Zero(), c) + nu_ddot + kd * (nu_dot - pdot) + kp * (nu - p);
}

MrDesignMaps mr_design_maps(const Vec6& q, const Vec4& w, double delta,
                            const ExoMatrices& m, const PhysicalConstants& c) {
    const double db = 0.5 * delta;
    const Vec4 xi0 = perturbation_xi(w, m);
    const Vec4 xi1 = perturbation_xi(exo_propagate(w, db, m), m);
    const Vec6 f0 = vector_field(q, xi0, Vec3::Zero(), Vec3::Zero(), c);
    const Vec6 f1 = vector_field(q, xi1, Vec3::Zero(), Vec3::Zero(), c);
    const Mat6 jac1 = state_jacobian(q, xi1, c);
    const Mat63 b = input_matrix();

    MrDesignMaps out;
    out.f_delta = f0 + f1 + db * (jac1 * f0);
    out.g_delta.leftCols<3>() = b + db * (jac1 * b);
    out.g_delta.rightCols<3>() = b;
    return out;
}

namespace {

Vec6 solve_mr_controls(const Mat6& g_delta, const Vec6& rhs) {
    Eigen::FullPivLU<Mat6> lu(g_delta);
    if (!lu.isInvertible() || lu.rcond() < 1e-12)
        throw SingularMatrixError("multirate input map g_delta is singular");
    return lu.solve(rhs);
}

} // namespace

MrControlPair mr_regulation_feedback(const Vec6& q, const Vec4& w,
                                     const RegulatorGains& g, double delta,
                                     const ExoMatrices& m, const PhysicalConstants& c) {
    const MrDesignMaps maps = mr_design_maps(q, w, delta, m, c);
    const Vec6 pi_now = steady_state_pi(w, m);
    const Vec6 pi_next = steady_state_pi(exo_propagate(w, delta, m), m);
    const Vec6 rhs = g.a_d * (q - pi_now) - maps.f_delta + (2.0 / delta) * (pi_next - pi_now);
    const Vec6 ubar = solve_mr_controls(maps.g_delta, rhs);
    return MrControlPair{ubar.head<3>(), ubar.tail<3>()};
}

Vec6 mr_design_step(const Vec6& q, const Vec4& w, const MrControlPair& ubar,
                    double delta, const ExoMatrices& m, const PhysicalConstants& c) {
    const MrDesignMaps maps = mr_design_maps(q, w, delta, m, c);
    Vec6 u6;
    u6 << ubar.u1, ubar.u2;
    return q + (0.5 * delta) * (maps.f_delta + maps.g_delta * u6);
}

} // namespace l2sk
