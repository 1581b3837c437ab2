#include "l2sk/planner.hpp"

#include "l2sk/dynamics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace l2sk {

Vec3 gamma_residual(const Vec6& q, const Vec4& w, const ExoMatrices& m,
                    const PhysicalConstants& c) {
    // Acceleration mismatch between the perturbed field at q and the
    // unperturbed field on the orbit: at p = T_nu w exactly the perturbation
    // the plant feels remains, and it vanishes when the eccentricity is zero.
    const Vec4 xi = perturbation_xi(w, m);
    Vec6 orbit_state;
    orbit_state << reference_nu(w, m), m.t_nu * (m.s * w);
    return accel_f2(q, xi, c) - accel_f2(orbit_state, Vec4::Zero(), c);
}

Vec6 planner_field(const Vec6& q, const Vec4& w, const ExoMatrices& m,
                   const PhysicalConstants& c) {
    Vec6 f;
    f.head<3>() = q.tail<3>();
    f.tail<3>() = gamma_residual(q, w, m, c);
    return f;
}

namespace {

// Jacobian of the simplified field: the Gamma block shares the f2 Jacobian
// structure evaluated at the predicted perturbation.
Mat6 planner_jacobian(const Vec6& q, const Vec4& xi, const PhysicalConstants& c) {
    Mat6 j = Mat6::Zero();
    j.block<3, 3>(0, 3).setIdentity();
    j.block<3, 3>(3, 0) = f2_jacobian_pos(q, xi, c);
    j.block<3, 3>(3, 3) = f2_jacobian_vel(xi);
    return j;
}

struct MapPieces {
    Vec6 phi1;
    Vec6 phi2;
    Mat6 j2;
};

MapPieces map_pieces(const Vec6& q, const Vec4& w, double delta,
                     const ExoMatrices& m, const PhysicalConstants& c) {
    const Vec4 w_mid = exo_propagate(w, 0.5 * delta, m);
    MapPieces mp;
    mp.phi1 = planner_field(q, w, m, c);
    mp.phi2 = planner_field(q, w_mid, m, c);
    mp.j2 = planner_jacobian(q, perturbation_xi(w_mid, m), c);
    return mp;
}

} // namespace

PlannerMaps planner_design_maps(const Vec6& q, const Vec4& w, double delta,
                                const ExoMatrices& m, const PhysicalConstants& c) {
    const double db = 0.5 * delta;
    const MapPieces mp = map_pieces(q, w, delta, m, c);
    const Mat63 b = input_matrix();
    PlannerMaps out;
    out.f_delta = mp.phi1 + mp.phi2 + db * (mp.j2 * mp.phi1);
    out.g_delta.leftCols<3>() = b + db * (mp.j2 * b);
    out.g_delta.rightCols<3>() = b;
    return out;
}

MrControlPair planner_feedback(const Vec6& q, const Vec4& w, const RegulatorGains& g,
                               double delta, const ExoMatrices& m,
                               const PhysicalConstants& c) {
    const PlannerMaps maps = planner_design_maps(q, w, delta, m, c);
    const Vec6 pi_now = steady_state_pi(w, m);
    const Vec6 pi_next = steady_state_pi(exo_propagate(w, delta, m), m);
    const Vec6 rhs = g.a_d * (q - pi_now) + (2.0 / delta) * (pi_next - pi_now) - maps.f_delta;
    Eigen::FullPivLU<Mat6> lu(maps.g_delta);
    if (!lu.isInvertible() || lu.rcond() < 1e-12)
        throw SingularMatrixError("planner input map g~_delta is singular");
    const Vec6 ubar = lu.solve(rhs);
    return MrControlPair{ubar.head<3>(), ubar.tail<3>()};
}

void planner_design_halves(const Vec6& q, const Vec4& w, const MrControlPair& ubar,
                           double delta, const ExoMatrices& m,
                           const PhysicalConstants& c, Vec6& q_half, Vec6& q_full) {
    const double db = 0.5 * delta;
    const MapPieces mp = map_pieces(q, w, delta, m, c);
    const Mat63 b = input_matrix();
    const Vec6 first_rate = mp.phi1 + b * ubar.u1;
    q_half = q + db * first_rate;
    q_full = q_half + db * (mp.phi2 + db * (mp.j2 * first_rate) + b * ubar.u2);
}

PlannedReference plan_horizon(const Vec6& q0, const Vec4& w0, int n_hat_p,
                              double delta, const ExoMatrices& m,
                              const PhysicalConstants& c, const RegulatorGains& g,
                              double envelope) {
    if (n_hat_p < 1) throw ConfigError("plan_horizon requires n_hat_p >= 1");
    PlannedReference out;
    out.samples.reserve(2 * static_cast<std::size_t>(n_hat_p));
    out.planned_controls.reserve(static_cast<std::size_t>(n_hat_p));

    Vec6 q = q0;
    Vec4 w = w0;
    for (int k = 0; k < n_hat_p; ++k) {
        MrControlPair ubar;
        try {
            ubar = planner_feedback(q, w, g, delta, m, c);
        } catch (const SingularMatrixError& err) {
            throw SingularMatrixError(std::string(err.what()) + " at planning step " +
                                      std::to_string(k));
        }
        Vec6 q_half, q_full;
        planner_design_halves(q, w, ubar, delta, m, c, q_half, q_full);

        const Vec4 w_mid = exo_propagate(w, 0.5 * delta, m);
        const Vec4 w_next = exo_propagate(w, delta, m);
        for (const auto& [qs, ws] : {std::pair{q_half, w_mid}, std::pair{q_full, w_next}}) {
            const double dist = (qs.head<3>() - reference_nu(ws, m)).norm();
            out.max_ref_distance = std::max(out.max_ref_distance, dist);
            if (dist > envelope) out.envelope_warning = true;
            out.samples.push_back(PlannedSample{qs, qs.head<3>()});
        }
        out.planned_controls.push_back(ubar);
        q = q_full;
        w = w_next;
    }
    return out;
}

} // namespace l2sk
