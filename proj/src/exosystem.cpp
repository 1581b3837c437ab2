#include "l2sk/exosystem.hpp"

#include <cmath>

namespace l2sk {

ExoMatrices build_exo_matrices(const OrbitParams& p, const PhysicalConstants& c,
                               const LinearModel& lm) {
    p.validate();
    const double eta = lm.eta;
    ExoMatrices m;
    m.omega_freq = p.omega_freq;
    m.center = Vec3(lm.l2, 0.0, 0.0);

    m.s = Mat4::Zero();
    m.s(0, 1) = -1.0;
    m.s(1, 0) = 1.0;
    m.s(2, 3) = -p.omega_freq;
    m.s(3, 2) = p.omega_freq;

    const double e = c.ecc;
    m.t_xi = Mat4::Zero();
    m.t_xi(0, 0) = 2.0 * e;
    m.t_xi(2, 1) = -2.0 * e;
    m.t_xi(3, 0) = -c.mu * (1.0 - c.mu) * e;

    const double om = p.omega_freq;
    m.t_nu = Mat34::Zero();
    m.t_nu(0, 2) = -p.k_amp * (1.0 - eta + om * om) / (2.0 * om);
    m.t_nu(1, 3) = p.k_amp;
    m.t_nu(2, 2) = p.k_amp * std::cos(p.phi);
    m.t_nu(2, 3) = p.k_amp * std::sin(p.phi);

    m.pi.topRows<3>() = m.t_nu;
    m.pi.bottomRows<3>() = m.t_nu * m.s;
    return m;
}

Vec4 exo_init(const OrbitParams& p) {
    return Vec4(std::cos(p.phi), std::sin(p.phi), std::cos(p.phi), std::sin(p.phi));
}

Vec4 exo_propagate(const Vec4& w, double dt, const ExoMatrices& m) {
    const double c1 = std::cos(dt);
    const double s1 = std::sin(dt);
    const double c2 = std::cos(m.omega_freq * dt);
    const double s2 = std::sin(m.omega_freq * dt);
    Vec4 out;
    out(0) = c1 * w(0) - s1 * w(1);
    out(1) = s1 * w(0) + c1 * w(1);
    out(2) = c2 * w(2) - s2 * w(3);
    out(3) = s2 * w(2) + c2 * w(3);
    return out;
}

Vec3 reference_nu(const Vec4& w, const ExoMatrices& m) {
    return m.center + m.t_nu * w;
}

Vec4 perturbation_xi(const Vec4& w, const ExoMatrices& m) { return m.t_xi * w; }

Vec6 steady_state_pi(const Vec4& w, const ExoMatrices& m) {
    Vec6 q = m.pi * w;
    q.head<3>() += m.center;
    return q;
}

} // namespace l2sk
