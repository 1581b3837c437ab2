#include "l2sk/sampled.hpp"

#include "l2sk/simd/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace l2sk {

int SamplingConfig::step_count(double dt) const {
    validate();
    const double h_nom = delta_bar() / static_cast<double>(substeps);
    return std::max(1, static_cast<int>(std::ceil(dt / h_nom - 1e-12)));
}

namespace {

void check_finite(const Vec6& q, const char* what) {
    if (!q.allFinite()) throw std::runtime_error(std::string("non-finite state in ") + what);
}

// Fixed-step RK4 on an arbitrary autonomous field.
template <typename Field>
Vec6 rk4_flow(const Vec6& q0, double dt, int steps, Field&& f) {
    Vec6 q = q0;
    const double h = dt / static_cast<double>(steps);
    for (int s = 0; s < steps; ++s) {
        const Vec6 k1 = f(q);
        const Vec6 k2 = f(Vec6(q + 0.5 * h * k1));
        const Vec6 k3 = f(Vec6(q + 0.5 * h * k2));
        const Vec6 k4 = f(Vec6(q + h * k3));
        q += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return q;
}

// Time-varying variant for the plant mode (field sampled at stage times).
template <typename Field>
Vec6 rk4_flow_t(const Vec6& q0, double t0, double dt, int steps, Field&& f) {
    Vec6 q = q0;
    const double h = dt / static_cast<double>(steps);
    for (int s = 0; s < steps; ++s) {
        const double t = t0 + s * h;
        const Vec6 k1 = f(q, t);
        const Vec6 k2 = f(Vec6(q + 0.5 * h * k1), t + 0.5 * h);
        const Vec6 k3 = f(Vec6(q + 0.5 * h * k2), t + 0.5 * h);
        const Vec6 k4 = f(Vec6(q + h * k3), t + h);
        q += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return q;
}

Vec6 circular_flow_kernel(const Vec6& q0, const Vec3& u, double dt, int steps,
                          const PhysicalConstants& c) {
    const std::size_t n = simd::padded_lanes(1);
    double buf[6][simd::kLaneQuantum];
    double ubuf[3][simd::kLaneQuantum];
    for (int i = 0; i < 6; ++i)
        for (std::size_t l = 0; l < n; ++l) buf[i][l] = q0(i);
    for (int i = 0; i < 3; ++i)
        for (std::size_t l = 0; l < n; ++l) ubuf[i][l] = u(i);
    double* qp[6] = {buf[0], buf[1], buf[2], buf[3], buf[4], buf[5]};
    const double* up[3] = {ubuf[0], ubuf[1], ubuf[2]};
    simd::active_kernels().flow_batch(qp, up, n, c.mu, dt / steps, steps);
    Vec6 out;
    for (int i = 0; i < 6; ++i) out(i) = buf[i][0];
    return out;
}

} // namespace

Vec6 sr_map(const Vec6& q, const Vec4& xi, const Vec3& u, double delta,
            const SamplingConfig& cfg, const PhysicalConstants& c) {
    if (delta < 0.0) throw ConfigError("sr_map requires delta >= 0");
    if (delta == 0.0) return q;
    const int steps = cfg.step_count(delta);
    Vec6 out;
    if (xi.isZero(0.0)) {
        // Singularity guard up front; the kernel itself does not check.
        (void)accel_f2(q, xi, c);
        out = circular_flow_kernel(q, u, delta, steps, c);
    } else {
        out = rk4_flow(q, delta, steps, [&](const Vec6& s) {
            return vector_field(s, xi, u, Vec3::Zero(), c);
        });
    }
    check_finite(out, "sr_map");
    return out;
}

Vec6 mr_map(const Vec6& q, const Vec4& xi, const Vec3& u1, const Vec3& u2,
            double delta, const SamplingConfig& cfg, const PhysicalConstants& c) {
    if (!(delta > 0.0)) throw ConfigError("mr_map requires delta > 0");
    const Vec6 mid = sr_map(q, xi, u1, 0.5 * delta, cfg, c);
    return sr_map(mid, xi, u2, 0.5 * delta, cfg, c);
}

Mat3 relative_degree_probe(const Vec6& q, const Vec4& xi, double delta,
                           const SamplingConfig& cfg, const PhysicalConstants& c) {
    Mat3 sens;
    const double h = 1e-6;
    for (int j = 0; j < 3; ++j) {
        Vec3 up = Vec3::Zero();
        Vec3 um = Vec3::Zero();
        up(j) = h;
        um(j) = -h;
        const Vec6 qp = sr_map(q, xi, up, delta, cfg, c);
        const Vec6 qm = sr_map(q, xi, um, delta, cfg, c);
        sens.col(j) = (qp.head<3>() - qm.head<3>()) / (2.0 * h);
    }
    return sens;
}

Vec6 plant_step(const Vec6& q, double t0, const Vec3& u, double dt,
                const SamplingConfig& cfg, const PhysicalConstants& c,
                const PlantMode& mode) {
    if (!(dt > 0.0)) throw ConfigError("plant_step requires dt > 0");
    const int steps = cfg.step_count(dt);
    const Vec6 out = rk4_flow_t(q, t0, dt, steps, [&](const Vec6& s, double t) {
        const Vec4 xi = mode.ecc_on ? series_perturbation(t, c) : Vec4::Zero();
        const Vec3 d = mode.srp_on ? srp_disturbance(t, c) : Vec3::Zero();
        return vector_field(s, xi, u, d, c);
    });
    check_finite(out, "plant_step");
    return out;
}

void circular_step_with_tangents(const Vec6& q, const Vec3& u, double dt,
                                 const SamplingConfig& cfg, const PhysicalConstants& c,
                                 Vec6& q_next, Mat6& phi, Mat63& psi) {
    (void)accel_f2(q, Vec4::Zero(), c); // singularity guard
    const int steps = cfg.step_count(dt);
    double qs[6];
    double m[6 * simd::kTangentCols] = {0.0};
    for (int i = 0; i < 6; ++i) {
        qs[i] = q(i);
        m[i * simd::kTangentCols + i] = 1.0;
    }
    const double uu[3] = {u(0), u(1), u(2)};
    simd::active_kernels().flow_tangent(qs, m, uu, c.mu, dt / steps, steps);
    for (int i = 0; i < 6; ++i) {
        q_next(i) = qs[i];
        for (int j = 0; j < 6; ++j) phi(i, j) = m[i * simd::kTangentCols + j];
        for (int j = 0; j < 3; ++j) psi(i, j) = m[i * simd::kTangentCols + 6 + j];
    }
    check_finite(q_next, "circular_step_with_tangents");
}

} // namespace l2sk
