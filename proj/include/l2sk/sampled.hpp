#pragma once

#include "l2sk/constants.hpp"
#include "l2sk/dynamics.hpp"
#include "l2sk/types.hpp"

namespace l2sk {

/// Sampled-data configuration: planning period delta (one period = two
/// control holds) and integrator substeps per half period.
struct SamplingConfig {
    double delta = 2.0 * 0.65 * 3600.0 / 375190.0;
    int substeps = 16;

    void validate() const {
        if (!(delta > 0.0)) throw ConfigError("delta must be > 0");
        if (substeps < 4) throw ConfigError("substeps must be >= 4");
    }

    double delta_bar() const { return 0.5 * delta; }

    /// Number of fixed RK4 steps used to cover an interval dt, scaled from
    /// the nominal substeps-per-half-period resolution.
    int step_count(double dt) const;
};

/// Single-rate equivalent model F^delta(q, xi, u): flow of the vector field
/// with xi and u frozen over [0, delta]. delta = 0 returns q unchanged.
/// The xi = 0 branch routes through the dispatched SIMD kernels (it is the
/// MPC prediction model); results are identical across kernel variants.
Vec6 sr_map(const Vec6& q, const Vec4& xi, const Vec3& u, double delta,
            const SamplingConfig& cfg, const PhysicalConstants& c);

/// Multirate equivalent model of order 2:
/// F2^delta(q, xi, u1, u2) = F^(delta/2)(. , xi, u2) o F^(delta/2)(q, xi, u1).
Vec6 mr_map(const Vec6& q, const Vec4& xi, const Vec3& u1, const Vec3& u2,
            double delta, const SamplingConfig& cfg, const PhysicalConstants& c);

/// Finite-difference sensitivity d p(k+1) / d u(k) of the single-rate map.
/// Leading term is (delta^2/2) * C (df/dq) B = (delta^2/2) * I.
Mat3 relative_degree_probe(const Vec6& q, const Vec4& xi, double delta,
                           const SamplingConfig& cfg, const PhysicalConstants& c);

/// Ground-truth plant step: control held, but the eccentricity perturbation
/// follows the alpha/beta series and the SRP disturbance is sampled
/// continuously inside substeps (when enabled).
struct PlantMode {
    bool ecc_on = true;
    bool srp_on = true;
};

Vec6 plant_step(const Vec6& q, double t0, const Vec3& u, double dt,
                const SamplingConfig& cfg, const PhysicalConstants& c,
                const PlantMode& mode);

/// Circular-model hold step with per-step state/control tangents
/// (variational RK4 through the same step count as sr_map would use).
void circular_step_with_tangents(const Vec6& q, const Vec3& u, double dt,
                                 const SamplingConfig& cfg, const PhysicalConstants& c,
                                 Vec6& q_next, Mat6& phi, Mat63& psi);

} // namespace l2sk
