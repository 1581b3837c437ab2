#pragma once

#include "l2sk/constants.hpp"
#include "l2sk/dynamics.hpp"
#include "l2sk/types.hpp"

namespace l2sk {

/// Quasi-Halo orbit parameters. The in-plane and out-of-plane frequencies
/// are kept equal (visibility assumption).
struct OrbitParams {
    double k_amp = 0.12;       ///< orbit amplitude, normalized distance
    double omega_freq = 1.8636;
    double omega_z = 1.8636;
    double phi = 0.0;

    void validate() const {
        if (!(k_amp > 0.0)) throw ConfigError("k_amp must be > 0");
        if (omega_freq != omega_z)
            throw ConfigError("omega_freq and omega_z must be equal");
    }
};

/// Constant matrices of the exosystem: block-skew S, perturbation selector
/// T_xi, reference selector T_nu, and the steady-state map Pi = [T_nu; T_nu S].
/// T_nu and Pi act in L2-centered deviation coordinates; `center` carries
/// the L2 offset so references come out in the absolute rotating frame the
/// dynamics use.
struct ExoMatrices {
    Mat4 s;
    Mat4 t_xi;
    Mat34 t_nu;
    Mat64 pi;
    Vec3 center = Vec3::Zero();
    double omega_freq = 1.8636;
};

/// Assembles the exosystem matrices from orbit parameters, the physical
/// constants (eccentricity, mass ratio) and the L2 tangent model (eta and
/// the L2 location).
ExoMatrices build_exo_matrices(const OrbitParams& p, const PhysicalConstants& c,
                               const LinearModel& lm);

/// omega0 = (cos phi, sin phi, cos phi, sin phi).
Vec4 exo_init(const OrbitParams& p);

/// Closed-form propagation of wdot = S w: two planar rotations with angles
/// dt and omega_freq*dt. Never numerically integrated.
Vec4 exo_propagate(const Vec4& w, double dt, const ExoMatrices& m);

/// Absolute reference position nu = center + T_nu w.
Vec3 reference_nu(const Vec4& w, const ExoMatrices& m);

/// xi = T_xi w (first order in the eccentricity).
Vec4 perturbation_xi(const Vec4& w, const ExoMatrices& m);

/// Absolute steady state pi(w) = [center; 0] + Pi w; the first three rows
/// equal reference_nu.
Vec6 steady_state_pi(const Vec4& w, const ExoMatrices& m);

} // namespace l2sk
