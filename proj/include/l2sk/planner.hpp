#pragma once

#include "l2sk/exosystem.hpp"
#include "l2sk/regulation.hpp"
#include "l2sk/types.hpp"

#include <vector>

namespace l2sk {

// ---------------------------------------------------------------------------
// Multirate reference governor: propagates a simplified closed-loop model
// (kinematic block plus the residual field Gamma) under its own planned
// feedback and records the visited states as the admissible reference
// sequence for the inner MPC.
// ---------------------------------------------------------------------------

/// Residual field Gamma(q, w): the acceleration mismatch between the
/// perturbed field at q and the unperturbed field on the orbit. Vanishes at
/// p = T_nu w when the eccentricity is zero and reduces to the perturbation
/// the plant actually feels there otherwise. Throws SingularStateError near
/// the (shifted) primaries.
Vec3 gamma_residual(const Vec6& q, const Vec4& w, const ExoMatrices& m,
                    const PhysicalConstants& c);

/// Simplified field f~(q, w) = A q + B Gamma(q, w), A = [[0 I],[0 0]].
Vec6 planner_field(const Vec6& q, const Vec4& w, const ExoMatrices& m,
                   const PhysicalConstants& c);

/// Second-order design maps of the simplified field over one planning
/// period (same construction as mr_design_maps, applied to f~).
struct PlannerMaps {
    Vec6 f_delta;
    Mat6 g_delta;
};

PlannerMaps planner_design_maps(const Vec6& q, const Vec4& w, double delta,
                                const ExoMatrices& m, const PhysicalConstants& c);

/// Planned feedback ubar = g~^-1 (A_d (q - pi(w)) + (2/delta)(pi(e^{dS}w)
/// - pi(w)) - f~^delta); satisfies the one-step design-model contract
/// e+ = (I + (delta/2) A_d) e exactly.
MrControlPair planner_feedback(const Vec6& q, const Vec4& w, const RegulatorGains& g,
                               double delta, const ExoMatrices& m,
                               const PhysicalConstants& c);

/// One full design-model step split into its two recorded half-steps.
/// The halves compose exactly to q + (delta/2)(f~^delta + g~^delta ubar).
void planner_design_halves(const Vec6& q, const Vec4& w, const MrControlPair& ubar,
                           double delta, const ExoMatrices& m,
                           const PhysicalConstants& c, Vec6& q_half, Vec6& q_full);

struct PlannedSample {
    Vec6 q;
    Vec3 p;
};

struct PlannedReference {
    std::vector<PlannedSample> samples;        // 2 n_hat_p states, half-period apart
    std::vector<MrControlPair> planned_controls; // n_hat_p pairs (diagnostics)
    bool envelope_warning = false;
    double max_ref_distance = 0.0;
};

/// Plans n_hat_p periods ahead from (q0, w0); the exosystem is advanced in
/// closed form at every half-step. Throws SingularMatrixError (annotated
/// with the step index) if the input map degenerates mid-plan.
PlannedReference plan_horizon(const Vec6& q0, const Vec4& w0, int n_hat_p,
                              double delta, const ExoMatrices& m,
                              const PhysicalConstants& c, const RegulatorGains& g,
                              double envelope = 0.5);

} // namespace l2sk
