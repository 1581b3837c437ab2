#pragma once

#include "l2sk/dynamics.hpp"
#include "l2sk/exosystem.hpp"
#include "l2sk/types.hpp"

#include <array>

namespace l2sk {

/// Stabilizing gain K (sigma(A+BK) in the open left half plane) and the
/// discrete design matrix A_d (sigma(I + delta_bar A_d) inside the unit
/// circle for every positive delta_bar scaling).
struct RegulatorGains {
    Mat36 k_matrix;
    Mat6 a_d;
};

/// Controls held on the two half-intervals of one planning period.
struct MrControlPair {
    Vec3 u1;
    Vec3 u2;
};

/// Exact pole placement for the L2 tangent model: with B = [0; I] the
/// closed loop decouples per axis into p" = -a p - b p', so K cancels the
/// open-loop blocks and installs the desired second-order pairs.
/// `poles` lists six real closed-loop eigenvalues, paired per axis.
Mat36 place_poles(const LinearModel& lm, const std::array<double, 6>& poles);

/// A_d = -((1 - rho)/delta_bar) I, so I + delta_bar A_d = rho I: the design
/// model contracts the tracking error by rho per planning period.
Mat6 default_design_matrix(double delta_bar, double rho = 0.5);

/// Feedforward c(w) solving the regulator equations for the xi-linearized
/// model: the bottom rows of Pi S w - f0(Pi w) - P(Pi w) T_xi w.
Vec3 friend_control_c(const Vec4& w, const ExoMatrices& m, const PhysicalConstants& c);

/// u = c(w) + K (q - pi(w)).
Vec3 ct_regulation_feedback(const Vec6& q, const Vec4& w, const RegulatorGains& g,
                            const ExoMatrices& m, const PhysicalConstants& c);

/// Input-output linearization comparator:
/// u = -f2(q, 0) + nu" + Kd (nu' - pdot) + Kp (nu - p), nu" = T_nu S^2 w.
Vec3 feedback_linearization(const Vec6& q, const Vec4& w, const Mat3& kp,
                            const Mat3& kd, const ExoMatrices& m,
                            const PhysicalConstants& c);

/// Second-order multirate design maps for the perturbed field:
///   f_delta = f(q,xi) + f(q,xi+) + (delta/2) df/dq(q,xi+) f(q,xi)
///   g_delta = [(I + (delta/2) df/dq(q,xi+)) B,  B]
/// with xi = T_xi w and xi+ = T_xi e^{(delta/2) S} w.
struct MrDesignMaps {
    Vec6 f_delta;
    Mat6 g_delta;
};

MrDesignMaps mr_design_maps(const Vec6& q, const Vec4& w, double delta,
                            const ExoMatrices& m, const PhysicalConstants& c);

/// Multirate regulation feedback. The steady-state terms enter as the
/// finite difference (2/delta)(pi(e^{delta S} w) - pi(w)) so that the
/// design-model recursion e+ = (I + (delta/2) A_d) e holds exactly.
/// Throws SingularMatrixError when g_delta loses rank.
MrControlPair mr_regulation_feedback(const Vec6& q, const Vec4& w,
                                     const RegulatorGains& g, double delta,
                                     const ExoMatrices& m, const PhysicalConstants& c);

/// One step of the design model q+ = q + (delta/2)(f_delta + g_delta ubar).
Vec6 mr_design_step(const Vec6& q, const Vec4& w, const MrControlPair& ubar,
                    double delta, const ExoMatrices& m, const PhysicalConstants& c);

} // namespace l2sk
