#pragma once

#include "l2sk/constants.hpp"
#include "l2sk/sampled.hpp"
#include "l2sk/types.hpp"

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace l2sk {

/// Prediction model used by the solver. `step` advances one hold interval;
/// `step_tangents` additionally returns d q+ / d q and d q+ / d u (analytic
/// sensitivity path); `batch_hold`, when present, advances many independent
/// lanes at once in SoA layout (finite-difference sensitivity path).
struct PredictionModel {
    std::function<Vec6(const Vec6&, const Vec3&)> step;
    std::function<void(const Vec6&, const Vec3&, Vec6&, Mat6&, Mat63&)> step_tangents;
    std::function<void(double* const q[6], const double* const u[3], std::size_t n_padded)>
        batch_hold;
};

/// Circular-model prediction over hold intervals of length delta_bar,
/// backed by the runtime-dispatched SIMD kernels.
PredictionModel circular_prediction(double delta_bar, const SamplingConfig& cfg,
                                    const PhysicalConstants& c);

struct ControlSequence {
    std::vector<Vec3> u;
};

/// Box-constrained finite-horizon tracking problem: single-shooting rollout
/// of the prediction model against per-step state references.
struct MpcProblem {
    int horizon = 30;
    Mat6 q_weight = (Vec6() << 10, 10, 10, 1, 1, 1).finished().asDiagonal();
    Mat3 r_weight = 0.1 * Mat3::Identity();
    Vec3 lb = Vec3::Constant(-1e100);
    Vec3 ub = Vec3::Constant(1e100);
    std::vector<Vec6> reference;
    Vec6 initial_state = Vec6::Zero();
    double delta_bar = 0.65 * 3600.0 / 375190.0;
    PredictionModel model;

    void validate() const;
};

enum class SolveStatus { converged, max_iter, rti_single_step };

enum class SensitivityMode { analytic, forward_fd };

struct SolverOptions {
    int max_iter = 50;
    double grad_tol = 1e-8;     // projected-gradient stop
    double step_tol = 1e-9;     // candidate-step stop (fixed-point property)
    SensitivityMode sensitivity = SensitivityMode::analytic;
    double fd_step = 1e-7;
    int qp_max_iter = 60;
    double qp_tol = 1e-11;
    bool record_trace = false;
};

struct MpcSolution {
    ControlSequence u_seq;
    double cost = 0.0;
    int iterations = 0;
    double kkt_residual = 0.0;
    SolveStatus status = SolveStatus::converged;
    double qp_time_us = 0.0;             // time spent in QP solves
    std::vector<double> cost_trace;      // filled when record_trace is set
};

/// Single-shooting cost: sum of squared Q-weighted state errors and squared
/// R-weighted controls. Non-finite rollouts yield an infinite-cost sentinel.
double rollout_cost(const MpcProblem& p, const ControlSequence& u);

/// Cost gradient d rollout_cost / d U through the requested sensitivity
/// path (exposed for verification against finite differences).
Eigen::VectorXd cost_gradient(const MpcProblem& p, const ControlSequence& u,
                              SensitivityMode mode);

/// Projected Gauss-Newton with Armijo line search. Every iterate is feasible
/// (clipped to the box); terminates on projected-gradient norm <= grad_tol,
/// candidate step <= step_tol, or max_iter.
MpcSolution solve_full(const MpcProblem& p, const ControlSequence* warm_start,
                       const SolverOptions& opts = {});

/// Real-time iteration: exactly one Gauss-Newton QP step from the warm
/// start, projected onto the box; the QP wall time is measured.
MpcSolution solve_rti(const MpcProblem& p, const ControlSequence& warm_start,
                      const SolverOptions& opts = {});

/// Receding-horizon shift: drop the first control, duplicate the last.
ControlSequence shift_warm_start(const ControlSequence& prev);

/// Stacked box-constraint matrix L with u in box <=> L [U; 1] <= 0
/// (compatibility artifact for the polynomial reformulation; the native
/// solver enforces the box by projection instead).
Eigen::MatrixXd build_box_matrix(int n_p, const Vec3& lb, const Vec3& ub);

} // namespace l2sk
