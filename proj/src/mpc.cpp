#include "l2sk/mpc.hpp"

#include "l2sk/simd/kernels.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <limits>

namespace l2sk {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Clock = std::chrono::steady_clock;

double elapsed_us(Clock::time_point t0) {
    return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

VectorXd stack_controls(const ControlSequence& u) {
    VectorXd v(3 * static_cast<Eigen::Index>(u.u.size()));
    for (std::size_t i = 0; i < u.u.size(); ++i) v.segment<3>(3 * i) = u.u[i];
    return v;
}

ControlSequence unstack_controls(const VectorXd& v) {
    ControlSequence u;
    u.u.resize(static_cast<std::size_t>(v.size() / 3));
    for (std::size_t i = 0; i < u.u.size(); ++i) u.u[i] = v.segment<3>(3 * i);
    return u;
}

VectorXd clip(const VectorXd& v, const VectorXd& lb, const VectorXd& ub) {
    return v.cwiseMax(lb).cwiseMin(ub);
}

} // namespace

PredictionModel circular_prediction(double delta_bar, const SamplingConfig& cfg,
                                    const PhysicalConstants& c) {
    PredictionModel m;
    const SamplingConfig cfg_copy = cfg;
    const PhysicalConstants cc = c;
    m.step = [=](const Vec6& q, const Vec3& u) {
        return sr_map(q, Vec4::Zero(), u, delta_bar, cfg_copy, cc);
    };
    m.step_tangents = [=](const Vec6& q, const Vec3& u, Vec6& qn, Mat6& phi, Mat63& psi) {
        circular_step_with_tangents(q, u, delta_bar, cfg_copy, cc, qn, phi, psi);
    };
    const int steps = cfg.step_count(delta_bar);
    const double h = delta_bar / steps;
    m.batch_hold = [=](double* const q[6], const double* const u[3], std::size_t n_padded) {
        simd::active_kernels().flow_batch(q, u, n_padded, cc.mu, h, steps);
    };
    return m;
}

void MpcProblem::validate() const {
    if (horizon < 2 || horizon % 2 != 0)
        throw ConfigError("horizon must be even and >= 2");
    if (((ub - lb).array() <= 0.0).any())
        throw ConfigError("lb must be componentwise below ub");
    if (static_cast<int>(reference.size()) != horizon)
        throw ConfigError("reference length must equal the horizon");
    if (!(delta_bar > 0.0)) throw ConfigError("delta_bar must be > 0");
    Eigen::LLT<Mat3> llt(r_weight);
    if (llt.info() != Eigen::Success)
        throw ConfigError("r_weight must be positive definite");
    if (!model.step) throw ConfigError("prediction model missing");
}

double rollout_cost(const MpcProblem& p, const ControlSequence& u) {
    if (static_cast<int>(u.u.size()) != p.horizon)
        throw ConfigError("control sequence length must equal the horizon");
    Vec6 q = p.initial_state;
    double cost = 0.0;
    for (int i = 0; i < p.horizon; ++i) {
        try {
            q = p.model.step(q, u.u[i]);
        } catch (const SingularStateError&) {
            return std::numeric_limits<double>::infinity();
        }
        if (!q.allFinite()) return std::numeric_limits<double>::infinity();
        const Vec6 e = q - p.reference[i];
        cost += e.dot(p.q_weight * e) + u.u[i].dot(p.r_weight * u.u[i]);
    }
    return cost;
}

namespace {

// Dense single-shooting linearization: predicted states and the stacked
// Jacobian d states / d controls (block lower triangular).
struct Linearization {
    std::vector<Vec6> states;   // q(i+1), i = 0..N-1
    MatrixXd jac;               // 6N x 3N
    bool ok = true;
};

Linearization linearize_analytic(const MpcProblem& p, const ControlSequence& u) {
    const int n = p.horizon;
    Linearization lin;
    lin.states.resize(n);
    lin.jac = MatrixXd::Zero(6 * n, 3 * n);
    std::vector<Mat63> dcur(n); // d q(i+1) / d u_j for j <= i, updated in place
    Vec6 q = p.initial_state;
    for (int i = 0; i < n; ++i) {
        Vec6 qn;
        Mat6 phi;
        Mat63 psi;
        try {
            p.model.step_tangents(q, u.u[i], qn, phi, psi);
        } catch (const SingularStateError&) {
            lin.ok = false;
            return lin;
        }
        for (int j = 0; j < i; ++j) dcur[j] = phi * dcur[j];
        dcur[i] = psi;
        lin.states[i] = qn;
        if (!qn.allFinite()) {
            lin.ok = false;
            return lin;
        }
        for (int j = 0; j <= i; ++j) lin.jac.block<6, 3>(6 * i, 3 * j) = dcur[j];
        q = qn;
    }
    return lin;
}

Linearization linearize_fd(const MpcProblem& p, const ControlSequence& u,
                           double fd_step) {
    const int n = p.horizon;
    const std::size_t lanes = 1 + 3 * static_cast<std::size_t>(n);
    const std::size_t padded = simd::padded_lanes(lanes);
    Linearization lin;
    lin.states.resize(n);
    lin.jac = MatrixXd::Zero(6 * n, 3 * n);

    std::vector<std::vector<double>> qbuf(6, std::vector<double>(padded));
    std::vector<std::vector<double>> ubuf(3, std::vector<double>(padded));
    for (int c = 0; c < 6; ++c)
        for (std::size_t l = 0; l < padded; ++l) qbuf[c][l] = p.initial_state(c);

    std::vector<double> hstep(3 * static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        for (int c = 0; c < 3; ++c)
            hstep[3 * j + c] = fd_step * (1.0 + std::abs(u.u[j](c)));

    double* qp[6];
    const double* up[3];
    for (int c = 0; c < 6; ++c) qp[c] = qbuf[c].data();
    for (int c = 0; c < 3; ++c) up[c] = ubuf[c].data();

    const bool have_batch = static_cast<bool>(p.model.batch_hold);
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c)
            for (std::size_t l = 0; l < padded; ++l) ubuf[c][l] = u.u[i](c);
        for (int c = 0; c < 3; ++c) ubuf[c][1 + 3 * i + c] += hstep[3 * i + c];

        if (have_batch) {
            p.model.batch_hold(qp, up, padded);
        } else {
            for (std::size_t l = 0; l < lanes; ++l) {
                Vec6 q;
                Vec3 uu;
                for (int c = 0; c < 6; ++c) q(c) = qbuf[c][l];
                for (int c = 0; c < 3; ++c) uu(c) = ubuf[c][l];
                try {
                    q = p.model.step(q, uu);
                } catch (const SingularStateError&) {
                    lin.ok = false;
                    return lin;
                }
                for (int c = 0; c < 6; ++c) qbuf[c][l] = q(c);
            }
        }
        for (int c = 0; c < 6; ++c) {
            lin.states[i](c) = qbuf[c][0];
            if (!std::isfinite(qbuf[c][0])) lin.ok = false;
        }
        if (!lin.ok) return lin;
        for (int j = 0; j <= i; ++j)
            for (int c = 0; c < 3; ++c) {
                const std::size_t lane = 1 + 3 * static_cast<std::size_t>(j) + c;
                const double inv = 1.0 / hstep[3 * j + c];
                for (int r = 0; r < 6; ++r)
                    lin.jac(6 * i + r, 3 * j + c) = (qbuf[r][lane] - qbuf[r][0]) * inv;
            }
    }
    return lin;
}

Linearization linearize(const MpcProblem& p, const ControlSequence& u,
                        const SolverOptions& opts) {
    if (opts.sensitivity == SensitivityMode::analytic && p.model.step_tangents)
        return linearize_analytic(p, u);
    return linearize_fd(p, u, opts.fd_step);
}

// Gradient and Gauss-Newton Hessian of the squared-norm cost.
void assemble_normal_equations(const MpcProblem& p, const ControlSequence& u,
                               const Linearization& lin, VectorXd& grad, MatrixXd& hess) {
    const int n = p.horizon;
    grad = VectorXd::Zero(3 * n);
    hess = MatrixXd::Zero(3 * n, 3 * n);
    for (int i = 0; i < n; ++i) {
        const Vec6 e = lin.states[i] - p.reference[i];
        const auto ji = lin.jac.block(6 * i, 0, 6, 3 * (i + 1));
        grad.head(3 * (i + 1)) += 2.0 * ji.transpose() * (p.q_weight * e);
        hess.topLeftCorner(3 * (i + 1), 3 * (i + 1)) +=
            2.0 * ji.transpose() * p.q_weight * ji;
    }
    for (int i = 0; i < n; ++i) {
        grad.segment<3>(3 * i) += 2.0 * p.r_weight * u.u[i];
        hess.block<3, 3>(3 * i, 3 * i) += 2.0 * p.r_weight;
    }
}

double projected_gradient_norm(const VectorXd& x, const VectorXd& grad,
                               const VectorXd& lb, const VectorXd& ub) {
    return (x - clip(x - grad, lb, ub)).lpNorm<Eigen::Infinity>();
}

// Box QP: min over V of 0.5 (V-U)' H (V-U) + g' (V-U), lb <= V <= ub.
// Projected Newton with active-set freezing.
VectorXd solve_box_qp(const MatrixXd& hess, const VectorXd& grad, const VectorXd& u0,
                      const VectorXd& lb, const VectorXd& ub, const SolverOptions& opts) {
    const Eigen::Index n = u0.size();
    VectorXd v = u0;
    const double eps = 1e-12;
    for (int it = 0; it < opts.qp_max_iter; ++it) {
        const VectorXd g = hess * (v - u0) + grad;
        if (projected_gradient_norm(v, g, lb, ub) <= opts.qp_tol) break;

        std::vector<Eigen::Index> free_idx;
        free_idx.reserve(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool at_lb = v(i) <= lb(i) + eps && g(i) > 0.0;
            const bool at_ub = v(i) >= ub(i) - eps && g(i) < 0.0;
            if (!at_lb && !at_ub) free_idx.push_back(i);
        }
        VectorXd dir = VectorXd::Zero(n);
        if (free_idx.empty()) break;
        MatrixXd hff(free_idx.size(), free_idx.size());
        VectorXd gf(free_idx.size());
        for (std::size_t a = 0; a < free_idx.size(); ++a) {
            gf(a) = g(free_idx[a]);
            for (std::size_t b = 0; b < free_idx.size(); ++b)
                hff(a, b) = hess(free_idx[a], free_idx[b]);
        }
        const VectorXd df = hff.ldlt().solve(-gf);
        for (std::size_t a = 0; a < free_idx.size(); ++a) dir(free_idx[a]) = df(a);

        // Backtrack on the quadratic objective (projection can bend the step).
        const auto qobj = [&](const VectorXd& x) {
            const VectorXd d = x - u0;
            return 0.5 * d.dot(hess * d) + grad.dot(d);
        };
        const double f0 = qobj(v);
        double alpha = 1.0;
        VectorXd vn = clip(v + alpha * dir, lb, ub);
        while (qobj(vn) > f0 - 1e-10 * std::abs(f0) && alpha > 1e-6) {
            alpha *= 0.5;
            vn = clip(v + alpha * dir, lb, ub);
        }
        if ((vn - v).lpNorm<Eigen::Infinity>() == 0.0) break;
        v = vn;
    }
    return v;
}

struct BoundVectors {
    VectorXd lb;
    VectorXd ub;
};

BoundVectors stacked_bounds(const MpcProblem& p) {
    BoundVectors b;
    b.lb = VectorXd(3 * p.horizon);
    b.ub = VectorXd(3 * p.horizon);
    for (int i = 0; i < p.horizon; ++i) {
        b.lb.segment<3>(3 * i) = p.lb;
        b.ub.segment<3>(3 * i) = p.ub;
    }
    return b;
}

} // namespace

Eigen::VectorXd cost_gradient(const MpcProblem& p, const ControlSequence& u,
                              SensitivityMode mode) {
    p.validate();
    SolverOptions opts;
    opts.sensitivity = mode;
    const Linearization lin = linearize(p, u, opts);
    if (!lin.ok) throw std::runtime_error("prediction rollout diverged in cost_gradient");
    VectorXd grad;
    MatrixXd hess;
    assemble_normal_equations(p, u, lin, grad, hess);
    return grad;
}

MpcSolution solve_full(const MpcProblem& p, const ControlSequence* warm_start,
                       const SolverOptions& opts) {
    p.validate();
    const BoundVectors bounds = stacked_bounds(p);
    VectorXd u = warm_start != nullptr ? stack_controls(*warm_start)
                                       : VectorXd::Zero(3 * p.horizon);
    if (warm_start != nullptr &&
        static_cast<int>(warm_start->u.size()) != p.horizon)
        throw ConfigError("warm start length must equal the horizon");
    u = clip(u, bounds.lb, bounds.ub);

    MpcSolution sol;
    ControlSequence useq = unstack_controls(u);
    double cost = rollout_cost(p, useq);
    if (!std::isfinite(cost)) throw std::runtime_error("non-finite cost at initial iterate");
    if (opts.record_trace) sol.cost_trace.push_back(cost);

    double kkt = std::numeric_limits<double>::infinity();
    SolveStatus status = SolveStatus::max_iter;
    int iters = 0;
    double qp_us = 0.0;

    for (int it = 0; it < opts.max_iter; ++it) {
        const Linearization lin = linearize(p, useq, opts);
        if (!lin.ok) throw std::runtime_error("prediction rollout diverged in solver");
        VectorXd grad;
        MatrixXd hess;
        assemble_normal_equations(p, useq, lin, grad, hess);
        kkt = projected_gradient_norm(u, grad, bounds.lb, bounds.ub);

        const auto t0 = Clock::now();
        const VectorXd v = solve_box_qp(hess, grad, u, bounds.lb, bounds.ub, opts);
        qp_us += elapsed_us(t0);
        const VectorXd du = v - u;
        const double step_norm = du.lpNorm<Eigen::Infinity>();
        // Converged only once the pending QP step is itself negligible; this
        // makes a subsequent RTI call from the returned iterate a fixed point.
        if (step_norm <= opts.step_tol ||
            (kkt <= opts.grad_tol && step_norm <= 1e-8)) {
            status = SolveStatus::converged;
            break;
        }

        // Armijo backtracking along the (feasible) segment to the QP point.
        const double slope = grad.dot(du);
        double alpha = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            const VectorXd cand = u + alpha * du;
            const ControlSequence cand_seq = unstack_controls(cand);
            const double cand_cost = rollout_cost(p, cand_seq);
            if (std::isfinite(cand_cost) &&
                cand_cost <= cost + 1e-4 * alpha * slope) {
                u = cand;
                useq = cand_seq;
                cost = cand_cost;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        ++iters;
        if (opts.record_trace) sol.cost_trace.push_back(cost);
        if (!accepted) {
            status = kkt <= opts.grad_tol ? SolveStatus::converged : SolveStatus::max_iter;
            break;
        }
    }

    // Exact KKT residual at the returned iterate.
    {
        const Linearization lin = linearize(p, useq, opts);
        if (lin.ok) {
            VectorXd grad;
            MatrixXd hess;
            assemble_normal_equations(p, useq, lin, grad, hess);
            kkt = projected_gradient_norm(u, grad, bounds.lb, bounds.ub);
        }
    }

    sol.u_seq = useq;
    sol.cost = cost;
    sol.iterations = iters;
    sol.kkt_residual = kkt;
    sol.status = status;
    sol.qp_time_us = qp_us;
    return sol;
}

MpcSolution solve_rti(const MpcProblem& p, const ControlSequence& warm_start,
                      const SolverOptions& opts) {
    p.validate();
    if (static_cast<int>(warm_start.u.size()) != p.horizon)
        throw ConfigError("RTI requires a warm start of horizon length");
    const BoundVectors bounds = stacked_bounds(p);
    VectorXd u = clip(stack_controls(warm_start), bounds.lb, bounds.ub);
    ControlSequence useq = unstack_controls(u);

    const Linearization lin = linearize(p, useq, opts);
    if (!lin.ok) throw std::runtime_error("prediction rollout diverged in RTI");
    VectorXd grad;
    MatrixXd hess;
    assemble_normal_equations(p, useq, lin, grad, hess);

    const auto t0 = Clock::now();
    const VectorXd v = solve_box_qp(hess, grad, u, bounds.lb, bounds.ub, opts);
    const double qp_us = elapsed_us(t0);

    MpcSolution sol;
    sol.u_seq = unstack_controls(v);
    sol.cost = rollout_cost(p, sol.u_seq);
    sol.iterations = 1;
    sol.kkt_residual = projected_gradient_norm(v, VectorXd(hess * (v - u) + grad),
                                               bounds.lb, bounds.ub);
    sol.status = SolveStatus::rti_single_step;
    sol.qp_time_us = qp_us;
    return sol;
}

ControlSequence shift_warm_start(const ControlSequence& prev) {
    if (prev.u.empty()) return prev;
    ControlSequence out;
    out.u.assign(prev.u.begin() + 1, prev.u.end());
    out.u.push_back(prev.u.back());
    return out;
}

Eigen::MatrixXd build_box_matrix(int n_p, const Vec3& lb, const Vec3& ub) {
    if (n_p < 1) throw ConfigError("build_box_matrix requires n_p >= 1");
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(6 * n_p, 3 * n_p + 3);
    for (int k = 0; k < n_p; ++k) {
        for (int c = 0; c < 3; ++c) {
            // u <= ub rows
            l(3 * k + c, 3 * k + c) = 1.0;
            l(3 * k + c, 3 * n_p + c) = -ub(c);
            // lb <= u rows
            l(3 * n_p + 3 * k + c, 3 * k + c) = -1.0;
            l(3 * n_p + 3 * k + c, 3 * n_p + c) = lb(c);
        }
    }
    return l;
}

} // namespace l2sk
