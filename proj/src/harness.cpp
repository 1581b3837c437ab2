#include "l2sk/harness.hpp"

#include "l2sk/dynamics.hpp"
#include "l2sk/planner.hpp"
#include "l2sk/regulation.hpp"
#include "l2sk/sampled.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace l2sk {

const char* to_string(Controller c) {
    switch (c) {
        case Controller::fl: return "fl";
        case Controller::regulation: return "regulation";
        case Controller::mrmpc: return "mrmpc";
        case Controller::nmpc_baseline: return "nmpc_baseline";
    }
    return "?";
}

const char* to_string(ScenarioId s) {
    switch (s) {
        case ScenarioId::s1: return "1";
        case ScenarioId::s2: return "2";
        case ScenarioId::s3: return "3";
        case ScenarioId::s4: return "4";
        case ScenarioId::custom: return "custom";
    }
    return "?";
}

Controller controller_from_string(const std::string& s) {
    if (s == "fl") return Controller::fl;
    if (s == "reg" || s == "regulation") return Controller::regulation;
    if (s == "mrmpc") return Controller::mrmpc;
    if (s == "nmpc" || s == "nmpc_baseline") return Controller::nmpc_baseline;
    throw ConfigError("unknown controller '" + s + "'");
}

ScenarioId scenario_from_string(const std::string& s) {
    if (s == " " || s.empty()) throw ConfigError("empty scenario id");
    if (s == "1" || s == "s1") return ScenarioId::s1;
    if (s == "2" || s == "s2") return ScenarioId::s2;
    if (s == "3" || s == "s3") return ScenarioId::s3;
    if (s == "4" || s == "s4") return ScenarioId::s4;
    if (s == "custom") return ScenarioId::custom;
    throw ConfigError("unknown scenario '" + s + "'");
}

void ScenarioConfig::validate() const {
    constants.validate();
    orbit.validate();
    if (!(duration_hours > 0.0)) throw ConfigError("duration_hours must be > 0");
    if (!(delta_bar_hours > 0.0)) throw ConfigError("delta_bar_hours must be > 0");
    if (sat_limit && !((*sat_limit).array() > 0.0).all())
        throw ConfigError("sat_limit must be positive");
    if (mpc.n_hat_p < 1) throw ConfigError("n_hat_p must be >= 1");
    if (!(divergence_nd > 0.0)) throw ConfigError("divergence_nd must be > 0");
}

ScenarioConfig preset_scenario(ScenarioId id, Controller controller) {
    ScenarioConfig cfg;
    cfg.id = id;
    cfg.controller = controller;
    const double l2 = libration_points(cfg.constants).l2;
    switch (id) {
        case ScenarioId::s1:
            cfg.initial_state << l2, 0, 0, 0, 0, 0;
            cfg.srp_on = false;
            cfg.ecc_on = false;
            break;
        case ScenarioId::s2:
            cfg.initial_state << l2, 0, 0, 0, 0, 0;
            cfg.sat_limit = Vec3::Constant(0.55);
            break;
        case ScenarioId::s3: {
            const LinearModel lm = linearize_at_l2(cfg.constants);
            const ExoMatrices exo = build_exo_matrices(cfg.orbit, cfg.constants, lm);
            cfg.initial_state = steady_state_pi(exo_init(cfg.orbit), exo);
            const double off = 300.0 / kEarthMoonKm / std::sqrt(3.0);
            cfg.initial_state.head<3>() += Vec3::Constant(off);
            cfg.sat_limit = Vec3::Constant(0.55);
            break;
        }
        case ScenarioId::s4:
            cfg.initial_state << 1.022, 0, 0.12, 0, 0.1, 0;
            cfg.delta_bar_hours = 1.2;
            break;
        case ScenarioId::custom:
            cfg.initial_state << l2, 0, 0, 0, 0, 0;
            break;
    }
    return cfg;
}

namespace {

double percentile95(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t idx =
        std::min(v.size() - 1, static_cast<std::size_t>(std::ceil(0.95 * v.size())) - 1);
    return v[idx];
}

double instant_e_rms(const Vec3& p, const Vec3& nu) {
    return std::sqrt((nu - p).norm() / 3.0);
}

} // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    const auto wall0 = std::chrono::steady_clock::now();

    PhysicalConstants c = cfg.constants;
    if (!cfg.ecc_on) c.ecc = 0.0;
    const double dbar = c.hours_to_nd(cfg.delta_bar_hours);
    const double delta = 2.0 * dbar;
    const int steps = std::max(1, static_cast<int>(std::floor(
                                       cfg.duration_hours / cfg.delta_bar_hours + 1e-9)));

    LinearModel lm = linearize_at_l2(c);
    c.pulsation_anchor_x = lm.l2;
    const ExoMatrices exo = build_exo_matrices(cfg.orbit, c, lm);
    RegulatorGains gains;
    gains.k_matrix = place_poles(lm, cfg.gains.reg_poles);
    gains.a_d = default_design_matrix(dbar, cfg.gains.plan_contraction);
    const Mat3 kp = cfg.gains.fl_kp * Mat3::Identity();
    const Mat3 kd = cfg.gains.fl_kd * Mat3::Identity();

    SamplingConfig scfg;
    scfg.delta = delta;
    scfg.substeps = cfg.mpc.substeps;
    const PlantMode plant_mode{cfg.ecc_on, cfg.srp_on};

    const bool uses_mpc =
        cfg.controller == Controller::mrmpc || cfg.controller == Controller::nmpc_baseline;
    const int n_p = 2 * cfg.mpc.n_hat_p;
    MpcProblem problem;
    if (uses_mpc) {
        problem.horizon = n_p;
        problem.q_weight = cfg.mpc.q_diag.asDiagonal();
        problem.r_weight = cfg.mpc.r_scale * Mat3::Identity();
        if (cfg.sat_limit) {
            problem.lb = -*cfg.sat_limit;
            problem.ub = *cfg.sat_limit;
        }
        problem.delta_bar = dbar;
        problem.model = circular_prediction(dbar, scfg, c);
        problem.reference.resize(n_p);
    }

    ScenarioResult res;
    res.steps.reserve(static_cast<std::size_t>(steps));
    std::vector<double> qp_times;

    Vec6 q = cfg.initial_state;
    Vec4 w = exo_init(cfg.orbit);
    double t = 0.0;
    PlannedReference plan;
    Vec3 plan_seed_velocity = Vec3::Zero();
    ControlSequence prev_u;
    bool have_prev = false;
    double ee_sq_sum = 0.0;

    for (int k = 0; k < steps; ++k) {
        const Vec3 nu_t = reference_nu(w, exo);
        const Vec3 p = q.head<3>();
        const double err = (p - nu_t).norm();
        if (!q.allFinite()) {
            res.failed = true;
            res.failure_reason = "non-finite state";
            break;
        }
        if (err > cfg.divergence_nd) {
            res.failed = true;
            res.failure_reason = "divergence bound exceeded";
            break;
        }

        Vec3 u = Vec3::Zero();
        Vec3 plan_target = nu_t;
        try {
            switch (cfg.controller) {
                case Controller::fl:
                    u = feedback_linearization(q, w, kp, kd, exo, c);
                    break;
                case Controller::regulation:
                    u = ct_regulation_feedback(q, w, gains, exo, c);
                    break;
                case Controller::mrmpc: {
                    if (k % 2 == 0) {
                        plan = plan_horizon(q, w, cfg.mpc.n_hat_p, delta, exo, c, gains);
                        plan_seed_velocity = q.tail<3>();
                    }
                    if (plan.envelope_warning) res.planner_envelope_warning = true;
                    // Positions come from the plan verbatim. Half-period
                    // velocity samples carry the multirate overdrive (the
                    // first sub-control slams the rate to place positions);
                    // hand the MPC the path-consistent midpoint rate instead.
                    for (int i = 0; i < n_p; ++i) {
                        const std::size_t src = (k % 2 == 0) ? i : std::min<std::size_t>(
                                                                        i + 1, n_p - 1);
                        problem.reference[i] = plan.samples[src].q;
                        if (src % 2 == 0) {
                            const Vec3 v_prev = src == 0 ? plan_seed_velocity
                                                         : Vec3(plan.samples[src - 1]
                                                                    .q.tail<3>());
                            const Vec3 v_next = plan.samples[src + 1].q.tail<3>();
                            problem.reference[i].tail<3>() = 0.5 * (v_prev + v_next);
                        }
                    }
                    problem.initial_state = q;
                    MpcSolution sol;
                    if (cfg.mpc.rti && have_prev) {
                        sol = solve_rti(problem, shift_warm_start(prev_u), cfg.mpc.solver);
                    } else if (have_prev) {
                        const ControlSequence warm = shift_warm_start(prev_u);
                        sol = solve_full(problem, &warm, cfg.mpc.solver);
                    } else {
                        sol = solve_full(problem, nullptr, cfg.mpc.solver);
                    }
                    qp_times.push_back(sol.qp_time_us);
                    prev_u = sol.u_seq;
                    have_prev = true;
                    u = sol.u_seq.u.front();
                    plan_target = problem.reference.front().head<3>();
                    break;
                }
                case Controller::nmpc_baseline: {
                    for (int i = 0; i < n_p; ++i)
                        problem.reference[i] =
                            steady_state_pi(exo_propagate(w, (i + 1) * dbar, exo), exo);
                    problem.initial_state = q;
                    MpcSolution sol;
                    if (cfg.mpc.rti && have_prev) {
                        sol = solve_rti(problem, shift_warm_start(prev_u), cfg.mpc.solver);
                    } else if (have_prev) {
                        const ControlSequence warm = shift_warm_start(prev_u);
                        sol = solve_full(problem, &warm, cfg.mpc.solver);
                    } else {
                        sol = solve_full(problem, nullptr, cfg.mpc.solver);
                    }
                    qp_times.push_back(sol.qp_time_us);
                    prev_u = sol.u_seq;
                    have_prev = true;
                    u = sol.u_seq.u.front();
                    plan_target = problem.reference.front().head<3>();
                    break;
                }
            }
        } catch (const std::exception& e) {
            res.failed = true;
            res.failure_reason = std::string("controller error: ") + e.what();
            break;
        }

        if (cfg.sat_limit) u = u.cwiseMax(-*cfg.sat_limit).cwiseMin(*cfg.sat_limit);
        ee_sq_sum += u.squaredNorm();

        StepRecord rec;
        rec.t_nd = t;
        rec.q = q;
        rec.u = u;
        rec.nu = nu_t;
        rec.plan = plan_target;
        rec.err_norm = err;
        rec.e_rms = instant_e_rms(p, nu_t);
        rec.ee_cum = cfg.delta_bar_hours * std::sqrt(ee_sq_sum);
        res.steps.push_back(rec);

        try {
            q = plant_step(q, t, u, dbar, scfg, c, plant_mode);
        } catch (const std::exception& e) {
            res.failed = true;
            res.failure_reason = std::string("plant error: ") + e.what();
            t += dbar;
            w = exo_propagate(w, dbar, exo);
            break;
        }
        t += dbar;
        w = exo_propagate(w, dbar, exo);
    }

    res.final_state = q;
    res.final_nu = reference_nu(w, exo);
    res.final_time_nd = t;
    if (!res.failed) {
        const double final_err = (q.head<3>() - res.final_nu).norm();
        if (!q.allFinite() || final_err > cfg.divergence_nd) {
            res.failed = true;
            res.failure_reason = "divergence bound exceeded at final time";
        }
    }

    res.kpis = compute_kpis(res, cfg);
    res.qp_time_us_mean =
        qp_times.empty() ? 0.0
                         : std::accumulate(qp_times.begin(), qp_times.end(), 0.0) /
                               static_cast<double>(qp_times.size());
    res.qp_time_us_p95 = percentile95(qp_times);
    res.wall_time_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - wall0)
                           .count();
    return res;
}

KpiRecord compute_kpis(const ScenarioResult& traj, const ScenarioConfig& cfg) {
    KpiRecord kpi;
    kpi.failed = traj.failed;
    kpi.e_rms_series.reserve(traj.steps.size());
    kpi.u_norm_series.reserve(traj.steps.size());
    double sumsq = 0.0;
    for (const StepRecord& s : traj.steps) {
        kpi.e_rms_series.push_back(instant_e_rms(s.q.head<3>(), s.nu));
        kpi.u_norm_series.push_back(s.u.norm());
        sumsq += s.u.squaredNorm();
    }
    const Vec3 pf = traj.final_state.head<3>();
    kpi.e_rms_final = instant_e_rms(pf, traj.final_nu);
    kpi.ee_total = cfg.delta_bar_hours * std::sqrt(sumsq);
    const double dbar_nd = cfg.constants.hours_to_nd(cfg.delta_bar_hours);
    const double final_err = (traj.final_nu - pf).norm();
    kpi.e_rms_final_si = final_err / std::sqrt(3.0);
    kpi.ee_total_si = std::sqrt(sumsq * dbar_nd);
    return kpi;
}

std::vector<ComparisonRow> compare(const std::vector<ScenarioConfig>& cfgs) {
    if (cfgs.empty()) throw ConfigError("compare requires at least one configuration");
    std::vector<ComparisonRow> rows;
    rows.reserve(cfgs.size());
    for (const ScenarioConfig& cfg : cfgs) {
        const ScenarioResult r = run_scenario(cfg);
        rows.push_back(ComparisonRow{cfg.id, cfg.controller, r.kpis.e_rms_final,
                                     r.kpis.ee_total, r.failed});
    }
    return rows;
}

std::string format_comparison_table(const std::vector<ComparisonRow>& rows) {
    std::ostringstream os;
    os << "scenario controller      e_RMS(T)     EE_T        status\n";
    char buf[128];
    for (const ComparisonRow& r : rows) {
        if (r.failed) {
            std::snprintf(buf, sizeof(buf), "%-8s %-14s %-12s %-11s %s\n",
                          to_string(r.id), to_string(r.controller), "N/A", "N/A",
                          "FAILED");
        } else {
            std::snprintf(buf, sizeof(buf), "%-8s %-14s %-12.6g %-11.6g %s\n",
                          to_string(r.id), to_string(r.controller), r.e_rms_final,
                          r.ee_total, "ok");
        }
        os << buf;
    }
    return os.str();
}

namespace {

void write_g12(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    os << buf;
}

} // namespace

void emit_csv(const ScenarioResult& result, const ScenarioConfig& cfg,
              const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << "t_nd,t_hours,x,y,z,vx,vy,vz,u1,u2,u3,ref_x,ref_y,ref_z,"
          "plan_x,plan_y,plan_z,err_norm,e_rms,ee_cum\n";
    for (const StepRecord& s : result.steps) {
        double cols[20] = {
            s.t_nd,  cfg.constants.nd_to_hours(s.t_nd),
            s.q(0),  s.q(1),  s.q(2),  s.q(3),  s.q(4),  s.q(5),
            s.u(0),  s.u(1),  s.u(2),
            s.nu(0), s.nu(1), s.nu(2),
            s.plan(0), s.plan(1), s.plan(2),
            s.err_norm, s.e_rms, s.ee_cum};
        for (int i = 0; i < 20; ++i) {
            if (i > 0) os << ',';
            write_g12(os, cols[i]);
        }
        os << '\n';
    }
    if (!os.good()) throw std::runtime_error("write failed: " + path);
}

void emit_kpi_json(const ScenarioResult& result, const ScenarioConfig& cfg,
                   const std::string& path) {
    nlohmann::ordered_json j;
    j["scenario"] = to_string(cfg.id);
    j["controller"] = to_string(cfg.controller);
    j["e_rms_final"] = result.kpis.e_rms_final;
    j["ee_total"] = result.kpis.ee_total;
    j["failed"] = result.failed;
    j["steps"] = result.steps.size();
    j["wall_time_ms"] = result.wall_time_ms;
    j["qp_time_us_mean"] = result.qp_time_us_mean;
    j["qp_time_us_p95"] = result.qp_time_us_p95;
    if (cfg.kpi_strict_si) {
        j["e_rms_final_si"] = result.kpis.e_rms_final_si;
        j["ee_total_si"] = result.kpis.ee_total_si;
    }
    if (!result.failure_reason.empty()) j["failure_reason"] = result.failure_reason;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << j.dump(2) << '\n';
}

KpiRecord kpis_from_csv(const std::string& path, double delta_bar_hours_hint) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty csv: " + path);

    std::vector<std::array<double, 20>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::array<double, 20> row{};
        std::stringstream ss(line);
        std::string cell;
        int i = 0;
        while (std::getline(ss, cell, ',') && i < 20) row[i++] = std::stod(cell);
        if (i != 20) throw std::runtime_error("malformed csv row in " + path);
        rows.push_back(row);
    }

    KpiRecord kpi;
    if (rows.empty()) return kpi;
    double dbar_h = delta_bar_hours_hint;
    if (dbar_h <= 0.0) dbar_h = rows.size() > 1 ? rows[1][1] - rows[0][1] : 0.65;

    double sumsq = 0.0;
    for (const auto& r : rows) {
        const Vec3 p(r[2], r[3], r[4]);
        const Vec3 nu(r[11], r[12], r[13]);
        kpi.e_rms_series.push_back(instant_e_rms(p, nu));
        const Vec3 u(r[8], r[9], r[10]);
        kpi.u_norm_series.push_back(u.norm());
        sumsq += u.squaredNorm();
    }
    kpi.e_rms_final = kpi.e_rms_series.back();
    kpi.ee_total = dbar_h * std::sqrt(sumsq);
    return kpi;
}

} // namespace l2sk
