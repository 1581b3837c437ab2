#pragma once

#include "l2sk/constants.hpp"
#include "l2sk/exosystem.hpp"
#include "l2sk/mpc.hpp"
#include "l2sk/types.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace l2sk {

enum class Controller { fl, regulation, mrmpc, nmpc_baseline };
enum class ScenarioId { s1, s2, s3, s4, custom };

const char* to_string(Controller c);
const char* to_string(ScenarioId s);
Controller controller_from_string(const std::string& s);
ScenarioId scenario_from_string(const std::string& s);

struct GainConfig {
    std::array<double, 6> reg_poles{-5.5, -6.0, -6.5, -7.0, -7.5, -8.0};
    double fl_kp = 36.0;
    double fl_kd = 12.0;
    double plan_contraction = 0.5; // per-period error decay of the design model
};

struct MpcConfig {
    int n_hat_p = 15;
    Vec6 q_diag = (Vec6() << 10, 10, 10, 1, 1, 1).finished();
    double r_scale = 0.1;
    bool rti = false;
    int substeps = 16;
    SolverOptions solver;
};

struct ScenarioConfig {
    ScenarioId id = ScenarioId::custom;
    Controller controller = Controller::mrmpc;
    Vec6 initial_state = Vec6::Zero();
    bool srp_on = true;
    bool ecc_on = true;
    std::optional<Vec3> sat_limit;
    double delta_bar_hours = 0.65;
    double duration_hours = 65.0;
    double divergence_nd = 0.5;
    bool kpi_strict_si = false;
    PhysicalConstants constants;
    OrbitParams orbit;
    GainConfig gains;
    MpcConfig mpc;

    void validate() const;
};

/// Scenario presets (initial state, perturbation flags, saturation, rates).
ScenarioConfig preset_scenario(ScenarioId id, Controller controller);

struct StepRecord {
    double t_nd = 0.0;
    Vec6 q = Vec6::Zero();
    Vec3 u = Vec3::Zero();
    Vec3 nu = Vec3::Zero();
    Vec3 plan = Vec3::Zero();
    double err_norm = 0.0;
    double e_rms = 0.0;
    double ee_cum = 0.0;
};

struct KpiRecord {
    double e_rms_final = 0.0;
    double ee_total = 0.0;
    std::vector<double> e_rms_series;
    std::vector<double> u_norm_series;
    bool failed = false;
    // dimensionally consistent variants (emitted under --kpi-strict-si)
    double e_rms_final_si = 0.0;
    double ee_total_si = 0.0;
};

struct ScenarioResult {
    std::vector<StepRecord> steps;
    Vec6 final_state = Vec6::Zero();
    Vec3 final_nu = Vec3::Zero();
    double final_time_nd = 0.0;
    bool failed = false;
    std::string failure_reason;
    KpiRecord kpis;
    bool planner_envelope_warning = false;
    double wall_time_ms = 0.0;
    double qp_time_us_mean = 0.0;
    double qp_time_us_p95 = 0.0;
};

/// Runs one scenario: planning at t = k*delta (delta = 2*delta_bar), control
/// at every t = k*delta_bar, plant propagated in ground-truth mode.
/// Divergence (||p - nu|| above the configured bound) and solver hard errors
/// set failed instead of aborting the process.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// KPIs recomputed from a trajectory (also filled in by run_scenario).
KpiRecord compute_kpis(const ScenarioResult& traj, const ScenarioConfig& cfg);

struct ComparisonRow {
    ScenarioId id;
    Controller controller;
    double e_rms_final;
    double ee_total;
    bool failed;
};

/// Runs every configuration in order and collects the KPI table.
std::vector<ComparisonRow> compare(const std::vector<ScenarioConfig>& cfgs);

std::string format_comparison_table(const std::vector<ComparisonRow>& rows);

/// Per-step CSV: header plus one row per executed control step, 12
/// significant digits. Deterministic: identical configs yield byte-identical
/// files.
void emit_csv(const ScenarioResult& result, const ScenarioConfig& cfg,
              const std::string& path);

/// KPI summary sidecar (JSON).
void emit_kpi_json(const ScenarioResult& result, const ScenarioConfig& cfg,
                   const std::string& path);

/// Recompute KPIs from an emitted CSV (the `kpi` subcommand).
KpiRecord kpis_from_csv(const std::string& path, double delta_bar_hours_hint = 0.0);

} // namespace l2sk
