#include "l2sk/harness.hpp"

#include "l2sk/config.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace l2sk;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() / "l2sk_test_out";
        std::filesystem::create_directories(path);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("config parsing: sections, values, comments, errors") {
    const std::string text = R"(
# comment
[constants]
mu = 0.0121505856
ecc = 0.0549

[scenario]
controller = "mrmpc"   # inline comment
srp = true
sat = [0.55, 0.55, 0.55]
dt_hours = 0.65
)";
    const ConfigDoc doc = parse_config(text);
    CHECK(doc.at("constants").count("mu") == 1);
    CHECK(std::get<double>(doc.at("scenario").at("dt_hours")) == 0.65);
    CHECK(std::get<bool>(doc.at("scenario").at("srp")) == true);
    CHECK(std::get<std::string>(doc.at("scenario").at("controller")) == "mrmpc");
    CHECK(std::get<std::vector<double>>(doc.at("scenario").at("sat")).size() == 3);

    CHECK_THROWS_AS(parse_config("[unterminated\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("key_without_section\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[s]\nkey = \n"), ConfigError);
}

TEST_CASE("apply_config: overrides and unknown keys") {
    ScenarioConfig base = preset_scenario(ScenarioId::s1, Controller::regulation);
    const ConfigDoc doc = parse_config(R"(
[orbit]
k_amp = 0.1
[gains]
reg_poles = [-3, -3.5, -4, -4.5, -5, -5.5]
[mpc]
n_hat_p = 10
mode = "rti"
[scenario]
sat = 0.3
)");
    const ScenarioConfig cfg = apply_config(doc, base);
    CHECK(cfg.orbit.k_amp == 0.1);
    CHECK(cfg.gains.reg_poles[0] == -3.0);
    CHECK(cfg.mpc.n_hat_p == 10);
    CHECK(cfg.mpc.rti);
    REQUIRE(cfg.sat_limit.has_value());
    CHECK((*cfg.sat_limit - Vec3::Constant(0.3)).norm() == 0.0);

    CHECK_THROWS_AS(apply_config(parse_config("[scenario]\nbogus = 1\n"), base),
                    ConfigError);
    CHECK_THROWS_AS(apply_config(parse_config("[bogus]\nx = 1\n"), base), ConfigError);
}

TEST_CASE("scenario presets") {
    const ScenarioConfig s1 = preset_scenario(ScenarioId::s1, Controller::mrmpc);
    CHECK(!s1.srp_on);
    CHECK(!s1.ecc_on);
    CHECK(!s1.sat_limit.has_value());
    CHECK(s1.delta_bar_hours == 0.65);
    CHECK(s1.duration_hours == 65.0);
    CHECK(s1.initial_state(0) == doctest::Approx(1.155682).epsilon(1e-5));

    const ScenarioConfig s2 = preset_scenario(ScenarioId::s2, Controller::fl);
    CHECK(s2.srp_on);
    CHECK(s2.ecc_on);
    REQUIRE(s2.sat_limit.has_value());
    CHECK((*s2.sat_limit)(0) == 0.55);

    const ScenarioConfig s3 = preset_scenario(ScenarioId::s3, Controller::regulation);
    // the injection offset is exactly 300 km along the position diagonal
    const LinearModel lm = linearize_at_l2(s3.constants);
    const ExoMatrices exo = build_exo_matrices(s3.orbit, s3.constants, lm);
    const Vec6 on_orbit = steady_state_pi(exo_init(s3.orbit), exo);
    const double off_km = (s3.initial_state.head<3>() - on_orbit.head<3>()).norm() *
                          kEarthMoonKm;
    CHECK(off_km == doctest::Approx(300.0).epsilon(1e-9));
    CHECK((s3.initial_state.tail<3>() - on_orbit.tail<3>()).norm() == 0.0);

    const ScenarioConfig s4 = preset_scenario(ScenarioId::s4, Controller::mrmpc);
    CHECK(s4.delta_bar_hours == 1.2);
    CHECK(!s4.sat_limit.has_value());
    CHECK(s4.initial_state(0) == 1.022);
    CHECK(s4.initial_state(2) == 0.12);
    CHECK(s4.initial_state(4) == 0.1);
}

TEST_CASE("kpi arithmetic: zero error and constant control norm") {
    ScenarioConfig cfg = preset_scenario(ScenarioId::s1, Controller::regulation);
    cfg.delta_bar_hours = 0.65;
    ScenarioResult traj;
    const int m = 16;
    for (int k = 0; k < m; ++k) {
        StepRecord r;
        r.q = (Vec6() << 1.1, 0, 0, 0, 0, 0).finished();
        r.nu = r.q.head<3>();
        r.u = Vec3(0.3, 0.0, 0.0);
        traj.steps.push_back(r);
    }
    traj.final_state = traj.steps.back().q;
    traj.final_nu = traj.steps.back().nu;
    const KpiRecord kpi = compute_kpis(traj, cfg);
    CHECK(kpi.e_rms_final == 0.0);
    CHECK(kpi.ee_total ==
          doctest::Approx(0.65 * 0.3 * std::sqrt(double(m))).epsilon(1e-12));
    // strict-SI variant uses the normalized-time step
    const double dbar_nd = cfg.constants.hours_to_nd(0.65);
    CHECK(kpi.ee_total_si ==
          doctest::Approx(std::sqrt(m * 0.09 * dbar_nd)).epsilon(1e-12));
}

TEST_CASE("short regulation run: csv + json emission, determinism, kpi roundtrip") {
    TempDir tmp;
    ScenarioConfig cfg = preset_scenario(ScenarioId::s1, Controller::regulation);
    cfg.duration_hours = 6.5; // 10 steps
    const ScenarioResult res = run_scenario(cfg);
    CHECK(!res.failed);
    CHECK(res.steps.size() == 10);

    const std::string csv1 = tmp.file("reg1.csv");
    const std::string csv2 = tmp.file("reg2.csv");
    emit_csv(res, cfg, csv1);
    const ScenarioResult res2 = run_scenario(cfg);
    emit_csv(res2, cfg, csv2);
    const std::string a = slurp(csv1);
    const std::string b = slurp(csv2);
    CHECK(a == b); // byte-identical
    CHECK(std::count(a.begin(), a.end(), '\n') == 11); // header + 10 rows

    emit_kpi_json(res, cfg, tmp.file("reg1.json"));
    const std::string j = slurp(tmp.file("reg1.json"));
    CHECK(j.find("\"scenario\": \"1\"") != std::string::npos);
    CHECK(j.find("\"controller\": \"regulation\"") != std::string::npos);
    CHECK(j.find("\"failed\": false") != std::string::npos);

    const KpiRecord round = kpis_from_csv(csv1);
    CHECK(round.e_rms_series.size() == res.steps.size());
    CHECK(round.ee_total == doctest::Approx(res.steps.back().ee_cum).epsilon(1e-9));

    // empty trajectory emits a header-only file
    ScenarioResult empty;
    emit_csv(empty, cfg, tmp.file("empty.csv"));
    const std::string e = slurp(tmp.file("empty.csv"));
    CHECK(std::count(e.begin(), e.end(), '\n') == 1);
}

TEST_CASE("short mrmpc run with planner: tracks and emits plan targets") {
    ScenarioConfig cfg = preset_scenario(ScenarioId::s1, Controller::mrmpc);
    cfg.duration_hours = 2.6; // 4 steps
    cfg.mpc.n_hat_p = 4;
    const ScenarioResult res = run_scenario(cfg);
    CHECK(!res.failed);
    CHECK(res.steps.size() == 4);
    // plan targets differ from the raw reference while converging toward it
    CHECK((res.steps.front().plan - res.steps.front().nu).norm() > 0.0);
}

TEST_CASE("divergence flags a failed run without aborting") {
    ScenarioConfig cfg = preset_scenario(ScenarioId::s1, Controller::fl);
    cfg.duration_hours = 30.0;
    cfg.gains.fl_kp = -40.0; // destabilizing comparator gains
    cfg.gains.fl_kd = -4.0;
    const ScenarioResult res = run_scenario(cfg);
    CHECK(res.failed);
    CHECK(res.kpis.failed);
    CHECK(!res.failure_reason.empty());
}

TEST_CASE("compare: single config, table formatting") {
    ScenarioConfig cfg = preset_scenario(ScenarioId::s1, Controller::regulation);
    cfg.duration_hours = 3.25; // 5 steps
    const auto rows = compare({cfg});
    REQUIRE(rows.size() == 1);
    CHECK(!rows[0].failed);
    const std::string table = format_comparison_table(rows);
    CHECK(table.find("regulation") != std::string::npos);
    CHECK(table.find("ok") != std::string::npos);
    CHECK_THROWS_AS(compare({}), ConfigError);
}

TEST_CASE("config validation errors") {
    ScenarioConfig cfg = preset_scenario(ScenarioId::s1, Controller::regulation);
    cfg.duration_hours = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = preset_scenario(ScenarioId::s1, Controller::regulation);
    cfg.constants.mu = 0.7;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = preset_scenario(ScenarioId::s1, Controller::regulation);
    cfg.sat_limit = Vec3(0.1, -0.1, 0.1);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
