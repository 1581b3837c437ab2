#include "l2sk/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace l2sk {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_str = !in_str;
        if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

ConfigValue parse_value(const std::string& raw, int lineno) {
    const std::string v = trim(raw);
    if (v.empty()) throw ConfigError("empty value at line " + std::to_string(lineno));
    if (v == "true") return true;
    if (v == "false") return false;
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw ConfigError("unterminated string at line " + std::to_string(lineno));
        return v.substr(1, v.size() - 2);
    }
    if (v.front() == '[') {
        if (v.back() != ']')
            throw ConfigError("unterminated array at line " + std::to_string(lineno));
        std::vector<double> arr;
        std::stringstream ss(v.substr(1, v.size() - 2));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string it = trim(item);
            if (it.empty()) continue;
            arr.push_back(std::stod(it));
        }
        return arr;
    }
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size())
            throw ConfigError("malformed number at line " + std::to_string(lineno));
        return d;
    } catch (const std::invalid_argument&) {
        throw ConfigError("malformed value '" + v + "' at line " + std::to_string(lineno));
    }
}

} // namespace

ConfigDoc parse_config(const std::string& text) {
    ConfigDoc doc;
    std::string section;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError("malformed section header at line " + std::to_string(lineno));
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty())
                throw ConfigError("empty section name at line " + std::to_string(lineno));
            doc[section];
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(s.substr(0, eq));
        if (key.empty()) throw ConfigError("empty key at line " + std::to_string(lineno));
        doc[section][key] = parse_value(s.substr(eq + 1), lineno);
    }
    return doc;
}

ConfigDoc load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

namespace {

double as_number(const ConfigValue& v, const std::string& key) {
    if (const double* d = std::get_if<double>(&v)) return *d;
    throw ConfigError("expected number for " + key);
}

bool as_bool(const ConfigValue& v, const std::string& key) {
    if (const bool* b = std::get_if<bool>(&v)) return *b;
    throw ConfigError("expected boolean for " + key);
}

std::string as_string(const ConfigValue& v, const std::string& key) {
    if (const std::string* s = std::get_if<std::string>(&v)) return *s;
    throw ConfigError("expected string for " + key);
}

std::vector<double> as_array(const ConfigValue& v, const std::string& key, std::size_t n) {
    if (const auto* a = std::get_if<std::vector<double>>(&v)) {
        if (a->size() != n)
            throw ConfigError(key + " must have " + std::to_string(n) + " entries");
        return *a;
    }
    throw ConfigError("expected array for " + key);
}

} // namespace

ScenarioConfig apply_config(const ConfigDoc& doc, ScenarioConfig base) {
    for (const auto& [section, entries] : doc) {
        for (const auto& [key, value] : entries) {
            const std::string where = section + "." + key;
            if (section == "constants") {
                if (key == "mu") base.constants.mu = as_number(value, where);
                else if (key == "ecc") base.constants.ecc = as_number(value, where);
                else if (key == "srp_accel") base.constants.srp_accel = as_number(value, where);
                else if (key == "zeta") base.constants.zeta = as_number(value, where);
                else if (key == "phi") base.constants.phi = as_number(value, where);
                else if (key == "time_unit_seconds")
                    base.constants.time_unit_seconds = as_number(value, where);
                else throw ConfigError("unknown key " + where);
            } else if (section == "orbit") {
                if (key == "k_amp") base.orbit.k_amp = as_number(value, where);
                else if (key == "omega") {
                    base.orbit.omega_freq = as_number(value, where);
                    base.orbit.omega_z = base.orbit.omega_freq;
                } else if (key == "phi") base.orbit.phi = as_number(value, where);
                else throw ConfigError("unknown key " + where);
            } else if (section == "gains") {
                if (key == "reg_poles") {
                    const auto a = as_array(value, where, 6);
                    for (int i = 0; i < 6; ++i) base.gains.reg_poles[i] = a[i];
                } else if (key == "fl_kp") base.gains.fl_kp = as_number(value, where);
                else if (key == "fl_kd") base.gains.fl_kd = as_number(value, where);
                else if (key == "plan_contraction")
                    base.gains.plan_contraction = as_number(value, where);
                else throw ConfigError("unknown key " + where);
            } else if (section == "mpc") {
                if (key == "n_hat_p")
                    base.mpc.n_hat_p = static_cast<int>(as_number(value, where));
                else if (key == "q_diag") {
                    const auto a = as_array(value, where, 6);
                    for (int i = 0; i < 6; ++i) base.mpc.q_diag(i) = a[i];
                } else if (key == "r_scale") base.mpc.r_scale = as_number(value, where);
                else if (key == "mode") {
                    const std::string mode = as_string(value, where);
                    if (mode == "rti") base.mpc.rti = true;
                    else if (mode == "full") base.mpc.rti = false;
                    else throw ConfigError("mpc.mode must be full or rti");
                } else if (key == "sensitivity") {
                    const std::string s = as_string(value, where);
                    if (s == "analytic")
                        base.mpc.solver.sensitivity = SensitivityMode::analytic;
                    else if (s == "fd")
                        base.mpc.solver.sensitivity = SensitivityMode::forward_fd;
                    else throw ConfigError("mpc.sensitivity must be analytic or fd");
                } else if (key == "max_iter")
                    base.mpc.solver.max_iter = static_cast<int>(as_number(value, where));
                else if (key == "grad_tol") base.mpc.solver.grad_tol = as_number(value, where);
                else if (key == "fd_step") base.mpc.solver.fd_step = as_number(value, where);
                else if (key == "substeps")
                    base.mpc.substeps = static_cast<int>(as_number(value, where));
                else throw ConfigError("unknown key " + where);
            } else if (section == "scenario") {
                if (key == "id") base.id = scenario_from_string(as_string(value, where));
                else if (key == "controller")
                    base.controller = controller_from_string(as_string(value, where));
                else if (key == "dt_hours") base.delta_bar_hours = as_number(value, where);
                else if (key == "duration_hours") base.duration_hours = as_number(value, where);
                else if (key == "srp") base.srp_on = as_bool(value, where);
                else if (key == "ecc") base.ecc_on = as_bool(value, where);
                else if (key == "sat") {
                    if (const double* d = std::get_if<double>(&value)) {
                        base.sat_limit = Vec3::Constant(*d);
                    } else {
                        const auto a = as_array(value, where, 3);
                        base.sat_limit = Vec3(a[0], a[1], a[2]);
                    }
                } else if (key == "initial_state") {
                    const auto a = as_array(value, where, 6);
                    for (int i = 0; i < 6; ++i) base.initial_state(i) = a[i];
                } else if (key == "divergence_nd")
                    base.divergence_nd = as_number(value, where);
                else throw ConfigError("unknown key " + where);
            } else {
                throw ConfigError("unknown section [" + section + "]");
            }
        }
    }
    return base;
}

} // namespace l2sk
