#include "fnm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fnm/errors.hpp"

namespace fnm {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw ConfigError("config field '" + field + "': " + what);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail(where.empty() ? "<root>" : where, "must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string& k = it.key();
        if (!k.empty() && k[0] == '_') continue;  // annotations
        if (!allowed.count(k)) fail(where.empty() ? k : where + "." + k, "unknown key");
    }
}

std::string path(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

double number(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) fail(path(where, key), "is required");
    const json& v = obj.at(key);
    if (!v.is_number()) fail(path(where, key), "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path(where, key), "must be finite");
    return d;
}

double number_or(const json& obj, const std::string& where, const std::string& key, double def) {
    return obj.contains(key) ? number(obj, where, key) : def;
}

int integer_or(const json& obj, const std::string& where, const std::string& key, int def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(path(where, key), "must be an integer");
    return v.get<int>();
}

// number, or the string "auto" (absent)
std::optional<double> auto_number(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) return std::nullopt;
    const json& v = obj.at(key);
    if (v.is_string()) {
        if (v.get<std::string>() == "auto") return std::nullopt;
        fail(path(where, key), "must be a number or \"auto\"");
    }
    return number(obj, where, key);
}

void positive(double v, const std::string& field) {
    if (!(v > 0.0)) fail(field, "must be positive");
}

}  // namespace

double ExperimentConfig::x0(int i) const {
    if (packets[i].x0) return *packets[i].x0;
    return i == 0 ? 0.25 * geometry.L_A : -0.25 * geometry.L_A;
}

json ExperimentConfig::to_json() const {
    json j;
    j["geometry"] = {{"L_A", geometry.L_A}, {"L_B", geometry.L_B}, {"V1", geometry.V1}, {"V2", geometry.V2}};
    j["packets"] = json::array();
    for (int i = 0; i < 2; ++i) j["packets"].push_back({{"x0", x0(i)}, {"sigma", packets[i].sigma}});
    j["fidelity_target"] = fidelity_target;
    j["k_max"] = k_max ? json(*k_max) : json("auto");
    j["grid"] = {{"t_min", grid.t_min}, {"t_max", grid.t_max}, {"n_t", grid.n_t}};
    j["average"] = {{"t_max", average.t_max ? json(*average.t_max) : json("auto")},
                    {"n_t", average.n_t},
                    {"max_doublings", average.max_doublings},
                    {"rel_tol", average.rel_tol}};
    j["epsilon_rec"] = epsilon_rec;
    if (sweep) j["sweep"] = {{"parameter", sweep->parameter}, {"values", sweep->values}};
    return j;
}

ExperimentConfig parse_config(const json& j) {
    check_keys(j, "", {"geometry", "packets", "fidelity_target", "k_max", "grid", "average", "epsilon_rec", "sweep"});
    ExperimentConfig c;

    if (!j.contains("geometry")) fail("geometry", "is required");
    const json& g = j.at("geometry");
    check_keys(g, "geometry", {"L_A", "L_B", "V1", "V2"});
    c.geometry.L_A = number(g, "geometry", "L_A");
    c.geometry.L_B = number(g, "geometry", "L_B");
    c.geometry.V1 = number_or(g, "geometry", "V1", 0.0);
    c.geometry.V2 = number_or(g, "geometry", "V2", 0.0);
    positive(c.geometry.L_A, "geometry.L_A");
    positive(c.geometry.L_B, "geometry.L_B");
    if (c.geometry.V1 < 0.0) fail("geometry.V1", "must be non-negative");
    if (c.geometry.V2 < 0.0) fail("geometry.V2", "must be non-negative");

    if (!j.contains("packets")) fail("packets", "is required");
    const json& ps = j.at("packets");
    if (!ps.is_array() || ps.size() != 2) fail("packets", "must be a list of exactly two packets");
    for (int i = 0; i < 2; ++i) {
        const std::string where = "packets[" + std::to_string(i) + "]";
        check_keys(ps[i], where, {"x0", "sigma"});
        c.packets[i].sigma = number(ps[i], where, "sigma");
        positive(c.packets[i].sigma, where + ".sigma");
        if (ps[i].contains("x0")) c.packets[i].x0 = number(ps[i], where, "x0");
        if (!(std::abs(c.x0(i)) < 0.5 * c.geometry.L())) fail(where + ".x0", "must satisfy |x0| < L/2");
    }

    c.fidelity_target = number_or(j, "", "fidelity_target", 0.99);
    if (!(c.fidelity_target > 0.0 && c.fidelity_target <= 1.0)) fail("fidelity_target", "must lie in (0, 1]");
    c.k_max = auto_number(j, "", "k_max");
    if (c.k_max) positive(*c.k_max, "k_max");

    if (j.contains("grid")) {
        const json& gr = j.at("grid");
        check_keys(gr, "grid", {"t_min", "t_max", "n_t"});
        c.grid.t_min = number_or(gr, "grid", "t_min", 0.0);
        c.grid.t_max = number(gr, "grid", "t_max");
        c.grid.n_t = integer_or(gr, "grid", "n_t", 1001);
        if (c.grid.t_min < 0.0) fail("grid.t_min", "must be non-negative");
        if (!(c.grid.t_max > c.grid.t_min)) fail("grid.t_max", "must exceed grid.t_min");
        if (c.grid.n_t < 2) fail("grid.n_t", "must be at least 2");
    }

    if (j.contains("average")) {
        const json& a = j.at("average");
        check_keys(a, "average", {"t_max", "n_t", "max_doublings", "rel_tol"});
        c.average.t_max = auto_number(a, "average", "t_max");
        if (c.average.t_max) positive(*c.average.t_max, "average.t_max");
        c.average.n_t = integer_or(a, "average", "n_t", c.average.n_t);
        c.average.max_doublings = integer_or(a, "average", "max_doublings", c.average.max_doublings);
        c.average.rel_tol = number_or(a, "average", "rel_tol", c.average.rel_tol);
        if (c.average.n_t < 2) fail("average.n_t", "must be at least 2");
        if (c.average.max_doublings < 0) fail("average.max_doublings", "must be non-negative");
        positive(c.average.rel_tol, "average.rel_tol");
    }

    c.epsilon_rec = number_or(j, "", "epsilon_rec", 0.05);
    if (!(c.epsilon_rec > 0.0 && c.epsilon_rec < 1.0)) fail("epsilon_rec", "must lie in (0, 1)");

    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        check_keys(s, "sweep", {"parameter", "values", "start", "stop", "count"});
        SweepSpec sw;
        if (!s.contains("parameter") || !s.at("parameter").is_string()) fail("sweep.parameter", "must be a string");
        sw.parameter = s.at("parameter").get<std::string>();
        if (sw.parameter != "L_B" && sw.parameter != "V0" && sw.parameter != "sigma")
            fail("sweep.parameter", "must be one of L_B, V0, sigma");
        if (s.contains("values")) {
            if (s.contains("start") || s.contains("stop") || s.contains("count"))
                fail("sweep", "give either values or start/stop/count");
            const json& v = s.at("values");
            if (!v.is_array() || v.empty()) fail("sweep.values", "must be a non-empty list");
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (!v[i].is_number()) fail("sweep.values[" + std::to_string(i) + "]", "must be a number");
                sw.values.push_back(v[i].get<double>());
            }
        } else {
            const double a = number(s, "sweep", "start"), b = number(s, "sweep", "stop");
            const int n = integer_or(s, "sweep", "count", 0);
            if (n < 1) fail("sweep.count", "must be a positive integer");
            for (int i = 0; i < n; ++i) sw.values.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
        }
        for (std::size_t i = 1; i < sw.values.size(); ++i)
            if (!(sw.values[i] > sw.values[i - 1])) fail("sweep.values", "must be strictly increasing");
        for (double v : sw.values) {
            if (sw.parameter == "V0" ? !(v >= 0.0) : !(v > 0.0))
                fail("sweep.values", "out of range for parameter " + sw.parameter);
        }
        c.sweep = sw;
    }
    return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

ExperimentConfig load_config(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file " + file);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

ExperimentConfig with_parameter(const ExperimentConfig& c, const std::string& parameter, double value) {
    ExperimentConfig r = c;
    r.sweep.reset();
    if (parameter == "L_B") {
        r.geometry.L_B = value;
    } else if (parameter == "V0") {
        r.geometry.V1 = value;
        r.geometry.V2 = 2.0 * value;
    } else if (parameter == "sigma") {
        r.packets[0].sigma = value;
        r.packets[1].sigma = value;
    } else {
        throw ConfigError("unknown sweep parameter " + parameter);
    }
    for (int i = 0; i < 2; ++i)
        if (!(std::abs(r.x0(i)) < 0.5 * r.geometry.L()))
            throw ConfigError("packet center leaves the ring for " + parameter + " = " + std::to_string(value));
    return r;
}

}  // namespace fnm
