#include "gruschin/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace gruschin {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

const json& require_field(const json& j, const std::string& key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "required field is missing");
    return *it;
}

double get_number(const json& j, const std::string& key, const std::string& path,
                  std::optional<double> fallback = std::nullopt) {
    auto it = j.find(key);
    if (it == j.end()) {
        if (fallback) return *fallback;
        fail(path + "." + key, "required number is missing");
    }
    if (!it->is_number()) fail(path + "." + key, "must be a number");
    return it->get<double>();
}

Vector get_vector(const json& j, const std::string& key, const std::string& path) {
    const json& arr = require_field(j, key, path);
    if (!arr.is_array() || arr.empty()) fail(path + "." + key, "must be a non-empty array");
    Vector v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) fail(path + "." + key, "must contain numbers only");
        v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    }
    return v;
}

ScalarTimeFn parse_scalar_fn(const json& j, const std::string& path, double fallback) {
    if (j.is_null()) return ScalarTimeFn::constant(fallback);
    std::string kind = j.value("kind", "constant");
    if (kind == "constant") return ScalarTimeFn::constant(get_number(j, "value", path));
    if (kind == "table") {
        const json& times = require_field(j, "times", path);
        const json& values = require_field(j, "values", path);
        if (!times.is_array() || !values.is_array() || times.size() != values.size())
            fail(path, "table needs equally long 'times' and 'values' arrays");
        try {
            return ScalarTimeFn::table(times.get<std::vector<double>>(),
                                       values.get<std::vector<double>>());
        } catch (const std::exception& e) {
            fail(path, e.what());
        }
    }
    fail(path + ".kind", "unknown kind '" + kind + "' (constant | table)");
}

SigmaSpec parse_sigma(const json& j, const std::string& path, int m) {
    if (j.is_null()) return SigmaSpec::identity();
    std::string kind = j.value("kind", "identity");
    if (kind == "identity") return SigmaSpec::identity();
    if (kind == "table") {
        const json& times = require_field(j, "times", path);
        const json& mats = require_field(j, "matrices", path);
        if (!times.is_array() || !mats.is_array() || times.size() != mats.size())
            fail(path, "table needs equally long 'times' and 'matrices' arrays");
        std::vector<Matrix> parsed;
        for (const json& mj : mats) {
            if (!mj.is_array() || mj.size() != static_cast<std::size_t>(m))
                fail(path + ".matrices", "each matrix must be m x m");
            Matrix s(m, m);
            for (int r = 0; r < m; ++r) {
                if (!mj[r].is_array() || mj[r].size() != static_cast<std::size_t>(m))
                    fail(path + ".matrices", "each matrix must be m x m");
                for (int c = 0; c < m; ++c) s(r, c) = mj[r][c].get<double>();
            }
            parsed.push_back(std::move(s));
        }
        try {
            return SigmaSpec::table(times.get<std::vector<double>>(), std::move(parsed));
        } catch (const std::exception& e) {
            fail(path, e.what());
        }
    }
    fail(path + ".kind", "unknown kind '" + kind + "' (identity | table)");
}

DriftSpec parse_drift(const json& j, const std::string& path) {
    if (j.is_null()) return DriftSpec::zero();
    std::string kind = j.value("kind", "zero");
    if (kind == "zero") return DriftSpec::zero();
    if (kind == "linear") return DriftSpec::linear(get_number(j, "coef", path));
    if (kind == "ou") {
        double rate = get_number(j, "rate", path);
        Vector target = get_vector(j, "target", path);
        try {
            return DriftSpec::ou(rate, std::move(target));
        } catch (const std::exception& e) {
            fail(path, e.what());
        }
    }
    fail(path + ".kind", "unknown kind '" + kind + "' (zero | linear | ou)");
}

} // namespace

BernsteinFunction parse_bernstein(const json& j, const std::string& where) {
    if (!j.is_object()) fail(where, "must be an object with a 'kind'");
    std::string kind = j.value("kind", "");
    try {
        if (kind == "stable")
            return BernsteinFunction::stable(get_number(j, "alpha", where),
                                             get_number(j, "c", where, 1.0));
        if (kind == "truncated_stable")
            return BernsteinFunction::truncated_stable(get_number(j, "beta", where),
                                                       get_number(j, "c", where, 1.0));
        if (kind == "relativistic_stable")
            return BernsteinFunction::relativistic_stable(get_number(j, "beta", where),
                                                          get_number(j, "c", where, 1.0),
                                                          get_number(j, "rho", where, 1.0));
        if (kind == "pure_drift")
            return BernsteinFunction::pure_drift(get_number(j, "theta", where));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail(where, e.what());
    }
    fail(where + ".kind",
         "unknown kind '" + kind +
             "' (stable | truncated_stable | relativistic_stable | pure_drift)");
}

GruschinModel ExperimentConfig::build_model() const {
    try {
        return GruschinModel(m, d, l, sigma, lambda, b, k, 2.0 * run.T + 1.0);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

BumpFunction ExperimentConfig::build_f() const {
    BumpFunction f;
    f.a = f_a;
    f.w = f_w;
    if (f_z0) {
        f.z0 = *f_z0;
    } else {
        f.z0 = Vector(m + d);
        f.z0.head(m) = y.x1;
        f.z0.tail(d) = y.x2;
    }
    return f;
}

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");

    const json model = j.value("model", json::object());
    cfg.m = static_cast<int>(get_number(model, "m", "model", 2));
    cfg.d = static_cast<int>(get_number(model, "d", "model", 1));
    cfg.l = get_number(model, "l", "model", 0.5);
    if (cfg.m < 1) fail("model.m", "must be >= 1");
    if (cfg.d < 1) fail("model.d", "must be >= 1");
    if (!(cfg.l > 0.0)) fail("model.l", "must be positive");
    cfg.sigma = parse_sigma(model.value("sigma", json()), "model.sigma", cfg.m);
    cfg.lambda = parse_scalar_fn(model.value("lambda", json()), "model.lambda", 1.0);
    cfg.b = parse_drift(model.value("b", json()), "model.b");
    cfg.k = parse_scalar_fn(model.value("k", json()), "model.k", 0.0);

    if (j.contains("phi1")) cfg.phi1 = parse_bernstein(j["phi1"], "phi1");
    if (j.contains("phi2")) cfg.phi2 = parse_bernstein(j["phi2"], "phi2");

    const json run = j.value("run", json::object());
    cfg.run.T = get_number(run, "T", "run", 1.0);
    if (!(cfg.run.T > 0.0)) fail("run.T", "must be positive");
    cfg.run.n_steps = static_cast<int>(get_number(run, "n_steps", "run", 256));
    if (cfg.run.n_steps < 16) fail("run.n_steps", "must be >= 16");
    if (cfg.run.n_steps % 2 != 0) fail("run.n_steps", "must be even (T is a grid node of [0,2T])");
    double paths = get_number(run, "n_paths", "run", 10000);
    if (!(paths >= 1)) fail("run.n_paths", "must be >= 1");
    cfg.run.n_paths = static_cast<std::size_t>(paths);
    if (!run.contains("seed")) fail("run.seed", "a seed is mandatory; there is no entropy-source default");
    if (!run["seed"].is_number_unsigned() && !run["seed"].is_number_integer())
        fail("run.seed", "must be a non-negative integer");
    cfg.run.seed = run["seed"].get<std::uint64_t>();
    cfg.run.eps_floor = get_number(run, "eps_floor", "run", 1e-8);
    if (!(cfg.run.eps_floor > 0.0)) fail("run.eps_floor", "must be positive");
    cfg.run.qmc = run.value("qmc", false);
    cfg.run.threads = static_cast<unsigned>(get_number(run, "threads", "run", 0));

    // Stiff drift guard: explicit Euler needs |k| dt < 0.1 over [0, 2T].
    double dt = 2.0 * cfg.run.T / cfg.run.n_steps;
    double k_max = 0.0;
    for (int i = 0; i <= 64; ++i)
        k_max = std::max(k_max, std::abs(cfg.k.at(2.0 * cfg.run.T * i / 64.0)));
    if (k_max * dt >= 0.1) fail("model.k", "|k| * dt must stay below 0.1; increase run.n_steps");

    auto parse_point = [&](const char* key, const char* k1, const char* k2) {
        StatePoint p;
        const json pj = j.value(key, json::object());
        if (pj.contains(k1)) {
            p.x1 = get_vector(pj, k1, key);
        } else {
            p.x1 = Vector::Zero(cfg.m);
        }
        if (pj.contains(k2)) {
            p.x2 = get_vector(pj, k2, key);
        } else {
            p.x2 = Vector::Zero(cfg.d);
        }
        if (p.x1.size() != cfg.m) fail(std::string(key) + "." + k1, "length must equal model.m");
        if (p.x2.size() != cfg.d) fail(std::string(key) + "." + k2, "length must equal model.d");
        if (!p.x1.allFinite() || !p.x2.allFinite())
            fail(key, "coordinates must be finite");
        return p;
    };
    cfg.x = parse_point("x", "x1", "x2");
    cfg.y = parse_point("y", "y1", "y2");

    const json f = j.value("f", json::object());
    cfg.f_a = get_number(f, "a", "f", 1.0);
    cfg.f_w = get_number(f, "w", "f", 1.0);
    if (!(cfg.f_a > 0.0 && cfg.f_a <= 10.0)) fail("f.a", "must lie in (0, 10]");
    if (!(cfg.f_w > 0.0)) fail("f.w", "must be positive");
    if (f.contains("z0")) {
        Vector z0 = get_vector(f, "z0", "f");
        if (z0.size() != cfg.m + cfg.d) fail("f.z0", "length must equal m + d");
        cfg.f_z0 = z0;
    }

    cfg.resolved = j;
    cfg.resolved["run"]["T"] = cfg.run.T;
    cfg.resolved["run"]["n_steps"] = cfg.run.n_steps;
    cfg.resolved["run"]["n_paths"] = cfg.run.n_paths;
    cfg.resolved["run"]["seed"] = cfg.run.seed;
    cfg.resolved["run"]["eps_floor"] = cfg.run.eps_floor;
    cfg.resolved["run"]["qmc"] = cfg.run.qmc;
    cfg.resolved["run"]["threads"] = cfg.run.threads;
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config: JSON parse failure in '" + path + "': " + e.what());
    }
    return parse_config(j);
}

nlohmann::json round_json_numbers(const json& j, int digits) {
    if (j.is_number_float()) return round_sig(j.get<double>(), digits);
    if (j.is_object()) {
        json out = json::object();
        for (auto it = j.begin(); it != j.end(); ++it)
            out[it.key()] = round_json_numbers(it.value(), digits);
        return out;
    }
    if (j.is_array()) {
        json out = json::array();
        for (const json& v : j) out.push_back(round_json_numbers(v, digits));
        return out;
    }
    return j;
}

nlohmann::json estimate_to_json(const Estimate& e) {
    return json{{"mean", e.mean}, {"std_error", e.std_error}, {"n", e.n}};
}

void write_json_report(const std::string& path, const json& body) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report to '" + path + "'");
    out << round_json_numbers(body).dump(2) << "\n";
}

} // namespace gruschin
