#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "gruschin/bernstein.hpp"
#include "gruschin/harnack.hpp"
#include "gruschin/model.hpp"

namespace gruschin {

inline constexpr const char* kVersion = "0.1.0";

// Invalid or missing configuration; the CLI maps it to exit code 2.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// An inequality violated beyond its slack; the CLI maps it to exit code 3.
struct FalsificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    double T = 1.0;
    int n_steps = 256;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 0;
    double eps_floor = 1e-8;
    bool qmc = false;
    unsigned threads = 0;
};

struct ExperimentConfig {
    nlohmann::json resolved; // full config after defaults, echoed into reports

    int m = 2, d = 1;
    double l = 0.5;
    SigmaSpec sigma = SigmaSpec::identity();
    ScalarTimeFn lambda = ScalarTimeFn::constant(1.0);
    DriftSpec b = DriftSpec::zero();
    ScalarTimeFn k = ScalarTimeFn::constant(0.0);

    std::optional<BernsteinFunction> phi1, phi2;
    RunConfig run;
    StatePoint x, y;
    double f_a = 1.0, f_w = 1.0;
    std::optional<Vector> f_z0; // defaults to y

    GruschinModel build_model() const;
    BumpFunction build_f() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

BernsteinFunction parse_bernstein(const nlohmann::json& j, const std::string& where);

// Report helpers: doubles rounded to 12 significant digits so emitted files
// are insensitive to reduction-order noise.
nlohmann::json round_json_numbers(const nlohmann::json& j, int digits = 12);
nlohmann::json estimate_to_json(const Estimate& e);
void write_json_report(const std::string& path, const nlohmann::json& body);

} // namespace gruschin
