#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "screening/environment.hpp"
#include "screening/oracle.hpp"
#include "screening/solver.hpp"

namespace screening::app {

inline constexpr int kSchemaVersion = 1;

/// Malformed or inconsistent configuration; the message names the field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SweepRange {
    double k_min = 0.01;
    double k_max = 0.24;
    double k_step = 0.01;

    [[nodiscard]] std::vector<double> values() const
    {
        if (!(k_step > 0.0)) throw ConfigError("sweep.k_step must be positive");
        if (!(k_max >= k_min)) throw ConfigError("sweep range is empty (k_max < k_min)");
        std::vector<double> ks;
        const auto n = static_cast<std::size_t>(std::floor((k_max - k_min) / k_step + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) ks.push_back(k_min + double(i) * k_step);
        return ks;
    }
};

struct VerifyParams {
    std::uint64_t seed = 20240601;
    std::size_t gap_count = 1000;
    std::size_t sparsity_count = 500;
    std::size_t symmetric_count = 200;
    std::vector<double> epsilons{0.1, 0.01};
    oracle::GridSpec oracle;
};

struct ExperimentConfig {
    std::string preset;  // empty for inline environments
    EnvironmentSpec environment;
    CostSpec cost = CostSpec::quadratic(1.0 / 15.0);
    std::vector<Family> families{Family::linear, Family::threshold};
    std::optional<double> target_accuracy;
    std::size_t grid = 1001;
    SweepRange sweep;
    VerifyParams verify;

    [[nodiscard]] Environment validated_environment() const
    {
        try {
            return validate_environment(environment);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("environment: ") + e.what());
        }
    }
};

// ---------------------------------------------------------------------------
// Presets

inline EnvironmentSpec preset_environment(const std::string& name)
{
    if (name == "paper-sec4")
        return {0.5, {0.0, 1.0, 2.0}, {3.0 / 5, 1.0 / 5, 1.0 / 5}, {1.0 / 5, 1.0 / 5, 3.0 / 5}};
    if (name == "paper-b2")
        return {0.5,
                {0.0, 0.5, 1.0, 1.5, 2.0},
                {1.0 / 8, 3.0 / 8, 1.0 / 4, 1.0 / 8, 1.0 / 8},
                {1.0 / 8, 1.0 / 8, 1.0 / 4, 3.0 / 8, 1.0 / 8}};
    throw ConfigError("unknown preset '" + name + "' (known: paper-sec4, paper-b2)");
}

inline ExperimentConfig preset_config(const std::string& name)
{
    ExperimentConfig c;
    c.preset = name;
    c.environment = preset_environment(name);
    c.cost = CostSpec::quadratic(1.0 / 15.0);
    return c;
}

// ---------------------------------------------------------------------------
// Parsing

/// Accepts a decimal number or a "num/den" fraction.
inline double parse_scalar(const std::string& text, const std::string& where)
{
    try {
        const auto slash = text.find('/');
        std::size_t used = 0;
        if (slash == std::string::npos) {
            const double v = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return v;
        }
        const std::string num = text.substr(0, slash), den = text.substr(slash + 1);
        const double a = std::stod(num, &used);
        if (used != num.size()) throw std::invalid_argument(text);
        const double b = std::stod(den, &used);
        if (used != den.size() || b == 0.0) throw std::invalid_argument(text);
        return a / b;
    } catch (const std::logic_error&) {
        throw ConfigError(where + ": expected a number or fraction, got '" + text + "'");
    }
}

inline Family parse_family(const std::string& s, const std::string& where)
{
    if (s == "general") return Family::general;
    if (s == "threshold") return Family::threshold;
    if (s == "linear") return Family::linear;
    throw ConfigError(where + ": unknown family '" + s + "' (known: general, threshold, linear)");
}

inline std::vector<Family> parse_family_list(const std::string& list, const std::string& where)
{
    std::vector<Family> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(parse_family(item, where));
    if (out.empty()) throw ConfigError(where + ": no families given");
    return out;
}

namespace detail {

using nlohmann::json;

inline void only_keys(const json& j, const std::string& where, std::set<std::string> allowed)
{
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

inline double number(const json& j, const std::string& where)
{
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return parse_scalar(j.get<std::string>(), where);
    throw ConfigError(where + ": expected a number");
}

inline std::vector<double> numbers(const json& j, const std::string& where)
{
    if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

inline std::size_t count(const json& j, const std::string& where)
{
    if (!j.is_number_unsigned()) throw ConfigError(where + ": expected a nonnegative integer");
    return j.get<std::size_t>();
}

} // namespace detail

inline ExperimentConfig parse_config(const std::string& text)
{
    using detail::json;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    detail::only_keys(root, "$", {"schema_version", "environment", "cost", "families", "target_accuracy", "grid",
                                  "sweep", "verify"});
    if (!root.contains("schema_version")) throw ConfigError("$.schema_version: missing");
    if (!root["schema_version"].is_number_integer() || root["schema_version"].get<int>() != kSchemaVersion)
        throw ConfigError("$.schema_version: expected " + std::to_string(kSchemaVersion));

    ExperimentConfig c;
    if (!root.contains("environment")) throw ConfigError("$.environment: missing");
    const auto& env = root["environment"];
    if (env.is_object() && env.contains("preset")) {
        detail::only_keys(env, "$.environment", {"preset"});
        if (!env["preset"].is_string()) throw ConfigError("$.environment.preset: expected a string");
        c = preset_config(env["preset"].get<std::string>());
    } else {
        detail::only_keys(env, "$.environment", {"prior_high", "support", "pmf_low", "pmf_high"});
        for (const char* k : {"prior_high", "support", "pmf_low", "pmf_high"})
            if (!env.contains(k)) throw ConfigError(std::string("$.environment.") + k + ": missing");
        c.environment.prior_high = detail::number(env["prior_high"], "$.environment.prior_high");
        c.environment.support = detail::numbers(env["support"], "$.environment.support");
        c.environment.pmf_low = detail::numbers(env["pmf_low"], "$.environment.pmf_low");
        c.environment.pmf_high = detail::numbers(env["pmf_high"], "$.environment.pmf_high");
    }

    if (root.contains("cost")) {
        const auto& cj = root["cost"];
        detail::only_keys(cj, "$.cost", {"family", "coefficient", "exponent"});
        const std::string fam = cj.value("family", "quadratic");
        if (!cj.contains("coefficient")) throw ConfigError("$.cost.coefficient: missing");
        const double k = detail::number(cj["coefficient"], "$.cost.coefficient");
        try {
            if (fam == "quadratic") {
                if (cj.contains("exponent") && detail::number(cj["exponent"], "$.cost.exponent") != 2.0)
                    throw ConfigError("$.cost.exponent: quadratic cost has exponent 2");
                c.cost = CostSpec::quadratic(k);
            } else if (fam == "power") {
                if (!cj.contains("exponent")) throw ConfigError("$.cost.exponent: missing for power cost");
                c.cost = CostSpec::power(k, detail::number(cj["exponent"], "$.cost.exponent"));
            } else {
                throw ConfigError("$.cost.family: unknown family '" + fam + "' (known: quadratic, power)");
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("$.cost: ") + e.what());
        }
    }

    if (root.contains("families")) {
        const auto& fj = root["families"];
        if (!fj.is_array() || fj.empty()) throw ConfigError("$.families: expected a nonempty array");
        c.families.clear();
        for (std::size_t i = 0; i < fj.size(); ++i) {
            const auto where = "$.families[" + std::to_string(i) + "]";
            if (!fj[i].is_string()) throw ConfigError(where + ": expected a string");
            c.families.push_back(parse_family(fj[i].get<std::string>(), where));
        }
    }
    if (root.contains("target_accuracy") && !root["target_accuracy"].is_null())
        c.target_accuracy = detail::number(root["target_accuracy"], "$.target_accuracy");
    if (root.contains("grid")) c.grid = detail::count(root["grid"], "$.grid");

    if (root.contains("sweep")) {
        const auto& sj = root["sweep"];
        detail::only_keys(sj, "$.sweep", {"k_min", "k_max", "k_step"});
        if (sj.contains("k_min")) c.sweep.k_min = detail::number(sj["k_min"], "$.sweep.k_min");
        if (sj.contains("k_max")) c.sweep.k_max = detail::number(sj["k_max"], "$.sweep.k_max");
        if (sj.contains("k_step")) c.sweep.k_step = detail::number(sj["k_step"], "$.sweep.k_step");
    }

    if (root.contains("verify")) {
        const auto& vj = root["verify"];
        detail::only_keys(vj, "$.verify", {"seed", "gap_count", "sparsity_count", "symmetric_count", "epsilons",
                                           "oracle"});
        auto& v = c.verify;
        if (vj.contains("seed")) {
            if (!vj["seed"].is_number_unsigned()) throw ConfigError("$.verify.seed: expected an unsigned integer");
            v.seed = vj["seed"].get<std::uint64_t>();
        }
        if (vj.contains("gap_count")) v.gap_count = detail::count(vj["gap_count"], "$.verify.gap_count");
        if (vj.contains("sparsity_count")) v.sparsity_count = detail::count(vj["sparsity_count"], "$.verify.sparsity_count");
        if (vj.contains("symmetric_count"))
            v.symmetric_count = detail::count(vj["symmetric_count"], "$.verify.symmetric_count");
        if (vj.contains("epsilons")) v.epsilons = detail::numbers(vj["epsilons"], "$.verify.epsilons");
        if (vj.contains("oracle")) {
            const auto& oj = vj["oracle"];
            detail::only_keys(oj, "$.verify.oracle", {"accuracy_step", "payment_step", "payment_max", "max_support"});
            double step = 1.0 / 240.0, top = 1.0;
            if (oj.contains("accuracy_step"))
                v.oracle.accuracy_step = detail::number(oj["accuracy_step"], "$.verify.oracle.accuracy_step");
            if (oj.contains("payment_step")) step = detail::number(oj["payment_step"], "$.verify.oracle.payment_step");
            if (oj.contains("payment_max")) top = detail::number(oj["payment_max"], "$.verify.oracle.payment_max");
            if (!(step > 0.0) || !(top >= 0.0)) throw ConfigError("$.verify.oracle: payment grid must be positive");
            v.oracle.payment_levels = oracle::GridSpec::default_levels(top, step);
            if (oj.contains("max_support"))
                v.oracle.max_support = detail::count(oj["max_support"], "$.verify.oracle.max_support");
        }
    }

    (void)c.validated_environment();
    return c;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

} // namespace screening::app
