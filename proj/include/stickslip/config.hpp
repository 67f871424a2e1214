#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stickslip/forcing.hpp"
#include "stickslip/friction.hpp"
#include "stickslip/vec2.hpp"

namespace stickslip {

/// Any problem with a run configuration: malformed JSON (message carries the
/// parser's byte position), an unknown or mistyped field, or a violated
/// validity constraint.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A complete run description as read from a JSON config file.
struct RunConfig {
    double sigma = 0.0;
    ForcingProfile forcing{};
    std::optional<double> k{};
    std::vector<double> k_list;     ///< for convergence studies; may be empty
    Vec2 u0{};
    double t0 = 0.0;
    double t1 = 1.0;

    double fp_tol = 1e-10;
    double event_tol = 1e-12;
    double dt_max = 1e-2;
    double eps_stick = 0.0;         ///< resolved default: 1e-9 * max(sigma, 1)
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;

    int max_iter = 20000;
    std::optional<long long> seed{}; ///< reserved for randomized property runs

    /// Assembles validated simulation parameters.
    SimParams params() const {
        SimParams p;
        p.sigma = sigma;
        p.k = k;
        p.eps_stick = eps_stick;
        p.event_tol = event_tol;
        p.dt_max = dt_max;
        p.rel_tol = rel_tol;
        p.abs_tol = abs_tol;
        p.fp_tol = fp_tol;
        p.validate();
        return p;
    }
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown_keys(const json& obj, const char* where,
                                std::initializer_list<const char*> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const bool ok = std::any_of(known.begin(), known.end(),
                                    [&](const char* k) { return it.key() == k; });
        if (!ok)
            throw ConfigError(std::string("unknown field ") + where + it.key());
    }
}

inline double number_field(const json& v, const std::string& name) {
    if (!v.is_number())
        throw ConfigError("field " + name + " must be a number");
    return v.get<double>();
}

inline Vec2 vec2_field(const json& v, const std::string& name) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError("field " + name + " must be an array of two numbers");
    return {v[0].get<double>(), v[1].get<double>()};
}

inline std::vector<Vec2> coeff_list(const json& v, const std::string& name) {
    if (!v.is_array()) throw ConfigError("field " + name + " must be an array");
    std::vector<Vec2> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(vec2_field(v[i], name + "[" + std::to_string(i) + "]"));
    return out;
}

} // namespace detail

/// Parses and validates a JSON run configuration.  Unknown keys are rejected,
/// missing optionals take documented defaults, and every violated constraint
/// is reported by name.
inline RunConfig parse_config(const std::string& text) {
    namespace dj = detail;
    dj::json root;
    try {
        root = dj::json::parse(text);
    } catch (const dj::json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config must be a JSON object");
    dj::reject_unknown_keys(root, "",
                            {"sigma", "forcing", "k", "k_list", "u0", "t_span",
                             "tolerances", "max_iter", "seed"});

    RunConfig cfg;
    if (!root.contains("sigma")) throw ConfigError("missing field sigma");
    cfg.sigma = dj::number_field(root["sigma"], "sigma");
    if (!(std::isfinite(cfg.sigma) && cfg.sigma > 0.0))
        throw ConfigError("sigma must be > 0");

    if (root.contains("forcing")) {
        const auto& f = root["forcing"];
        if (!f.is_object()) throw ConfigError("field forcing must be an object");
        dj::reject_unknown_keys(f, "forcing.", {"mean", "cos", "sin"});
        if (f.contains("mean")) cfg.forcing.mean = dj::vec2_field(f["mean"], "forcing.mean");
        if (f.contains("cos")) cfg.forcing.cos_coeffs = dj::coeff_list(f["cos"], "forcing.cos");
        if (f.contains("sin")) cfg.forcing.sin_coeffs = dj::coeff_list(f["sin"], "forcing.sin");
    }

    if (root.contains("k")) {
        cfg.k = dj::number_field(root["k"], "k");
        if (!(std::isfinite(*cfg.k) && *cfg.k > 0.0)) throw ConfigError("k must be > 0");
    }
    if (root.contains("k_list")) {
        const auto& kl = root["k_list"];
        if (!kl.is_array()) throw ConfigError("field k_list must be an array");
        for (std::size_t i = 0; i < kl.size(); ++i) {
            const double k = dj::number_field(kl[i], "k_list[" + std::to_string(i) + "]");
            if (!(std::isfinite(k) && k > 0.0)) throw ConfigError("k_list entries must be > 0");
            if (i > 0 && !(k > cfg.k_list.back()))
                throw ConfigError("k_list must be strictly increasing");
            cfg.k_list.push_back(k);
        }
    }
    if (root.contains("u0")) cfg.u0 = dj::vec2_field(root["u0"], "u0");
    if (!cfg.u0.finite()) throw ConfigError("u0 must be finite");

    if (root.contains("t_span")) {
        const Vec2 ts = dj::vec2_field(root["t_span"], "t_span");
        if (!(ts.y > ts.x)) throw ConfigError("t_span must be increasing");
        cfg.t0 = ts.x;
        cfg.t1 = ts.y;
    }

    cfg.eps_stick = 1e-9 * std::max(cfg.sigma, 1.0);
    if (root.contains("tolerances")) {
        const auto& tol = root["tolerances"];
        if (!tol.is_object()) throw ConfigError("field tolerances must be an object");
        dj::reject_unknown_keys(tol, "tolerances.",
                                {"fp_tol", "event_tol", "dt_max", "eps_stick",
                                 "rel_tol", "abs_tol"});
        auto take = [&](const char* name, double& dst) {
            if (tol.contains(name)) {
                dst = dj::number_field(tol[name], std::string("tolerances.") + name);
                if (!(std::isfinite(dst) && dst > 0.0))
                    throw ConfigError(std::string("tolerances.") + name + " must be > 0");
            }
        };
        take("fp_tol", cfg.fp_tol);
        take("event_tol", cfg.event_tol);
        take("dt_max", cfg.dt_max);
        take("eps_stick", cfg.eps_stick);
        take("rel_tol", cfg.rel_tol);
        take("abs_tol", cfg.abs_tol);
    }

    if (root.contains("max_iter")) {
        if (!root["max_iter"].is_number_integer())
            throw ConfigError("max_iter must be an integer");
        cfg.max_iter = root["max_iter"].get<int>();
        if (cfg.max_iter < 1) throw ConfigError("max_iter must be >= 1");
    }
    if (root.contains("seed")) {
        if (!root["seed"].is_number_integer())
            throw ConfigError("seed must be an integer");
        cfg.seed = root["seed"].get<long long>();
    }

    try {
        (void)cfg.params();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

/// Serializes a config so that parse_config(to_json(cfg)) reproduces it
/// exactly (doubles round-trip bit-faithfully).
inline std::string to_json(const RunConfig& cfg) {
    namespace dj = detail;
    auto vec = [](const Vec2& v) { return dj::json::array({v.x, v.y}); };
    dj::json root;
    root["sigma"] = cfg.sigma;
    dj::json f = dj::json::object();
    if (cfg.forcing.mean != Vec2{}) f["mean"] = vec(cfg.forcing.mean);
    if (!cfg.forcing.cos_coeffs.empty()) {
        auto& arr = f["cos"] = dj::json::array();
        for (const Vec2& c : cfg.forcing.cos_coeffs) arr.push_back(vec(c));
    }
    if (!cfg.forcing.sin_coeffs.empty()) {
        auto& arr = f["sin"] = dj::json::array();
        for (const Vec2& c : cfg.forcing.sin_coeffs) arr.push_back(vec(c));
    }
    root["forcing"] = f;
    if (cfg.k) root["k"] = *cfg.k;
    if (!cfg.k_list.empty()) root["k_list"] = cfg.k_list;
    root["u0"] = vec(cfg.u0);
    root["t_span"] = dj::json::array({cfg.t0, cfg.t1});
    root["tolerances"] = {{"fp_tol", cfg.fp_tol},       {"event_tol", cfg.event_tol},
                          {"dt_max", cfg.dt_max},       {"eps_stick", cfg.eps_stick},
                          {"rel_tol", cfg.rel_tol},     {"abs_tol", cfg.abs_tol}};
    root["max_iter"] = cfg.max_iter;
    if (cfg.seed) root["seed"] = *cfg.seed;
    return root.dump(2);
}

} // namespace stickslip
