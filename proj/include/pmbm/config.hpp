#pragma once

#include "pmbm/models.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace pmbm {

using json = nlohmann::json;

namespace detail {

inline const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw ConfigError(path + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(path.empty() ? std::string(key) + ": missing" : path + "." + key + ": missing");
    return *it;
}

inline std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

inline double read_number(const json& obj, const char* key, const std::string& path) {
    const auto& v = field(obj, key, path);
    if (!v.is_number()) throw ConfigError(join(path, key) + ": expected a number");
    return v.get<double>();
}

inline Vector read_vector(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!v[k].is_number()) throw ConfigError(path + "[" + std::to_string(k) + "]: expected a number");
        out(static_cast<Eigen::Index>(k)) = v[k].get<double>();
    }
    return out;
}

/// Matrices are nested row-major arrays.
inline Matrix read_matrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw ConfigError(path + ": expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(v.size());
    Eigen::Index cols = -1;
    Matrix out;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Vector row = read_vector(v[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]");
        if (cols < 0) {
            cols = row.size();
            out.resize(rows, cols);
        } else if (row.size() != cols) {
            throw ConfigError(path + "[" + std::to_string(r) + "]: ragged matrix row");
        }
        out.row(r) = row.transpose();
    }
    return out;
}

inline GaussianMixture read_mixture(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path + ": expected an array of {weight, mean, cov}");
    GaussianMixture mix;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const std::string at = path + "[" + std::to_string(k) + "]";
        const double w = read_number(v[k], "weight", at);
        Vector mean = read_vector(field(v[k], "mean", at), at + ".mean");
        Matrix cov = read_matrix(field(v[k], "cov", at), at + ".cov");
        mix.components.push_back({w, {std::move(mean), std::move(cov)}});
    }
    return mix;
}

inline json write_vector(const Vector& v) {
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
    return out;
}

inline json write_matrix(const Matrix& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(write_vector(m.row(r).transpose()));
    return out;
}

inline json write_mixture(const GaussianMixture& mix) {
    json out = json::array();
    for (const auto& c : mix.components)
        out.push_back({{"weight", c.weight}, {"mean", write_vector(c.density.mean)}, {"cov", write_matrix(c.density.cov)}});
    return out;
}

} // namespace detail

/// Parses and validates a config document.
inline ModelConfig config_from_json(const json& doc) {
    using namespace detail;
    ModelConfig cfg;

    const auto& mo = field(doc, "motion", "");
    cfg.motion.F = read_matrix(field(mo, "F", "motion"), "motion.F");
    cfg.motion.Q = read_matrix(field(mo, "Q", "motion"), "motion.Q");
    cfg.motion.Ps = read_number(mo, "Ps", "motion");

    const auto& me = field(doc, "measurement", "");
    cfg.measurement.H = read_matrix(field(me, "H", "measurement"), "measurement.H");
    cfg.measurement.R = read_matrix(field(me, "R", "measurement"), "measurement.R");
    cfg.measurement.Pd = read_number(me, "Pd", "measurement");

    const auto& cl = field(doc, "clutter", "");
    cfg.clutter.rate = read_number(cl, "rate", "clutter");
    cfg.clutter.region_min = read_vector(field(cl, "region_min", "clutter"), "clutter.region_min");
    cfg.clutter.region_max = read_vector(field(cl, "region_max", "clutter"), "clutter.region_max");

    cfg.birth.intensity = read_mixture(field(doc, "birth", ""), "birth");
    cfg.unknown_init.intensity = read_mixture(field(doc, "unknown_init", ""), "unknown_init");

    const auto& fp = field(doc, "filter", "");
    cfg.filter.prune_r = read_number(fp, "prune_r", "filter");
    cfg.filter.prune_ppp_weight = read_number(fp, "prune_ppp_weight", "filter");
    cfg.filter.lbp_eps = read_number(fp, "lbp_eps", "filter");
    const double iters = read_number(fp, "lbp_max_iter", "filter");
    if (iters != std::floor(iters) || iters < 1 || iters > 1e9) throw ConfigError("filter.lbp_max_iter: must be a positive integer");
    cfg.filter.lbp_max_iter = static_cast<int>(iters);
    cfg.filter.gate_prob = read_number(fp, "gate_prob", "filter");
    cfg.filter.estimate_threshold = read_number(fp, "estimate_threshold", "filter");

    validate(cfg);
    return cfg;
}

inline json config_to_json(const ModelConfig& cfg) {
    using namespace detail;
    return {
        {"motion", {{"F", write_matrix(cfg.motion.F)}, {"Q", write_matrix(cfg.motion.Q)}, {"Ps", cfg.motion.Ps}}},
        {"measurement",
         {{"H", write_matrix(cfg.measurement.H)}, {"R", write_matrix(cfg.measurement.R)}, {"Pd", cfg.measurement.Pd}}},
        {"clutter",
         {{"rate", cfg.clutter.rate},
          {"region_min", write_vector(cfg.clutter.region_min)},
          {"region_max", write_vector(cfg.clutter.region_max)}}},
        {"birth", write_mixture(cfg.birth.intensity)},
        {"unknown_init", write_mixture(cfg.unknown_init.intensity)},
        {"filter",
         {{"prune_r", cfg.filter.prune_r},
          {"prune_ppp_weight", cfg.filter.prune_ppp_weight},
          {"lbp_eps", cfg.filter.lbp_eps},
          {"lbp_max_iter", cfg.filter.lbp_max_iter},
          {"gate_prob", cfg.filter.gate_prob},
          {"estimate_threshold", cfg.filter.estimate_threshold}}},
    };
}

inline ModelConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(doc);
}

inline void save_config(const ModelConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError(path + ": cannot write config file");
    out << config_to_json(cfg).dump(2) << '\n';
}

} // namespace pmbm
