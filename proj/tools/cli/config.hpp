#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "defaults_json.hpp"
#include <stmbus/common.hpp>

namespace stmbus::cli {

using Json = nlohmann::ordered_json;

struct IoError : Error {
    using Error::Error;
};

inline Json default_config() { return Json::parse(defaults_json); }

namespace detail {

inline bool same_kind(const Json& base, const Json& v) {
    if (base.is_number()) return v.is_number();
    return base.type() == v.type();
}

// Integer leaves stay integers; a fractional value there is rejected.
inline Json coerce(const Json& base, const Json& v, const std::string& path) {
    if (!same_kind(base, v)) throw ConfigError("wrong type for '" + path + "'");
    if (base.is_number_integer() && v.is_number_float()) {
        double x = v.get<double>();
        if (x != std::floor(x)) throw ConfigError("'" + path + "' must be an integer");
        return Json(static_cast<long long>(x));
    }
    return v;
}

}  // namespace detail

// Overlay `over` onto `base`; every key of `over` must already exist in base.
inline void merge_strict(Json& base, const Json& over, const std::string& prefix = "") {
    if (!over.is_object()) throw ConfigError(prefix.empty() ? "config must be a JSON object" : "'" + prefix + "' must be an object");
    for (auto it = over.begin(); it != over.end(); ++it) {
        const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (!base.contains(it.key())) throw ConfigError("unknown key '" + path + "'");
        Json& slot = base[it.key()];
        const Json& v = it.value();
        if (slot.is_object()) {
            merge_strict(slot, v, path);
        } else if (slot.is_array()) {
            if (!v.is_array()) throw ConfigError("'" + path + "' must be an array");
            Json out = Json::array();
            for (const auto& e : v) {
                if (!slot.empty()) {
                    out.push_back(detail::coerce(slot.front(), e, path));
                } else {
                    if (!e.is_number()) throw ConfigError("'" + path + "' must hold numbers");
                    out.push_back(e);
                }
            }
            slot = out;
        } else {
            slot = detail::coerce(slot, v, path);
        }
    }
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

// Leaf of the config addressed by a dotted path.
inline Json& leaf(Json& cfg, const std::string& dotted) {
    Json* node = &cfg;
    for (const auto& part : split(dotted, '.')) {
        if (!node->is_object() || !node->contains(part)) throw ConfigError("unknown key '" + dotted + "'");
        node = &(*node)[part];
    }
    if (node->is_object()) throw ConfigError("'" + dotted + "' is a section, not a value");
    return *node;
}

// Value text of --set: JSON when it parses, otherwise a bare string.
inline Json parse_value(const std::string& text) {
    Json v = Json::parse(text, nullptr, false);
    if (v.is_discarded()) return Json(text);
    return v;
}

inline void set_path(Json& cfg, const std::string& dotted, const Json& value) {
    Json overlay = value;
    auto parts = split(dotted, '.');
    if (parts.empty()) throw ConfigError("empty key");
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
        if (it->empty()) throw ConfigError("malformed key '" + dotted + "'");
        Json wrap = Json::object();
        wrap[*it] = overlay;
        overlay = wrap;
    }
    merge_strict(cfg, overlay);
}

inline void apply_assignment(Json& cfg, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
    set_path(cfg, assignment.substr(0, eq), parse_value(assignment.substr(eq + 1)));
}

inline Json read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config '" + path + "' is not valid JSON");
    return j;
}

inline const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{"line-sim",   "flux-sweep", "addressing", "error-budget",
                                                "scalability", "nonmarkov", "spectroscopy"};
    return names;
}

inline void check_top_level(const Json& cfg) {
    const auto s = cfg.at("scenario").get<std::string>();
    if (s.empty()) throw ConfigError("no scenario given");
    bool known = false;
    for (const auto& n : scenario_names()) known = known || n == s;
    if (!known) throw ConfigError("unknown scenario '" + s + "'");
    const auto f = cfg.at("format").get<std::string>();
    if (f != "csv" && f != "ndjson") throw ConfigError("format must be csv or ndjson");
    if (cfg.at("seed").get<long long>() < 0) throw ConfigError("seed must be non-negative");
    if (cfg.at("output_dir").get<std::string>().empty()) throw ConfigError("output_dir must not be empty");
}

}  // namespace stmbus::cli
