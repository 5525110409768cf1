#pragma once

#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scenarios.hpp"

namespace stmbus::cli {

enum ExitCode : int { ok = 0, usage_or_validation = 2, numerical = 3, io = 4, internal = 1 };

inline int exit_code_of(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const IoError&) {
        return io;
    } catch (const NumericalError&) {
        return numerical;
    } catch (const ConfigError&) {
        return usage_or_validation;
    } catch (const DomainError&) {
        return usage_or_validation;
    } catch (const PreconditionError&) {
        return usage_or_validation;
    } catch (const nlohmann::json::exception&) {
        return usage_or_validation;
    } catch (const std::filesystem::filesystem_error&) {
        return io;
    } catch (...) {
        return internal;
    }
}

inline std::string message_of(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const std::exception& x) {
        return x.what();
    } catch (...) {
        return "unknown error";
    }
}

struct Invocation {
    std::string scenario;
    std::string config_path;
    std::vector<std::string> sets;
    std::string out;
    std::optional<long long> seed;
    std::string format;
    std::string sweep;
    bool print_defaults = false;
};

// Defaults, then the config file, then the command-line overrides.
inline Json resolve_config(const Invocation& inv) {
    Json cfg = default_config();
    if (!inv.config_path.empty()) merge_strict(cfg, read_config_file(inv.config_path));
    if (!inv.scenario.empty()) cfg["scenario"] = inv.scenario;
    for (const auto& s : inv.sets) apply_assignment(cfg, s);
    if (!inv.out.empty()) cfg["output_dir"] = inv.out;
    if (inv.seed) cfg["seed"] = *inv.seed;
    if (!inv.format.empty()) cfg["format"] = inv.format;
    check_top_level(cfg);
    return cfg;
}

inline Json manifest_base(const Json& cfg) {
    Json m = Json::object();
    m["scenario"] = cfg.at("scenario");
    m["seed"] = cfg.at("seed");
    m["format"] = cfg.at("format");
    m["config"] = cfg;
    return m;
}

inline int run_single(const Json& cfg, std::ostream& err) {
    std::vector<Artifact> files;
    try {
        files = run_scenario(cfg).render_all(cfg.at("format").get<std::string>());
    } catch (...) {
        auto e = std::current_exception();
        err << "error: " << message_of(e) << "\n";
        return exit_code_of(e);
    }
    try {
        const std::filesystem::path dir = cfg.at("output_dir").get<std::string>();
        Json m = manifest_base(cfg);
        m["status"] = "ok";
        m["files"] = Json::array();
        for (const auto& a : files) {
            write_file(dir, a);
            m["files"].push_back(file_entry(a));
        }
        write_file(dir, {"manifest.json", m.dump(2) + "\n"});
    } catch (...) {
        auto e = std::current_exception();
        err << "error: " << message_of(e) << "\n";
        return io;
    }
    return ok;
}

struct SweepPoint {
    Json value;
    std::string dir;
    int code = ok;
    std::string error;
    std::vector<Table> tables;
    std::vector<Artifact> files;
};

inline int run_sweep(const Json& cfg, const std::string& spec, std::ostream& err) {
    std::string axis;
    std::vector<Json> values;
    try {
        auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--sweep expects axis=v1,v2,...");
        axis = spec.substr(0, eq);
        Json probe = cfg;
        if (!leaf(probe, axis).is_number()) throw ConfigError("sweep axis '" + axis + "' is not a numeric leaf");
        const std::string list = spec.substr(eq + 1);
        if (!list.empty()) {
            for (const auto& item : split(list, ',')) {
                Json v = Json::parse(item, nullptr, false);
                if (v.is_discarded() || !v.is_number()) throw ConfigError("sweep value '" + item + "' is not a number");
                values.push_back(v);
            }
        }
    } catch (...) {
        auto e = std::current_exception();
        err << "error: " << message_of(e) << "\n";
        return exit_code_of(e);
    }

    const std::string format = cfg.at("format").get<std::string>();
    std::vector<SweepPoint> points(values.size());
    std::vector<std::future<void>> jobs;
    for (std::size_t i = 0; i < values.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "point_%03zu", i);
        points[i].value = values[i];
        points[i].dir = name;
        jobs.push_back(std::async(std::launch::async, [&, i] {
            auto& p = points[i];
            try {
                Json local = cfg;
                set_path(local, axis, p.value);
                Result r = run_scenario(local);
                p.files = r.render_all(format);
                p.tables = std::move(r.tables);
            } catch (...) {
                auto e = std::current_exception();
                p.code = exit_code_of(e);
                p.error = message_of(e);
            }
        }));
    }
    for (auto& j : jobs) j.get();

    // Merged tables keyed by the swept value, in the order of the first
    // successful point.
    std::vector<Table> merged;
    for (const auto& p : points) {
        if (p.code != ok) continue;
        for (const auto& t : p.tables) {
            auto it = std::find_if(merged.begin(), merged.end(), [&](const Table& m) { return m.name == "merged_" + t.name; });
            if (it == merged.end()) {
                Table m{"merged_" + t.name, {axis}, {}};
                m.columns.insert(m.columns.end(), t.columns.begin(), t.columns.end());
                merged.push_back(std::move(m));
                it = merged.end() - 1;
            }
            if (it->columns.size() != t.columns.size() + 1) continue;
            const Cell key = p.value.is_number_integer() ? Cell(p.value.get<long long>()) : Cell(p.value.get<double>());
            for (const auto& row : t.rows) {
                std::vector<Cell> out{key};
                out.insert(out.end(), row.begin(), row.end());
                it->rows.push_back(std::move(out));
            }
        }
    }

    int code = ok;
    try {
        const std::filesystem::path dir = cfg.at("output_dir").get<std::string>();
        Json m = manifest_base(cfg);
        m["files"] = Json::array();
        Json sweep = Json::object();
        sweep["axis"] = axis;
        sweep["values"] = values;
        sweep["points"] = Json::array();
        for (const auto& p : points) {
            Json e = Json::object();
            e["value"] = p.value;
            e["dir"] = p.dir;
            e["status"] = p.code == ok ? "ok" : "failed";
            if (p.code != ok) {
                e["exit_code"] = p.code;
                e["error"] = p.error;
                if (code == ok) code = p.code;
                err << "sweep point " << p.dir << " failed: " << p.error << "\n";
            }
            sweep["points"].push_back(e);
            for (const auto& a : p.files) {
                Artifact placed{p.dir + "/" + a.path, a.bytes};
                write_file(dir, placed);
                m["files"].push_back(file_entry(placed));
            }
        }
        for (const auto& t : merged) {
            auto a = render(t, format);
            write_file(dir, a);
            m["files"].push_back(file_entry(a));
        }
        m["sweep"] = sweep;
        m["status"] = code == ok ? "ok" : "failed";
        write_file(dir, {"manifest.json", m.dump(2) + "\n"});
    } catch (...) {
        auto e = std::current_exception();
        err << "error: " << message_of(e) << "\n";
        return io;
    }
    return code;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Simulation scenarios for a spatiotemporally modulated qubit bus", "stmbus"};
    Invocation inv;
    std::string scenarios;
    for (const auto& s : scenario_names()) scenarios += (scenarios.empty() ? "" : ", ") + s;
    app.add_option("scenario", inv.scenario, "Scenario: " + scenarios);
    app.add_option("--config", inv.config_path, "JSON config overlaid on the built-in defaults");
    app.add_option("--set", inv.sets, "Override one value, key.path=value (repeatable)");
    app.add_option("--out", inv.out, "Output directory");
    app.add_option("--seed", inv.seed, "Random seed");
    app.add_option("--format", inv.format, "csv or ndjson");
    app.add_option("--sweep", inv.sweep, "Run once per value: key.path=v1,v2,...");
    app.add_flag("--print-defaults", inv.print_defaults, "Print the resolved config and exit");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return usage_or_validation;
    }

    Json cfg;
    try {
        if (inv.print_defaults) {
            Json c = default_config();
            if (!inv.config_path.empty()) merge_strict(c, read_config_file(inv.config_path));
            for (const auto& s : inv.sets) apply_assignment(c, s);
            out << c.dump(2) << "\n";
            return ok;
        }
        cfg = resolve_config(inv);
    } catch (...) {
        auto e = std::current_exception();
        err << "error: " << message_of(e) << "\n";
        return exit_code_of(e);
    }
    return inv.sweep.empty() ? run_single(cfg, err) : run_sweep(cfg, inv.sweep, err);
}

}  // namespace stmbus::cli
