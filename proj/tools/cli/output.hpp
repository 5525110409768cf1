#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <openssl/evp.h>

#include "config.hpp"

namespace stmbus::cli {

using Cell = std::variant<std::monostate, double, long long, std::string>;  // monostate: missing value

struct Table {
    std::string name;  // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) {
        require(row.size() == columns.size(), "row width does not match the header of " + name);
        rows.push_back(std::move(row));
    }
};

struct Artifact {
    std::string path;  // relative to the output directory
    std::string bytes;
};

// Shortest text that round-trips the double.
inline std::string format_number(double x) {
    if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline std::string csv_cell(const Cell& c) {
    if (std::holds_alternative<std::monostate>(c)) return "";
    if (auto d = std::get_if<double>(&c)) return format_number(*d);
    if (auto i = std::get_if<long long>(&c)) return std::to_string(*i);
    const auto& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

inline Json json_cell(const Cell& c) {
    if (std::holds_alternative<std::monostate>(c)) return Json(nullptr);
    if (auto d = std::get_if<double>(&c)) return std::isfinite(*d) ? Json(*d) : Json(nullptr);
    if (auto i = std::get_if<long long>(&c)) return Json(*i);
    return Json(std::get<std::string>(c));
}

inline Artifact render(const Table& t, const std::string& format) {
    std::string out;
    if (format == "csv") {
        for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
        out += "\n";
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
            out += "\n";
        }
        return {t.name + ".csv", out};
    }
    for (const auto& row : t.rows) {
        Json obj = Json::object();
        for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = json_cell(row[i]);
        out += obj.dump() + "\n";
    }
    return {t.name + ".ndjson", out};
}

inline Artifact json_artifact(const std::string& name, const Json& j) { return {name + ".json", j.dump(2) + "\n"}; }

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

inline void check_relative(const std::string& p) {
    std::filesystem::path rel(p);
    if (p.empty() || rel.is_absolute()) throw IoError("artifact path must be relative: " + p);
    for (const auto& part : rel)
        if (part == "..") throw IoError("artifact path escapes the output directory: " + p);
}

inline void write_file(const std::filesystem::path& dir, const Artifact& a) {
    check_relative(a.path);
    auto target = dir / a.path;
    std::error_code ec;
    std::filesystem::create_directories(target.parent_path(), ec);
    if (ec) throw IoError("cannot create " + target.parent_path().string() + ": " + ec.message());
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + target.string() + " for writing");
    out.write(a.bytes.data(), static_cast<std::streamsize>(a.bytes.size()));
    if (!out) throw IoError("write failed for " + target.string());
}

inline Json file_entry(const Artifact& a) {
    Json e = Json::object();
    e["path"] = a.path;
    e["sha256"] = sha256_hex(a.bytes);
    e["bytes"] = a.bytes.size();
    return e;
}

}  // namespace stmbus::cli
