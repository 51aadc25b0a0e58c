#pragma once

// Experiment reports: a table of rows plus named metrics and boolean verdicts,
// written as CSV (header row, '.' decimal, %.17g) and JSON.

#include "hypmax/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace hypmax {

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

using Cell = std::variant<std::int64_t, std::uint64_t, double, std::string>;

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_cell(const Cell& c) {
    struct {
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(std::uint64_t v) const { return std::to_string(v); }
        std::string operator()(double v) const { return format_double(v); }
        std::string operator()(const std::string& s) const {
            if (s.find_first_of(",\"\n") == std::string::npos) return s;
            std::string out = "\"";
            for (char ch : s) {
                if (ch == '"') out += '"';
                out += ch;
            }
            return out + '"';
        }
    } visit;
    return std::visit(visit, c);
}

class Table {
public:
    Table() = default;
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    /// Appends a row; numeric cells must be finite.
    void add(std::vector<Cell> row) {
        if (row.size() != columns_.size()) throw Error("Table: row width does not match the header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (auto* d = std::get_if<double>(&row[i]); d && !std::isfinite(*d)) {
                throw NumericalError("Table: non-finite value in column " + columns_[i], {*d});
            }
        }
        rows_.push_back(std::move(row));
    }

    const std::vector<std::string>& columns() const noexcept { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }

    std::string csv() const {
        std::string out;
        for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
        out += '\n';
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_cell(row[i]);
            out += '\n';
        }
        return out;
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

struct Report {
    std::string name;
    std::string experiment;
    Table table;
    std::map<std::string, double> metrics;
    std::map<std::string, bool> verdicts;
    /// Pointers to sub-checks that came out inconclusive.
    std::vector<std::string> notes;
    /// Configuration echo (parameters needed to replay the run).
    nlohmann::ordered_json config;

    bool inconclusive() const { return !notes.empty(); }

    nlohmann::ordered_json json() const {
        nlohmann::ordered_json j;
        j["name"] = name;
        j["experiment"] = experiment;
        j["config"] = config;
        j["verdicts"] = verdicts;
        j["inconclusive"] = notes;
        auto& m = j["metrics"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : metrics) m[k] = format_double(v);
        auto& rows = j["rows"] = nlohmann::ordered_json::array();
        for (const auto& row : table.rows()) {
            nlohmann::ordered_json r;
            for (std::size_t i = 0; i < row.size(); ++i) {
                std::visit(
                    [&](const auto& v) {
                        using V = std::decay_t<decltype(v)>;
                        if constexpr (std::is_same_v<V, double>) {
                            r[table.columns()[i]] = format_double(v);
                        } else {
                            r[table.columns()[i]] = v;
                        }
                    },
                    row[i]);
            }
            rows.push_back(std::move(r));
        }
        return j;
    }
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

enum class Format { csv, json, both };

/// Writes <dir>/<name>.csv and/or <dir>/<name>.json.
inline std::vector<std::filesystem::path> write_report(const Report& r, const std::filesystem::path& dir,
                                                       Format fmt = Format::both) {
    std::vector<std::filesystem::path> written;
    if (fmt != Format::json) {
        written.push_back(dir / (r.name + ".csv"));
        write_text(written.back(), r.table.csv());
    }
    if (fmt != Format::csv) {
        written.push_back(dir / (r.name + ".json"));
        write_text(written.back(), r.json().dump(2) + "\n");
    }
    return written;
}

} // namespace hypmax
