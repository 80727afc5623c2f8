// io.hpp — CSV formatting, atomic file output and the flat key = value config format.

#pragma once

#include "ule/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace ule::io {

// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& header) { row_strings(header); }

    template <class... Cells>
    CsvWriter& row(const Cells&... cells) {
        std::vector<std::string> s{cell(cells)...};
        row_strings(s);
        return *this;
    }

    CsvWriter& row_cells(const std::vector<std::string>& cells) {
        row_strings(cells);
        return *this;
    }

    const std::string& str() const { return out_; }

private:
    static std::string cell(double v) { return format_double(v); }
    static std::string cell(float v) { return format_double(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(long v) { return std::to_string(v); }
    static std::string cell(long long v) { return std::to_string(v); }
    static std::string cell(unsigned long v) { return std::to_string(v); }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }

    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ += ',';
            out_ += cells[i];
        }
        out_ += '\n';
    }

    std::string out_;
};

// Writes to a sibling temporary and renames it over the target.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw std::runtime_error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// ------------------------------ config ------------------------------------

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Flat `key = value` text; '#' starts a comment. Keys are case-sensitive.
class Config {
public:
    static Config parse(std::string_view text, const std::string& origin = "<config>") {
        Config cfg;
        std::istringstream in{std::string(text)};
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            const std::string t = trim(line);
            if (t.empty()) continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos) {
                throw ValidationError(origin + ":" + std::to_string(lineno) +
                                      ": expected 'key = value'");
            }
            const std::string key = trim(std::string_view(t).substr(0, eq));
            const std::string value = trim(std::string_view(t).substr(eq + 1));
            if (key.empty()) {
                throw ValidationError(origin + ":" + std::to_string(lineno) + ": empty key");
            }
            if (cfg.values_.count(key)) {
                throw ValidationError(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                                      key + "'");
            }
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static Config load(const std::filesystem::path& path) {
        std::ifstream f(path);
        if (!f) throw ValidationError("cannot read config file " + path.string());
        std::stringstream ss;
        ss << f.rdbuf();
        return parse(ss.str(), path.string());
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    // "key=value" as given on the command line.
    void set_assignment(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("override '" + assignment + "' is not of the form key=value");
        }
        const std::string key = trim(std::string_view(assignment).substr(0, eq));
        if (key.empty()) throw ValidationError("override '" + assignment + "' has an empty key");
        set(key, trim(std::string_view(assignment).substr(eq + 1)));
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    const std::map<std::string, std::string>& values() const { return values_; }

    std::string get_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ValidationError("missing config key '" + key + "'");
        return it->second;
    }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        return has(key) ? get_string(key) : fallback;
    }

    double get_double(const std::string& key) const { return to_double(key, get_string(key)); }
    double get_double(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }

    int get_int(const std::string& key) const {
        const std::string v = get_string(key);
        try {
            std::size_t used = 0;
            const int x = std::stoi(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ValidationError("config key '" + key + "': '" + v + "' is not an integer");
        }
    }
    int get_int(const std::string& key, int fallback) const {
        return has(key) ? get_int(key) : fallback;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string v = get_string(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ValidationError("config key '" + key + "': '" + v + "' is not a boolean");
    }

    // Every key must be one of `known`.
    void require_known(const std::vector<std::string>& known) const {
        for (const auto& [k, v] : values_) {
            bool ok = false;
            for (const auto& name : known) ok = ok || name == k;
            if (!ok) throw ValidationError("unknown config key '" + k + "'");
        }
    }

    static double to_double(const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            const double x = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            throw ValidationError("config key '" + key + "': '" + v + "' is not a number");
        }
    }

private:
    std::map<std::string, std::string> values_;
};

// "a,b,c" -> {a, b, c}
inline std::vector<double> parse_list(const std::string& what, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (t.empty()) throw ValidationError(what + ": empty list entry in '" + text + "'");
        out.push_back(Config::to_double(what, t));
    }
    if (out.empty()) throw ValidationError(what + ": empty list");
    return out;
}

// ------------------------------ json --------------------------------------

// Ordered JSON object emitter; numbers use format_double, non-finite values
// become null.
class JsonObject {
public:
    JsonObject& add(const std::string& key, double v) {
        return raw(key, std::isfinite(v) ? format_double(v) : "null");
    }
    JsonObject& add(const std::string& key, int v) { return raw(key, std::to_string(v)); }
    JsonObject& add(const std::string& key, long v) { return raw(key, std::to_string(v)); }
    JsonObject& add(const std::string& key, bool v) { return raw(key, v ? "true" : "false"); }
    JsonObject& add(const std::string& key, const char* v) { return raw(key, quote(v)); }
    JsonObject& add(const std::string& key, const std::string& v) { return raw(key, quote(v)); }
    JsonObject& add(const std::string& key, const JsonObject& v) {
        entries_.emplace_back(key, Value{true, {}, std::make_shared<JsonObject>(v)});
        return *this;
    }

    std::string str(int indent = 0) const {
        if (entries_.empty()) return "{}";
        const std::string pad(2 * (indent + 1), ' ');
        std::string out = "{\n";
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            out += pad + quote(entries_[i].first) + ": ";
            out += entries_[i].second.nested ? entries_[i].second.object->str(indent + 1)
                                             : entries_[i].second.text;
            out += i + 1 < entries_.size() ? ",\n" : "\n";
        }
        out += std::string(2 * indent, ' ') + "}";
        return out;
    }

    static std::string quote(const std::string& s) {
        std::string out = "\"";
        for (char c : s) {
            switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
            }
        }
        return out + "\"";
    }

private:
    struct Value {
        bool nested{false};
        std::string text;
        std::shared_ptr<JsonObject> object;
    };

    JsonObject& raw(const std::string& key, std::string text) {
        entries_.emplace_back(key, Value{false, std::move(text), nullptr});
        return *this;
    }

    std::vector<std::pair<std::string, Value>> entries_;
};

} // namespace ule::io
