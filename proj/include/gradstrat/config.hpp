#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "numeric.hpp"

namespace gradstrat {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Key/value configuration with nested [sections]. Keys are addressed as
/// "section.key"; precedence is flags > config file > defaults, realized by
/// layering override maps on top.
class Config {
public:
    Config() = default;

    static Config parse(const std::string& text) {
        Config cfg;
        std::istringstream is(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            std::string t = trim(strip_comment(line));
            if (t.empty()) continue;
            if (t.front() == '[') {
                if (t.back() != ']')
                    throw config_error("config line " + std::to_string(lineno) + ": bad section");
                section = trim(t.substr(1, t.size() - 2));
                continue;
            }
            auto eq = t.find('=');
            if (eq == std::string::npos)
                throw config_error("config line " + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(t.substr(0, eq));
            std::string val = trim(t.substr(eq + 1));
            if (key.empty())
                throw config_error("config line " + std::to_string(lineno) + ": empty key");
            cfg.values_[section.empty() ? key : section + "." + key] = val;
        }
        return cfg;
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get(const std::string& key, const std::string& dflt = "") const {
        auto it = values_.find(key);
        return it == values_.end() ? dflt : it->second;
    }

    long long get_int(const std::string& key, long long dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        try {
            return std::stoll(it->second);
        } catch (...) {
            throw config_error("config key '" + key + "': integer expected, got '" + it->second + "'");
        }
    }

    double get_double(const std::string& key, double dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        try {
            return std::stod(it->second);
        } catch (...) {
            throw config_error("config key '" + key + "': number expected, got '" + it->second + "'");
        }
    }

    bool get_bool(const std::string& key, bool dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
        if (it->second == "false" || it->second == "0" || it->second == "no") return false;
        throw config_error("config key '" + key + "': boolean expected");
    }

    std::vector<std::string> get_list(const std::string& key) const {
        std::vector<std::string> out;
        auto it = values_.find(key);
        if (it == values_.end()) return out;
        std::string cur;
        for (char c : it->second) {
            if (c == ',') {
                std::string t = trim(cur);
                if (!t.empty()) out.push_back(t);
                cur.clear();
            } else {
                cur += c;
            }
        }
        std::string t = trim(cur);
        if (!t.empty()) out.push_back(t);
        return out;
    }

    std::vector<double> get_double_list(const std::string& key) const {
        std::vector<double> out;
        for (const auto& s : get_list(key)) {
            try {
                out.push_back(std::stod(s));
            } catch (...) {
                throw config_error("config key '" + key + "': number list expected");
            }
        }
        return out;
    }

    /// Layer overrides (e.g. command-line flags) on top.
    void merge_over(const Config& overrides) {
        for (const auto& [k, v] : overrides.values_) values_[k] = v;
    }

    /// Canonical serialization: sorted keys, one per line. Used for the
    /// config echo and the config hash.
    std::string canonical() const {
        std::string out;
        for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
        return out;
    }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    static std::string strip_comment(const std::string& s) {
        auto pos = s.find('#');
        return pos == std::string::npos ? s : s.substr(0, pos);
    }
    static std::string trim(const std::string& s) {
        size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    std::map<std::string, std::string> values_;
};

} // namespace gradstrat
