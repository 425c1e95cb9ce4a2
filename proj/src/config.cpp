#include "xlalign/config.hpp"

#include <fstream>
#include <sstream>

#include "xlalign/errors.hpp"

namespace xlalign {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    std::size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

} // namespace

KvConfig KvConfig::parse_text(const std::string& text) {
    KvConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3) {
                throw ConfigError("config line " + std::to_string(line_no) + ": malformed section header");
            }
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) {
                throw ConfigError("config line " + std::to_string(line_no) + ": empty section name");
            }
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        }
        const std::string dotted = section.empty() ? key : section + "." + key;
        if (cfg.entries_.count(dotted)) {
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" +
                              dotted + "'");
        }
        cfg.entries_[dotted] = value;
    }
    return cfg;
}

KvConfig KvConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("config: cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str());
}

void KvConfig::set(const std::string& dotted_key, const std::string& value) {
    entries_[dotted_key] = value;
}

void KvConfig::set_override(const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "': expected key=value");
    }
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

std::string KvConfig::require(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        throw ConfigError("config: missing required key '" + key + "'");
    }
    return it->second;
}

long KvConfig::get_long(const std::string& key, long fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        return fallback;
    }
    try {
        std::size_t used = 0;
        const long v = std::stol(it->second, &used);
        if (used != it->second.size()) {
            throw std::invalid_argument("");
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' is not an integer: '" + it->second + "'");
    }
}

double KvConfig::get_double(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        return fallback;
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) {
            throw std::invalid_argument("");
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' is not a number: '" + it->second + "'");
    }
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        return fallback;
    }
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw ConfigError("config: key '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<std::string> KvConfig::get_list(const std::string& key,
                                            const std::vector<std::string>& fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
        return fallback;
    }
    std::vector<std::string> out;
    std::istringstream iss(it->second);
    std::string item;
    while (std::getline(iss, item, ',')) {
        const std::string t = trim(item);
        if (!t.empty()) {
            out.push_back(t);
        }
    }
    return out;
}

std::vector<std::uint64_t> KvConfig::get_u64_list(
    const std::string& key, const std::vector<std::uint64_t>& fallback) const {
    if (!has(key)) {
        return fallback;
    }
    std::vector<std::uint64_t> out;
    for (const std::string& item : get_list(key, {})) {
        try {
            out.push_back(std::stoull(item));
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "' has a non-integer entry: '" + item + "'");
        }
    }
    return out;
}

void KvConfig::ensure_known(const std::set<std::string>& allowed_keys,
                            const std::set<std::string>& allowed_prefixes) const {
    std::string offenders;
    for (const auto& [key, value] : entries_) {
        if (allowed_keys.count(key)) {
            continue;
        }
        bool prefixed = false;
        for (const std::string& prefix : allowed_prefixes) {
            if (key.rfind(prefix, 0) == 0) {
                prefixed = true;
                break;
            }
        }
        if (!prefixed) {
            offenders += offenders.empty() ? key : ", " + key;
        }
    }
    if (!offenders.empty()) {
        throw ConfigError("config: unknown keys: " + offenders);
    }
}

} // namespace xlalign
