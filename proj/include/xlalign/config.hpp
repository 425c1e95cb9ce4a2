#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace xlalign {

/// Line-oriented key=value configuration with [section] headers. Keys are
/// addressed as "section.key" ("key" when outside sections); '#' starts a
/// comment line; duplicate keys are errors. Overrides applied via set()
/// replace file values.
class KvConfig {
public:
    static KvConfig parse_text(const std::string& text);
    static KvConfig parse_file(const std::string& path); // DataError when unreadable

    void set(const std::string& dotted_key, const std::string& value);
    /// Parses "key=value"; throws ConfigError without an '='.
    void set_override(const std::string& assignment);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require(const std::string& key) const;
    long get_long(const std::string& key, long fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key,
                                      const std::vector<std::string>& fallback) const;
    std::vector<std::uint64_t> get_u64_list(const std::string& key,
                                            const std::vector<std::uint64_t>& fallback) const;

    /// Rejects keys outside the allowed set (and outside allowed "prefix."
    /// families) with a ConfigError naming every offender.
    void ensure_known(const std::set<std::string>& allowed_keys,
                      const std::set<std::string>& allowed_prefixes = {}) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

} // namespace xlalign
