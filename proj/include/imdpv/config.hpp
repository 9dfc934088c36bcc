#pragma once

#include "imdpv/grid.hpp"

#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace imdpv {

inline constexpr const char* kVersion = "0.1.0";
/// Environment variables IMDPV__<section>__<key> override file values.
inline constexpr const char* kEnvPrefix = "IMDPV__";

/**
 * INI configuration. Values are resolved in order: file, environment
 * variables, then explicit "section.key=value" overrides. Missing or
 * malformed values raise ConfigError.
 */
class Config {
public:
    Config() = default;

    static Config load(const std::filesystem::path& path,
                       const std::vector<std::string>& overrides = {}, bool use_environment = true);
    static Config from_string(const std::string& text,
                              const std::vector<std::string>& overrides = {});

    /// Applies "section.key=value".
    void set(const std::string& assignment);
    void set(const std::string& section, const std::string& key, const std::string& value);

    bool has(const std::string& section, const std::string& key) const;
    std::string text(const std::string& section, const std::string& key) const;
    std::string text(const std::string& section, const std::string& key, const std::string& fallback) const;
    double real(const std::string& section, const std::string& key) const;
    double real(const std::string& section, const std::string& key, double fallback) const;
    std::int64_t integer(const std::string& section, const std::string& key) const;
    std::int64_t integer(const std::string& section, const std::string& key, std::int64_t fallback) const;
    std::uint64_t seed(const std::string& section, const std::string& key = "seed") const;
    bool flag(const std::string& section, const std::string& key, bool fallback) const;
    /// Comma-separated reals.
    Vector vector(const std::string& section, const std::string& key) const;
    Vector vector(const std::string& section, const std::string& key, const Vector& fallback) const;
    /// '|'-separated items, trimmed; empty value gives an empty list.
    std::vector<std::string> items(const std::string& section, const std::string& key) const;
    std::vector<std::string> keys(const std::string& section) const;

    /**
     * Grid from keys dim0, dim1, ... each holding "lower, upper, width".
     * A non-empty `width_override` replaces every width.
     */
    Grid grid(const std::string& section, std::optional<double> width_override = {}) const;

    /// Canonical "section.key = value" lines, sorted.
    std::string canonical() const;
    /// FNV-1a 64 of canonical(), as 16 hex digits.
    std::string hash() const;

private:
    boost::property_tree::ptree tree_;
};

Vector parse_vector(const std::string& text, const std::string& what);
std::string trim(const std::string& s);

} // namespace imdpv
