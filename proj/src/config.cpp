#include "imdpv/config.hpp"

#include <boost/property_tree/ini_parser.hpp>

#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>

extern char** environ;

namespace imdpv {

namespace pt = boost::property_tree;

namespace {

std::string lower(std::string s) {
    for (char& c : s)
        c = char(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string where(const std::string& section, const std::string& key) {
    return "[" + section + "] " + key;
}

double parse_real(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    const std::string l = lower(t);
    if (l == "inf" || l == "+inf")
        return std::numeric_limits<double>::infinity();
    if (l == "-inf")
        return -std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size())
            throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(what + ": '" + t + "' is not a number");
    }
}

} // namespace

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

Vector parse_vector(const std::string& text, const std::string& what) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        vals.push_back(parse_real(tok, what));
    if (trim(text).empty())
        vals.clear();
    Vector v(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i)
        v[Eigen::Index(i)] = vals[i];
    return v;
}

Config Config::load(const std::filesystem::path& path, const std::vector<std::string>& overrides,
                    bool use_environment) {
    Config c;
    try {
        pt::read_ini(path.string(), c.tree_);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("cannot read config: ") + e.what());
    }
    if (use_environment) {
        const std::string prefix = kEnvPrefix;
        for (char** env = environ; env && *env; ++env) {
            const std::string entry = *env;
            if (entry.rfind(prefix, 0) != 0)
                continue;
            const auto eq = entry.find('=');
            const std::string name = entry.substr(prefix.size(), eq - prefix.size());
            const auto sep = name.find("__");
            if (eq == std::string::npos || sep == std::string::npos)
                throw ConfigError("malformed override variable " + entry.substr(0, eq));
            c.set(lower(name.substr(0, sep)), lower(name.substr(sep + 2)), entry.substr(eq + 1));
        }
    }
    for (const auto& o : overrides)
        c.set(o);
    return c;
}

Config Config::from_string(const std::string& text, const std::vector<std::string>& overrides) {
    Config c;
    std::istringstream in(text);
    try {
        pt::read_ini(in, c.tree_);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("cannot parse config: ") + e.what());
    }
    for (const auto& o : overrides)
        c.set(o);
    return c;
}

void Config::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("override must look like section.key=value: '" + assignment + "'");
    set(trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
        trim(assignment.substr(eq + 1)));
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    if (section.empty() || key.empty())
        throw ConfigError("override needs a section and a key");
    tree_.put(pt::ptree::path_type(section + '\x1f' + key, '\x1f'), value);
}

bool Config::has(const std::string& section, const std::string& key) const {
    return bool(tree_.get_optional<std::string>(pt::ptree::path_type(section + '\x1f' + key, '\x1f')));
}

std::string Config::text(const std::string& section, const std::string& key) const {
    auto v = tree_.get_optional<std::string>(pt::ptree::path_type(section + '\x1f' + key, '\x1f'));
    if (!v)
        throw ConfigError("missing " + where(section, key));
    return trim(*v);
}

std::string Config::text(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
    return has(section, key) ? text(section, key) : fallback;
}

double Config::real(const std::string& section, const std::string& key) const {
    return parse_real(text(section, key), where(section, key));
}

double Config::real(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? real(section, key) : fallback;
}

std::int64_t Config::integer(const std::string& section, const std::string& key) const {
    const std::string t = text(section, key);
    try {
        std::size_t used = 0;
        const long long v = std::stoll(t, &used);
        if (used != t.size())
            throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where(section, key) + ": '" + t + "' is not an integer");
    }
}

std::int64_t Config::integer(const std::string& section, const std::string& key,
                             std::int64_t fallback) const {
    return has(section, key) ? integer(section, key) : fallback;
}

std::uint64_t Config::seed(const std::string& section, const std::string& key) const {
    if (!has(section, key))
        throw ConfigError("missing " + where(section, key) + ": randomized commands need an explicit seed");
    const std::string t = text(section, key);
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(t, &used);
        if (used != t.size() || t[0] == '-')
            throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where(section, key) + ": '" + t + "' is not a seed");
    }
}

bool Config::flag(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key))
        return fallback;
    const std::string t = lower(text(section, key));
    if (t == "true" || t == "1" || t == "yes" || t == "on")
        return true;
    if (t == "false" || t == "0" || t == "no" || t == "off")
        return false;
    throw ConfigError(where(section, key) + ": '" + t + "' is not a boolean");
}

Vector Config::vector(const std::string& section, const std::string& key) const {
    return parse_vector(text(section, key), where(section, key));
}

Vector Config::vector(const std::string& section, const std::string& key, const Vector& fallback) const {
    return has(section, key) ? vector(section, key) : fallback;
}

std::vector<std::string> Config::items(const std::string& section, const std::string& key) const {
    std::vector<std::string> out;
    if (!has(section, key))
        return out;
    std::stringstream ss(text(section, key));
    std::string tok;
    while (std::getline(ss, tok, '|'))
        if (!trim(tok).empty())
            out.push_back(trim(tok));
    return out;
}

std::vector<std::string> Config::keys(const std::string& section) const {
    std::vector<std::string> out;
    if (auto child = tree_.get_child_optional(pt::ptree::path_type(section, '\x1f')))
        for (const auto& [k, v] : *child)
            out.push_back(k);
    return out;
}

Grid Config::grid(const std::string& section, std::optional<double> width_override) const {
    std::vector<Vector> dims;
    for (int d = 0; has(section, "dim" + std::to_string(d)); ++d) {
        Vector v = vector(section, "dim" + std::to_string(d));
        if (v.size() != 3)
            throw ConfigError(where(section, "dim" + std::to_string(d)) +
                              " must be 'lower, upper, width'");
        dims.push_back(v);
    }
    if (dims.empty())
        throw ConfigError("[" + section + "] defines no dimensions (dim0, dim1, ...)");
    const Eigen::Index n = Eigen::Index(dims.size());
    Vector lo(n), hi(n), w(n);
    for (Eigen::Index d = 0; d < n; ++d) {
        lo[d] = dims[std::size_t(d)][0];
        hi[d] = dims[std::size_t(d)][1];
        w[d] = width_override ? *width_override : dims[std::size_t(d)][2];
    }
    try {
        return Grid(lo, hi, w);
    } catch (const InputError& e) {
        throw ConfigError("[" + section + "]: " + e.what());
    }
}

std::string Config::canonical() const {
    std::map<std::string, std::string> flat;
    for (const auto& [section, child] : tree_)
        for (const auto& [key, value] : child)
            flat[section + "." + key] = trim(value.data());
    std::string out;
    for (const auto& [k, v] : flat)
        out += k + " = " + v + "\n";
    return out;
}

std::string Config::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace imdpv
