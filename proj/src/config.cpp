#include "panelfx/config.hpp"

#include "panelfx/errors.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace panelfx {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfigError("cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw InvalidConfigError("config line " + std::to_string(lineno) +
                                     " has no '=': " + t);
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw InvalidConfigError("config line " + std::to_string(lineno) +
                                     " has empty key");
        cfg.entries_.emplace_back(key, value);
    }
    return cfg;
}

bool KeyValueConfig::has(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return true;
    return false;
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    std::optional<std::string> out;
    for (const auto& [k, v] : entries_)
        if (k == key) out = v;
    return out;
}

std::string KeyValueConfig::get_or(const std::string& key,
                                   const std::string& fallback) const {
    auto v = get(key);
    return v ? *v : fallback;
}

double KeyValueConfig::get_double_or(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    char* end = nullptr;
    double d = std::strtod(v->c_str(), &end);
    if (end == v->c_str() || *end != '\0')
        throw InvalidConfigError("config key '" + key + "' is not a number: " + *v);
    return d;
}

long KeyValueConfig::get_long_or(const std::string& key, long fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    char* end = nullptr;
    long l = std::strtol(v->c_str(), &end, 10);
    if (end == v->c_str() || *end != '\0')
        throw InvalidConfigError("config key '" + key + "' is not an integer: " + *v);
    return l;
}

std::vector<std::string> KeyValueConfig::get_all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
        if (k == key) out.push_back(v);
    return out;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
}

} // namespace panelfx
