#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace panelfx {

/// Key-value config file: one `key = value` per line, full-line '#' comments,
/// repeated keys accumulate in order.
class KeyValueConfig {
public:
    static KeyValueConfig load(const std::string& path);
    static KeyValueConfig parse(const std::string& text);

    bool has(const std::string& key) const;
    /// Last value wins for scalar lookups.
    std::optional<std::string> get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double_or(const std::string& key, double fallback) const;
    long get_long_or(const std::string& key, long fallback) const;
    /// All values seen for a repeated key, in file order.
    std::vector<std::string> get_all(const std::string& key) const;

    void set(const std::string& key, const std::string& value);

    const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

} // namespace panelfx
