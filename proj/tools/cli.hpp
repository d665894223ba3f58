#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace epoly::cli {

// Flat dotted key=value configuration with defaults.
struct RunConfig {
    std::map<std::string, std::string> values;

    static RunConfig defaults();
    // Throws std::invalid_argument on unknown keys or malformed lines.
    void merge_text(const std::string& text, const std::string& origin);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    std::string str(const std::string& key) const;
    double num(const std::string& key) const;
    long integer(const std::string& key) const;
    std::vector<double> grid(const std::string& key) const;
};

// Exit codes: 0 success, 2 validation error, 3 nonconvergence, 1 other failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace epoly::cli
