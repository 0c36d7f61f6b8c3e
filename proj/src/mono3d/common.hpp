#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mono3d {

// Error taxonomy; the CLI maps each class to a distinct exit code.
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct floorplan_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct solver_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

// Strict numeric field parsing; `where` names the file/row/column in errors.
double parse_double(const std::string& field, const std::string& where);
long long parse_int(const std::string& field, const std::string& where);

// Shortest text that round-trips a double through strtod.
std::string fmt_double(double v);

// Simple line-oriented `key = value` file. Duplicate keys keep file order
// (the thermal stack file repeats `layer`). '#' starts a comment.
class kv_file {
  public:
    static kv_file load(const std::filesystem::path& path);
    static kv_file from_string(const std::string& text, const std::string& name);

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::vector<std::string> get_all(const std::string& key) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    const std::string& name() const { return name_; }

  private:
    std::string name_;
    std::vector<std::pair<std::string, std::string>> entries_;
};

// Runs fn(0..n-1) on up to `threads` workers. Work items must be independent;
// falls back to the calling thread for n==0/1 or threads<=1.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

// SplitMix64 step, used to derive independent RNG streams from (seed, salt).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace mono3d
