#include "mono3d/common.hpp"

#include <atomic>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace mono3d {

std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& field, const std::string& where) {
    const std::string t = trim(field);
    if (t.empty()) throw parse_error(where + ": empty numeric field");
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || errno == ERANGE)
        throw parse_error(where + ": '" + t + "' is not a number");
    return v;
}

long long parse_int(const std::string& field, const std::string& where) {
    const std::string t = trim(field);
    if (t.empty()) throw parse_error(where + ": empty numeric field");
    long long v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size())
        throw parse_error(where + ": '" + t + "' is not an integer");
    return v;
}

std::string fmt_double(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

kv_file kv_file::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str(), path.string());
}

kv_file kv_file::from_string(const std::string& text, const std::string& name) {
    kv_file f;
    f.name_ = name;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw parse_error(name + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw parse_error(name + ":" + std::to_string(lineno) + ": empty key");
        f.entries_.emplace_back(key, val);
    }
    return f;
}

bool kv_file::has(const std::string& key) const {
    for (auto& [k, v] : entries_)
        if (k == key) return true;
    return false;
}

const std::string& kv_file::get(const std::string& key) const {
    for (auto& [k, v] : entries_)
        if (k == key) return v;
    throw config_error(name_ + ": missing key '" + key + "'");
}

std::string kv_file::get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
}

double kv_file::get_double(const std::string& key, double fallback) const {
    return has(key) ? parse_double(get(key), name_ + ":" + key) : fallback;
}

long long kv_file::get_int(const std::string& key, long long fallback) const {
    return has(key) ? parse_int(get(key), name_ + ":" + key) : fallback;
}

std::vector<std::string> kv_file::get_all(const std::string& key) const {
    std::vector<std::string> out;
    for (auto& [k, v] : entries_)
        if (k == key) out.push_back(v);
    return out;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    unsigned nw = std::min<std::size_t>(threads == 0 ? 1 : threads, n);
    if (nw <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mx;
    std::vector<std::thread> workers;
    workers.reserve(nw);
    for (unsigned w = 0; w < nw; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lk(err_mx);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (err) std::rethrow_exception(err);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace mono3d
