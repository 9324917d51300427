#pragma once

#include "nsr/image.hpp"

#include <map>
#include <string>

namespace nsr {

/// Binary 16-bit PGM (P5, maxval 65535, big-endian); values clamped to [0, L].
void write_pgm16(const std::string& path, const Image& x, double data_range = 1.0);
/// Reads a P5 PGM back into [0, L].
Image read_pgm16(const std::string& path, double data_range = 1.0);

/// Flat key=value configuration. '#' starts a comment; blank lines are ignored.
class KeyValueConfig {
public:
    static KeyValueConfig parse(const std::string& text);
    static KeyValueConfig load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

} // namespace nsr
