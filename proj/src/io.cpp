#include "nsr/io.hpp"

#include "nsr/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nsr {

void write_pgm16(const std::string& path, const Image& x, double data_range)
{
    if (!(data_range > 0.0)) throw ParameterError("write_pgm16: data range must be positive");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << "P5\n" << x.width() << " " << x.height() << "\n65535\n";
    for (double v : x.values()) {
        const double t = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, data_range) / data_range;
        const auto q = static_cast<unsigned>(std::lround(t * 65535.0));
        const char bytes[2] = {static_cast<char>((q >> 8) & 0xff), static_cast<char>(q & 0xff)};
        out.write(bytes, 2);
    }
}

Image read_pgm16(const std::string& path, double data_range)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::string magic;
    std::size_t w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P5" || w == 0 || h == 0 || maxval != 65535) throw InputError(path + ": not a 16-bit P5 PGM");
    in.get();
    Image x(h, w);
    for (double& v : x.values()) {
        unsigned char b[2];
        if (!in.read(reinterpret_cast<char*>(b), 2)) throw InputError(path + ": truncated pixel data");
        v = static_cast<double>((b[0] << 8) | b[1]) / 65535.0 * data_range;
    }
    return x;
}

namespace {
std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}
} // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text)
{
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw InputError("config line " + std::to_string(lineno) + ": empty key");
        cfg.values_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot read config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const
{
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const
{
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(it->second, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != it->second.size()) throw InputError("config: '" + key + "' is not a number");
    return v;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const
{
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(it->second, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != it->second.size()) throw InputError("config: '" + key + "' is not an integer");
    return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const
{
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw InputError("config: '" + key + "' is not a boolean");
}

} // namespace nsr
