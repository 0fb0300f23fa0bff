#ifndef NMKDV_DETAIL_TEXT_IO_HPP
#define NMKDV_DETAIL_TEXT_IO_HPP

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "../errors.hpp"

namespace nmkdv::detail {

// shortest text that reads back to the same double
inline std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt_sigma(int s) { return s > 0 ? "+1" : "-1"; }

// "# tag v1 k=v k=v" -> map; tag checked
inline std::map<std::string, std::string> parse_header(const std::string& line, const std::string& tag)
{
    std::istringstream is(line);
    std::string hash, got_tag, version;
    is >> hash >> got_tag >> version;
    if (hash != "#" || got_tag != tag || version != "v1")
        throw IoError("expected header '# " + tag + " v1 ...', got '" + line + "'");
    std::map<std::string, std::string> kv;
    std::string tok;
    while (is >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) throw IoError("malformed header field '" + tok + "'");
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return kv;
}

inline double to_double(const std::string& s, const std::string& what)
{
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError("cannot parse " + what + " from '" + s + "'");
    }
}

inline int to_int(const std::string& s, const std::string& what)
{
    try {
        std::size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError("cannot parse " + what + " from '" + s + "'");
    }
}

inline const std::string& require_key(const std::map<std::string, std::string>& kv, const std::string& k)
{
    auto it = kv.find(k);
    if (it == kv.end()) throw IoError("header lacks field '" + k + "'");
    return it->second;
}

inline int parse_sigma(const std::string& s)
{
    int v = to_int(s, "sigma");
    if (v != 1 && v != -1) throw IoError("sigma must be +1 or -1");
    return v;
}

// next non-empty data line split into doubles; false at EOF
inline bool read_row(std::istream& in, std::vector<double>& row)
{
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        row.clear();
        std::istringstream is(line);
        std::string tok;
        while (is >> tok) row.push_back(to_double(tok, "data value"));
        return true;
    }
    return false;
}

inline std::ifstream open_in(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

inline std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

} // namespace nmkdv::detail

#endif
