#include "padr/io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "padr/errors.hpp"

namespace padr {

namespace {

constexpr std::uint16_t kSnapshotVersion = 1;

template <typename T>
void put_le(std::ostream& os, T v) {
    std::array<unsigned char, sizeof(T)> buf{};
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf.data()), buf.size());
}

template <typename T>
T get_le(std::istream& is) {
    std::array<unsigned char, sizeof(T)> buf{};
    if (!is.read(reinterpret_cast<char*>(buf.data()), buf.size()))
        throw ConfigError("snapshot: unexpected end of data");
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_snapshot(std::ostream& os, const GridParams& params, const State& u) {
    if (u.size() != params.size()) throw std::invalid_argument("snapshot: length mismatch");
    os.write("PADR", 4);
    put_le<std::uint16_t>(os, kSnapshotVersion);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(params.p));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(params.n));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(params.N));
    for (double v : u) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        put_le<std::uint64_t>(os, bits);
    }
    if (!os) throw Error("snapshot: write failed");
}

void write_snapshot(const std::string& path, const GridParams& params, const State& u) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    write_snapshot(os, params, u);
}

std::pair<GridParams, State> read_snapshot(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "PADR", 4) != 0)
        throw ConfigError("snapshot: bad magic");
    const auto version = get_le<std::uint16_t>(is);
    if (version != kSnapshotVersion)
        throw ConfigError("snapshot: unsupported version " + std::to_string(version));
    GridParams params;
    params.p = static_cast<int>(get_le<std::uint32_t>(is));
    params.n = static_cast<int>(get_le<std::uint32_t>(is));
    params.N = static_cast<int>(get_le<std::uint32_t>(is));
    try {
        params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("snapshot: ") + e.what());
    }
    State u(params.size());
    for (double& v : u) {
        const auto bits = get_le<std::uint64_t>(is);
        std::memcpy(&v, &bits, sizeof v);
    }
    return {params, std::move(u)};
}

std::pair<GridParams, State> read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open snapshot " + path);
    return read_snapshot(is);
}

std::string json_escape(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"':
                out += "\\\"";
                break;
            case '\\':
                out += "\\\\";
                break;
            case '\n':
                out += "\\n";
                break;
            case '\t':
                out += "\\t";
                break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
    return out;
}

JsonObject& JsonObject::add(const std::string& key, double v) {
    return add_raw(key, std::isfinite(v) ? format_double(v) : json_escape(format_double(v)));
}
JsonObject& JsonObject::add(const std::string& key, int v) {
    return add_raw(key, std::to_string(v));
}
JsonObject& JsonObject::add(const std::string& key, std::int64_t v) {
    return add_raw(key, std::to_string(v));
}
JsonObject& JsonObject::add(const std::string& key, std::size_t v) {
    return add_raw(key, std::to_string(v));
}
JsonObject& JsonObject::add(const std::string& key, bool v) {
    return add_raw(key, v ? "true" : "false");
}
JsonObject& JsonObject::add(const std::string& key, const std::string& v) {
    return add_raw(key, json_escape(v));
}
JsonObject& JsonObject::add(const std::string& key, const char* v) {
    return add_raw(key, json_escape(v));
}
JsonObject& JsonObject::add(const std::string& key, const JsonObject& v) {
    return add_raw(key, v.str());
}
JsonObject& JsonObject::add(const std::string& key, const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += format_double(v[i]);
    }
    s += ']';
    return add_raw(key, std::move(s));
}
JsonObject& JsonObject::add_raw(const std::string& key, std::string json) {
    fields_.emplace_back(key, std::move(json));
    return *this;
}

std::string JsonObject::str() const {
    std::string s = "{";
    for (std::size_t i = 0; i < fields_.size(); ++i) {
        if (i) s += ',';
        s += json_escape(fields_[i].first);
        s += ':';
        s += fields_[i].second;
    }
    s += '}';
    return s;
}

std::string trajectory_record(double t, double min, double max, const EnergyBreakdown& e,
                              const double* sup_dist_to_target) {
    JsonObject en;
    en.add("interaction", e.interaction).add("potential", e.potential).add("total", e.total);
    JsonObject rec;
    rec.add("t", t).add("min", min).add("max", max).add("energy", en);
    if (sup_dist_to_target) rec.add("sup_dist_to_target", *sup_dist_to_target);
    return rec.str();
}

std::string energy_csv_row(double t, const EnergyBreakdown& e) {
    return format_double(t) + "," + format_double(e.interaction) + "," +
           format_double(e.potential) + "," + format_double(e.total);
}

}  // namespace padr
