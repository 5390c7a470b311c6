#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "padr/energy.hpp"
#include "padr/grid.hpp"
#include "padr/operator.hpp"

namespace padr {

/// %.17g
std::string format_double(double v);

/// Binary snapshot: "PADR", u16 version, u32 p, n, N (little-endian), then M
/// binary64 values in canonical order.
void write_snapshot(std::ostream& os, const GridParams& params, const State& u);
void write_snapshot(const std::string& path, const GridParams& params, const State& u);
std::pair<GridParams, State> read_snapshot(std::istream& is);
std::pair<GridParams, State> read_snapshot(const std::string& path);

/// Minimal JSON object builder with fixed field order and %.17g numbers.
class JsonObject {
public:
    JsonObject& add(const std::string& key, double v);
    JsonObject& add(const std::string& key, int v);
    JsonObject& add(const std::string& key, std::int64_t v);
    JsonObject& add(const std::string& key, std::size_t v);
    JsonObject& add(const std::string& key, bool v);
    JsonObject& add(const std::string& key, const std::string& v);
    JsonObject& add(const std::string& key, const char* v);
    JsonObject& add(const std::string& key, const JsonObject& v);
    JsonObject& add(const std::string& key, const std::vector<double>& v);
    JsonObject& add_raw(const std::string& key, std::string json);
    std::string str() const;

private:
    std::vector<std::pair<std::string, std::string>> fields_;
};

std::string json_escape(const std::string& s);

/// One NDJSON trajectory record (no trailing newline).
std::string trajectory_record(double t, double min, double max, const EnergyBreakdown& e,
                              const double* sup_dist_to_target);

/// "t,interaction,potential,total" row (no trailing newline).
std::string energy_csv_row(double t, const EnergyBreakdown& e);

}  // namespace padr
