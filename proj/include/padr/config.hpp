#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "padr/approx.hpp"
#include "padr/dynamics.hpp"
#include "padr/kernel.hpp"
#include "padr/reaction.hpp"
#include "padr/stationary.hpp"

namespace padr {

struct KernelSpec {
    std::string family = "table";
    std::map<int, double> levels;
    int radius_exponent = 0;
    double gamma = 0.0;
    double tail_tol = RadialKernel::kDefaultTailTol;
    bool normalize = true;
};

struct ReactionSpec {
    std::vector<double> coefficients;  ///< empty means the cubic u^3 - u
    double lambda = 6.0;
    double alpha_minus = -0.75;
    double alpha_plus = 0.75;
    double delta = 0.5;
};

/// Pattern given as ordinals, rational representatives, "all" or "none".
struct PatternSpec {
    bool all = false;
    std::vector<std::size_t> ordinals;
    std::vector<std::string> points;
};

struct InitialSpec {
    std::string type = "constant";  ///< constant | pattern | profile | snapshot | random
    double value = 0.0;
    PatternSpec pattern;
    double inside = 1.0;
    double outside = -1.0;
    nlohmann::json profile;
    std::string snapshot;
    double low = -1.0;
    double high = 1.0;
};

struct StationarySpec {
    double h = 0.0625;
    double tol = 1e-12;
    std::size_t max_iter = 1000000;
    PatternSpec pattern;
};

struct ConvergeSpec {
    std::vector<int> N_list{2, 3, 4};
    nlohmann::json profile;
};

struct OutputSpec {
    std::string directory = "out";
    std::vector<std::string> formats{"ndjson", "csv", "snapshot"};
    bool wants(const std::string& f) const;
};

struct RunConfig {
    GridParams grid;
    KernelSpec kernel;
    ReactionSpec reaction;
    InitialSpec initial;
    IntegratorConfig integrator;
    /// "stationary" to measure the distance to the stationary pattern.
    std::string target;
    StationarySpec stationary;
    ConvergeSpec converge;
    OutputSpec outputs;
    std::uint64_t seed = 0;
};

/// Parses and validates a configuration. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

RadialKernel make_kernel(const KernelSpec& spec, int p, int n);
Reaction make_reaction(const ReactionSpec& spec);
UltradiffOperator make_operator(const RunConfig& cfg);
PatternSet make_pattern(const PatternSpec& spec, const GridParams& params);
Profile make_profile(const nlohmann::json& j, int p, int n);
State make_initial(const RunConfig& cfg);

/// Representative such as "3/2" or "(1/2, 3)" to its canonical ordinal.
std::size_t parse_point(const std::string& text, const GridParams& params);

/// Uniform doubles in [0, 1) from mt19937_64 as (x >> 11) * 2^-53.
class UniformStream {
public:
    explicit UniformStream(std::uint64_t seed);
    double next();

private:
    std::mt19937_64 engine_;
};

}  // namespace padr
