#include "padr/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "padr/io.hpp"

namespace padr {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& section, std::set<std::string> allowed) {
    if (!j.is_object()) throw ConfigError("'" + section + "' must be an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in '" + section + "'");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// "a/b" or "a" with b a power of p; returns (numerator, exponent) for
// value numerator / p^exponent.
std::pair<std::int64_t, int> parse_rational(const std::string& text, int p) {
    const std::string t = trim(text);
    std::int64_t num = 0, den = 1;
    try {
        const auto slash = t.find('/');
        std::size_t used = 0;
        if (slash == std::string::npos) {
            num = std::stoll(t, &used);
            if (used != t.size()) throw std::invalid_argument(t);
        } else {
            const std::string a = t.substr(0, slash), b = t.substr(slash + 1);
            num = std::stoll(a, &used);
            if (used != a.size()) throw std::invalid_argument(t);
            den = std::stoll(b, &used);
            if (used != b.size()) throw std::invalid_argument(t);
        }
    } catch (const std::exception&) {
        throw ConfigError("cannot parse rational '" + t + "'");
    }
    if (den <= 0) throw ConfigError("denominator must be positive in '" + t + "'");
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    int e = 0;
    while (den % p == 0) {
        den /= p;
        ++e;
    }
    if (den != 1)
        throw ConfigError("'" + t + "' has a denominator that is not a power of p = " +
                          std::to_string(p));
    return {num, e};
}

std::vector<std::string> split_point(const std::string& text) {
    std::string t = trim(text);
    if (!t.empty() && t.front() == '(') {
        if (t.back() != ')') throw ConfigError("unbalanced parenthesis in '" + text + "'");
        t = t.substr(1, t.size() - 2);
    }
    std::vector<std::string> parts;
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(trim(item));
    return parts;
}

PatternSpec parse_pattern(const json& j) {
    PatternSpec spec;
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "all") {
            spec.all = true;
        } else if (s != "none") {
            spec.points.push_back(s);
        }
        return spec;
    }
    if (!j.is_array()) throw ConfigError("pattern must be \"all\", \"none\" or a list");
    for (const auto& e : j) {
        if (e.is_number_unsigned() || (e.is_number_integer() && e.get<long long>() >= 0))
            spec.ordinals.push_back(e.get<std::size_t>());
        else if (e.is_string())
            spec.points.push_back(e.get<std::string>());
        else
            throw ConfigError("pattern entries must be ordinals or representatives");
    }
    return spec;
}

}  // namespace

bool OutputSpec::wants(const std::string& f) const {
    return std::find(formats.begin(), formats.end(), f) != formats.end();
}

std::size_t parse_point(const std::string& text, const GridParams& params) {
    const auto parts = split_point(text);
    if (parts.size() != static_cast<std::size_t>(params.n))
        throw ConfigError("point '" + text + "' needs " + std::to_string(params.n) +
                          " coordinates");
    const int slots = 2 * params.N;
    std::int64_t modulus = 1;
    for (int i = 0; i < slots; ++i) modulus *= params.p;
    std::vector<int> digits(static_cast<std::size_t>(slots * params.n));
    for (int j = 0; j < params.n; ++j) {
        const auto [num, e] = parse_rational(parts[j], params.p);
        if (e > params.N)
            throw ConfigError("point '" + text + "' is finer than resolution N = " +
                              std::to_string(params.N));
        std::int64_t X = num;
        for (int i = e; i < params.N; ++i) X *= params.p;
        X %= modulus;
        if (X < 0) X += modulus;
        for (int s = 0; s < slots; ++s) {
            digits[j * slots + s] = static_cast<int>(X % params.p);
            X /= params.p;
        }
    }
    return GridIndex(params, std::move(digits)).ordinal();
}

RunConfig parse_config(const json& j) {
    RunConfig cfg;
    try {
        check_keys(j, "config",
                   {"grid", "kernel", "reaction", "initial", "integrator", "stationary", "converge",
                    "outputs", "seed"});
        if (!j.contains("grid")) throw ConfigError("missing 'grid' section");
        const json& g = j.at("grid");
        check_keys(g, "grid", {"p", "n", "N"});
        cfg.grid.p = g.at("p").get<int>();
        cfg.grid.n = get_or(g, "n", 1);
        cfg.grid.N = g.at("N").get<int>();
        try {
            cfg.grid.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }

        if (j.contains("kernel")) {
            const json& k = j.at("kernel");
            check_keys(k, "kernel",
                       {"family", "levels", "radius_exponent", "gamma", "tail_tol", "normalize"});
            cfg.kernel.family = get_or<std::string>(k, "family", "table");
            if (k.contains("levels")) {
                const json& lv = k.at("levels");
                if (lv.is_object()) {
                    for (const auto& [key, v] : lv.items()) {
                        std::size_t used = 0;
                        int r = 0;
                        try {
                            r = std::stoi(key, &used);
                        } catch (const std::exception&) {
                            used = 0;
                        }
                        if (used != key.size() || key.empty())
                            throw ConfigError("kernel level key '" + key + "' is not an integer");
                        cfg.kernel.levels[r] = v.get<double>();
                    }
                } else if (lv.is_array()) {
                    for (const auto& pair : lv) cfg.kernel.levels[pair.at(0).get<int>()] = pair.at(1).get<double>();
                } else {
                    throw ConfigError("kernel levels must be an object or a list of pairs");
                }
            }
            cfg.kernel.radius_exponent = get_or(k, "radius_exponent", 0);
            cfg.kernel.gamma = get_or(k, "gamma", 0.0);
            cfg.kernel.tail_tol = get_or(k, "tail_tol", RadialKernel::kDefaultTailTol);
            cfg.kernel.normalize = get_or(k, "normalize", true);
            if (cfg.kernel.family != "table" && cfg.kernel.family != "uniform_ball" &&
                cfg.kernel.family != "exp_landscape")
                throw ConfigError("unknown kernel family '" + cfg.kernel.family + "'");
        } else {
            cfg.kernel.levels = {{0, 1.0}, {1, 0.5}};
        }

        if (j.contains("reaction")) {
            const json& r = j.at("reaction");
            check_keys(r, "reaction", {"f", "lambda", "alpha_plus", "alpha_minus", "delta"});
            if (r.contains("f")) {
                const json& f = r.at("f");
                if (f.is_string()) {
                    if (f.get<std::string>() != "cubic")
                        throw ConfigError("reaction f must be \"cubic\" or a coefficient list");
                } else {
                    cfg.reaction.coefficients = f.get<std::vector<double>>();
                }
            }
            cfg.reaction.lambda = get_or(r, "lambda", 6.0);
            cfg.reaction.alpha_plus = get_or(r, "alpha_plus", 0.75);
            cfg.reaction.alpha_minus = get_or(r, "alpha_minus", -0.75);
            cfg.reaction.delta = get_or(r, "delta", 0.5);
        }

        if (j.contains("initial")) {
            const json& in = j.at("initial");
            check_keys(in, "initial",
                       {"type", "value", "pattern", "inside", "outside", "profile", "snapshot",
                        "low", "high"});
            auto& s = cfg.initial;
            if (in.contains("type")) {
                s.type = in.at("type").get<std::string>();
            } else if (in.contains("pattern")) {
                s.type = "pattern";
            } else if (in.contains("profile")) {
                s.type = "profile";
            } else if (in.contains("snapshot")) {
                s.type = "snapshot";
            }
            s.value = get_or(in, "value", 0.0);
            if (in.contains("pattern")) s.pattern = parse_pattern(in.at("pattern"));
            s.inside = get_or(in, "inside", 1.0);
            s.outside = get_or(in, "outside", -1.0);
            if (in.contains("profile")) s.profile = in.at("profile");
            s.snapshot = get_or<std::string>(in, "snapshot", "");
            s.low = get_or(in, "low", -1.0);
            s.high = get_or(in, "high", 1.0);
            static const std::set<std::string> types{"constant", "pattern", "profile", "snapshot",
                                                     "random"};
            if (!types.count(s.type)) throw ConfigError("unknown initial type '" + s.type + "'");
            if (s.type == "random" && !(s.low <= s.high))
                throw ConfigError("random initial data needs low <= high");
        }

        if (j.contains("integrator")) {
            const json& it = j.at("integrator");
            check_keys(it, "integrator",
                       {"method", "dt", "T", "record_every", "picard_tol", "contractive",
                        "target"});
            auto& c = cfg.integrator;
            if (it.contains("method")) c.method = method_from_string(it.at("method").get<std::string>());
            c.dt = get_or(it, "dt", c.dt);
            c.T = get_or(it, "T", c.T);
            c.record_every = get_or(it, "record_every", c.record_every);
            c.picard_tol = get_or(it, "picard_tol", c.picard_tol);
            c.contractive = get_or(it, "contractive", c.contractive);
            cfg.target = get_or<std::string>(it, "target", "");
            if (!cfg.target.empty() && cfg.target != "stationary")
                throw ConfigError("integrator target must be \"stationary\"");
            step_plan(c.T, c.dt);
            if (c.record_every < 1) throw ConfigError("record_every must be >= 1");
            if (!(c.picard_tol > 0.0)) throw ConfigError("picard_tol must be > 0");
        }
        cfg.integrator.keep_snapshots = false;

        if (j.contains("stationary")) {
            const json& st = j.at("stationary");
            check_keys(st, "stationary", {"h", "tol", "max_iter", "pattern"});
            cfg.stationary.h = get_or(st, "h", cfg.stationary.h);
            cfg.stationary.tol = get_or(st, "tol", cfg.stationary.tol);
            cfg.stationary.max_iter = get_or(st, "max_iter", cfg.stationary.max_iter);
            if (st.contains("pattern")) cfg.stationary.pattern = parse_pattern(st.at("pattern"));
            if (!(cfg.stationary.h > 0.0)) throw ConfigError("stationary h must be > 0");
            if (!(cfg.stationary.tol > 0.0)) throw ConfigError("stationary tol must be > 0");
        }

        if (j.contains("converge")) {
            const json& cv = j.at("converge");
            check_keys(cv, "converge", {"N_list", "profile"});
            if (cv.contains("N_list")) cfg.converge.N_list = cv.at("N_list").get<std::vector<int>>();
            if (cv.contains("profile")) cfg.converge.profile = cv.at("profile");
            if (cfg.converge.N_list.empty()) throw ConfigError("converge N_list is empty");
            for (std::size_t i = 0; i < cfg.converge.N_list.size(); ++i) {
                if (cfg.converge.N_list[i] < 1) throw ConfigError("converge N must be >= 1");
                if (i && cfg.converge.N_list[i] <= cfg.converge.N_list[i - 1])
                    throw ConfigError("converge N_list must be increasing");
            }
        }

        if (j.contains("outputs")) {
            const json& o = j.at("outputs");
            check_keys(o, "outputs", {"directory", "formats"});
            cfg.outputs.directory = get_or<std::string>(o, "directory", cfg.outputs.directory);
            if (o.contains("formats")) cfg.outputs.formats = o.at("formats").get<std::vector<std::string>>();
        }
        cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    // Surface problems in the kernel and reaction specs at parse time.
    try {
        make_kernel(cfg.kernel, cfg.grid.p, cfg.grid.n);
        make_reaction(cfg.reaction);
    } catch (const ConfigError&) {
        throw;
    } catch (const KernelError& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path);
    json j;
    try {
        j = json::parse(is, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

RadialKernel make_kernel(const KernelSpec& spec, int p, int n) {
    RadialKernel k = [&] {
        if (spec.family == "table") return RadialKernel::table(p, n, spec.levels);
        if (spec.family == "uniform_ball") return RadialKernel::uniform_ball(p, n, spec.radius_exponent);
        if (spec.family == "exp_landscape") return RadialKernel::exp_landscape(p, n, spec.gamma);
        throw ConfigError("unknown kernel family '" + spec.family + "'");
    }();
    k = k.with_tail_tol(spec.tail_tol);
    return spec.normalize ? normalize(k) : k;
}

Reaction make_reaction(const ReactionSpec& spec) {
    Polynomial f = spec.coefficients.empty() ? Reaction::cubic() : Polynomial(spec.coefficients);
    return Reaction::make(std::move(f), spec.lambda, spec.alpha_minus, spec.alpha_plus, spec.delta);
}

UltradiffOperator make_operator(const RunConfig& cfg) {
    const RadialKernel k = make_kernel(cfg.kernel, cfg.grid.p, cfg.grid.n);
    return UltradiffOperator::build(cfg.grid, truncate(k, cfg.grid));
}

PatternSet make_pattern(const PatternSpec& spec, const GridParams& params) {
    if (spec.all) return PatternSet::all(params);
    std::vector<std::size_t> members = spec.ordinals;
    for (const auto& pt : spec.points) members.push_back(parse_point(pt, params));
    for (std::size_t m : members)
        if (m >= params.size())
            throw ConfigError("pattern ordinal " + std::to_string(m) + " outside the grid");
    return PatternSet(params, std::move(members));
}

Profile make_profile(const json& j, int p, int n) {
    try {
        if (j.is_null()) throw ConfigError("missing profile");
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "constant") {
            check_keys(j, "profile", {"kind", "value"});
            return Profile::constant(p, n, j.at("value").get<double>());
        }
        if (kind == "digit_rule") {
            check_keys(j, "profile", {"kind", "L", "values", "outside"});
            return Profile::digit_rule(p, n, j.at("L").get<int>(),
                                       j.at("values").get<std::vector<double>>(),
                                       get_or(j, "outside", 0.0));
        }
        if (kind == "norm_rule") {
            check_keys(j, "profile", {"kind", "center", "thresholds", "beyond"});
            Profile::Center center;
            center.numerators.assign(n, 0);
            if (j.contains("center")) {
                std::vector<std::string> coords;
                if (j.at("center").is_string())
                    coords = split_point(j.at("center").get<std::string>());
                else
                    coords = j.at("center").get<std::vector<std::string>>();
                if (coords.size() != static_cast<std::size_t>(n))
                    throw ConfigError("profile center needs " + std::to_string(n) + " coordinates");
                std::vector<std::pair<std::int64_t, int>> parsed;
                for (const auto& c : coords) parsed.push_back(parse_rational(c, p));
                int e = 0;
                for (const auto& q : parsed) e = std::max(e, q.second);
                for (int i = 0; i < n; ++i) {
                    std::int64_t num = parsed[i].first;
                    for (int s = parsed[i].second; s < e; ++s) num *= p;
                    center.numerators[i] = num;
                }
                center.exponent = e;
            }
            std::vector<std::pair<int, double>> th;
            for (const auto& t : j.at("thresholds"))
                th.emplace_back(t.at(0).get<int>(), t.at(1).get<double>());
            return Profile::norm_rule(p, n, center, std::move(th), get_or(j, "beyond", 0.0));
        }
        throw ConfigError("unknown profile kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("profile: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("profile: ") + e.what());
    }
}

State make_initial(const RunConfig& cfg) {
    const InitialSpec& s = cfg.initial;
    const std::size_t M = cfg.grid.size();
    if (s.type == "constant") return State(M, s.value);
    if (s.type == "pattern") {
        const PatternSet ps = make_pattern(s.pattern, cfg.grid);
        State u(M);
        for (std::size_t k = 0; k < M; ++k) u[k] = ps.contains(k) ? s.inside : s.outside;
        return u;
    }
    if (s.type == "profile") return project(make_profile(s.profile, cfg.grid.p, cfg.grid.n), cfg.grid);
    if (s.type == "snapshot") {
        auto [params, u] = read_snapshot(s.snapshot);
        if (!(params == cfg.grid))
            throw ConfigError("snapshot grid " + to_string(params) + " differs from config grid " +
                              to_string(cfg.grid));
        return u;
    }
    if (s.type == "random") {
        UniformStream rng(cfg.seed);
        State u(M);
        for (double& v : u) v = s.low + (s.high - s.low) * rng.next();
        return u;
    }
    throw ConfigError("unknown initial type '" + s.type + "'");
}

UniformStream::UniformStream(std::uint64_t seed) : engine_(seed) {}

double UniformStream::next() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

}  // namespace padr
