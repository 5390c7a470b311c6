#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "padr/approx.hpp"
#include "padr/dynamics.hpp"
#include "padr/energy.hpp"
#include "padr/operator.hpp"
#include "padr/parallel.hpp"
#include "padr/stationary.hpp"

#ifndef PADR_CLI_PATH
#define PADR_CLI_PATH "padr"
#endif

using namespace padr;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool ok = true;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

const std::vector<GridParams> kGrids = {
    {2, 1, 1}, {2, 1, 2}, {2, 1, 3}, {2, 1, 4}, {2, 1, 5}, {2, 1, 6}, {3, 1, 1},
    {3, 1, 2}, {3, 1, 3}, {5, 1, 1}, {5, 1, 2}, {7, 1, 1}, {7, 1, 2}, {2, 2, 1},
    {2, 2, 2}, {2, 2, 3}, {3, 2, 1}, {2, 3, 1}, {2, 3, 2}, {11, 1, 1},
};

RadialKernel random_kernel(std::mt19937_64& rng, int p, int n, int family) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (family % 3) {
        case 0: {
            std::map<int, double> levels;
            for (int r = -3; r <= 3; ++r)
                if (unit(rng) < 0.7) levels[r] = unit(rng);
            if (levels.empty()) levels[0] = 1.0;
            return normalize(RadialKernel::table(p, n, levels));
        }
        case 1:
            return normalize(RadialKernel::uniform_ball(p, n, std::uniform_int_distribution<int>(-2, 2)(rng)));
        default:
            return normalize(RadialKernel::exp_landscape(p, n, -0.5 + 3.0 * unit(rng)));
    }
}

UltradiffOperator build(const GridParams& g, const RadialKernel& J) {
    return UltradiffOperator::build(g, truncate(J, g));
}

State random_state(std::mt19937_64& rng, std::size_t M, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> val(lo, hi);
    State u(M);
    for (double& v : u) v = val(rng);
    return u;
}

IntegratorConfig config(Method m, double dt, double T, int record_every = 1, bool snapshots = false) {
    IntegratorConfig c;
    c.method = m;
    c.dt = dt;
    c.T = T;
    c.record_every = record_every;
    c.keep_snapshots = snapshots;
    return c;
}

UltradiffOperator canonical_op() {
    return build({2, 1, 1}, normalize(RadialKernel::table(2, 1, {{0, 1.0}, {1, 0.5}})));
}

// ---------------------------------------------------------------- criteria

Outcome qmatrix_and_semigroup() {
    std::mt19937_64 rng(1001);
    double worst_off = -1.0, worst_row = 0.0, worst_entry = 1.0, worst_sum = 0.0;
    std::size_t max_M = 0;
    for (int i = 0; i < 50; ++i) {
        const GridParams g = kGrids[i % kGrids.size()];
        const UltradiffOperator op = build(g, random_kernel(rng, g.p, g.n, i));
        const std::size_t M = op.size();
        max_M = std::max(max_M, M);
        const double jn = op.j_N();
        for (std::size_t k = 0; k < M; ++k) {
            double s = 0.0;
            for (std::size_t c = 0; c < M; ++c) {
                const double e = op.entry(k, c);
                s += e;
                if (c != k) worst_off = std::max(worst_off, e);
            }
            worst_row = std::max(worst_row, std::abs(s) / jn);
        }
        // Columns of e^{-tA}: every column up to M = 1024, a random sample beyond;
        // the matrix is symmetric so columns are rows. Row sums use e^{-tA} 1.
        std::vector<std::size_t> cols;
        if (M <= 1024) {
            for (std::size_t c = 0; c < M; ++c) cols.push_back(c);
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, M - 1);
            for (int s = 0; s < 128; ++s) cols.push_back(pick(rng));
        }
        for (double t : {0.1, 1.0, 10.0}) {
            for (double v : semigroup_apply(op, State(M, 1.0), t)) worst_sum = std::max(worst_sum, std::abs(v - 1.0));
            for (std::size_t c : cols) {
                State e(M, 0.0);
                e[c] = 1.0;
                for (double v : semigroup_apply(op, e, t)) worst_entry = std::min(worst_entry, v);
            }
            if (M <= 256) {
                const Eigen::MatrixXd P = oracle::expm_sym(dense_matrix(op), t);
                worst_entry = std::min(worst_entry, P.minCoeff());
                worst_sum = std::max(worst_sum, (P.rowwise().sum().array() - 1.0).abs().maxCoeff());
            }
        }
    }
    Outcome o;
    o.ok = worst_off <= 0.0 && worst_row <= 1e-12 && worst_entry >= -1e-12 && worst_sum <= 1e-10;
    o.detail = "max M " + std::to_string(max_M) + ", max off-diagonal of A " + fmt(worst_off) +
               ", max |row sum|/j_N " + fmt(worst_row) + ", min entry of e^{-tA} " + fmt(worst_entry) +
               ", max |row sum - 1| " + fmt(worst_sum);
    return o;
}

Outcome spectrum_bound() {
    Outcome o;
    const auto close = [](const std::vector<double>& a, const std::vector<double>& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t k = 0; k < a.size(); ++k)
            if (std::abs(a[k] - b[k]) > 1e-12) return false;
        return true;
    };
    const bool table_ok = close(spectrum(canonical_op()), {0.0, 1.0, 1.5, 1.5});
    const bool ball_ok =
        close(spectrum(build({2, 1, 1}, normalize(RadialKernel::uniform_ball(2, 1, 1)))), {0.0, 1.0, 1.0, 1.0});
    std::mt19937_64 rng(1002);
    double worst = 0.0;
    int dense_count = 0;
    for (int i = 0; i < 40; ++i) {
        const GridParams g = kGrids[i % kGrids.size()];
        const UltradiffOperator op = build(g, random_kernel(rng, g.p, g.n, i));
        const std::vector<double> ev = op.size() <= 256 ? spectrum(op) : spectrum_closed_form(op);
        if (op.size() <= 256) ++dense_count;
        const double bound = 2.0 * op.j_N();
        for (double l : ev) worst = std::max({worst, -l, l - bound});
    }
    o.ok = table_ok && ball_ok && worst <= 1e-10;
    o.detail = std::string("Table ") + (table_ok ? "ok" : "wrong") + ", UniformBall " + (ball_ok ? "ok" : "wrong") +
               ", worst excursion outside [0, 2 j_N] " + fmt(worst) + " over 40 kernels (" +
               std::to_string(dense_count) + " dense)";
    return o;
}

double time_matvec(const UltradiffOperator& op, const State& u, bool dense) {
    std::vector<double> samples;
    for (int rep = 0; rep < 7; ++rep) {
        int calls = 0;
        const auto t0 = Clock::now();
        double elapsed = 0.0;
        do {
            const State y = dense ? matvec_dense(op, u) : matvec_fast(op, u);
            if (y.empty()) std::abort();
            ++calls;
            elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
        } while (elapsed < 0.05);
        samples.push_back(elapsed / calls);
    }
    std::sort(samples.begin(), samples.end());
    return samples[samples.size() / 2];
}

Outcome fast_operator() {
    std::mt19937_64 rng(1003);
    double worst = 0.0;
    for (int i = 0; i < static_cast<int>(kGrids.size()); ++i) {
        const GridParams g = kGrids[i];
        const UltradiffOperator op = build(g, random_kernel(rng, g.p, g.n, i));
        const State u = random_state(rng, op.size());
        const State a = matvec_fast(op, u);
        const State b = matvec_dense(op, u);
        double scale = 0.0;
        for (double v : b) scale = std::max(scale, std::abs(v));
        worst = std::max(worst, oracle::sup_diff(a, b) / std::max(scale, 1e-300));
    }
    const int threads = thread_count();
    set_thread_count(1);
    const RadialKernel J = normalize(RadialKernel::exp_landscape(2, 1, 1.0));
    const UltradiffOperator small = build({2, 1, 5}, J);
    const UltradiffOperator large = build({2, 1, 6}, J);
    const State us = random_state(rng, small.size());
    const State ul = random_state(rng, large.size());
    const double fast_ratio = time_matvec(large, ul, false) / time_matvec(small, us, false);
    const double dense_ratio = time_matvec(large, ul, true) / time_matvec(small, us, true);
    set_thread_count(threads);
    Outcome o;
    o.ok = worst <= 1e-12 && fast_ratio <= 6.0;
    o.detail = "max relative fast/dense difference " + fmt(worst) + ", timing ratio M=4096/1024 fast " +
               fmt(fast_ratio) + " (dense " + fmt(dense_ratio) + ")";
    return o;
}

Outcome gradient_energy() {
    std::mt19937_64 rng(1004);
    double worst_fd = 0.0;
    for (int i = 0; i < 20; ++i) {
        GridParams g = kGrids[i % kGrids.size()];
        if (g.size() > 256) g = {2, 1, 3};
        const UltradiffOperator op = build(g, random_kernel(rng, g.p, g.n, i));
        const Reaction rx = Reaction::make_cubic(6.0);
        const State u = random_state(rng, op.size(), -1.2, 1.2);
        const State grad = gradient(u, op, rx);
        const State fd = oracle::gradient_fd([&](const State& v) { return energy(v, op, rx).total; }, u, 1e-5);
        double scale = 0.0;
        for (double v : grad) scale = std::max(scale, std::abs(v));
        worst_fd = std::max(worst_fd, oracle::sup_diff(grad, fd) / std::max(scale, 1e-300));
    }
    double worst_increase = 0.0;
    std::size_t trajectories = 0;
    for (int i = 0; i < 12; ++i) {
        GridParams g = kGrids[i % kGrids.size()];
        if (g.size() > 256) g = {3, 1, 2};
        const UltradiffOperator op = build(g, random_kernel(rng, g.p, g.n, i));
        const Reaction rx = Reaction::make_cubic(6.0);
        const Method m = i % 3 == 0 ? Method::ExplicitEuler : (i % 3 == 1 ? Method::RK4 : Method::PicardMild);
        const Trajectory tr = integrate(random_state(rng, op.size()), op, rx, config(m, 0.02, 5.0));
        for (std::size_t k = 1; k < tr.energy_trace.size(); ++k)
            worst_increase = std::max(worst_increase, tr.energy_trace[k].total - tr.energy_trace[k - 1].total);
        ++trajectories;
    }
    Outcome o;
    o.ok = worst_fd <= 1e-6 && worst_increase <= 1e-10;
    o.detail = "max relative gradient/finite-difference gap " + fmt(worst_fd) + " over 20 states, max per-step energy increase " +
               fmt(worst_increase) + " over " + std::to_string(trajectories) + " trajectories";
    return o;
}

Outcome stationary_patterns() {
    const UltradiffOperator op = canonical_op();
    const Reaction rx = Reaction::make_cubic(6.0);
    const Eigen::MatrixXd A = dense_matrix(op);
    double worst_res = 0.0, worst_newton = 0.0;
    int band_failures = 0;
    for (unsigned mask = 0; mask < 16; ++mask) {
        std::vector<std::size_t> members;
        State guess(4);
        for (std::size_t k = 0; k < 4; ++k) {
            if (mask & (1u << k)) members.push_back(k);
            guess[k] = (mask & (1u << k)) ? 0.9 : -0.9;
        }
        const PatternSet pattern(op.params(), members);
        const StationaryResult res = solve(pattern, op, rx, 0.0625, 1e-12);
        worst_res = std::max({worst_res, res.residual, residual(res.u_tilde, op, rx)});
        if (!verify_bands(res.u_tilde, pattern, rx).ok) ++band_failures;
        worst_newton = std::max(worst_newton, oracle::sup_diff(oracle::newton_stationary(A, rx.f, 6.0, guess), res.u_tilde));
    }
    Outcome o;
    o.ok = worst_res <= 1e-10 && band_failures == 0 && worst_newton <= 1e-8;
    o.detail = "16 patterns: max residual " + fmt(worst_res) + ", band failures " + std::to_string(band_failures) +
               ", max Newton gap " + fmt(worst_newton);
    return o;
}

Outcome comparison() {
    std::mt19937_64 rng(1006);
    const UltradiffOperator op = build({2, 1, 3}, normalize(RadialKernel::exp_landscape(2, 1, 1.0)));
    const Reaction rx = Reaction::make_cubic(6.0);
    double worst = std::numeric_limits<double>::infinity();
    int failures = 0;
    std::string advisory;
    for (int i = 0; i < 100; ++i) {
        State a = random_state(rng, op.size());
        State b = random_state(rng, op.size());
        for (std::size_t k = 0; k < a.size(); ++k)
            if (a[k] < b[k]) std::swap(a[k], b[k]);
        const ComparisonReport rep = comparison_check(a, b, op, rx, config(Method::RK4, 0.01, 10.0), 1e-9);
        worst = std::min(worst, rep.worst_margin);
        if (!rep.ok) ++failures;
        if (!rep.advisory.empty()) advisory = rep.advisory;
    }
    Outcome o;
    o.ok = failures == 0 && worst >= -1e-9 && advisory.empty();
    o.detail = "100 ordered pairs on M = 64: worst margin " + fmt(worst) + ", failures " + std::to_string(failures) +
               (advisory.empty() ? "" : ", advisory: " + advisory);
    return o;
}

Outcome envelopes() {
    const UltradiffOperator op = canonical_op();
    const Reaction rx = Reaction::make_cubic(6.0);
    const State tilde = solve(PatternSet({2, 1, 1}, {0, 1}), op, rx).u_tilde;
    const double eps = 0.05, beta = 0.3;
    std::vector<State> starts;
    for (double s : {1.0, -1.0}) {
        State u = tilde;
        for (double& v : u) v += s * eps;
        starts.push_back(u);
    }
    std::mt19937_64 rng(1007);
    for (int i = 0; i < 8; ++i) {
        State u = tilde;
        const State d = random_state(rng, 4, -eps, eps);
        for (std::size_t k = 0; k < 4; ++k) u[k] += d[k];
        starts.push_back(u);
    }
    std::vector<double> times;
    for (int k = 0; k <= 500; ++k) times.push_back(0.1 * k);
    const EnvelopeCertificate cert = certify_envelope(tilde, op, rx, eps, beta, times);
    double worst_outside = 0.0, worst_final = 0.0;
    for (const State& u0 : starts) {
        const Trajectory tr = integrate(u0, op, rx, config(Method::RK4, 0.01, 50.0, 10, true));
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            const auto [up, low] = envelope_bounds(tilde, eps, beta, tr.times[i]);
            for (std::size_t k = 0; k < 4; ++k)
                worst_outside = std::max({worst_outside, tr.snapshots[i][k] - up[k], low[k] - tr.snapshots[i][k]});
        }
        worst_final = std::max(worst_final, oracle::sup_diff(tr.final_state, tilde));
    }
    Outcome o;
    o.ok = cert.ok && worst_outside <= 0.0 && worst_final <= 1e-6;
    o.detail = "certificate " + std::string(cert.ok ? "ok" : "failed") + " (worst defect " + fmt(cert.worst_defect) +
               "), max envelope excess " + fmt(worst_outside) + ", max |u(50) - u~| " + fmt(worst_final) + " over " +
               std::to_string(starts.size()) + " starts";
    return o;
}

Outcome finite_approximation() {
    IntegratorConfig cfg = config(Method::RK4, 0.01, 5.0, 100);
    const Profile radial =
        Profile::norm_rule(2, 1, {}, {{-3, 1.0}, {-2, 0.5}, {-1, 0.0}, {0, -0.5}, {3, 0.25}}, -1.0);
    const auto rows = convergence_study(radial, normalize(RadialKernel::exp_landscape(2, 1, 1.0)),
                                        Reaction::make_cubic(6.0), cfg, {2, 3, 4});
    bool decreasing = rows.size() == 2;
    for (std::size_t i = 1; i < rows.size(); ++i) decreasing = decreasing && rows[i].sup_gap < rows[i - 1].sup_gap;
    const RadialKernel compact = normalize(RadialKernel::table(2, 1, {{-1, 0.5}, {0, 1.0}, {1, 0.5}}));
    const Profile level = Profile::digit_rule(2, 1, 1, {0.9, -0.3, 0.2, -0.8}, 0.0);
    double worst_exact = 0.0;
    for (const auto& r : convergence_study(level, compact, Reaction::make_cubic(6.0), cfg, {1, 2, 3, 4}))
        worst_exact = std::max({worst_exact, r.sup_gap, r.semigroup_gap});
    Outcome o;
    o.ok = decreasing && worst_exact <= 1e-12;
    o.detail = "gaps";
    for (const auto& r : rows) o.detail += " " + fmt(r.sup_gap);
    o.detail += std::string(decreasing ? " (strictly decreasing)" : " (not strictly decreasing)") +
                ", compact-support gaps <= " + fmt(worst_exact);
    return o;
}

Outcome invariant_interval() {
    std::mt19937_64 rng(1009);
    double lo = 1.0, hi = -1.0;
    for (int i = 0; i < 50; ++i) {
        GridParams g = kGrids[i % kGrids.size()];
        if (g.size() > 1024) g = {2, 1, 4};
        const UltradiffOperator op = build(g, random_kernel(rng, g.p, g.n, i));
        const Reaction rx = Reaction::make_cubic(6.0);
        const Method m = i % 3 == 0 ? Method::ExplicitEuler : (i % 3 == 1 ? Method::RK4 : Method::PicardMild);
        const Trajectory tr = integrate(random_state(rng, op.size()), op, rx, config(m, 0.02, 5.0));
        lo = std::min(lo, *std::min_element(tr.min_value.begin(), tr.min_value.end()));
        hi = std::max(hi, *std::max_element(tr.max_value.begin(), tr.max_value.end()));
    }
    Outcome o;
    o.ok = lo >= -1.0 - 1e-9 && hi <= 1.0 + 1e-9;
    o.detail = "50 runs: range [" + fmt(lo) + ", " + fmt(hi) + "]";
    return o;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

Outcome determinism() {
    const auto root = std::filesystem::temp_directory_path() / "padr_acceptance_determinism";
    std::filesystem::remove_all(root);
    std::filesystem::create_directories(root);
    const auto cfg = root / "config.json";
    std::ofstream(cfg) << R"({
  "grid": {"p": 2, "n": 1, "N": 6},
  "kernel": {"family": "exp_landscape", "gamma": 1.0},
  "reaction": {"f": "cubic", "lambda": 6},
  "initial": {"type": "random", "low": -1, "high": 1},
  "integrator": {"method": "rk4", "dt": 0.01, "T": 2, "record_every": 10},
  "seed": 20261016
})";
    std::vector<std::string> runs;
    std::string failure;
    for (int threads : {1, 1, 4, 4}) {
        const auto dir = root / ("run" + std::to_string(runs.size()));
        const std::string cmd = "PADR_THREADS=" + std::to_string(threads) + " \"" PADR_CLI_PATH "\" simulate \"" +
                                cfg.string() + "\" -o \"" + dir.string() + "\" > \"" + (root / "stdout.txt").string() +
                                "\"";
        if (std::system(cmd.c_str()) != 0) failure = "command failed: " + cmd;
        std::string bytes = slurp(root / "stdout.txt");
        for (const char* name : {"trajectory.ndjson", "energy.csv", "final.padr"}) {
            const auto path = dir / name;
            if (!std::filesystem::exists(path)) failure = "missing " + path.string();
            bytes += "\n--" + std::string(name) + "--\n" + slurp(path);
        }
        runs.push_back(bytes);
    }
    std::filesystem::remove_all(root);
    Outcome o;
    const bool same = std::all_of(runs.begin(), runs.end(), [&](const std::string& r) { return r == runs.front(); });
    o.ok = failure.empty() && same;
    o.detail = failure.empty() ? (same ? "4 runs (PADR_THREADS 1, 1, 4, 4) byte-identical, " +
                                             std::to_string(runs.front().size()) + " bytes each"
                                       : "outputs differ between runs")
                               : failure;
    return o;
}

struct Criterion {
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {"qmatrix-semigroup", 60, qmatrix_and_semigroup},
        {"spectrum-bound", 5, spectrum_bound},
        {"fast-operator", 120, fast_operator},
        {"gradient-energy", 30, gradient_energy},
        {"stationary-patterns", 30, stationary_patterns},
        {"comparison", 120, comparison},
        {"envelopes", 30, envelopes},
        {"finite-approximation", 300, finite_approximation},
        {"invariant-interval", 60, invariant_interval},
        {"determinism", 60, determinism},
    };
    std::size_t first = 0, last = criteria.size();
    if (argc > 1) {
        const int only = std::atoi(argv[1]);
        if (only < 1 || only > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "usage: %s [criterion 1..%zu]\n", argv[0], criteria.size());
            return 2;
        }
        first = static_cast<std::size_t>(only - 1);
        last = first + 1;
    }
    int failed = 0;
    for (std::size_t i = first; i < last; ++i) {
        const auto& c = criteria[i];
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        const bool in_time = secs <= c.limit_s;
        const bool pass = o.ok && in_time;
        if (!pass) ++failed;
        std::printf("AC%zu %s %s: %s; %.2f s (limit %.0f s)%s\n", i + 1, pass ? "PASS" : "FAIL", c.name,
                    o.detail.c_str(), secs, c.limit_s, in_time ? "" : " over time");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(last - first) - failed, last - first);
    return failed == 0 ? 0 : 1;
}
