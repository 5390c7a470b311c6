#include "padr/commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "padr/approx.hpp"
#include "padr/energy.hpp"
#include "padr/io.hpp"
#include "padr/operator.hpp"
#include "padr/stationary.hpp"

namespace padr {

namespace {

std::filesystem::path output_dir(const RunConfig& cfg) {
    std::filesystem::path dir(cfg.outputs.directory);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write " + path.string());
    return os;
}

std::string grid_json(const GridParams& g) {
    return JsonObject().add("p", g.p).add("n", g.n).add("N", g.N).str();
}

std::string checks_json(const HypothesisReport& report) {
    std::string s = "[";
    for (std::size_t i = 0; i < report.items.size(); ++i) {
        const auto& it = report.items[i];
        if (i) s += ",";
        s += JsonObject().add("name", it.name).add("passed", it.passed).add("detail", it.detail).str();
    }
    return s + "]";
}

std::string band_json(const BandReport& b) {
    std::string failures = "[";
    for (std::size_t i = 0; i < b.failures.size(); ++i) {
        if (i) failures += ",";
        failures += std::to_string(b.failures[i]);
    }
    failures += "]";
    return JsonObject()
        .add("ok", b.ok)
        .add("min_margin", b.min_margin)
        .add("worst_index", b.worst_index)
        .add_raw("failures", failures)
        .str();
}

State stationary_target(const RunConfig& cfg, const UltradiffOperator& op, const Reaction& rx) {
    const PatternSet pattern = make_pattern(cfg.stationary.pattern, cfg.grid);
    return solve(pattern, op, rx, cfg.stationary.h, cfg.stationary.tol, cfg.stationary.max_iter).u_tilde;
}

}  // namespace

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
    const RadialKernel kernel = make_kernel(cfg.kernel, cfg.grid.p, cfg.grid.n);
    const TruncatedKernel tk = truncate(kernel, cfg.grid);
    const UltradiffOperator op = UltradiffOperator::build(cfg.grid, tk);
    const Reaction rx = make_reaction(cfg.reaction);

    HypothesisReport report = check_hypotheses(rx.f, rx.lambda);
    for (auto& item : check_conditions(rx, cfg.stationary.h).items) report.items.push_back(item);
    if (cfg.integrator.contractive) {
        const double dt = step_plan(cfg.integrator.T, cfg.integrator.dt).second;
        report.add("contractive_step", dt < rx.h_max,
                   "dt = " + format_double(dt) + ", h_max = " + format_double(rx.h_max));
    }
    const QMatrixReport q = validate_qmatrix(op);
    report.add("q_matrix", q.ok,
               "min off-diagonal " + format_double(q.min_offdiag) + ", max row residual " +
                   format_double(q.max_row_residual));

    const auto levels = spectrum_levels(op);
    double lo = levels.front().eigenvalue, hi = lo;
    for (const auto& l : levels) {
        lo = std::min(lo, l.eigenvalue);
        hi = std::max(hi, l.eigenvalue);
    }

    JsonObject j;
    j.add_raw("grid", grid_json(cfg.grid))
        .add("j_N", tk.j_N)
        .add("diag_mass", tk.diag_mass)
        .add("lambda", rx.lambda)
        .add("alpha_minus", rx.alpha_minus)
        .add("alpha_plus", rx.alpha_plus)
        .add("delta", rx.delta);
    if (rx.u_minus) j.add("u_minus", *rx.u_minus);
    if (rx.u_plus) j.add("u_plus", *rx.u_plus);
    j.add("lambda_min", lambda_min(rx.f, rx.alpha_minus, rx.alpha_plus))
        .add("h_max", rx.h_max)
        .add("spectrum_min", lo)
        .add("spectrum_max", hi)
        .add("spectrum_bound", 2.0 * tk.j_N)
        .add_raw("checks", checks_json(report))
        .add("ok", report.ok());
    out << j.str() << "\n";
    return report.ok() ? kExitOk : kExitHypothesis;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    const UltradiffOperator op = make_operator(cfg);
    const Reaction rx = make_reaction(cfg.reaction);
    const State u0 = make_initial(cfg);

    IntegratorConfig ic = cfg.integrator;
    ic.keep_snapshots = false;
    if (cfg.target == "stationary") ic.target = stationary_target(cfg, op, rx);
    const Trajectory tr = integrate(u0, op, rx, ic);

    const auto dir = output_dir(cfg);
    if (cfg.outputs.wants("ndjson")) {
        auto os = open_out(dir / "trajectory.ndjson");
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            const double* dist = ic.target ? &tr.sup_distance_to_target[i] : nullptr;
            os << trajectory_record(tr.times[i], tr.min_value[i], tr.max_value[i],
                                    tr.energy_trace[i], dist)
               << "\n";
        }
    }
    if (cfg.outputs.wants("csv")) {
        auto os = open_out(dir / "energy.csv");
        os << "t,interaction,potential,total\n";
        for (std::size_t i = 0; i < tr.times.size(); ++i)
            os << energy_csv_row(tr.times[i], tr.energy_trace[i]) << "\n";
    }
    if (cfg.outputs.wants("snapshot")) write_snapshot((dir / "final.padr").string(), cfg.grid, tr.final_state);

    JsonObject j;
    j.add("method", to_string(ic.method))
        .add("steps", tr.steps)
        .add("dt", tr.dt)
        .add("T", tr.times.back())
        .add("final_min", tr.min_value.back())
        .add("final_max", tr.max_value.back())
        .add("final_energy", tr.energy_trace.back().total)
        .add("max_energy_increase", tr.max_energy_increase);
    if (ic.target) j.add("sup_dist_to_target", tr.sup_distance_to_target.back());
    out << j.str() << "\n";
    return kExitOk;
}

int cmd_stationary(const RunConfig& cfg, std::ostream& out) {
    const UltradiffOperator op = make_operator(cfg);
    const Reaction rx = make_reaction(cfg.reaction);
    const HypothesisReport conditions = check_conditions(rx, cfg.stationary.h);
    if (const CheckItem* bad = conditions.first_failure())
        throw HypothesisError("stationary run: " + bad->name + " fails (" + bad->detail + ")");

    const PatternSet pattern = make_pattern(cfg.stationary.pattern, cfg.grid);
    const StationaryResult res =
        solve(pattern, op, rx, cfg.stationary.h, cfg.stationary.tol, cfg.stationary.max_iter);
    const BandReport bands = verify_bands(res.u_tilde, pattern, rx);

    const auto dir = output_dir(cfg);
    write_snapshot((dir / "stationary.padr").string(), cfg.grid, res.u_tilde);
    const std::string meta = JsonObject()
                                 .add_raw("grid", grid_json(cfg.grid))
                                 .add("residual", res.residual)
                                 .add("iterations", res.iterations)
                                 .add("contraction_rate", res.contraction_rate)
                                 .add("pattern_size", pattern.members().size())
                                 .add_raw("bands", band_json(bands))
                                 .str();
    open_out(dir / "stationary.json") << meta << "\n";
    out << meta << "\n";
    if (!bands.ok) throw HypothesisError("stationary state leaves its bands: " + bands.detail);
    return kExitOk;
}

int cmd_spectrum(const RunConfig& cfg, std::ostream& out, bool dense) {
    const UltradiffOperator op = make_operator(cfg);
    const std::vector<double> ev = spectrum_closed_form(op);
    const auto dir = output_dir(cfg);
    {
        auto os = open_out(dir / "spectrum.csv");
        for (std::size_t i = 0; i < ev.size(); ++i) os << (i ? "," : "") << format_double(ev[i]);
        os << "\n";
    }
    if (dense) {
        if (op.size() > UltradiffOperator::kDenseLimit)
            throw ConfigError("dense operator output needs M <= " +
                              std::to_string(UltradiffOperator::kDenseLimit));
        auto os = open_out(dir / "operator.csv");
        write_dense_csv(op, os);
    }
    out << JsonObject()
               .add("size", op.size())
               .add("j_N", op.j_N())
               .add("min", ev.front())
               .add("max", ev.back())
               .add("distinct", spectrum_levels(op).size())
               .str()
        << "\n";
    return kExitOk;
}

int cmd_converge(const RunConfig& cfg, std::ostream& out) {
    if (cfg.converge.profile.is_null()) throw ConfigError("converge needs a profile");
    const Profile profile = make_profile(cfg.converge.profile, cfg.grid.p, cfg.grid.n);
    const RadialKernel kernel = make_kernel(cfg.kernel, cfg.grid.p, cfg.grid.n);
    const Reaction rx = make_reaction(cfg.reaction);
    IntegratorConfig ic = cfg.integrator;
    ic.keep_snapshots = false;
    ic.target.reset();
    const auto rows = convergence_study(profile, kernel, rx, ic, cfg.converge.N_list);

    const auto dir = output_dir(cfg);
    auto os = open_out(dir / "converge.csv");
    os << "N_coarse,N_fine,sup_gap,semigroup_gap,runtime_ms\n";
    std::string list = "[";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        os << r.N_coarse << "," << r.N_fine << "," << format_double(r.sup_gap) << ","
           << format_double(r.semigroup_gap) << "," << format_double(r.runtime_ms) << "\n";
        if (i) list += ",";
        list += JsonObject()
                    .add("N_coarse", r.N_coarse)
                    .add("N_fine", r.N_fine)
                    .add("sup_gap", r.sup_gap)
                    .add("semigroup_gap", r.semigroup_gap)
                    .str();
    }
    out << JsonObject().add_raw("rows", list + "]").str() << "\n";
    return kExitOk;
}

int run_command(const std::string& name, const RunConfig& cfg, std::ostream& out, bool dense) {
    if (name == "validate") return cmd_validate(cfg, out);
    if (name == "simulate") return cmd_simulate(cfg, out);
    if (name == "stationary") return cmd_stationary(cfg, out);
    if (name == "spectrum") return cmd_spectrum(cfg, out, dense);
    if (name == "converge") return cmd_converge(cfg, out);
    throw ConfigError("unknown command '" + name + "'");
}

}  // namespace padr
