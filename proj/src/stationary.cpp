#include "padr/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace padr {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// A u + lambda f(u)
State defect(const State& u, const UltradiffOperator& op, const Reaction& rx) {
    State out = matvec_fast(op, u);
    for (std::size_t k = 0; k < u.size(); ++k) out[k] += rx.lambda * rx.f_at(u[k]);
    return out;
}

double sup_norm(const State& u) {
    double m = 0.0;
    for (double v : u) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

PatternSet::PatternSet(GridParams params, std::vector<std::size_t> members)
    : params_(params), members_(std::move(members)) {
    params_.validate();
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    mask_.assign(params_.size(), 0);
    for (std::size_t m : members_) {
        if (m >= mask_.size())
            throw std::out_of_range("pattern member " + std::to_string(m) + " outside the grid");
        mask_[m] = 1;
    }
}

PatternSet PatternSet::all(const GridParams& params) {
    std::vector<std::size_t> m(params.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = i;
    return PatternSet(params, std::move(m));
}

PatternSet PatternSet::none(const GridParams& params) { return PatternSet(params, {}); }

PatternSet PatternSet::ball(const Grid& grid, std::size_t center, int r) {
    std::vector<std::size_t> m;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Valuation v = grid.valuation(center, i);
        if (v.is_infinite() || -v.value() <= r) m.push_back(i);
    }
    return PatternSet(grid.params(), std::move(m));
}

State contraction_map(const State& u, const UltradiffOperator& op, const Reaction& rx, double h) {
    State d = defect(u, op, rx);
    for (std::size_t k = 0; k < u.size(); ++k) d[k] = u[k] - h * d[k];
    return d;
}

double residual(const State& u, const UltradiffOperator& op, const Reaction& rx) {
    if (u.size() != op.size()) throw std::invalid_argument("residual: state length mismatch");
    return sup_norm(defect(u, op, rx));
}

StationaryResult solve(const PatternSet& pattern, const UltradiffOperator& op, const Reaction& rx,
                       double h, double tol, std::size_t max_iter) {
    if (!(pattern.params() == op.params()))
        throw std::invalid_argument("pattern and operator live on different grids");
    if (!(tol > 0.0)) throw ConfigError("stationary tolerance must be > 0");
    const HypothesisReport conds = check_conditions(rx, h);
    if (const CheckItem* bad = conds.first_failure())
        throw HypothesisError("stationary solve precondition '" + bad->name +
                              "' fails: " + bad->detail);

    const std::size_t M = op.size();
    State u(M);
    for (std::size_t k = 0; k < M; ++k) u[k] = pattern.contains(k) ? *rx.u_plus : *rx.u_minus;

    StationaryResult res;
    double prev_step = 0.0;
    const double noise = 1e3 * std::numeric_limits<double>::epsilon();
    for (std::size_t it = 0; it < max_iter; ++it) {
        const State d = defect(u, op, rx);
        const double r = sup_norm(d);
        if (r <= tol) {
            res.u_tilde = std::move(u);
            res.iterations = it;
            res.residual = r;
            return res;
        }
        State next(M);
        double step = 0.0;
        for (std::size_t k = 0; k < M; ++k) {
            next[k] = u[k] - h * d[k];
            step = std::max(step, std::abs(next[k] - u[k]));
        }
        const BandReport bands = verify_bands(next, pattern, rx);
        if (!bands.ok)
            throw AbortError("iterate " + std::to_string(it + 1) + " left the band set: " +
                             bands.detail);
        double rate = 0.0;
        if (prev_step > 0.0) {
            rate = step / prev_step;
            if (step > noise) res.contraction_rate = std::max(res.contraction_rate, rate);
        }
        u.swap(next);
        if (prev_step > 0.0 && rate < 1.0 && step <= tol * (1.0 - rate)) {
            res.u_tilde = std::move(u);
            res.iterations = it + 1;
            res.residual = residual(res.u_tilde, op, rx);
            return res;
        }
        prev_step = step;
    }
    throw AbortError("stationary solve exceeded " + std::to_string(max_iter) +
                     " iterations; observed rate " + fmt(res.contraction_rate));
}

BandReport verify_bands(const State& u, const PatternSet& pattern, const Reaction& rx,
                        double slack) {
    if (u.size() != pattern.size()) throw std::invalid_argument("bands: state length mismatch");
    BandReport rep;
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < u.size(); ++k) {
        const bool in = pattern.contains(k);
        const double margin = in ? u[k] - rx.alpha_plus : rx.alpha_minus - u[k];
        if (margin < rep.min_margin) {
            rep.min_margin = margin;
            rep.worst_index = k;
        }
        const bool inside_unit = std::abs(u[k]) <= 1.0 + slack;
        if (margin < -slack || !inside_unit) {
            if (rep.ok)
                rep.detail = "u[" + std::to_string(k) + "] = " + fmt(u[k]) + " outside " +
                             (in ? "[alpha_plus, 1]" : "[-1, alpha_minus]");
            rep.ok = false;
            rep.failures.push_back(k);
        }
    }
    if (u.empty()) rep.min_margin = 0.0;
    return rep;
}

}  // namespace padr
