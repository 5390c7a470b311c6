#include "padr/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace padr {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int sign_at(const Polynomial& q, double x) {
    if (q.is_zero()) return 0;
    if (std::isinf(x)) {
        const double lead = q.coeffs().back();
        int s = lead > 0 ? 1 : -1;
        if (x < 0 && q.degree() % 2 == 1) s = -s;
        return s;
    }
    const double v = q(x);
    return v > 0 ? 1 : (v < 0 ? -1 : 0);
}

std::vector<Polynomial> sturm_chain(const Polynomial& p) {
    std::vector<Polynomial> chain{p};
    if (p.degree() < 1) return chain;
    chain.push_back(p.derivative());
    while (chain.back().degree() > 0) {
        const auto& a = chain[chain.size() - 2];
        const auto& b = chain.back();
        Polynomial r = a.divmod(b).second;
        if (r.is_zero()) break;
        chain.push_back(r * -1.0);
    }
    return chain;
}

int sign_changes(const std::vector<Polynomial>& chain, double x) {
    int changes = 0, last = 0;
    for (const auto& q : chain) {
        const int s = sign_at(q, x);
        if (s == 0) continue;
        if (last != 0 && s != last) ++changes;
        last = s;
    }
    return changes;
}

// Squarefree part p / gcd(p, p'); the gcd is the last element of the chain.
Polynomial squarefree(const Polynomial& p) {
    if (p.degree() < 2) return p;
    const auto chain = sturm_chain(p);
    const Polynomial& g = chain.back();
    if (g.degree() < 1) return p;
    return p.divmod(g).first;
}

double bisect(const Polynomial& q, double lo, double hi) {
    int slo = sign_at(q, lo);
    if (sign_at(q, hi) == 0) return hi;
    while (slo == 0) {
        lo = std::nextafter(lo, hi);
        slo = sign_at(q, lo);
    }
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const int s = sign_at(q, mid);
        if (s == 0) return mid;
        if (s == slo)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

void isolate(const Polynomial& q, const std::vector<Polynomial>& chain, double lo, double hi,
             int depth, std::vector<double>& out) {
    const int k = sign_changes(chain, lo) - sign_changes(chain, hi);
    if (k <= 0) return;
    if (k == 1 || depth > 200) {
        out.push_back(bisect(q, lo, hi));
        return;
    }
    const double mid = 0.5 * (lo + hi);
    isolate(q, chain, lo, mid, depth + 1, out);
    isolate(q, chain, mid, hi, depth + 1, out);
}

}  // namespace

// --------------------------------------------------------------- Polynomial

Polynomial::Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

void Polynomial::trim() {
    double scale = 0.0;
    for (double v : c_) scale = std::max(scale, std::abs(v));
    while (!c_.empty() && std::abs(c_.back()) <= 1e-13 * scale) c_.pop_back();
    if (scale == 0.0) c_.clear();
}

double Polynomial::operator()(double x) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Polynomial Polynomial::derivative() const {
    if (c_.size() <= 1) return Polynomial();
    std::vector<double> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
    return Polynomial(std::move(d));
}

Polynomial Polynomial::antiderivative(double c0) const {
    std::vector<double> a(c_.size() + 1, 0.0);
    a[0] = c0;
    for (std::size_t i = 0; i < c_.size(); ++i) a[i + 1] = c_[i] / static_cast<double>(i + 1);
    return Polynomial(std::move(a));
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
    return Polynomial(std::move(r));
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * -1.0; }

Polynomial Polynomial::operator*(double s) const {
    std::vector<double> r = c_;
    for (double& v : r) v *= s;
    return Polynomial(std::move(r));
}

std::pair<Polynomial, Polynomial> Polynomial::divmod(const Polynomial& d) const {
    if (d.is_zero()) throw std::invalid_argument("polynomial division by zero");
    if (degree() < d.degree()) return {Polynomial(), *this};
    std::vector<double> rem = c_;
    std::vector<double> quo(c_.size() - d.c_.size() + 1, 0.0);
    const double lead = d.c_.back();
    for (std::size_t k = quo.size(); k-- > 0;) {
        const double coef = rem[k + d.c_.size() - 1] / lead;
        quo[k] = coef;
        for (std::size_t j = 0; j < d.c_.size(); ++j) rem[k + j] -= coef * d.c_[j];
        rem[k + d.c_.size() - 1] = 0.0;
    }
    rem.resize(d.c_.size() - 1);
    // Drop round-off relative to the dividend.
    double scale = 0.0;
    for (double v : c_) scale = std::max(scale, std::abs(v));
    for (double& v : rem)
        if (std::abs(v) <= 1e-12 * scale) v = 0.0;
    return {Polynomial(std::move(quo)), Polynomial(std::move(rem))};
}

int Polynomial::count_roots(double a, double b) const {
    if (is_zero()) throw std::invalid_argument("zero polynomial has infinitely many roots");
    const auto chain = sturm_chain(*this);
    return sign_changes(chain, a) - sign_changes(chain, b);
}

std::vector<double> Polynomial::roots(double a, double b) const {
    if (is_zero()) throw std::invalid_argument("zero polynomial has infinitely many roots");
    std::vector<double> out;
    if (degree() < 1 || !(a <= b)) return out;
    const Polynomial q = squarefree(*this);
    const auto chain = sturm_chain(q);
    if (sign_at(q, a) == 0) out.push_back(a);
    isolate(q, chain, a, b, 0, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<double> Polynomial::real_roots() const {
    if (is_zero()) throw std::invalid_argument("zero polynomial has infinitely many roots");
    if (degree() < 1) return {};
    double bound = 0.0;
    for (std::size_t i = 0; i + 1 < c_.size(); ++i)
        bound = std::max(bound, std::abs(c_[i] / c_.back()));
    bound += 1.0;
    return roots(-bound, bound);
}

double Polynomial::max_on(double a, double b) const {
    double m = std::max((*this)(a), (*this)(b));
    const Polynomial d = derivative();
    if (!d.is_zero())
        for (double x : d.roots(a, b)) m = std::max(m, (*this)(x));
    return m;
}

double Polynomial::min_on(double a, double b) const { return -((*this) * -1.0).max_on(a, b); }

// ---------------------------------------------------------------- reports

bool HypothesisReport::ok() const {
    return std::all_of(items.begin(), items.end(), [](const CheckItem& c) { return c.passed; });
}

const CheckItem* HypothesisReport::first_failure() const {
    for (const auto& c : items)
        if (!c.passed) return &c;
    return nullptr;
}

void HypothesisReport::add(std::string name, bool passed, std::string detail) {
    items.push_back({std::move(name), passed, std::move(detail)});
}

HypothesisReport check_hypotheses(const Polynomial& f, std::optional<double> lambda) {
    HypothesisReport rep;
    if (f.is_zero()) {
        rep.add("zeros", false, "f is identically zero");
        return rep;
    }
    rep.add("smooth", true, "polynomial of degree " + std::to_string(f.degree()));

    double scale = 0.0;
    for (double v : f.coeffs()) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * scale;
    const auto zs = f.real_roots();
    const bool at_points = std::abs(f(-1.0)) <= tol && std::abs(f(0.0)) <= tol &&
                           std::abs(f(1.0)) <= tol;
    rep.add("zeros", at_points && zs.size() == 3,
            "f has " + std::to_string(zs.size()) + " distinct real zeros; f(-1) = " +
                fmt(f(-1.0)) + ", f(0) = " + fmt(f(0.0)) + ", f(1) = " + fmt(f(1.0)));

    const Polynomial df = f.derivative();
    const double dm = df(-1.0), d0 = df(0.0), dp = df(1.0);
    rep.add("slopes", dm > 0.0 && d0 < 0.0 && dp > 0.0,
            "f'(-1) = " + fmt(dm) + ", f'(0) = " + fmt(d0) + ", f'(1) = " + fmt(dp));

    if (lambda) {
        const Polynomial g = Polynomial({0.0, 1.0}) + f * *lambda;
        const Polynomial dg = g.derivative();
        int turning = 0;
        if (!dg.is_zero()) {
            for (double x : dg.real_roots()) {
                const double h = 1e-7 * std::max(1.0, std::abs(x));
                if (dg(x - h) * dg(x + h) < 0.0) ++turning;
            }
        }
        rep.add("g_monotonicity", turning == 2,
                "u + lambda f(u) has " + std::to_string(turning + 1) +
                    " intervals of monotonicity (lambda = " + fmt(*lambda) + ")");
        const auto gz = g.is_zero() ? std::vector<double>{} : g.real_roots();
        rep.add("g_zeros", gz.size() == 3,
                "u + lambda f(u) has " + std::to_string(gz.size()) + " distinct real zeros");
    }
    return rep;
}

std::pair<double, double> extreme_roots(const Polynomial& f, double lambda) {
    const Polynomial g = Polynomial({0.0, 1.0}) + f * lambda;
    if (g.is_zero()) throw HypothesisError("u + lambda f(u) vanishes identically");
    const auto zs = g.real_roots();
    if (zs.size() != 3)
        throw HypothesisError("u + lambda f(u) has " + std::to_string(zs.size()) +
                              " real zeros for lambda = " + fmt(lambda) + ", need 3");
    const double lo = zs.front(), hi = zs.back();
    if (!(lo > -1.0 && lo < 0.0 && hi > 0.0 && hi < 1.0))
        throw HypothesisError("extreme zeros " + fmt(lo) + ", " + fmt(hi) +
                              " of u + lambda f(u) are not in (-1, 0) and (0, 1)");
    return {lo, hi};
}

std::pair<double, double> choose_constants(const Polynomial& f, double delta) {
    if (!(delta > 0.0)) throw HypothesisError("delta must be > 0");
    const Polynomial df = f.derivative();
    if (!(df(1.0) > delta) || !(df(-1.0) > delta))
        throw HypothesisError("no admissible alpha: f'(+-1) = " + fmt(df(-1.0)) + ", " +
                              fmt(df(1.0)) + " do not exceed delta = " + fmt(delta));
    const Polynomial shifted = df - Polynomial({delta});
    double ap = 0.0, am = 0.0;
    const auto up = shifted.roots(0.0, 1.0);
    if (up.empty()) throw HypothesisError("f' - delta has no zero in (0, 1)");
    ap = up.back();
    const auto down = shifted.roots(-1.0, 0.0);
    if (down.empty()) throw HypothesisError("f' - delta has no zero in (-1, 0)");
    am = down.front();
    return {am, ap};
}

double lambda_min(const Polynomial& f, double alpha_minus, double alpha_plus) {
    const double fm = f(alpha_minus), fp = f(alpha_plus);
    if (!(fm > 0.0) || !(fp < 0.0))
        throw HypothesisError("need f(alpha_plus) < 0 < f(alpha_minus); got f(" +
                              fmt(alpha_minus) + ") = " + fmt(fm) + ", f(" + fmt(alpha_plus) +
                              ") = " + fmt(fp));
    return std::max(-alpha_minus / fm, (1.0 + alpha_plus) / -fp);
}

double step_bound(const Polynomial& f, double lambda, double alpha_minus, double alpha_plus) {
    const Polynomial df = f.derivative();
    const double m = std::max(df.max_on(-1.0, alpha_minus), df.max_on(alpha_plus, 1.0));
    return 1.0 / (1.0 + lambda * std::max(m, 0.0));
}

// ---------------------------------------------------------------- Reaction

Polynomial Reaction::cubic() { return Polynomial({0.0, -1.0, 0.0, 1.0}); }

Reaction Reaction::make_cubic(double lambda, double alpha_minus, double alpha_plus, double delta) {
    return make(cubic(), lambda, alpha_minus, alpha_plus, delta);
}

Reaction Reaction::make(Polynomial f, double lambda, double alpha_minus, double alpha_plus,
                        double delta) {
    if (f.is_zero()) throw ConfigError("reaction polynomial is zero");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
    if (!(alpha_minus > -1.0 && alpha_minus < 0.0))
        throw ConfigError("alpha_minus must lie in (-1, 0)");
    if (!(alpha_plus > 0.0 && alpha_plus < 1.0)) throw ConfigError("alpha_plus must lie in (0, 1)");
    if (!(delta > 0.0)) throw ConfigError("delta must be > 0");
    Reaction rx;
    rx.f = std::move(f);
    rx.df = rx.f.derivative();
    const Polynomial w = rx.f.antiderivative();
    rx.W = w - Polynomial({w(1.0)});
    rx.lambda = lambda;
    rx.alpha_minus = alpha_minus;
    rx.alpha_plus = alpha_plus;
    rx.delta = delta;
    if (lambda > 0.0) {
        try {
            const auto [lo, hi] = extreme_roots(rx.f, lambda);
            rx.u_minus = lo;
            rx.u_plus = hi;
        } catch (const HypothesisError&) {
        }
    }
    rx.h_max = step_bound(rx.f, lambda, alpha_minus, alpha_plus);
    if (rx.df.is_zero()) {
        rx.max_abs_df = 0.0;
    } else {
        rx.max_abs_df =
            std::max(std::abs(rx.df.max_on(-1.0, 1.0)), std::abs(rx.df.min_on(-1.0, 1.0)));
    }
    return rx;
}

HypothesisReport check_conditions(const Reaction& rx, std::optional<double> h) {
    HypothesisReport rep;
    const bool have = rx.u_minus.has_value() && rx.u_plus.has_value();
    rep.add("extreme_zeros", have,
            have ? "u_minus = " + fmt(*rx.u_minus) + ", u_plus = " + fmt(*rx.u_plus)
                 : "u + lambda f(u) does not have three zeros");
    const bool order = have && *rx.u_minus < rx.alpha_minus && rx.alpha_plus < *rx.u_plus;
    rep.add("band_order", order,
            "need u_minus < alpha_minus < 0 < alpha_plus < u_plus; alpha = " +
                fmt(rx.alpha_minus) + ", " + fmt(rx.alpha_plus));
    const double slope =
        std::min(rx.df.min_on(-1.0, rx.alpha_minus), rx.df.min_on(rx.alpha_plus, 1.0));
    rep.add("band_slope", slope >= rx.delta,
            "min f' on the outer bands = " + fmt(slope) + ", delta = " + fmt(rx.delta));
    const double upper = (1.0 + rx.alpha_plus) + rx.lambda * rx.f(rx.alpha_plus);
    rep.add("upper_barrier", upper <= 0.0,
            "(1 + alpha_plus) + lambda f(alpha_plus) = " + fmt(upper) + " (need <= 0)");
    const double lower = rx.alpha_minus + rx.lambda * rx.f(rx.alpha_minus);
    rep.add("lower_barrier", lower >= 0.0,
            "alpha_minus + lambda f(alpha_minus) = " + fmt(lower) + " (need >= 0)");
    if (h) {
        rep.add("step_bound", *h > 0.0 && *h < rx.h_max,
                "h = " + fmt(*h) + ", h_max = " + fmt(rx.h_max));
    }
    return rep;
}

}  // namespace padr
