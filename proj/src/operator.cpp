#include "padr/operator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "padr/parallel.hpp"

namespace padr {

namespace {

constexpr std::size_t kParallelGrain = std::size_t{1} << 14;

void require_size(const UltradiffOperator& op, const State& u) {
    if (u.size() != op.size())
        throw std::invalid_argument("state length " + std::to_string(u.size()) +
                                    " does not match grid size " + std::to_string(op.size()));
}

void require_dense(const UltradiffOperator& op) {
    if (op.size() > UltradiffOperator::kDenseLimit)
        throw Error("dense realization needs M <= " +
                    std::to_string(UltradiffOperator::kDenseLimit) + ", got M = " +
                    std::to_string(op.size()));
}

double sup_norm(const State& u) {
    double m = 0.0;
    for (double v : u) m = std::max(m, std::abs(v));
    return m;
}

// Neumaier compensated accumulator.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

}  // namespace

UltradiffOperator UltradiffOperator::build(const GridParams& params, const TruncatedKernel& tk) {
    params.validate();
    if (tk.N != params.N)
        throw std::invalid_argument("truncated kernel has N = " + std::to_string(tk.N) +
                                    " but the grid has N = " + std::to_string(params.N));
    if (tk.base.p() != params.p || tk.base.n() != params.n)
        throw std::invalid_argument("kernel (p, n) does not match the grid");
    UltradiffOperator op;
    op.grid_ = std::make_shared<const Grid>(params);
    const double cell = op.grid_->cell_volume();
    const int N = params.N;
    op.level_coeffs_.resize(2 * N);
    for (int r = -N + 1; r <= N; ++r) {
        const double v = tk.base.value(r);
        if (v < 0.0) throw KernelError("negative kernel value at r = " + std::to_string(r));
        op.level_coeffs_[r + N - 1] = cell * v;
    }
    if (tk.diag_mass < 0.0) throw KernelError("negative diagonal mass");
    op.diag_coeff_ = tk.diag_mass;
    op.j_N_ = tk.j_N;
    return op;
}

UltradiffOperator UltradiffOperator::from_coefficients(const GridParams& params,
                                                       std::vector<double> level_coeffs,
                                                       double diag_coeff, double j_N) {
    params.validate();
    if (level_coeffs.size() != static_cast<std::size_t>(2 * params.N))
        throw std::invalid_argument("need 2N level coefficients");
    UltradiffOperator op;
    op.grid_ = std::make_shared<const Grid>(params);
    op.level_coeffs_ = std::move(level_coeffs);
    op.diag_coeff_ = diag_coeff;
    op.j_N_ = j_N;
    return op;
}

double UltradiffOperator::level_coeff(int r) const {
    const int N = params().N;
    if (r < -N + 1 || r > N) throw std::out_of_range("level index outside [-N+1, N]");
    return level_coeffs_[r + N - 1];
}

double UltradiffOperator::adjacency(std::size_t k, std::size_t i) const {
    const Valuation v = grid_->valuation(k, i);
    if (v.is_infinite()) return diag_coeff_;
    return level_coeffs_[-v.value() + params().N - 1];
}

double UltradiffOperator::entry(std::size_t k, std::size_t i) const {
    return (k == i ? j_N_ : 0.0) - adjacency(k, i);
}

State matvec_dense(const UltradiffOperator& op, const State& u) {
    require_size(op, u);
    const std::size_t M = op.size();
    State out(M);
    for (std::size_t k = 0; k < M; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < M; ++i) acc += op.adjacency(k, i) * u[i];
        out[k] = op.j_N() * u[k] - acc;
    }
    return out;
}

namespace {

// Off-diagonal part of a u: sum over r of a_r times the mass of the sphere of
// radius p^r around each index, in canonical order.
State sphere_part(const UltradiffOperator& op, const State& u) {
    require_size(op, u);
    const LevelTree& tree = op.grid().tree();
    const int depth = tree.depth();
    const std::size_t b = tree.branching();
    const std::size_t M = op.size();
    const int N = op.params().N;
    const bool identity = tree.identity_order();

    // sums[d][node]: sum of u over the node at depth d; sums[depth] is u in
    // tree order.
    std::vector<std::vector<double>> sums(depth + 1);
    if (identity) {
        sums[depth] = u;
    } else {
        sums[depth].resize(M);
        for (std::size_t pos = 0; pos < M; ++pos) sums[depth][pos] = u[tree.leaf_ordinal(pos)];
    }
    for (int d = depth - 1; d >= 0; --d) {
        const std::size_t nodes = tree.node_count(d);
        sums[d].assign(nodes, 0.0);
        const std::vector<double>& child = sums[d + 1];
        std::vector<double>& parent = sums[d];
        parallel_for(0, nodes, kParallelGrain / b, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t node = lo; node < hi; ++node) {
                double s = 0.0;
                const double* c = child.data() + node * b;
                for (std::size_t j = 0; j < b; ++j) s += c[j];
                parent[node] = s;
            }
        });
    }

    // Top-down: a child inherits its parent's accumulator plus a_{N-d} times
    // the mass of its siblings (the sphere of radius p^(N-d) around it).
    std::vector<double> acc(1, 0.0), next;
    for (int d = 0; d < depth; ++d) {
        const std::size_t nodes = tree.node_count(d);
        const double a = op.level_coeffs()[(N - d) + N - 1];
        next.assign(nodes * b, 0.0);
        const std::vector<double>& child = sums[d + 1];
        parallel_for(0, nodes, kParallelGrain / b, [&](std::size_t lo, std::size_t hi) {
            std::vector<double> prefix(b + 1), suffix(b + 1);
            for (std::size_t node = lo; node < hi; ++node) {
                const double* c = child.data() + node * b;
                prefix[0] = 0.0;
                for (std::size_t j = 0; j < b; ++j) prefix[j + 1] = prefix[j] + c[j];
                suffix[b] = 0.0;
                for (std::size_t j = b; j-- > 0;) suffix[j] = suffix[j + 1] + c[j];
                for (std::size_t j = 0; j < b; ++j)
                    next[node * b + j] = acc[node] + a * (prefix[j] + suffix[j + 1]);
            }
        });
        acc.swap(next);
    }

    if (identity) return acc;
    State out(M);
    for (std::size_t pos = 0; pos < M; ++pos) out[tree.leaf_ordinal(pos)] = acc[pos];
    return out;
}

}  // namespace

State adjacency_fast(const UltradiffOperator& op, const State& u) {
    State out = sphere_part(op, u);
    const double diag = op.diag_coeff();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += diag * u[k];
    return out;
}

State matvec_fast(const UltradiffOperator& op, const State& u) {
    State out = sphere_part(op, u);
    const double d = op.j_N() - op.diag_coeff();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = d * u[k] - out[k];
    return out;
}

QMatrixReport validate_qmatrix(const UltradiffOperator& op, double row_tol) {
    QMatrixReport rep;
    const std::size_t M = op.size();
    // Rows are translates of each other; beyond the dense limit row 0 stands
    // for all of them.
    const std::size_t rows = M <= UltradiffOperator::kDenseLimit ? M : 1;
    const double scale = op.j_N() > 0.0 ? op.j_N() : 1.0;
    for (std::size_t k = 0; k < rows; ++k) {
        CompensatedSum row;
        for (std::size_t i = 0; i < M; ++i) {
            const double e = op.entry(k, i);
            row.add(e);
            if (i != k) {
                const double q = -e;
                if (q < 0.0) {
                    rep.ok = false;
                    if (rep.bad_entries.size() < 64) rep.bad_entries.emplace_back(k, i);
                    if (q < rep.min_offdiag) {
                        rep.min_offdiag = q;
                        rep.min_offdiag_row = k;
                        rep.min_offdiag_col = i;
                    }
                }
            }
        }
        const double res = std::abs(row.value());
        if (res > rep.max_row_residual) {
            rep.max_row_residual = res;
            rep.max_row_residual_row = k;
        }
        if (!(res <= row_tol * scale)) {
            rep.ok = false;
            if (rep.bad_rows.size() < 64) rep.bad_rows.push_back(k);
        }
    }
    if (op.diag_coeff() > op.j_N()) rep.ok = false;
    return rep;
}

State semigroup_apply(const UltradiffOperator& op, const State& u, double t, double tol) {
    require_size(op, u);
    if (!(t >= 0.0)) throw std::invalid_argument("semigroup time must be >= 0");
    if (t == 0.0) return u;
    const double jn = op.j_N();
    if (jn <= 0.0) return u;
    const double total = t * jn;
    const auto substeps = static_cast<std::size_t>(std::max(1.0, std::ceil(total / 8.0)));
    const double tau = t / static_cast<double>(substeps);
    const double x = tau * jn;
    const double damp = std::exp(-x);

    State cur = u;
    for (std::size_t s = 0; s < substeps; ++s) {
        const double ref = sup_norm(cur);
        if (ref == 0.0) break;
        State sum = cur;
        State term = cur;
        for (int k = 1; k < 10000; ++k) {
            term = adjacency_fast(op, term);
            const double f = tau / k;
            for (double& v : term) v *= f;
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += term[i];
            // ||a||_inf = j_N, so later terms shrink at least by x/(k+1).
            const double q = x / (k + 1);
            if (q < 1.0) {
                const double tail = sup_norm(term) * q / (1.0 - q);
                if (tail <= tol * ref) break;
            }
        }
        for (double& v : sum) v *= damp;
        cur.swap(sum);
    }
    return cur;
}

Eigen::MatrixXd dense_matrix(const UltradiffOperator& op) {
    require_dense(op);
    const auto M = static_cast<Eigen::Index>(op.size());
    Eigen::MatrixXd A(M, M);
    for (Eigen::Index k = 0; k < M; ++k)
        for (Eigen::Index i = 0; i < M; ++i)
            A(k, i) = op.entry(static_cast<std::size_t>(k), static_cast<std::size_t>(i));
    return A;
}

std::vector<double> spectrum(const UltradiffOperator& op) {
    const Eigen::MatrixXd A = dense_matrix(op);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw Error("dense eigensolver failed");
    const Eigen::VectorXd& ev = solver.eigenvalues();
    std::vector<double> out(ev.data(), ev.data() + ev.size());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<SpectralLevel> spectrum_levels(const UltradiffOperator& op) {
    const LevelTree& tree = op.grid().tree();
    const int depth = tree.depth();
    const int N = op.params().N;
    const std::size_t b = tree.branching();
    const auto& a = op.level_coeffs();
    // inner[d]: row sum of the adjacency restricted to the depth-d ball
    // around an index.
    std::vector<double> inner(depth + 1);
    inner[depth] = op.diag_coeff();
    for (int d = depth - 1; d >= 0; --d) {
        const double count = static_cast<double>(tree.block_size(d) - tree.block_size(d + 1));
        inner[d] = inner[d + 1] + a[(N - d) + N - 1] * count;
    }
    std::vector<SpectralLevel> out;
    out.push_back({op.j_N() - inner[0], 1, -1});
    for (int d = 0; d < depth; ++d) {
        const double mu = inner[d + 1] - a[(N - d) + N - 1] * static_cast<double>(tree.block_size(d + 1));
        out.push_back({op.j_N() - mu, (b - 1) * tree.node_count(d), d});
    }
    return out;
}

std::vector<double> spectrum_closed_form(const UltradiffOperator& op) {
    std::vector<double> out;
    out.reserve(op.size());
    for (const auto& lvl : spectrum_levels(op)) out.insert(out.end(), lvl.multiplicity, lvl.eigenvalue);
    std::sort(out.begin(), out.end());
    return out;
}

void write_dense_csv(const UltradiffOperator& op, std::ostream& os) {
    require_dense(op);
    const std::size_t M = op.size();
    char buf[32];
    for (std::size_t k = 0; k < M; ++k) {
        for (std::size_t i = 0; i < M; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", op.entry(k, i));
            if (i) os << ',';
            os << buf;
        }
        os << '\n';
    }
}

}  // namespace padr
