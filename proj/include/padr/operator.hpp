#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "padr/errors.hpp"
#include "padr/grid.hpp"
#include "padr/kernel.hpp"

namespace padr {

/// Real vector over the grid, indexed by canonical ordinal.
using State = std::vector<double>;

/// A^(N) = j_N I - a, where a_{ki} depends only on ||k - i||_p. Stored as one
/// coefficient per radius p^r, r in [-N+1, N], plus the diagonal mass.
class UltradiffOperator {
public:
    static constexpr std::size_t kDenseLimit = 4096;

    static UltradiffOperator build(const GridParams& params, const TruncatedKernel& tk);

    /// Raw construction for tests and fault injection: level_coeffs[r + N - 1]
    /// is a_r. No sign or row-sum checks.
    static UltradiffOperator from_coefficients(const GridParams& params,
                                               std::vector<double> level_coeffs,
                                               double diag_coeff, double j_N);

    const GridParams& params() const { return grid_->params(); }
    const Grid& grid() const { return *grid_; }
    std::shared_ptr<const Grid> grid_ptr() const { return grid_; }
    std::size_t size() const { return grid_->size(); }

    double j_N() const { return j_N_; }
    double diag_coeff() const { return diag_coeff_; }
    /// a_r for r in [-N+1, N].
    double level_coeff(int r) const;
    const std::vector<double>& level_coeffs() const { return level_coeffs_; }

    /// Adjacency entry a_{ki}.
    double adjacency(std::size_t k, std::size_t i) const;
    /// Matrix entry (A^(N))_{ki}.
    double entry(std::size_t k, std::size_t i) const;

private:
    UltradiffOperator() = default;

    std::shared_ptr<const Grid> grid_;
    std::vector<double> level_coeffs_;
    double diag_coeff_ = 0.0;
    double j_N_ = 0.0;
};

State matvec_dense(const UltradiffOperator& op, const State& u);
State matvec_fast(const UltradiffOperator& op, const State& u);
/// a u through the level tree; nonnegative for nonnegative u.
State adjacency_fast(const UltradiffOperator& op, const State& u);

struct QMatrixReport {
    bool ok = true;
    /// Most negative off-diagonal entry of -A^(N) (0 when none is negative).
    double min_offdiag = 0.0;
    std::size_t min_offdiag_row = 0;
    std::size_t min_offdiag_col = 0;
    /// Largest |row sum| of A^(N).
    double max_row_residual = 0.0;
    std::size_t max_row_residual_row = 0;
    /// Rows failing the row-sum tolerance and entries failing the sign check.
    std::vector<std::size_t> bad_rows;
    std::vector<std::pair<std::size_t, std::size_t>> bad_entries;
};

/// Checks that -A^(N) is a Q-matrix: off-diagonals >= 0 and row sums of
/// A^(N) within row_tol * j_N of zero.
QMatrixReport validate_qmatrix(const UltradiffOperator& op, double row_tol = 1e-12);

/// e^{-tA^(N)} u by uniformization. tol bounds the neglected series tail of
/// each substep relative to ||u||_inf.
State semigroup_apply(const UltradiffOperator& op, const State& u, double t, double tol = 1e-15);

/// Dense A^(N); M <= kDenseLimit.
Eigen::MatrixXd dense_matrix(const UltradiffOperator& op);

/// Ascending eigenvalues of A^(N) from a dense symmetric solve; M <= kDenseLimit.
std::vector<double> spectrum(const UltradiffOperator& op);

/// Distinct eigenvalues of A^(N) read off the level coefficients. depth is
/// the tree depth whose sibling-contrast vectors span the eigenspace, -1 for
/// the constants.
struct SpectralLevel {
    double eigenvalue = 0.0;
    std::size_t multiplicity = 0;
    int depth = -1;
};

std::vector<SpectralLevel> spectrum_levels(const UltradiffOperator& op);

/// spectrum_levels expanded by multiplicity and sorted ascending.
std::vector<double> spectrum_closed_form(const UltradiffOperator& op);

/// Dense A^(N) as CSV, rows and columns in canonical order.
void write_dense_csv(const UltradiffOperator& op, std::ostream& os);

}  // namespace padr
