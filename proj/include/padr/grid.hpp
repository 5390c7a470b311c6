#pragma once

#include <climits>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace padr {

/// Parameters of the finite ultrametric group G_N^n = B_N^n / B_{-N}^n.
struct GridParams {
    int p = 2;  ///< prime
    int n = 1;  ///< dimension
    int N = 1;  ///< resolution

    /// Throws std::invalid_argument unless p is prime, n, N >= 1 and
    /// p^(2Nn) <= 2^31.
    void validate() const;

    /// Number of grid points p^(2Nn).
    std::size_t size() const;

    /// Points per coordinate, p^(2N).
    std::size_t per_coordinate() const;

    bool operator==(const GridParams&) const = default;
};

bool is_prime(long long value);

std::string to_string(const GridParams& params);

/// p-adic order of a difference; +infinity when the two indices coincide.
class Valuation {
public:
    static constexpr int kInfinity = INT_MAX;

    constexpr Valuation() = default;
    constexpr explicit Valuation(int value) : value_(value) {}
    static constexpr Valuation infinity() { return Valuation(kInfinity); }

    constexpr bool is_infinite() const { return value_ == kInfinity; }
    constexpr int value() const { return value_; }

    /// ||x||_p = p^(-ord), 0 for +infinity.
    double norm(int p) const;

    constexpr auto operator<=>(const Valuation&) const = default;

private:
    int value_ = kInfinity;
};

/// An element of G_N^n. Coordinate j carries digits a_{-N}, ..., a_{N-1}
/// (digit k lives at slot k + N).
///
/// Canonical ordinal: per coordinate m_j = sum_s a_{s-N} p^(2N-1-s), so the
/// coarsest digit a_{-N} is the most significant; coordinates compose
/// lexicographically with coordinate 0 most significant. With this weighting
/// every ball of G_N^1 is a contiguous ordinal range.
class GridIndex {
public:
    GridIndex(GridParams params, std::vector<int> digits);

    const GridParams& params() const { return params_; }
    std::size_t ordinal() const { return ordinal_; }

    /// Digit a_k of coordinate `coord`, k in [-N, N-1].
    int digit(int coord, int k) const;

    /// Flat digit storage, coordinate-major, slot order.
    std::span<const int> digits() const { return digits_; }

    /// Representative as exact rationals, e.g. "3/2" or "(1/2, 3)".
    std::string to_string() const;

    bool operator==(const GridIndex& other) const {
        return params_ == other.params_ && ordinal_ == other.ordinal_;
    }

private:
    GridParams params_;
    std::vector<int> digits_;
    std::size_t ordinal_ = 0;
};

/// The p^n-ary quotient filtration tree. Depth d in [0, 2N] holds the balls of
/// radius p^(N-d); a node at depth d is the set of indices sharing digits
/// a_{-N}, ..., a_{-N+d-1} in every coordinate. Leaves are stored in tree
/// order, in which every node is a contiguous block; for n = 1 tree order is
/// the canonical ordinal order.
class LevelTree {
public:
    explicit LevelTree(const GridParams& params);

    int depth() const { return depth_; }
    std::size_t branching() const { return branching_; }
    std::size_t leaf_count() const { return leaf_to_ordinal_.size(); }

    /// Radius exponent r of the balls at depth d (radius p^r, r = N - d).
    int radius_exponent(int d) const { return depth_ / 2 - d; }

    std::size_t node_count(int d) const;
    /// Leaves covered by one node at depth d.
    std::size_t block_size(int d) const;
    /// Node (at depth d) containing the index with this canonical ordinal.
    std::size_t node_of(std::size_t ordinal, int d) const;

    std::size_t leaf_position(std::size_t ordinal) const { return ordinal_to_leaf_[ordinal]; }
    std::size_t leaf_ordinal(std::size_t position) const { return leaf_to_ordinal_[position]; }
    bool identity_order() const { return identity_; }

private:
    int depth_ = 0;
    std::size_t branching_ = 1;
    std::vector<std::size_t> block_sizes_;
    std::vector<std::uint32_t> leaf_to_ordinal_;
    std::vector<std::uint32_t> ordinal_to_leaf_;
    bool identity_ = true;
};

/// Immutable view of G_N^n: index arithmetic, valuations, volumes and the
/// level tree. Safe for concurrent readers.
class Grid {
public:
    explicit Grid(GridParams params);

    const GridParams& params() const { return params_; }
    std::size_t size() const { return size_; }
    const LevelTree& tree() const { return tree_; }

    GridIndex index(std::size_t ordinal) const;
    std::size_t ordinal_of(std::span<const int> digits) const;

    /// Canonical-order enumeration of all p^(2Nn) indices.
    std::vector<GridIndex> enumerate() const;

    GridIndex zero() const { return index(0); }

    /// Valuation of the difference of two indices given by ordinal.
    Valuation valuation(std::size_t a, std::size_t b) const;

    /// p^(r n), the Haar volume of B_r^n.
    double ball_volume(int r) const;
    /// p^(r n) (1 - p^-n).
    double sphere_volume(int r) const;
    /// Number of grid points at distance exactly p^r from a fixed point,
    /// r in [-N+1, N]; p^((N+r)n) - p^((N+r-1)n).
    std::size_t sphere_count(int r) const;
    /// Haar volume of one grid cell, p^(-Nn).
    double cell_volume() const;

    /// Per-coordinate mixed-radix value m_j of an ordinal.
    std::size_t coordinate(std::size_t ordinal, int coord) const;
    /// Digit a_k of coordinate `coord` read from an ordinal.
    int digit_of(std::size_t ordinal, int coord, int k) const;

private:
    GridParams params_;
    std::size_t size_ = 0;
    std::size_t per_coord_ = 0;
    std::vector<std::size_t> slot_weight_;  // p^(2N-1-s)
    LevelTree tree_;
};

std::vector<GridIndex> enumerate(const GridParams& params);
GridIndex add(const GridIndex& a, const GridIndex& b);
GridIndex sub(const GridIndex& a, const GridIndex& b);
Valuation valuation(const GridIndex& a, const GridIndex& b);
double ball_volume(const GridParams& params, int r);
double sphere_volume(const GridParams& params, int r);
LevelTree level_tree(const GridParams& params);

}  // namespace padr
