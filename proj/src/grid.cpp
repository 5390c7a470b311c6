#include "padr/grid.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace padr {

namespace {

constexpr std::size_t kMaxGridSize = std::size_t{1} << 31;

// Integer power with a hard ceiling; returns 0 on overflow past `limit`.
std::size_t checked_pow(std::size_t base, long long exp, std::size_t limit) {
    std::size_t result = 1;
    for (long long i = 0; i < exp; ++i) {
        if (result > limit / base) return 0;
        result *= base;
    }
    return result;
}

std::size_t upow(std::size_t base, int exp) {
    std::size_t result = 1;
    for (int i = 0; i < exp; ++i) result *= base;
    return result;
}

void require_same(const GridParams& a, const GridParams& b) {
    if (!(a == b))
        throw std::invalid_argument("grid parameter mismatch: " + to_string(a) + " vs " +
                                    to_string(b));
}

}  // namespace

bool is_prime(long long value) {
    if (value < 2) return false;
    for (long long d = 2; d * d <= value; ++d)
        if (value % d == 0) return false;
    return true;
}

std::string to_string(const GridParams& params) {
    std::ostringstream os;
    os << "(p=" << params.p << ", n=" << params.n << ", N=" << params.N << ")";
    return os.str();
}

void GridParams::validate() const {
    if (!is_prime(p)) throw std::invalid_argument("p = " + std::to_string(p) + " is not prime");
    if (n < 1) throw std::invalid_argument("dimension n must be >= 1");
    if (N < 1) throw std::invalid_argument("resolution N must be >= 1");
    const long long exponent = 2LL * N * n;
    if (exponent > 62 || checked_pow(static_cast<std::size_t>(p), exponent, kMaxGridSize) == 0)
        throw std::invalid_argument("grid size p^(2Nn) exceeds 2^31 for " + to_string(*this));
}

std::size_t GridParams::size() const { return upow(static_cast<std::size_t>(p), 2 * N * n); }

std::size_t GridParams::per_coordinate() const {
    return upow(static_cast<std::size_t>(p), 2 * N);
}

double Valuation::norm(int p) const {
    if (is_infinite()) return 0.0;
    return std::pow(static_cast<double>(p), -value_);
}

// ---------------------------------------------------------------- GridIndex

GridIndex::GridIndex(GridParams params, std::vector<int> digits)
    : params_(params), digits_(std::move(digits)) {
    const int slots = 2 * params_.N;
    if (digits_.size() != static_cast<std::size_t>(slots * params_.n))
        throw std::invalid_argument("digit count does not match grid parameters");
    const std::size_t per_coord = params_.per_coordinate();
    ordinal_ = 0;
    for (int j = 0; j < params_.n; ++j) {
        std::size_t m = 0;
        for (int s = 0; s < slots; ++s) {
            const int a = digits_[j * slots + s];
            if (a < 0 || a >= params_.p) throw std::invalid_argument("digit out of range [0, p-1]");
            m = m * params_.p + static_cast<std::size_t>(a);
        }
        ordinal_ = ordinal_ * per_coord + m;
    }
}

int GridIndex::digit(int coord, int k) const {
    if (coord < 0 || coord >= params_.n || k < -params_.N || k >= params_.N)
        throw std::out_of_range("digit position out of range");
    return digits_[coord * 2 * params_.N + (k + params_.N)];
}

std::string GridIndex::to_string() const {
    const int slots = 2 * params_.N;
    std::ostringstream os;
    if (params_.n > 1) os << "(";
    for (int j = 0; j < params_.n; ++j) {
        // value = num / p^N with num = sum_k a_k p^(k+N)
        long long num = 0;
        long long weight = 1;
        for (int s = 0; s < slots; ++s) {
            num += digits_[j * slots + s] * weight;
            weight *= params_.p;
        }
        long long den = 1;
        for (int i = 0; i < params_.N; ++i) den *= params_.p;
        const long long g = std::gcd(num, den);
        if (j > 0) os << ", ";
        if (num == 0) {
            os << "0";
        } else if (den / g == 1) {
            os << num / g;
        } else {
            os << num / g << "/" << den / g;
        }
    }
    if (params_.n > 1) os << ")";
    return os.str();
}

// ---------------------------------------------------------------- LevelTree

LevelTree::LevelTree(const GridParams& params) {
    params.validate();
    depth_ = 2 * params.N;
    branching_ = upow(static_cast<std::size_t>(params.p), params.n);
    const std::size_t size = params.size();
    block_sizes_.resize(depth_ + 1);
    for (int d = 0; d <= depth_; ++d) block_sizes_[d] = upow(branching_, depth_ - d);

    leaf_to_ordinal_.resize(size);
    ordinal_to_leaf_.resize(size);
    identity_ = params.n == 1;
    if (identity_) {
        std::iota(leaf_to_ordinal_.begin(), leaf_to_ordinal_.end(), 0u);
        std::iota(ordinal_to_leaf_.begin(), ordinal_to_leaf_.end(), 0u);
        return;
    }
    // Interleave: for each slot (coarsest first) take the digit of every
    // coordinate, coordinate 0 first.
    const std::size_t per_coord = params.per_coordinate();
    const auto p = static_cast<std::size_t>(params.p);
    std::vector<std::size_t> coords(params.n);
    for (std::size_t ord = 0; ord < size; ++ord) {
        std::size_t rest = ord;
        for (int j = params.n - 1; j >= 0; --j) {
            coords[j] = rest % per_coord;
            rest /= per_coord;
        }
        std::size_t pos = 0;
        std::size_t slot_weight = per_coord / p;
        for (int s = 0; s < depth_; ++s) {
            for (int j = 0; j < params.n; ++j) pos = pos * p + (coords[j] / slot_weight) % p;
            slot_weight /= p;
        }
        ordinal_to_leaf_[ord] = static_cast<std::uint32_t>(pos);
        leaf_to_ordinal_[pos] = static_cast<std::uint32_t>(ord);
    }
}

std::size_t LevelTree::node_count(int d) const { return leaf_count() / block_sizes_.at(d); }

std::size_t LevelTree::block_size(int d) const { return block_sizes_.at(d); }

std::size_t LevelTree::node_of(std::size_t ordinal, int d) const {
    return ordinal_to_leaf_.at(ordinal) / block_sizes_.at(d);
}

// --------------------------------------------------------------------- Grid

Grid::Grid(GridParams params) : params_(params), tree_(params) {
    size_ = params_.size();
    per_coord_ = params_.per_coordinate();
    slot_weight_.resize(2 * params_.N);
    for (int s = 0; s < 2 * params_.N; ++s)
        slot_weight_[s] = upow(static_cast<std::size_t>(params_.p), 2 * params_.N - 1 - s);
}

std::size_t Grid::coordinate(std::size_t ordinal, int coord) const {
    std::size_t rest = ordinal;
    for (int j = params_.n - 1; j > coord; --j) rest /= per_coord_;
    return rest % per_coord_;
}

int Grid::digit_of(std::size_t ordinal, int coord, int k) const {
    const std::size_t m = coordinate(ordinal, coord);
    return static_cast<int>((m / slot_weight_[k + params_.N]) % params_.p);
}

GridIndex Grid::index(std::size_t ordinal) const {
    if (ordinal >= size_) throw std::out_of_range("ordinal out of range");
    const int slots = 2 * params_.N;
    std::vector<int> digits(static_cast<std::size_t>(slots * params_.n));
    std::size_t rest = ordinal;
    for (int j = params_.n - 1; j >= 0; --j) {
        std::size_t m = rest % per_coord_;
        rest /= per_coord_;
        for (int s = slots - 1; s >= 0; --s) {
            digits[j * slots + s] = static_cast<int>(m % params_.p);
            m /= params_.p;
        }
    }
    return GridIndex(params_, std::move(digits));
}

std::size_t Grid::ordinal_of(std::span<const int> digits) const {
    return GridIndex(params_, std::vector<int>(digits.begin(), digits.end())).ordinal();
}

std::vector<GridIndex> Grid::enumerate() const {
    std::vector<GridIndex> out;
    out.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) out.push_back(index(i));
    return out;
}

Valuation Grid::valuation(std::size_t a, std::size_t b) const {
    if (a == b) return Valuation::infinity();
    int best = Valuation::kInfinity;
    std::size_t ra = a, rb = b;
    for (int j = params_.n - 1; j >= 0; --j) {
        const std::size_t ma = ra % per_coord_;
        const std::size_t mb = rb % per_coord_;
        ra /= per_coord_;
        rb /= per_coord_;
        if (ma == mb) continue;
        // Lowest differing digit position = most significant differing slot.
        for (int s = 0; s < 2 * params_.N; ++s) {
            if (ma / slot_weight_[s] != mb / slot_weight_[s]) {
                best = std::min(best, s - params_.N);
                break;
            }
        }
    }
    return Valuation(best);
}

double Grid::ball_volume(int r) const { return padr::ball_volume(params_, r); }

double Grid::sphere_volume(int r) const { return padr::sphere_volume(params_, r); }

std::size_t Grid::sphere_count(int r) const {
    if (r < -params_.N + 1 || r > params_.N)
        throw std::out_of_range("sphere radius exponent outside [-N+1, N]");
    const auto p = static_cast<std::size_t>(params_.p);
    return upow(p, (params_.N + r) * params_.n) - upow(p, (params_.N + r - 1) * params_.n);
}

double Grid::cell_volume() const {
    return std::pow(static_cast<double>(params_.p), -params_.N * params_.n);
}

// ----------------------------------------------------------- free functions

std::vector<GridIndex> enumerate(const GridParams& params) { return Grid(params).enumerate(); }

namespace {

GridIndex combine(const GridIndex& a, const GridIndex& b, int sign) {
    require_same(a.params(), b.params());
    const GridParams& params = a.params();
    const int slots = 2 * params.N;
    std::vector<int> digits(a.digits().begin(), a.digits().end());
    const auto bd = b.digits();
    for (int j = 0; j < params.n; ++j) {
        int carry = 0;
        // Slot 0 holds a_{-N}, the least significant p-adic digit.
        for (int s = 0; s < slots; ++s) {
            int v = digits[j * slots + s] + sign * bd[j * slots + s] + carry;
            carry = 0;
            if (v < 0) {
                v += params.p;
                carry = -1;
            } else if (v >= params.p) {
                v -= params.p;
                carry = 1;
            }
            digits[j * slots + s] = v;
        }
        // Carry out of a_{N-1} lands in B_{-N} and vanishes in the quotient.
    }
    return GridIndex(params, std::move(digits));
}

}  // namespace

GridIndex add(const GridIndex& a, const GridIndex& b) { return combine(a, b, +1); }

GridIndex sub(const GridIndex& a, const GridIndex& b) { return combine(a, b, -1); }

Valuation valuation(const GridIndex& a, const GridIndex& b) {
    const GridIndex d = sub(a, b);
    const GridParams& params = d.params();
    int best = Valuation::kInfinity;
    for (int j = 0; j < params.n; ++j) {
        for (int k = -params.N; k < params.N; ++k) {
            if (d.digit(j, k) != 0) {
                best = std::min(best, k);
                break;
            }
        }
    }
    return Valuation(best);
}

double ball_volume(const GridParams& params, int r) {
    return std::pow(static_cast<double>(params.p), static_cast<double>(r) * params.n);
}

double sphere_volume(const GridParams& params, int r) {
    return ball_volume(params, r) * (1.0 - std::pow(static_cast<double>(params.p), -params.n));
}

LevelTree level_tree(const GridParams& params) { return LevelTree(params); }

}  // namespace padr
