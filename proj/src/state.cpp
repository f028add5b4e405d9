#include "sepmix/state.hpp"

#include <algorithm>
#include <bit>

#include "sepmix/errors.hpp"

namespace sepmix {

Configuration::Configuration(int n, std::vector<int> positions) : n_(n) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "configuration needs n >= 1");
    board_.assign(static_cast<std::size_t>((n + 63) / 64), 0ULL);
    assign(std::move(positions));
}

void Configuration::assign(std::vector<int> positions) {
    std::fill(board_.begin(), board_.end(), 0ULL);
    std::sort(positions.begin(), positions.end());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        int x = positions[i];
        if (x < 1 || x > n_) throw Error(ErrorKind::InvalidArgument, "particle position out of range");
        if (i > 0 && positions[i - 1] == x) throw Error(ErrorKind::InvalidArgument, "two particles on one site");
        set_bit(x, true);
    }
    pos_ = std::move(positions);
}

Configuration Configuration::from_string(std::string_view bits) {
    std::vector<int> pos;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == '1')
            pos.push_back(static_cast<int>(i) + 1);
        else if (bits[i] != '0')
            throw Error(ErrorKind::InvalidArgument, "configuration string must contain only 0 and 1");
    }
    return Configuration(static_cast<int>(bits.size()), std::move(pos));
}

Configuration Configuration::from_mask(int n, std::uint64_t mask) {
    if (n > 64) throw Error(ErrorKind::TooLarge, "mask form needs n <= 64");
    std::vector<int> pos;
    while (mask) {
        pos.push_back(std::countr_zero(mask) + 1);
        mask &= mask - 1;
    }
    return Configuration(n, std::move(pos));
}

std::uint64_t Configuration::mask() const {
    if (n_ > 64) throw Error(ErrorKind::TooLarge, "mask form needs n <= 64");
    return board_[0];
}

void Configuration::jump(int from, int to) {
    auto it = std::lower_bound(pos_.begin(), pos_.end(), from);
    *it = to;
    set_bit(from, false);
    set_bit(to, true);
}

std::string Configuration::to_string() const {
    std::string s(static_cast<std::size_t>(n_), '0');
    for (int x : pos_) s[static_cast<std::size_t>(x - 1)] = '1';
    return s;
}

std::pair<Configuration, Configuration> extremal(int n, int k) {
    if (k < 1 || k > n - 1) throw Error(ErrorKind::BadK, "need 1 <= k <= n-1");
    std::vector<int> lo(static_cast<std::size_t>(k)), hi(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        lo[static_cast<std::size_t>(i)] = i + 1;
        hi[static_cast<std::size_t>(i)] = n - k + 1 + i;
    }
    return {Configuration(n, std::move(lo)), Configuration(n, std::move(hi))};
}

static void check_shape(const Configuration& a, const Configuration& b) {
    if (a.n() != b.n() || a.k() != b.k()) throw Error(ErrorKind::ShapeMismatch, "configurations differ in n or k");
}

bool leq(const Configuration& a, const Configuration& b) {
    check_shape(a, b);
    const auto& pa = a.positions();
    const auto& pb = b.positions();
    for (std::size_t i = 0; i < pa.size(); ++i)
        if (pa[i] > pb[i]) return false;
    return true;
}

Configuration swap(const Configuration& xi, int x, int y) {
    if (x < 1 || y < 1 || x > xi.n() || y > xi.n()) throw Error(ErrorKind::InvalidArgument, "swap site out of range");
    bool ox = xi.occupied(x), oy = xi.occupied(y);
    if (ox == oy) return xi;
    std::vector<int> pos = xi.positions();
    int from = ox ? x : y, to = ox ? y : x;
    *std::find(pos.begin(), pos.end(), from) = to;
    return Configuration(xi.n(), std::move(pos));
}

long long observable_m(const Configuration& xi) {
    long long m = 0;
    for (int x : xi.positions()) m += x;
    return m;
}

int tail_count(const Configuration& xi, int y) {
    const auto& p = xi.positions();
    return static_cast<int>(p.end() - std::upper_bound(p.begin(), p.end(), y));
}

bool in_A_r(const Configuration& xi, int r) {
    if (r < 0) throw Error(ErrorKind::InvalidArgument, "r must be >= 0");
    const int n = xi.n(), k = xi.k();
    const int empty_upto = n - k - r;      // sites x <= this are empty
    const int full_from = n - k + r + 1;   // sites x >= this are occupied
    const auto& p = xi.positions();
    if (!p.empty() && p.front() <= empty_upto) return false;
    int need = std::max(0, n - std::max(full_from, 1) + 1);
    return tail_count(xi, std::max(full_from, 1) - 1) == need;
}

int hamming(const Configuration& a, const Configuration& b) {
    check_shape(a, b);
    int d = 0;
    for (int x : a.positions())
        if (!b.occupied(x)) ++d;
    return d;
}

std::pair<std::vector<int>, std::vector<int>> discrepancy_pairs(const Configuration& a, const Configuration& b) {
    check_shape(a, b);
    std::vector<int> xs, ys;
    for (int x : a.positions())
        if (!b.occupied(x)) xs.push_back(x);
    for (int y : b.positions())
        if (!a.occupied(y)) ys.push_back(y);
    return {xs, ys};
}

Configuration pack_leftmost(const Configuration& xi, int count) {
    std::vector<int> pos = xi.positions();
    for (int i = 0; i < count && i < static_cast<int>(pos.size()); ++i) pos[static_cast<std::size_t>(i)] = i + 1;
    return Configuration(xi.n(), std::move(pos));
}

}  // namespace sepmix
