#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sepmix {

// Occupancy on sites 1..n as a bit board plus the sorted particle positions.
class Configuration {
public:
    Configuration() = default;
    Configuration(int n, std::vector<int> positions);

    static Configuration from_string(std::string_view bits);
    static Configuration from_mask(int n, std::uint64_t mask);  // bit x-1 is site x; n <= 64

    int n() const { return n_; }
    int k() const { return static_cast<int>(pos_.size()); }
    bool occupied(int x) const {
        auto i = static_cast<std::size_t>(x - 1);
        return (board_[i >> 6] >> (i & 63)) & 1ULL;
    }
    const std::vector<int>& positions() const { return pos_; }
    std::uint64_t mask() const;  // n <= 64 only

    // Moves the particle at `from` to the empty neighbour `to`; order of positions is kept.
    void jump(int from, int to);
    // Replaces the whole occupancy.
    void assign(std::vector<int> positions);

    std::string to_string() const;
    bool operator==(const Configuration& o) const { return n_ == o.n_ && board_ == o.board_; }
    bool operator!=(const Configuration& o) const { return !(*this == o); }

private:
    void set_bit(int x, bool v) {
        auto i = static_cast<std::size_t>(x - 1);
        if (v)
            board_[i >> 6] |= (1ULL << (i & 63));
        else
            board_[i >> 6] &= ~(1ULL << (i & 63));
    }

    int n_ = 0;
    std::vector<std::uint64_t> board_;
    std::vector<int> pos_;
};

std::pair<Configuration, Configuration> extremal(int n, int k);
bool leq(const Configuration& a, const Configuration& b);
Configuration swap(const Configuration& xi, int x, int y);
long long observable_m(const Configuration& xi);
int tail_count(const Configuration& xi, int y);
bool in_A_r(const Configuration& xi, int r);
int hamming(const Configuration& a, const Configuration& b);
std::pair<std::vector<int>, std::vector<int>> discrepancy_pairs(const Configuration& a, const Configuration& b);
// Leftmost `count` particles packed onto 1..count, the rest untouched.
Configuration pack_leftmost(const Configuration& xi, int count);

}  // namespace sepmix
