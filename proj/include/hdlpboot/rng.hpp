#pragma once

#include <cmath>
#include <cstdint>
#include <cstddef>

#include "hdlpboot/errors.hpp"
#include "hdlpboot/matrix.hpp"

namespace hdlpboot {

namespace detail {

// Threefry-2x64, 20 rounds (Salmon, Moraes, Dror, Shaw 2011).
struct Threefry2x64 {
    static constexpr std::uint64_t kParity = 0x1BD11BDAA9FC1A22ULL;
    static constexpr int kRot[8] = {16, 42, 12, 31, 16, 32, 24, 21};

    static std::uint64_t rotl(std::uint64_t x, int r) { return (x << r) | (x >> (64 - r)); }

    // Encrypts counter (c0, c1) under key (k0, k1); both output words.
    static void block(std::uint64_t k0, std::uint64_t k1, std::uint64_t c0, std::uint64_t c1,
                      std::uint64_t& o0, std::uint64_t& o1) {
        const std::uint64_t ks[3] = {k0, k1, kParity ^ k0 ^ k1};
        std::uint64_t x0 = c0 + ks[0];
        std::uint64_t x1 = c1 + ks[1];
        for (int r = 0; r < 20; ++r) {
            x0 += x1;
            x1 = rotl(x1, kRot[r & 7]);
            x1 ^= x0;
            if ((r & 3) == 3) {
                const std::uint64_t s = static_cast<std::uint64_t>(r / 4) + 1;
                x0 += ks[s % 3];
                x1 += ks[(s + 1) % 3] + s;
            }
        }
        o0 = x0;
        o1 = x1;
    }
};

}  // namespace detail

// Counter-based random stream. State is the tuple (seed, stream_id,
// substream, position); equal tuples produce bit-identical output on
// any platform with IEEE doubles, regardless of how work is split
// across threads. Copying is cheap and the only sharing mechanism; a
// single stream must not be advanced from two threads at once.
class RngStream {
  public:
    RngStream() = default;
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_(stream_id) {}

    // Disjoint child stream b. Children occupy substream slots b+1 so
    // slot 0 stays reserved for the parent; one nesting level only.
    RngStream substream(std::uint64_t b) const {
        RngStream s(seed_, stream_);
        s.sub_ = b + 1;
        return s;
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }
    std::uint64_t position() const { return pos_; }

    std::uint64_t next_u64() {
        const std::uint64_t block = pos_ >> 1;
        if (!cached_ || block != cached_block_) {
            detail::Threefry2x64::block(seed_, stream_, block, sub_, out_[0], out_[1]);
            cached_block_ = block;
            cached_ = true;
        }
        return out_[pos_++ & 1];
    }

    // Uniform on (0, 1]: 53-bit mantissa shifted into the unit interval.
    double next_unit() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    // Uniform integer in [0, n) by rejection on the top range.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw DomainError("next_below: n must be positive");
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Box-Muller pair; consumes exactly two words.
    void normal_pair(double& a, double& b) {
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 6.283185307179586476925286766559 * u2;
        a = r * std::cos(th);
        b = r * std::sin(th);
    }

    double next_normal() {
        double a, b;
        normal_pair(a, b);
        return a;
    }

  private:
    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    std::uint64_t sub_ = 0;
    std::uint64_t pos_ = 0;
    std::uint64_t cached_block_ = 0;
    std::uint64_t out_[2] = {0, 0};
    bool cached_ = false;
};

// k i.i.d. N(0,1) draws; consumes exactly 2*ceil(k/2) words.
inline Vector std_normal_vec(RngStream& stream, std::size_t k) {
    Vector v(k);
    std::size_t i = 0;
    for (; i + 1 < k; i += 2) stream.normal_pair(v[i], v[i + 1]);
    if (i < k) {
        double a, b;
        stream.normal_pair(a, b);
        v[i] = a;
    }
    return v;
}

// Writes into a preallocated buffer; same consumption contract.
inline void std_normal_fill(RngStream& stream, double* v, std::size_t k) {
    std::size_t i = 0;
    for (; i + 1 < k; i += 2) stream.normal_pair(v[i], v[i + 1]);
    if (i < k) {
        double a, b;
        stream.normal_pair(a, b);
        v[i] = a;
    }
}

}  // namespace hdlpboot
