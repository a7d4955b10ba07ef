#ifndef COALGENE_RNG_HPP
#define COALGENE_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace coalgene {

// Philox4x32-10 counter-based generator (Salmon et al. 2011).
// A block is a pure function of (key, counter), so streams keyed by
// (seed, replicate, salt) are reproducible across platforms and thread
// counts. Verified against the published known-answer vectors in tests.
struct Philox4x32 {
    static constexpr uint32_t kMul0 = 0xD2511F53u;
    static constexpr uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<uint32_t, 4> block(std::array<uint32_t, 4> x,
                                         std::array<uint32_t, 2> k) {
        for (int round = 0; round < 10; ++round) {
            const uint64_t p0 = uint64_t(kMul0) * x[0];
            const uint64_t p1 = uint64_t(kMul1) * x[2];
            const uint32_t hi0 = uint32_t(p0 >> 32), lo0 = uint32_t(p0);
            const uint32_t hi1 = uint32_t(p1 >> 32), lo1 = uint32_t(p1);
            x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        return x;
    }
};

// One logical random stream. The 128-bit counter is laid out as
// (draw index lo, draw index hi, replicate, salt); the 64-bit seed is the
// key. Every distribution below consumes the stream sequentially, so a
// fixed (seed, replicate, salt) triple yields a fixed sequence.
class RngStream {
  public:
    explicit RngStream(uint64_t seed, uint32_t replicate = 0, uint32_t salt = 0)
        : key_{uint32_t(seed), uint32_t(seed >> 32)}, replicate_(replicate),
          salt_(salt) {}

    uint32_t next_u32() {
        if (have_ == 0) {
            buf_ = Philox4x32::block({uint32_t(draws_), uint32_t(draws_ >> 32),
                                      replicate_, salt_},
                                     key_);
            ++draws_;
            have_ = 4;
        }
        return buf_[4 - have_--];
    }

    uint64_t next_u64() {
        const uint64_t hi = next_u32();
        return (hi << 32) | next_u64_low();
    }

    // Uniform on [0,1) with 53 random bits.
    double next_double() {
        return double(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0,1]; safe as a log() argument.
    double next_double_pos() { return 1.0 - next_double(); }

    double uniform(double a, double b) { return a + (b - a) * next_double(); }

    // Uniform integer on [0, n), unbiased via rejection.
    uint64_t uniform_int(uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_int: n must be > 0");
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    double exponential(double rate = 1.0) {
        return -std::log(next_double_pos()) / rate;
    }

    // Marsaglia polar method with one cached value.
    double normal() {
        if (has_cached_normal_) {
            has_cached_normal_ = false;
            return cached_normal_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_double() - 1.0;
            v = 2.0 * next_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        cached_normal_ = v * f;
        has_cached_normal_ = true;
        return u * f;
    }

    // Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 handled by the
    // standard boost G_a = G_{a+1} U^{1/a}.
    double gamma(double shape) {
        if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0);
            return g * std::pow(next_double_pos(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_double_pos();
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // log of a Gamma(shape, 1) draw; exact in log-space for tiny shapes
    // where the plain draw would underflow.
    double log_gamma_draw(double shape) {
        if (!(shape > 0.0)) throw std::invalid_argument("log_gamma_draw: shape must be > 0");
        if (shape < 1.0) {
            return std::log(gamma(shape + 1.0)) + std::log(next_double_pos()) / shape;
        }
        return std::log(gamma(shape));
    }

    double beta(double a, double b) {
        const auto [ly, l1my] = log_beta_pair(a, b);
        (void)l1my;
        return std::exp(ly);
    }

    // Draws Y ~ Beta(a,b) and returns (log Y, log(1-Y)), both accurate even
    // when Y is within double rounding of 0 or 1.
    std::pair<double, double> log_beta_pair(double a, double b) {
        const double lga = log_gamma_draw(a);
        const double lgb = log_gamma_draw(b);
        // log(e^x + e^y) with the max factored out
        const double m = lga > lgb ? lga : lgb;
        const double d = (lga > lgb ? lgb : lga) - m;
        const double lsum = m + std::log1p(std::exp(d));
        return {lga - lsum, lgb - lsum};
    }

  private:
    uint64_t next_u64_low() { return next_u32(); }

    std::array<uint32_t, 2> key_;
    uint32_t replicate_;
    uint32_t salt_;
    uint64_t draws_ = 0;
    std::array<uint32_t, 4> buf_{};
    int have_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

} // namespace coalgene

#endif
