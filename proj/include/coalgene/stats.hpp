#ifndef COALGENE_STATS_HPP
#define COALGENE_STATS_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace coalgene {

// Monte Carlo point estimate with standard error.
struct EstimateWithError {
    double value = 0.0;
    double stderror = 0.0;
    long long reps = 0;

    double zscore_vs(double target) const {
        if (stderror == 0.0) return value == target ? 0.0 : INFINITY;
        return (value - target) / stderror;
    }
};

// Running mean / second central moment (Welford). Merging two accumulators
// is exact, so a fixed merge tree gives bit-identical results regardless of
// how replicates were distributed over workers.
class Accumulator {
  public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / double(n_);
        m2_ += d * (x - mean_);
    }

    void merge(const Accumulator& o) {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double d = o.mean_ - mean_;
        const long long n = n_ + o.n_;
        mean_ += d * double(o.n_) / double(n);
        m2_ += o.m2_ + d * d * double(n_) * double(o.n_) / double(n);
        n_ = n;
    }

    long long count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / double(n_ - 1) : 0.0; }
    double stddev() const { return std::sqrt(variance()); }
    double stderror() const {
        return n_ > 0 ? std::sqrt(variance() / double(n_)) : 0.0;
    }

    EstimateWithError estimate() const { return {mean(), stderror(), count()}; }

  private:
    long long n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Deterministic pairwise sum of a vector (fixed reduction tree).
inline double pairwise_sum(const std::vector<double>& v) {
    std::function<double(size_t, size_t)> rec = [&](size_t lo, size_t hi) {
        if (hi - lo <= 4) {
            double s = 0.0;
            for (size_t i = lo; i < hi; ++i) s += v[i];
            return s;
        }
        const size_t mid = lo + (hi - lo) / 2;
        return rec(lo, mid) + rec(mid, hi);
    };
    return v.empty() ? 0.0 : rec(0, v.size());
}

// Kahan-compensated left-to-right sum for long deterministic series.
inline double compensated_sum(const std::vector<double>& v) {
    double s = 0.0, c = 0.0;
    for (double x : v) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

// Runs `body(replicate_index, chunk_slot)` for replicate_index in
// [0, replicates). Work is split into fixed chunks of `chunk` replicates;
// workers grab chunk indices from an atomic counter, and per-chunk results
// live in caller-owned slots indexed by chunk. Because the chunk layout and
// the final (sequential) merge order do not depend on the worker count,
// outputs are bit-identical for any `threads`.
template <typename Body>
void run_replicates(long long replicates, int threads, Body&& body,
                    long long chunk = 1024) {
    if (replicates <= 0) return;
    if (threads < 1) threads = 1;
    const long long n_chunks = (replicates + chunk - 1) / chunk;
    std::atomic<long long> next{0};
    auto worker = [&]() {
        for (;;) {
            const long long c = next.fetch_add(1);
            if (c >= n_chunks) break;
            const long long lo = c * chunk;
            const long long hi = std::min(replicates, lo + chunk);
            for (long long r = lo; r < hi; ++r) body(r, size_t(c));
        }
    };
    if (threads == 1 || n_chunks == 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    const int nworkers = int(std::min<long long>(threads, n_chunks));
    pool.reserve(size_t(nworkers));
    for (int t = 0; t < nworkers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

inline long long n_chunks_for(long long replicates, long long chunk = 1024) {
    return replicates <= 0 ? 0 : (replicates + chunk - 1) / chunk;
}

// Fixed-tree merge of per-chunk accumulators into one.
inline Accumulator merge_chunks(std::vector<Accumulator>& slots) {
    std::function<Accumulator(size_t, size_t)> rec =
        [&](size_t lo, size_t hi) -> Accumulator {
        if (hi - lo == 1) return slots[lo];
        const size_t mid = lo + (hi - lo) / 2;
        Accumulator a = rec(lo, mid);
        a.merge(rec(mid, hi));
        return a;
    };
    if (slots.empty()) return {};
    return rec(0, slots.size());
}

} // namespace coalgene

#endif
