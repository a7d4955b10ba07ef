#ifndef COALGENE_PARTITION_HPP
#define COALGENE_PARTITION_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coalgene/rng.hpp"

namespace coalgene {

// Partition of {1..n} with blocks ordered by least element. Internally
// 0-based; the text encoding ("1,2,4|3") and everything user-facing is
// 1-based. The per-element block index array is the canonical equality
// witness; the block lists are kept alongside for iteration.
class Partition {
  public:
    // Partition of singletons 0_n.
    explicit Partition(int n);

    // From 0-based blocks; validates disjointness/coverage and reorders by
    // least element.
    static Partition from_blocks(int n, std::vector<std::vector<int>> blocks);

    // Children sharing a label share a block.
    static Partition from_labels(std::span<const long long> labels);

    int n() const { return n_; }
    int block_count() const { return int(blocks_.size()); }
    const std::vector<std::vector<int>>& blocks() const { return blocks_; }
    const std::vector<int>& block(int k) const { return blocks_[size_t(k)]; }
    int block_of(int element) const { return block_of_[size_t(element)]; }
    const std::vector<int32_t>& block_index_array() const { return block_of_; }

    bool is_singletons() const { return block_count() == n_; }
    bool is_single_pair_merger() const;

    bool operator==(const Partition& o) const {
        return n_ == o.n_ && block_of_ == o.block_of_;
    }
    bool operator!=(const Partition& o) const { return !(*this == o); }

    // Canonical text form, e.g. "1,2,4|3" for {{1,2,4},{3}}.
    std::string encode() const;
    static Partition decode(const std::string& text);

  private:
    Partition() = default;
    void rebuild_blocks_from_indices();

    int n_ = 0;
    std::vector<int32_t> block_of_; // element -> block index (canonical order)
    std::vector<std::vector<int>> blocks_;
};

struct PartitionHash {
    size_t operator()(const Partition& p) const {
        size_t h = size_t(p.n()) * 0x9E3779B97F4A7C15ull;
        for (int32_t b : p.block_index_array())
            h = (h ^ size_t(uint32_t(b)) ) * 0x100000001B3ull;
        return h;
    }
};

// Coag(pi, pi_prime): k-th raw block is the union of pi's blocks indexed by
// pi_prime's k-th block; empty unions dropped, result reordered by least
// element. Requires pi_prime.n >= |pi|.
Partition coagulate(const Partition& pi, const Partition& pi_prime);

// Restriction to {1..m}.
Partition restrict_to(const Partition& pi, int m);

std::vector<int> block_sizes_desc(const Partition& pi);

// parent_of[i] is the parent label of child i+1; children with equal labels
// share a block.
Partition group_by_parent(std::span<const long long> parent_of);

// All partitions of {1..n}; n <= 7 (Bell(7) = 877).
std::vector<Partition> enumerate_partitions(int n);

long long bell_number(int n);

// Non-increasing non-negative weights with sum <= 1; the deficit is dust.
// Inputs violating monotonicity or sum <= 1 by more than 1e-12 are rejected;
// within-tolerance sums are clamped.
class MassPartition {
  public:
    explicit MassPartition(std::vector<double> weights);

    const std::vector<double>& weights() const { return weights_; }
    double dust() const { return dust_; }
    size_t atom_count() const { return weights_.size(); }
    double sum_sq() const;

    static constexpr double kTolerance = 1e-12;

  private:
    std::vector<double> weights_;
    double dust_ = 1.0;
};

// Paint-box: drops n i.i.d. uniforms on the weight intervals; indices in the
// same interval share a block, dust indices become singletons. The dust
// interval is the suffix [1 - rho_0, 1).
Partition paintbox_sample(const MassPartition& rho, int n, RngStream& rng);

} // namespace coalgene

#endif
