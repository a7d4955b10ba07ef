#ifndef COALGENE_ENGINE_HPP
#define COALGENE_ENGINE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coalgene/partition.hpp"
#include "coalgene/population_models.hpp"
#include "coalgene/stats.hpp"

namespace coalgene {

// Number of worker threads: explicit > 0 wins, otherwise hardware count.
int resolve_threads(int requested);

struct SimulationSpec {
    ModelSpec model;
    int N = 0;
    int n = 0;
    std::optional<long long> horizon; // in generations
    std::optional<double> t_max;      // rescaled time; horizon = t_max / c_N
    long long replicates = 1;
    uint64_t seed = 0;

    void validate() const;
};

struct GenealogyTrajectory {
    // (generation, partition) at 0 and at each change point
    std::vector<std::pair<long long, Partition>> steps;
    bool absorbed = false;
    long long final_generation = 0;
};

// Runs the sampled-genealogy chain from singletons: one representative child
// per surviving block per generation, fresh model randomness each step.
GenealogyTrajectory simulate_genealogy(const ModelSpec& model, int N, int n,
                                       long long horizon, RngStream& rng);

struct CnEstimate {
    EstimateWithError formula;   // E[sum eta^2] or falling-factorial form
    EstimateWithError empirical; // raw two-child merge frequency
};

// formula: per-draw sum eta_i^2 (AWF) or sum nu_i(nu_i-1)/(sigma(sigma-1))
// (AC); empirical: indicator that a fresh two-child increment merged.
CnEstimate estimate_cn(const ModelSpec& model, int N, long long replicates,
                       uint64_t seed, int threads = 0);

// Per-increment transition estimates over all partitions of {1..n}.
// Rao-Blackwellized by default: each draw contributes the exact conditional
// transition probability given the sampled weights; raw mode counts sampled
// increments instead.
struct TransitionEstimate {
    std::vector<Partition> states;
    std::vector<EstimateWithError> probabilities;

    const EstimateWithError& at(const Partition& p) const;
};
TransitionEstimate estimate_transition(const ModelSpec& model, int N, int n,
                                       long long replicates, uint64_t seed,
                                       int threads = 0, bool raw_counting = false);

// MC table of E[eta_1^b], E[sum_{i>=2} eta_i^b], E[sum_i eta_i^b].
struct WeightMomentsRow {
    int b;
    EstimateWithError first;      // E[eta_1^b]
    EstimateWithError rest_sum;   // E[sum_{i>=2} eta_i^b]
    EstimateWithError total_sum;  // E[sum_i eta_i^b]
};
std::vector<WeightMomentsRow> estimate_weight_moments(const ModelSpec& model, int N,
                                                      const std::vector<int>& b_list,
                                                      long long replicates,
                                                      uint64_t seed, int threads = 0);

// Size-biased shape functional estimate: per draw, the injective sum
// sum_{distinct} prod eta_{i_k}^{b_k} for the given non-increasing shape.
EstimateWithError estimate_shape_functional(const ModelSpec& model, int N,
                                            const std::vector<int>& shape,
                                            long long replicates, uint64_t seed,
                                            int threads = 0);

// Fixed stream salts so estimators sharing one seed never overlap. The
// moments estimator shares the c_N formula stream on purpose: both consume
// exactly one weight draw per replicate, so E[sum eta^2] from the moments
// table coincides bit-for-bit with the c_N formula estimate at equal seeds.
namespace stream_salt {
constexpr uint32_t kGenealogy = 1;
constexpr uint32_t kCnFormula = 2;
constexpr uint32_t kCnEmpirical = 3;
constexpr uint32_t kTransition = 4;
constexpr uint32_t kMoments = kCnFormula;
constexpr uint32_t kShape = 6;
constexpr uint32_t kOracle = 7;
constexpr uint32_t kEmDirect = 8;
} // namespace stream_salt

} // namespace coalgene

#endif
