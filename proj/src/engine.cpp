#include "coalgene/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace coalgene {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? int(hw) : 1;
}

void SimulationSpec::validate() const {
    validate_model(model);
    if (N < 1) throw std::invalid_argument("SimulationSpec: N must be >= 1");
    if (n < 1 || n > N) throw std::invalid_argument("SimulationSpec: need 1 <= n <= N");
    if (replicates < 1)
        throw std::invalid_argument("SimulationSpec: replicates must be >= 1");
    if (!horizon && !t_max)
        throw std::invalid_argument("SimulationSpec: either horizon or t_max required");
}

GenealogyTrajectory simulate_genealogy(const ModelSpec& model, int N, int n,
                                       long long horizon, RngStream& rng) {
    if (n < 1 || n > N)
        throw std::invalid_argument("simulate_genealogy: need 1 <= n <= N");
    const bool awf = model_is_awf(model);
    GenealogyTrajectory traj;
    Partition current(n);
    traj.steps.emplace_back(0, current);
    for (long long gen = 1; gen <= horizon; ++gen) {
        if (current.block_count() == 1) break;
        const int m = current.block_count();
        // one representative child per block; the increment on m children has
        // the law of the coagulation increment restricted to the blocks
        Partition inc = awf ? awf_increment(sample_weights(model, N, rng), m, rng)
                            : ac_increment(sample_offspring(model, N, rng), m, rng);
        if (!inc.is_singletons()) {
            current = coagulate(current, inc);
            traj.steps.emplace_back(gen, current);
        }
        traj.final_generation = gen;
    }
    traj.absorbed = current.block_count() == 1;
    return traj;
}

CnEstimate estimate_cn(const ModelSpec& model, int N, long long replicates,
                       uint64_t seed, int threads) {
    validate_model(model);
    threads = resolve_threads(threads);
    const bool awf = model_is_awf(model);
    const long long chunks = n_chunks_for(replicates);
    std::vector<Accumulator> formula_slots(static_cast<size_t>(chunks));
    std::vector<Accumulator> empirical_slots(static_cast<size_t>(chunks));
    run_replicates(replicates, threads, [&](long long rep, size_t chunk) {
        {
            RngStream rng(seed, uint32_t(rep), stream_salt::kCnFormula);
            if (awf) {
                formula_slots[chunk].add(sample_weights(model, N, rng).sum_sq());
            } else {
                const OffspringVector nu = sample_offspring(model, N, rng);
                double s = 0.0;
                for (long long c : nu.nu) s += double(c) * double(c - 1);
                formula_slots[chunk].add(
                    s / (double(nu.sigma) * double(nu.sigma - 1)));
            }
        }
        {
            RngStream rng(seed, uint32_t(rep), stream_salt::kCnEmpirical);
            const Partition inc =
                awf ? awf_increment(sample_weights(model, N, rng), 2, rng)
                    : ac_increment(sample_offspring(model, N, rng), 2, rng);
            empirical_slots[chunk].add(inc.block_count() == 1 ? 1.0 : 0.0);
        }
    });
    Accumulator f = merge_chunks(formula_slots);
    Accumulator e = merge_chunks(empirical_slots);
    return {f.estimate(), e.estimate()};
}

const EstimateWithError& TransitionEstimate::at(const Partition& p) const {
    for (size_t i = 0; i < states.size(); ++i)
        if (states[i] == p) return probabilities[i];
    throw std::invalid_argument("TransitionEstimate: partition not found");
}

TransitionEstimate estimate_transition(const ModelSpec& model, int N, int n,
                                       long long replicates, uint64_t seed,
                                       int threads, bool raw_counting) {
    validate_model(model);
    if (n < 2 || n > 5)
        throw std::invalid_argument("estimate_transition: need 2 <= n <= 5");
    threads = resolve_threads(threads);
    const bool awf = model_is_awf(model);
    const auto states = enumerate_partitions(n);
    const size_t ns = states.size();
    const long long chunks = n_chunks_for(replicates);
    std::vector<std::vector<Accumulator>> slots(static_cast<size_t>(chunks),
                                                std::vector<Accumulator>(ns));
    run_replicates(replicates, threads, [&](long long rep, size_t chunk) {
        RngStream rng(seed, uint32_t(rep), stream_salt::kTransition);
        auto& acc = slots[chunk];
        if (raw_counting) {
            const Partition inc =
                awf ? awf_increment(sample_weights(model, N, rng), n, rng)
                    : ac_increment(sample_offspring(model, N, rng), n, rng);
            for (size_t i = 0; i < ns; ++i)
                acc[i].add(states[i] == inc ? 1.0 : 0.0);
            return;
        }
        if (awf) {
            const WeightVector eta = sample_weights(model, N, rng);
            for (size_t i = 0; i < ns; ++i)
                acc[i].add(exact_transition_awf(eta, states[i]));
        } else {
            const OffspringVector nu = sample_offspring(model, N, rng);
            for (size_t i = 0; i < ns; ++i)
                acc[i].add(exact_transition_ac(nu, states[i]));
        }
    });
    TransitionEstimate out;
    out.states = states;
    out.probabilities.resize(ns);
    for (size_t i = 0; i < ns; ++i) {
        std::vector<Accumulator> per_chunk;
        per_chunk.reserve(size_t(chunks));
        for (auto& row : slots) per_chunk.push_back(row[i]);
        Accumulator acc = merge_chunks(per_chunk);
        out.probabilities[i] = acc.estimate();
    }
    return out;
}

std::vector<WeightMomentsRow> estimate_weight_moments(const ModelSpec& model, int N,
                                                      const std::vector<int>& b_list,
                                                      long long replicates,
                                                      uint64_t seed, int threads) {
    validate_model(model);
    for (int b : b_list)
        if (b < 2 || b > 8)
            throw std::invalid_argument("estimate_weight_moments: b must lie in [2,8]");
    if (!model_is_awf(model))
        throw std::invalid_argument(
            "estimate_weight_moments: AWF-type model required");
    threads = resolve_threads(threads);
    const size_t nb = b_list.size();
    const long long chunks = n_chunks_for(replicates);
    struct Row {
        Accumulator first, rest, total;
    };
    std::vector<std::vector<Row>> slots(static_cast<size_t>(chunks), std::vector<Row>(nb));
    run_replicates(replicates, threads, [&](long long rep, size_t chunk) {
        RngStream rng(seed, uint32_t(rep), stream_salt::kMoments);
        const WeightVector eta = sample_weights(model, N, rng);
        for (size_t k = 0; k < nb; ++k) {
            const double b = double(b_list[k]);
            const double e1 = std::pow(eta[0], b);
            double rest = 0.0;
            for (size_t i = 1; i < eta.size(); ++i)
                if (eta[i] > 0.0) rest += std::pow(eta[i], b);
            auto& row = slots[chunk][k];
            row.first.add(e1);
            row.rest.add(rest);
            row.total.add(e1 + rest);
        }
    });
    std::vector<WeightMomentsRow> out;
    out.reserve(nb);
    for (size_t k = 0; k < nb; ++k) {
        std::vector<Accumulator> f, r, t;
        for (auto& row : slots) {
            f.push_back(row[k].first);
            r.push_back(row[k].rest);
            t.push_back(row[k].total);
        }
        out.push_back({b_list[k], merge_chunks(f).estimate(), merge_chunks(r).estimate(),
                       merge_chunks(t).estimate()});
    }
    return out;
}

EstimateWithError estimate_shape_functional(const ModelSpec& model, int N,
                                            const std::vector<int>& shape,
                                            long long replicates, uint64_t seed,
                                            int threads) {
    validate_model(model);
    if (!model_is_awf(model))
        throw std::invalid_argument("estimate_shape_functional: AWF-type model required");
    if (shape.empty() || shape.size() > 3)
        throw std::invalid_argument("estimate_shape_functional: 1 <= j <= 3 blocks");
    int total = 0;
    for (size_t i = 0; i < shape.size(); ++i) {
        if (shape[i] < 2 || shape[i] > 4)
            throw std::invalid_argument("estimate_shape_functional: sizes in [2,4]");
        if (i > 0 && shape[i] > shape[i - 1])
            throw std::invalid_argument("estimate_shape_functional: non-increasing shape");
        total += shape[i];
    }
    threads = resolve_threads(threads);
    // the injective-sum value equals the conditional expectation over the
    // size-biased reordering of prod s_i^{b_i-1} prod (1 - S_i)
    std::vector<std::vector<int>> blocks;
    int at = 0;
    for (int b : shape) {
        std::vector<int> blk;
        for (int j = 0; j < b; ++j) blk.push_back(at++);
        blocks.push_back(std::move(blk));
    }
    const Partition pi_tilde = Partition::from_blocks(total, std::move(blocks));
    const long long chunks = n_chunks_for(replicates);
    std::vector<Accumulator> slots(static_cast<size_t>(chunks));
    run_replicates(replicates, threads, [&](long long rep, size_t chunk) {
        RngStream rng(seed, uint32_t(rep), stream_salt::kShape);
        const WeightVector eta = sample_weights(model, N, rng);
        slots[chunk].add(exact_transition_awf(eta, pi_tilde));
    });
    return merge_chunks(slots).estimate();
}

} // namespace coalgene
