#include "coalgene/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace coalgene {

Partition::Partition(int n) : n_(n) {
    if (n <= 0) throw std::invalid_argument("Partition: n must be positive");
    block_of_.resize(size_t(n));
    blocks_.resize(size_t(n));
    for (int i = 0; i < n; ++i) {
        block_of_[size_t(i)] = i;
        blocks_[size_t(i)] = {i};
    }
}

Partition Partition::from_blocks(int n, std::vector<std::vector<int>> blocks) {
    if (n <= 0) throw std::invalid_argument("Partition: n must be positive");
    Partition p;
    p.n_ = n;
    p.block_of_.assign(size_t(n), -1);
    for (auto& b : blocks) {
        if (b.empty()) throw std::invalid_argument("Partition: empty block");
        std::sort(b.begin(), b.end());
    }
    std::sort(blocks.begin(), blocks.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    for (size_t k = 0; k < blocks.size(); ++k) {
        for (int e : blocks[k]) {
            if (e < 0 || e >= n)
                throw std::invalid_argument("Partition: element out of range");
            if (p.block_of_[size_t(e)] != -1)
                throw std::invalid_argument("Partition: duplicated element");
            p.block_of_[size_t(e)] = int32_t(k);
        }
    }
    for (int i = 0; i < n; ++i)
        if (p.block_of_[size_t(i)] == -1)
            throw std::invalid_argument("Partition: blocks do not cover {1..n}");
    p.blocks_ = std::move(blocks);
    return p;
}

Partition Partition::from_labels(std::span<const long long> labels) {
    if (labels.empty()) throw std::invalid_argument("Partition: empty label list");
    Partition p;
    p.n_ = int(labels.size());
    p.block_of_.assign(labels.size(), -1);
    std::unordered_map<long long, int32_t> seen;
    seen.reserve(labels.size());
    int32_t next = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
        auto [it, fresh] = seen.emplace(labels[i], next);
        if (fresh) ++next;
        p.block_of_[i] = it->second;
    }
    p.rebuild_blocks_from_indices();
    return p;
}

void Partition::rebuild_blocks_from_indices() {
    int32_t nblocks = 0;
    for (int32_t b : block_of_) nblocks = std::max(nblocks, b + 1);
    blocks_.assign(size_t(nblocks), {});
    for (size_t i = 0; i < block_of_.size(); ++i)
        blocks_[size_t(block_of_[i])].push_back(int(i));
}

bool Partition::is_single_pair_merger() const {
    if (block_count() != n_ - 1) return false;
    for (const auto& b : blocks_)
        if (b.size() == 2) return true;
    return false;
}

std::string Partition::encode() const {
    std::ostringstream out;
    for (size_t k = 0; k < blocks_.size(); ++k) {
        if (k) out << '|';
        for (size_t j = 0; j < blocks_[k].size(); ++j) {
            if (j) out << ',';
            out << blocks_[k][j] + 1;
        }
    }
    return out.str();
}

Partition Partition::decode(const std::string& text) {
    std::vector<std::vector<int>> blocks;
    std::stringstream ss(text);
    std::string blk;
    int max_e = 0;
    while (std::getline(ss, blk, '|')) {
        std::vector<int> b;
        std::stringstream bs(blk);
        std::string tok;
        while (std::getline(bs, tok, ',')) {
            size_t pos = 0;
            const int e = std::stoi(tok, &pos);
            if (pos != tok.size() || e < 1)
                throw std::invalid_argument("Partition::decode: bad index '" + tok + "'");
            b.push_back(e - 1);
            max_e = std::max(max_e, e);
        }
        if (b.empty()) throw std::invalid_argument("Partition::decode: empty block");
        blocks.push_back(std::move(b));
    }
    if (blocks.empty()) throw std::invalid_argument("Partition::decode: empty text");
    return from_blocks(max_e, std::move(blocks));
}

Partition coagulate(const Partition& pi, const Partition& pi_prime) {
    if (pi_prime.n() < pi.block_count())
        throw std::invalid_argument(
            "coagulate: inadmissible pair (|pi| > pi_prime.n)");
    std::vector<std::vector<int>> merged;
    merged.reserve(size_t(pi_prime.block_count()));
    for (const auto& group : pi_prime.blocks()) {
        std::vector<int> u;
        for (int j : group) {
            if (j >= pi.block_count()) continue; // pi_j empty past |pi|
            const auto& b = pi.block(j);
            u.insert(u.end(), b.begin(), b.end());
        }
        if (!u.empty()) merged.push_back(std::move(u));
    }
    return Partition::from_blocks(pi.n(), std::move(merged));
}

Partition restrict_to(const Partition& pi, int m) {
    if (m < 1 || m > pi.n())
        throw std::invalid_argument("restrict_to: m out of range");
    std::vector<std::vector<int>> blocks;
    for (const auto& b : pi.blocks()) {
        std::vector<int> nb;
        for (int e : b)
            if (e < m) nb.push_back(e);
        if (!nb.empty()) blocks.push_back(std::move(nb));
    }
    return Partition::from_blocks(m, std::move(blocks));
}

std::vector<int> block_sizes_desc(const Partition& pi) {
    std::vector<int> sizes;
    sizes.reserve(size_t(pi.block_count()));
    for (const auto& b : pi.blocks()) sizes.push_back(int(b.size()));
    std::sort(sizes.begin(), sizes.end(), std::greater<int>());
    return sizes;
}

Partition group_by_parent(std::span<const long long> parent_of) {
    return Partition::from_labels(parent_of);
}

long long bell_number(int n) {
    // Bell triangle
    if (n < 0) throw std::invalid_argument("bell_number: n must be >= 0");
    std::vector<long long> row = {1};
    for (int i = 1; i <= n; ++i) {
        std::vector<long long> next = {row.back()};
        for (long long v : row) next.push_back(next.back() + v);
        row = std::move(next);
    }
    return row.front();
}

std::vector<Partition> enumerate_partitions(int n) {
    if (n < 1 || n > 7)
        throw std::invalid_argument("enumerate_partitions: supported for 1 <= n <= 7");
    std::vector<Partition> out;
    out.reserve(size_t(bell_number(n)));
    // Restricted-growth strings: label[i] <= 1 + max(label[0..i-1]).
    std::vector<long long> label(static_cast<size_t>(n), 0);
    std::function<void(int, long long)> rec = [&](int i, long long used) {
        if (i == n) {
            out.push_back(Partition::from_labels(label));
            return;
        }
        for (long long v = 0; v <= used; ++v) {
            label[size_t(i)] = v;
            rec(i + 1, used + (v == used ? 1 : 0));
        }
    };
    rec(0, 0);
    return out;
}

MassPartition::MassPartition(std::vector<double> weights) {
    double sum = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
        const double w = weights[i];
        if (!(w >= 0.0) || w > 1.0 + kTolerance)
            throw std::invalid_argument("MassPartition: weight out of [0,1]");
        if (i > 0 && w > weights[i - 1] + kTolerance)
            throw std::invalid_argument("MassPartition: weights must be non-increasing");
        sum += w;
    }
    if (sum > 1.0 + kTolerance)
        throw std::invalid_argument("MassPartition: weights sum to more than 1");
    // normalize by clamping: drop trailing zeros, clamp dust at 0
    while (!weights.empty() && weights.back() <= 0.0) weights.pop_back();
    for (size_t i = 1; i < weights.size(); ++i)
        weights[i] = std::min(weights[i], weights[i - 1]);
    weights_ = std::move(weights);
    dust_ = std::max(0.0, 1.0 - sum);
}

double MassPartition::sum_sq() const {
    double s = 0.0;
    for (double w : weights_) s += w * w;
    return s;
}

Partition paintbox_sample(const MassPartition& rho, int n, RngStream& rng) {
    if (n < 1) throw std::invalid_argument("paintbox_sample: n must be >= 1");
    const auto& w = rho.weights();
    std::vector<double> cum(w.size());
    double acc = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        cum[i] = acc;
    }
    std::vector<long long> labels(static_cast<size_t>(n));
    long long dust_label = -1; // dust points get unique negative labels
    for (int i = 0; i < n; ++i) {
        const double u = rng.next_double();
        if (u >= acc) {
            labels[size_t(i)] = dust_label--;
            continue;
        }
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        labels[size_t(i)] = 1 + (it - cum.begin());
    }
    return Partition::from_labels(labels);
}

} // namespace coalgene
