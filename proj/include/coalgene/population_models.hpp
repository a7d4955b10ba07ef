#ifndef COALGENE_POPULATION_MODELS_HPP
#define COALGENE_POPULATION_MODELS_HPP

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "coalgene/coag_measures.hpp"
#include "coalgene/partition.hpp"
#include "coalgene/rng.hpp"
#include "coalgene/special_functions.hpp"

namespace coalgene {

// Family frequencies eta of one generation; renormalized on construction
// (inputs off by more than 1e-10 are rejected).
class WeightVector {
  public:
    explicit WeightVector(std::vector<double> eta);
    const std::vector<double>& eta() const { return eta_; }
    size_t size() const { return eta_.size(); }
    double operator[](size_t i) const { return eta_[i]; }
    double sum_sq() const;
    double sum_pow(double b) const;

  private:
    std::vector<double> eta_;
};

// Offspring counts nu of one generation; sigma = sum nu_i >= N is required
// when the vector feeds a without-replacement sample of size N.
struct OffspringVector {
    std::vector<long long> nu;
    long long sigma = 0;

    explicit OffspringVector(std::vector<long long> counts);
};

// One individual replaces floor(Y*N) of the population; Y is drawn from the
// truncated density y^{-2} Lambda(dy) 1{y > N^{(eps-1)/2}}.
struct EldonWakeleySpec {
    LambdaMeasure base;   // PointMasses or Beta
    double epsilon;       // in (0,1)
};

// eta = eta_bar * B + eta_hat * (1 - B); a bottleneck leaves k survivors
// with probability proportional to F(k), k <= b_N = floor(N^{b_exp}), and
// happens with probability sum_{k<=b_N} F(k) / N^{a_exp}.
struct BottleneckSpec {
    enum class FKind { Atoms, PowerLaw };
    enum class NuBarKind { Uniform, Dirichlet };
    enum class EtaHatKind { WrightFisher, Explicit };

    FKind f_kind = FKind::Atoms;
    std::vector<std::pair<int, double>> f_atoms; // (k, F(k))
    double power_tau = 2.0;                      // F(k) = k^-tau, k <= b_N
    double a_exp = 0.5;
    double b_exp = 0.25;
    NuBarKind nu_bar = NuBarKind::Uniform;
    double dirichlet_c = 1.0;
    EtaHatKind eta_hat = EtaHatKind::WrightFisher;
    std::vector<double> eta_hat_weights;

    double f_value(int k, int b_n) const;
    double f_sum(int b_n) const;
    long long b_n_for(int N) const;
    double a_n_for(int N) const;
};

// eta_i = V_i^gamma / sum_j V_j^gamma with V the stick-breaking size-biased
// picks of PD(alpha, theta).
struct PDPowerSpec {
    PDParams params;
};

// Branching-selection particle system; sampled through its Poisson-Dirichlet
// representation (exact), with PD(1/beta, 0) and exponent kappa/beta.
struct ExponentialModelSpec {
    double beta;             // > 1
    double kappa;            // in (1/2, 1]
    long long truncation_m;  // atom count of the direct sampler (>= 10 N)
};

struct ExplicitSpec {
    std::optional<std::vector<double>> weights;
    std::optional<std::vector<long long>> offspring;
};

using ModelSpec = std::variant<EldonWakeleySpec, BottleneckSpec, PDPowerSpec,
                               ExponentialModelSpec, ExplicitSpec>;

std::string model_kind_name(const ModelSpec& spec);
bool model_is_awf(const ModelSpec& spec);  // produces weight vectors
bool model_is_ac(const ModelSpec& spec);   // produces offspring vectors
void validate_model(const ModelSpec& spec);

// One i.i.d. draw of the family-frequency vector (AWF-type models only).
WeightVector sample_weights(const ModelSpec& spec, int N, RngStream& rng);

// One i.i.d. draw of the offspring vector (AC-type models only).
OffspringVector sample_offspring(const ModelSpec& spec, int N, RngStream& rng);

// Coagulation increment on n children: each child independently picks a
// parent with probabilities eta (sampling with replacement).
Partition awf_increment(const WeightVector& eta, int n, RngStream& rng);

// Coagulation increment on n children sampled without replacement among the
// sigma offspring slots.
Partition ac_increment(const OffspringVector& nu, int n, RngStream& rng);

// P(increment = pi_tilde | eta) = sum over distinct parent injections of
// prod eta_{i_k}^{b_k}. pi_tilde.n <= 8.
double exact_transition_awf(const WeightVector& eta, const Partition& pi_tilde);

// Same with falling factorials over (sigma)_n (without replacement).
double exact_transition_ac(const OffspringVector& nu, const Partition& pi_tilde);

// Size-biased reordering of the positive entries, zeros appended.
struct SizeBiasedSequence {
    std::vector<double> s;
    size_t positive_count = 0;
};
SizeBiasedSequence size_biased_reorder(const WeightVector& eta, RngStream& rng);

// Direct one-generation simulation of the branching-selection system:
// children positions from the superposed Poisson process (top M atoms),
// selection of N without replacement with weight e^{beta z}, parents
// assigned with probability proportional to e^{kappa X_i}.
struct EmGeneration {
    std::vector<double> child_positions; // selected children, size N
    std::vector<int> parent_of;          // 1-based parent index per child
    double tail_weight_fraction = 0.0;   // selection mass beyond atom M
    bool truncation_flagged = false;     // tail fraction above 1e-6
};
EmGeneration em_generation_direct(double beta, double kappa,
                                  std::span<const double> parent_positions,
                                  long long M, RngStream& rng);

// Family frequencies e^{kappa z_i} / sum_j e^{kappa z_j} of one generation.
WeightVector em_weights_from_positions(double kappa, std::span<const double> positions);

} // namespace coalgene

#endif
