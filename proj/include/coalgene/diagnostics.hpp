#ifndef COALGENE_DIAGNOSTICS_HPP
#define COALGENE_DIAGNOSTICS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coalgene/coag_measures.hpp"
#include "coalgene/engine.hpp"
#include "coalgene/linalg.hpp"
#include "coalgene/population_models.hpp"
#include "coalgene/special_functions.hpp"

namespace coalgene {

// One comparison row of a check. Statistical rows carry a z threshold,
// deterministic and asymptotic rows a relative tolerance; informational rows
// are reported but excluded from the verdict.
struct CheckRow {
    std::string quantity;
    double estimate = 0.0;
    double stderror = 0.0;
    double target = 0.0;
    double zscore = 0.0;
    std::optional<double> tol_rel;
    std::optional<double> tol_z;
    bool informational = false;

    bool within() const;
};

enum class Verdict { Pass, Fail, Indeterminate };

struct CheckReport {
    std::string name;
    std::string params_echo; // JSON text of the inputs
    std::vector<CheckRow> rows;
    Verdict verdict = Verdict::Indeterminate;
    std::string tolerance_policy;
    std::vector<std::string> notes;

    // Pass iff every verdict-carrying row is within bounds; callers may
    // force Indeterminate before evaluation.
    void conclude(bool indeterminate = false);
    std::string to_json() const;
};

// Empirical one-step matrix vs the limit semigroup e^{tQ}.
// The one-step transition matrix on partitions of {1..n} is assembled from
// per-block-count increment estimates, powered floor(t / c_hat) times, and
// compared entrywise. An informational row compares against the discrete
// chain (Id + c_hat Q)^k, which is the correct limit when c_N stays positive.
CheckReport check_semigroup(const ModelSpec& model, const MeasureSpec& limit, int N,
                            int n, const std::vector<double>& times,
                            long long replicates, uint64_t seed, int threads = 0,
                            bool raw_counting = false, double tol = 0.05);

// E[eta_1^b] / c_N vs lambda_{b,b}/lambda_{2,2} for b = 2..b_max, per N.
CheckReport check_lambda_criterion(const ModelSpec& model, const LambdaMeasure& limit,
                                   const std::vector<int>& n_list, int b_max,
                                   long long replicates, uint64_t seed,
                                   int threads = 0, double tol = 0.10);

// E[sum_{i>=2} eta_i^3]/c_N and E[eta_1^beta]/c_N must decrease along the
// N-list and end below 0.1.
CheckReport check_kingman_criterion(const ModelSpec& model,
                                    const std::vector<int>& n_list,
                                    double beta_exponent, long long replicates,
                                    uint64_t seed, int threads = 0);

// Size-biased shape functionals (1/c_N) E[prod s_i^{b_i-1} prod (1-S_i)],
// computed per draw through the injective-sum identity, with optional
// targets from the (pair-rate-normalized) limit measure.
CheckReport check_xi_functionals(const ModelSpec& model,
                                 const std::optional<MeasureSpec>& limit,
                                 const std::vector<int>& n_list,
                                 const std::vector<std::vector<int>>& shapes,
                                 long long replicates, uint64_t seed,
                                 int threads = 0, double tol = 0.15);

// Without- vs with-replacement transition matrices for an offspring model:
// mean max-row discrepancy, its ratio to E[1/sigma], and c_N vs the
// falling-factorial variant, across the N-list.
CheckReport check_replacement_equivalence(const ModelSpec& model,
                                          const std::vector<int>& n_list, int n,
                                          long long replicates, uint64_t seed,
                                          int threads = 0);

enum class BottleneckRegime { RareBottleneck, FrequentBase, Balanced };

// Scaled one-step transitions against the regime's predicted coagulation
// rates: a_N * P for the bottleneck-dominated and balanced regimes, P / c_N
// for the base-dominated regime.
CheckReport check_bottleneck_regimes(const BottleneckSpec& model,
                                     BottleneckRegime regime,
                                     const std::optional<MeasureSpec>& base_limit,
                                     const std::vector<int>& n_list, int n,
                                     long long replicates, uint64_t seed,
                                     int threads = 0, double tol = 0.10);

// Power-weight model asymptotics. For theta in (-alpha, alpha):
// c_N u_N^{1+theta/alpha} vs (1-theta/alpha)/ell, plus merger-ratio rows
// against the Beta(1-theta/alpha, 1+theta/alpha) rates; informational rows
// carry the integral-route targets (exponent (theta+alpha)/gamma and
// constant cn_limit_constant), and a note reports which family the data
// supports. For theta >= alpha: boundedness of c_N u_N^2 (log-corrected at
// theta = alpha) and the Kingman ratios.
CheckReport check_pd_theorem(const PDParams& params, const std::vector<int>& n_list,
                             long long replicates, uint64_t seed, int threads = 0,
                             double tol = 0.15);

// c_N sum_{i<=N} i^{-kappa} against the two candidate constants (the
// displayed one and the theta = 0 specialization of the ell route), plus the
// Bolthausen-Sznitman merger ratios. The report flags which candidate the
// data supports and whether the two are numerically indistinguishable.
CheckReport check_em_theorem(double beta, double kappa, const std::vector<int>& n_list,
                             long long replicates, uint64_t seed, int threads = 0,
                             double tol = 0.15);

// Direct particle-system sampler vs the Poisson-Dirichlet representation:
// joint z-scores of E[sum eta^2], E[sum eta^3], E[eta_1^2].
CheckReport check_em_equivalence(double beta, double kappa, int N, long long M,
                                 long long replicates, uint64_t seed,
                                 int threads = 0);

// One-step transitions at finite N vs the paint-box law of a fixed limiting
// mass partition (models whose ranked weights converge in law).
CheckReport check_discrete_limit(const ModelSpec& model, const MassPartition& rho_infty,
                                 int N, int n, long long replicates, uint64_t seed,
                                 int threads = 0);

// Assembles the full one-step transition matrix on partitions of {1..n}
// from per-block-count increment estimates (shared by semigroup/bottleneck).
Matrix one_step_matrix(const ModelSpec& model, int N, int n, long long replicates,
                       uint64_t seed, int threads, bool raw_counting,
                       const std::vector<Partition>& states);

const char* verdict_name(Verdict v);

} // namespace coalgene

#endif
