#include "coalgene/population_models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "coalgene/quadrature.hpp"

namespace coalgene {

WeightVector::WeightVector(std::vector<double> eta) {
    if (eta.empty()) throw std::invalid_argument("WeightVector: empty");
    double sum = 0.0;
    for (double w : eta) {
        if (!(w >= 0.0)) throw std::invalid_argument("WeightVector: negative entry");
        sum += w;
    }
    if (!(sum > 0.0)) throw std::invalid_argument("WeightVector: zero mass");
    if (std::fabs(sum - 1.0) > 1e-10) {
        for (double& w : eta) w /= sum;
    }
    eta_ = std::move(eta);
}

double WeightVector::sum_sq() const {
    double s = 0.0;
    for (double w : eta_) s += w * w;
    return s;
}

double WeightVector::sum_pow(double b) const {
    double s = 0.0;
    for (double w : eta_)
        if (w > 0.0) s += std::pow(w, b);
    return s;
}

OffspringVector::OffspringVector(std::vector<long long> counts) {
    if (counts.empty()) throw std::invalid_argument("OffspringVector: empty");
    for (long long c : counts)
        if (c < 0) throw std::invalid_argument("OffspringVector: negative count");
    nu = std::move(counts);
    sigma = std::accumulate(nu.begin(), nu.end(), 0ll);
}

double BottleneckSpec::f_value(int k, int b_n) const {
    if (k < 1 || k > b_n) return 0.0;
    if (f_kind == FKind::PowerLaw) return std::pow(double(k), -power_tau);
    for (const auto& [kk, w] : f_atoms)
        if (kk == k) return w;
    return 0.0;
}

double BottleneckSpec::f_sum(int b_n) const {
    double s = 0.0;
    if (f_kind == FKind::PowerLaw) {
        for (int k = 1; k <= b_n; ++k) s += std::pow(double(k), -power_tau);
    } else {
        for (const auto& [k, w] : f_atoms)
            if (k >= 1 && k <= b_n) s += w;
    }
    return s;
}

long long BottleneckSpec::b_n_for(int N) const {
    return std::max<long long>(1, (long long)std::floor(std::pow(double(N), b_exp)));
}

double BottleneckSpec::a_n_for(int N) const { return std::pow(double(N), a_exp); }

std::string model_kind_name(const ModelSpec& spec) {
    struct V {
        std::string operator()(const EldonWakeleySpec&) { return "eldon_wakeley"; }
        std::string operator()(const BottleneckSpec&) { return "bottleneck"; }
        std::string operator()(const PDPowerSpec&) { return "pd_power"; }
        std::string operator()(const ExponentialModelSpec&) { return "exponential"; }
        std::string operator()(const ExplicitSpec& e) {
            return e.weights ? "explicit_weights" : "explicit_offspring";
        }
    };
    return std::visit(V{}, spec);
}

bool model_is_awf(const ModelSpec& spec) {
    if (std::holds_alternative<EldonWakeleySpec>(spec)) return false;
    if (const auto* e = std::get_if<ExplicitSpec>(&spec)) return e->weights.has_value();
    return true;
}

bool model_is_ac(const ModelSpec& spec) {
    if (std::holds_alternative<EldonWakeleySpec>(spec)) return true;
    if (const auto* e = std::get_if<ExplicitSpec>(&spec)) return e->offspring.has_value();
    return false;
}

void validate_model(const ModelSpec& spec) {
    if (const auto* ew = std::get_if<EldonWakeleySpec>(&spec)) {
        if (ew->base.kind == LambdaMeasure::Kind::Kingman)
            throw std::invalid_argument(
                "eldon_wakeley: base measure must be point masses or beta");
        if (!(ew->epsilon > 0.0 && ew->epsilon < 1.0))
            throw std::invalid_argument("eldon_wakeley: epsilon must lie in (0,1)");
    } else if (const auto* bn = std::get_if<BottleneckSpec>(&spec)) {
        if (bn->f_kind == BottleneckSpec::FKind::Atoms) {
            for (const auto& [k, w] : bn->f_atoms)
                if (k < 1 || !(w >= 0.0))
                    throw std::invalid_argument("bottleneck: bad F atom");
        } else if (!(bn->power_tau > 1.0)) {
            throw std::invalid_argument("bottleneck: power-law tau must exceed 1");
        }
        if (!(bn->a_exp > 0.0) || !(bn->b_exp >= 0.0))
            throw std::invalid_argument("bottleneck: bad a_exp/b_exp");
        if (bn->nu_bar == BottleneckSpec::NuBarKind::Dirichlet && !(bn->dirichlet_c > 0.0))
            throw std::invalid_argument("bottleneck: dirichlet parameter must be > 0");
        if (bn->eta_hat == BottleneckSpec::EtaHatKind::Explicit &&
            bn->eta_hat_weights.empty())
            throw std::invalid_argument("bottleneck: explicit eta_hat without weights");
    } else if (const auto* pd = std::get_if<PDPowerSpec>(&spec)) {
        pd->params.validate();
    } else if (const auto* em = std::get_if<ExponentialModelSpec>(&spec)) {
        if (!(em->beta > 1.0))
            throw std::invalid_argument("exponential: beta must exceed 1");
        if (!(em->kappa > 0.0))
            throw std::invalid_argument("exponential: kappa must be positive");
    } else if (const auto* ex = std::get_if<ExplicitSpec>(&spec)) {
        if (ex->weights.has_value() == ex->offspring.has_value())
            throw std::invalid_argument(
                "explicit: exactly one of weights/offspring must be given");
    }
}

namespace {

std::vector<double> pad_to(std::vector<double> v, int N, const char* what) {
    if (int(v.size()) > N)
        throw std::invalid_argument(std::string(what) + ": vector longer than N");
    v.resize(size_t(N), 0.0);
    return v;
}

// eta_i = V_i^g / sum_j V_j^g from the stick-breaking picks of PD(alpha,
// theta); all products kept in log space.
std::vector<double> pd_power_weights(const PDParams& p, double g, int N,
                                     RngStream& rng) {
    std::vector<double> log_v(static_cast<size_t>(N));
    double log_rem = 0.0;
    for (int i = 1; i <= N; ++i) {
        const auto [ly, l1my] =
            rng.log_beta_pair(1.0 - p.alpha, p.theta + double(i) * p.alpha);
        log_v[size_t(i - 1)] = log_rem + ly;
        log_rem += l1my;
    }
    double m = -INFINITY;
    for (double lv : log_v) m = std::max(m, g * lv);
    std::vector<double> w(static_cast<size_t>(N));
    double sum = 0.0;
    for (int i = 0; i < N; ++i) {
        w[size_t(i)] = std::exp(g * log_v[size_t(i)] - m);
        sum += w[size_t(i)];
    }
    for (double& x : w) x /= sum;
    return w;
}

// ---- Eldon-Wakeley replacement-fraction sampler ------------------------

// Inverse-CDF tables for the truncated density y^{-2} Lambda(dy) on (t, 1].
struct EwYTable {
    bool discrete = false;
    // discrete case
    std::vector<double> atom_p, atom_cum;
    // continuous case: geometric grid with panel-cumulative integrals
    double t = 0.0, a = 0.0, b = 0.0;
    std::vector<double> xs, cum;
    double total = 0.0;
};

double ew_density_integral(double a, double b, double lo, double hi) {
    // integral of y^{a-3} (1-y)^{b-1} over (lo, hi); lo > 0 keeps the left
    // end regular, the right end is handled by the (1-y)^b substitution.
    auto f = [&](double y) { return std::pow(y, a - 3.0); };
    return beta_kernel_integral(f, 1.0, b, lo, hi, 1e-13);
}

const EwYTable& ew_table(const EldonWakeleySpec& spec, int N) {
    static thread_local std::map<std::string, EwYTable> cache;
    std::ostringstream key;
    key << measure_spec_to_string(MeasureSpec{spec.base}) << '#' << spec.epsilon
        << '#' << N;
    auto it = cache.find(key.str());
    if (it != cache.end()) return it->second;

    EwYTable tab;
    const double t = std::pow(double(N), (spec.epsilon - 1.0) / 2.0);
    tab.t = t;
    if (spec.base.kind == LambdaMeasure::Kind::PointMasses) {
        tab.discrete = true;
        double acc = 0.0;
        for (const auto& [p, w] : spec.base.points) {
            if (p <= t) continue;
            acc += w / (p * p);
            tab.atom_p.push_back(p);
            tab.atom_cum.push_back(acc);
        }
        if (tab.atom_p.empty())
            throw std::invalid_argument(
                "eldon_wakeley: no point mass above the truncation level");
        tab.total = acc;
    } else {
        tab.a = spec.base.beta_a;
        tab.b = spec.base.beta_b;
        const int panels = 512;
        tab.xs.resize(panels + 1);
        tab.cum.resize(panels + 1, 0.0);
        // geometric spacing from t to 1 suits the y^{-2}-tilted density
        for (int j = 0; j <= panels; ++j)
            tab.xs[size_t(j)] = std::pow(t, 1.0 - double(j) / panels);
        tab.xs.back() = 1.0;
        for (int j = 1; j <= panels; ++j)
            tab.cum[size_t(j)] = tab.cum[size_t(j - 1)] +
                                 ew_density_integral(tab.a, tab.b, tab.xs[size_t(j - 1)],
                                                     tab.xs[size_t(j)]);
        tab.total = tab.cum.back();
    }
    return cache.emplace(key.str(), std::move(tab)).first->second;
}

double ew_draw_y(const EldonWakeleySpec& spec, int N, RngStream& rng) {
    const EwYTable& tab = ew_table(spec, N);
    const double u = rng.next_double() * tab.total;
    if (tab.discrete) {
        const auto it = std::upper_bound(tab.atom_cum.begin(), tab.atom_cum.end(), u);
        const size_t idx = std::min(tab.atom_p.size() - 1,
                                    size_t(it - tab.atom_cum.begin()));
        return tab.atom_p[idx];
    }
    const auto it = std::upper_bound(tab.cum.begin(), tab.cum.end(), u);
    size_t j = size_t(it - tab.cum.begin());
    if (j == 0) j = 1;
    if (j >= tab.xs.size()) j = tab.xs.size() - 1;
    // bisection inside the panel down to a 1e-10 bracket
    double lo = tab.xs[j - 1], hi = tab.xs[j];
    double base = tab.cum[j - 1];
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        const double g = base + ew_density_integral(tab.a, tab.b, tab.xs[j - 1], mid);
        if (g < u)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

WeightVector sample_weights(const ModelSpec& spec, int N, RngStream& rng) {
    if (N < 1) throw std::invalid_argument("sample_weights: N must be >= 1");
    validate_model(spec);
    if (const auto* ex = std::get_if<ExplicitSpec>(&spec)) {
        if (!ex->weights)
            throw std::invalid_argument("sample_weights: explicit model has no weights");
        return WeightVector(pad_to(*ex->weights, N, "sample_weights"));
    }
    if (const auto* pd = std::get_if<PDPowerSpec>(&spec)) {
        return WeightVector(pd_power_weights(pd->params, pd->params.gamma, N, rng));
    }
    if (const auto* em = std::get_if<ExponentialModelSpec>(&spec)) {
        const PDParams p{1.0 / em->beta, 0.0, em->kappa / em->beta};
        return WeightVector(pd_power_weights(p, p.gamma, N, rng));
    }
    if (const auto* bn = std::get_if<BottleneckSpec>(&spec)) {
        const long long b_n = bn->b_n_for(N);
        const double f_sum = bn->f_sum(int(b_n));
        const double p_bn = f_sum / bn->a_n_for(N);
        if (p_bn > 1.0)
            throw std::invalid_argument(
                "bottleneck: event probability above 1 at this N; raise a_exp");
        if (rng.next_double() < p_bn) {
            // survivor count k proportional to F(k), k <= b_N
            const double u = rng.next_double() * f_sum;
            double acc = 0.0;
            int k = 1;
            for (int kk = 1; kk <= int(b_n); ++kk) {
                acc += bn->f_value(kk, int(b_n));
                if (u <= acc) {
                    k = kk;
                    break;
                }
                k = kk;
            }
            std::vector<double> bar(static_cast<size_t>(k), 1.0 / double(k));
            if (bn->nu_bar == BottleneckSpec::NuBarKind::Dirichlet) {
                double s = 0.0;
                for (int i = 0; i < k; ++i) {
                    bar[size_t(i)] = rng.gamma(bn->dirichlet_c);
                    s += bar[size_t(i)];
                }
                for (double& x : bar) x /= s;
            }
            return WeightVector(pad_to(std::move(bar), N, "bottleneck"));
        }
        if (bn->eta_hat == BottleneckSpec::EtaHatKind::WrightFisher)
            return WeightVector(std::vector<double>(size_t(N), 1.0 / double(N)));
        return WeightVector(pad_to(bn->eta_hat_weights, N, "bottleneck"));
    }
    throw std::invalid_argument("sample_weights: model '" + model_kind_name(spec) +
                                "' does not produce weight vectors");
}

OffspringVector sample_offspring(const ModelSpec& spec, int N, RngStream& rng) {
    if (N < 1) throw std::invalid_argument("sample_offspring: N must be >= 1");
    validate_model(spec);
    if (const auto* ex = std::get_if<ExplicitSpec>(&spec)) {
        if (!ex->offspring)
            throw std::invalid_argument("sample_offspring: explicit model has no offspring");
        std::vector<long long> nu = *ex->offspring;
        if (int(nu.size()) > N)
            throw std::invalid_argument("sample_offspring: vector longer than N");
        nu.resize(size_t(N), 0);
        return OffspringVector(std::move(nu));
    }
    const auto* ew = std::get_if<EldonWakeleySpec>(&spec);
    if (!ew)
        throw std::invalid_argument("sample_offspring: model '" +
                                    model_kind_name(spec) +
                                    "' does not produce offspring vectors");
    const double y = ew_draw_y(*ew, N, rng);
    const long long m = (long long)std::floor(y * double(N));
    std::vector<long long> nu(static_cast<size_t>(N), 0);
    if (m <= 1) {
        // degenerate replacement event: nothing replaced
        std::fill(nu.begin(), nu.end(), 1);
        return OffspringVector(std::move(nu));
    }
    const long long k = (long long)rng.uniform_int(uint64_t(N));
    nu[size_t(k)] = m;
    // N - m survivors drawn uniformly without replacement from the rest
    const long long survivors = N - m;
    if (survivors > 0) {
        std::vector<int> rest;
        rest.reserve(size_t(N - 1));
        for (int i = 0; i < N; ++i)
            if (i != int(k)) rest.push_back(i);
        for (long long i = 0; i < survivors; ++i) {
            const long long j = i + (long long)rng.uniform_int(uint64_t(N - 1 - i));
            std::swap(rest[size_t(i)], rest[size_t(j)]);
            nu[size_t(rest[size_t(i)])] = 1;
        }
    }
    return OffspringVector(std::move(nu));
}

Partition awf_increment(const WeightVector& eta, int n, RngStream& rng) {
    if (n < 1 || size_t(n) > eta.size())
        throw std::invalid_argument("awf_increment: need 1 <= n <= N");
    std::vector<double> cum(eta.size());
    double acc = 0.0;
    for (size_t i = 0; i < eta.size(); ++i) {
        acc += eta[i];
        cum[i] = acc;
    }
    std::vector<long long> parent(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double u = rng.next_double() * acc;
        parent[size_t(i)] =
            (long long)(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    }
    return group_by_parent(parent);
}

Partition ac_increment(const OffspringVector& nu, int n, RngStream& rng) {
    if (n < 1) throw std::invalid_argument("ac_increment: n must be >= 1");
    if ((long long)n > nu.sigma)
        throw std::invalid_argument("ac_increment: n exceeds total offspring");
    std::vector<long long> cum(nu.nu.size());
    long long acc = 0;
    for (size_t i = 0; i < nu.nu.size(); ++i) {
        acc += nu.nu[i];
        cum[i] = acc;
    }
    std::unordered_set<long long> chosen;
    std::vector<long long> parent(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        long long slot;
        do {
            slot = (long long)rng.uniform_int(uint64_t(nu.sigma));
        } while (!chosen.insert(slot).second);
        parent[size_t(i)] =
            (long long)(std::upper_bound(cum.begin(), cum.end(), slot) - cum.begin());
    }
    return group_by_parent(parent);
}

namespace {

// Sum over injective assignments of blocks to atoms of prod factor(atom,
// block). Subset DP over blocks, streamed over atoms.
double injective_sum(size_t n_atoms, int r,
                     const std::function<double(size_t, int)>& factor) {
    if (r > 8) throw std::invalid_argument("transition: at most 8 blocks supported");
    const uint32_t full = (1u << r) - 1;
    std::vector<double> f(size_t(full) + 1, 0.0);
    f[0] = 1.0;
    for (size_t atom = 0; atom < n_atoms; ++atom) {
        for (uint32_t s = full;; --s) {
            if (f[s] != 0.0) {
                for (int j = 0; j < r; ++j) {
                    if (s & (1u << j)) continue;
                    const double fac = factor(atom, j);
                    if (fac != 0.0) f[s | (1u << j)] += f[s] * fac;
                }
            }
            if (s == 0) break;
        }
    }
    return f[full];
}

double falling_factorial(double a, int b) {
    double p = 1.0;
    for (int i = 0; i < b; ++i) p *= (a - double(i));
    return p;
}

} // namespace

double exact_transition_awf(const WeightVector& eta, const Partition& pi_tilde) {
    if (pi_tilde.n() > 8)
        throw std::invalid_argument("exact_transition_awf: pi_tilde.n <= 8 required");
    std::vector<double> atoms;
    atoms.reserve(eta.size());
    for (size_t i = 0; i < eta.size(); ++i)
        if (eta[i] > 0.0) atoms.push_back(eta[i]);
    const int r = pi_tilde.block_count();
    std::vector<int> sizes(static_cast<size_t>(r));
    for (int j = 0; j < r; ++j) sizes[size_t(j)] = int(pi_tilde.block(j).size());
    return injective_sum(atoms.size(), r, [&](size_t a, int j) {
        return std::pow(atoms[a], double(sizes[size_t(j)]));
    });
}

double exact_transition_ac(const OffspringVector& nu, const Partition& pi_tilde) {
    const int n = pi_tilde.n();
    if (n > 8)
        throw std::invalid_argument("exact_transition_ac: pi_tilde.n <= 8 required");
    if (nu.sigma < n)
        throw std::invalid_argument("exact_transition_ac: total offspring below n");
    std::vector<long long> atoms;
    atoms.reserve(nu.nu.size());
    for (long long c : nu.nu)
        if (c > 0) atoms.push_back(c);
    const int r = pi_tilde.block_count();
    std::vector<int> sizes(static_cast<size_t>(r));
    for (int j = 0; j < r; ++j) sizes[size_t(j)] = int(pi_tilde.block(j).size());
    const double numerator = injective_sum(atoms.size(), r, [&](size_t a, int j) {
        return falling_factorial(double(atoms[a]), sizes[size_t(j)]);
    });
    return numerator / falling_factorial(double(nu.sigma), n);
}

SizeBiasedSequence size_biased_reorder(const WeightVector& eta, RngStream& rng) {
    // Exponential race: sorting E_i / eta_i ascending realizes sequential
    // size-biased sampling without replacement.
    std::vector<std::pair<double, size_t>> keys;
    keys.reserve(eta.size());
    for (size_t i = 0; i < eta.size(); ++i)
        if (eta[i] > 0.0) keys.emplace_back(rng.exponential() / eta[i], i);
    std::sort(keys.begin(), keys.end());
    SizeBiasedSequence out;
    out.s.resize(eta.size(), 0.0);
    out.positive_count = keys.size();
    for (size_t k = 0; k < keys.size(); ++k) out.s[k] = eta[keys[k].second];
    return out;
}

WeightVector em_weights_from_positions(double kappa,
                                       std::span<const double> positions) {
    if (positions.empty())
        throw std::invalid_argument("em_weights_from_positions: empty positions");
    double m = -INFINITY;
    for (double x : positions) m = std::max(m, kappa * x);
    std::vector<double> w(positions.size());
    for (size_t i = 0; i < positions.size(); ++i)
        w[i] = std::exp(kappa * positions[i] - m);
    return WeightVector(std::move(w));
}

EmGeneration em_generation_direct(double beta, double kappa,
                                  std::span<const double> parent_positions,
                                  long long M, RngStream& rng) {
    if (!(beta > 1.0))
        throw std::invalid_argument("em_generation_direct: beta must exceed 1");
    const long long N = (long long)parent_positions.size();
    if (N < 1) throw std::invalid_argument("em_generation_direct: no parents");
    if (M < 10 * N)
        throw std::invalid_argument("em_generation_direct: M must be at least 10*N");

    // X_eq = log sum e^{kappa X_j}
    double xmax = -INFINITY;
    for (double x : parent_positions) xmax = std::max(xmax, kappa * x);
    double sexp = 0.0;
    for (double x : parent_positions) sexp += std::exp(kappa * x - xmax);
    const double x_eq = xmax + std::log(sexp);

    // top-M atoms of the superposed process: z_i = X_eq - log T_i
    std::vector<double> z(static_cast<size_t>(M));
    double t_arr = 0.0;
    for (long long i = 0; i < M; ++i) {
        t_arr += rng.exponential();
        z[size_t(i)] = x_eq - std::log(t_arr);
    }
    // selection without replacement with weight e^{beta z}: exponential race
    std::vector<std::pair<double, long long>> keys(static_cast<size_t>(M));
    for (long long i = 0; i < M; ++i)
        keys[size_t(i)] = {std::log(rng.exponential()) - beta * z[size_t(i)], i};
    std::partial_sort(keys.begin(), keys.begin() + size_t(N), keys.end());

    // tail beyond atom M: sum_{i>M} T_i^{-beta} ~ T_M^{1-beta}/(beta-1)
    double sel_mass = 0.0;
    const double zscale = beta * z[0];
    for (long long i = 0; i < M; ++i) sel_mass += std::exp(beta * z[size_t(i)] - zscale);
    const double tail = std::exp(beta * x_eq - zscale) *
                        std::pow(t_arr, 1.0 - beta) / (beta - 1.0);

    EmGeneration out;
    out.child_positions.resize(size_t(N));
    out.parent_of.resize(size_t(N));
    out.tail_weight_fraction = tail / (sel_mass + tail);
    out.truncation_flagged = out.tail_weight_fraction > 1e-6;

    // parents chosen independently with probability e^{kappa X_i} / sum
    std::vector<double> cum(static_cast<size_t>(N));
    double acc = 0.0;
    for (long long i = 0; i < N; ++i) {
        acc += std::exp(kappa * parent_positions[size_t(i)] - xmax);
        cum[size_t(i)] = acc;
    }
    for (long long c = 0; c < N; ++c) {
        out.child_positions[size_t(c)] = z[size_t(keys[size_t(c)].second)];
        const double u = rng.next_double() * acc;
        out.parent_of[size_t(c)] =
            1 + int(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    }
    return out;
}

} // namespace coalgene
