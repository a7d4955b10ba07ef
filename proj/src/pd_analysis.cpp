#include "coalgene/pd_analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace coalgene {

StickBreakingPath stick_breaking(const PDParams& params, int N, RngStream& rng) {
    params.validate();
    if (N < 1) throw std::invalid_argument("stick_breaking: N must be >= 1");
    StickBreakingPath path;
    path.params = params;
    path.N = N;
    path.log_y.resize(size_t(N));
    path.log_one_minus_y.resize(size_t(N));
    path.log_v.resize(size_t(N));
    path.s.resize(size_t(N));
    path.mu.resize(size_t(N));
    double log_rem = 0.0;
    double mu = 0.0;
    const double a = params.alpha, t = params.theta;
    double psi_prev = digamma(t + 1.0);
    for (int i = 1; i <= N; ++i) {
        const auto [ly, l1my] = rng.log_beta_pair(1.0 - a, t + double(i) * a);
        path.log_y[size_t(i - 1)] = ly;
        path.log_one_minus_y[size_t(i - 1)] = l1my;
        path.log_v[size_t(i - 1)] = log_rem + ly;
        log_rem += l1my;
        // mu_i - mu_{i-1} = -E[log(1-Y_i)] = psi(theta+(i-1)alpha+1) - psi(theta+i alpha)
        const double psi_cur = digamma(t + double(i) * a);
        mu += psi_prev - psi_cur;
        psi_prev = psi_cur + 1.0 / (t + double(i) * a); // psi(theta + i alpha + 1)
        path.mu[size_t(i - 1)] = mu;
        path.s[size_t(i - 1)] = mu + log_rem;
    }
    return path;
}

double u_n(const PDParams& params, long long N) {
    params.validate();
    if (N < 1) throw std::invalid_argument("u_n: N must be >= 1");
    const double e = params.gamma / params.alpha;
    double s = 0.0, c = 0.0;
    for (long long i = 1; i <= N; ++i) {
        const double x = std::pow(double(i), -e) - c;
        const double t = s + x;
        c = (t - s) - x;
        s = t;
    }
    return s;
}

double mu_n(const PDParams& params, long long N) {
    params.validate();
    if (N < 1) throw std::invalid_argument("mu_n: N must be >= 1");
    const double a = params.alpha, t = params.theta;
    double sum = 0.0, c = 0.0;
    for (long long i = 1; i <= N - 1; ++i) {
        const double x = 1.0 / (t + double(i) * a) - c;
        const double tt = sum + x;
        c = (tt - sum) - x;
        sum = tt;
    }
    return digamma(t + 1.0) - digamma(t + double(N) * a) + sum;
}

double zeta(const StickBreakingPath& path, double g) {
    double s = 0.0, c = 0.0;
    for (double lv : path.log_v) {
        const double x = std::exp(g * lv) - c;
        const double t = s + x;
        c = (t - s) - x;
        s = t;
    }
    return s;
}

MartingaleDecomposition martingale_decomposition(const StickBreakingPath& path,
                                                 double g) {
    const double a = path.params.alpha, t = path.params.theta;
    MartingaleDecomposition out;
    // running log of e^{-g mu_{i-1}} e^{g S_{i-1}} = g * sum_{j<i} log(1-Y_j)
    double log_prefix = 0.0;
    for (int i = 1; i <= path.N; ++i) {
        const double log_ey =
            log_beta_fn(1.0 + g - a, t + double(i) * a) -
            log_beta_fn(1.0 - a, t + double(i) * a);
        const double prefix = std::exp(g * log_prefix);
        const double ygi = std::exp(g * path.log_y[size_t(i - 1)]);
        out.sigma_sum += std::exp(log_ey) * prefix;
        out.m_bar += (ygi - std::exp(log_ey)) * prefix;
        log_prefix += path.log_one_minus_y[size_t(i - 1)];
    }
    return out;
}

EstimateWithError s_infty_check(const PDParams& params, int N, long long replicates,
                                uint64_t seed, int threads) {
    params.validate();
    if (!(params.gamma > -(params.theta + params.alpha)))
        throw std::invalid_argument(
            "s_infty_check: need gamma > -(theta+alpha) for a finite limit");
    if (threads <= 0) threads = int(std::thread::hardware_concurrency());
    if (params.gamma == 0.0) return {1.0, 0.0, replicates};
    const double g = params.gamma;
    std::vector<Accumulator> slots(static_cast<size_t>(n_chunks_for(replicates)));
    // streams salted so other estimators on the same seed stay independent
    run_replicates(replicates, threads, [&](long long rep, size_t chunk) {
        RngStream rng(seed, uint32_t(rep), /*salt=*/0x51u);
        const double a = params.alpha, t = params.theta;
        double log_rem = 0.0;
        for (int i = 1; i <= N; ++i)
            log_rem += rng.log_beta_pair(1.0 - a, t + double(i) * a).second;
        // e^{g S_N} = e^{g mu_N} prod (1-Y_i)^g
        slots[chunk].add(std::exp(g * log_rem));
    });
    Accumulator acc = merge_chunks(slots);
    const double scale = std::exp(g * mu_n(params, N));
    return {scale * acc.mean(), scale * acc.stderror(), acc.count()};
}

double exp_gamma_s_n_exact(const PDParams& params, int N) {
    params.validate();
    const double a = params.alpha, t = params.theta, g = params.gamma;
    if (!(g > -(t + a)))
        throw std::invalid_argument("exp_gamma_s_n_exact: need gamma > -(theta+alpha)");
    // E[(1-Y_i)^g] = B(theta + i alpha + g, 1-alpha) / B(theta + i alpha, 1-alpha)
    double log_e = g * mu_n(params, N);
    for (int i = 1; i <= N; ++i) {
        const double x = t + double(i) * a;
        log_e += log_gamma(x + g) - log_gamma(x) -
                 (log_gamma(x + g + 1.0 - a) - log_gamma(x + 1.0 - a));
    }
    return std::exp(log_e);
}

ChangeOfParamReport change_of_param_check(const PDParams& params, long long replicates,
                                          uint64_t seed, int threads) {
    params.validate();
    if (threads <= 0) threads = int(std::thread::hardware_concurrency());
    const double a = params.alpha, t = params.theta;
    // V_2/(1-V_1) = Y_2, so under the shifted parameters it must match
    // V_1' ~ Beta(1-alpha, theta + 2 alpha): closed-form moment targets.
    const long long n_chunks = n_chunks_for(replicates);
    std::vector<std::array<Accumulator, 3>> slots(static_cast<size_t>(n_chunks));
    run_replicates(replicates, threads, [&](long long rep, size_t chunk) {
        RngStream rng(seed, uint32_t(rep), /*salt=*/0x52u);
        const double y1 = rng.beta(1.0 - a, t + a);
        if (y1 >= 1.0)
            throw std::runtime_error("change_of_param_check: V_1 = 1 drawn");
        const double y2 = rng.beta(1.0 - a, t + 2.0 * a);
        const double v2_over = ((1.0 - y1) * y2) / (1.0 - y1);
        double p = 1.0;
        for (int k = 0; k < 3; ++k) {
            p *= v2_over;
            slots[chunk][size_t(k)].add(p);
        }
    });
    ChangeOfParamReport report;
    for (int k = 1; k <= 3; ++k) {
        std::vector<Accumulator> per_chunk;
        per_chunk.reserve(size_t(n_chunks));
        for (auto& sa : slots) per_chunk.push_back(sa[size_t(k - 1)]);
        Accumulator acc = merge_chunks(per_chunk);
        // E[Beta(1-a, t+2a)^k] via the Gamma-ratio formula
        const double target =
            std::exp(log_beta_fn(1.0 - a + k, t + 2.0 * a) -
                     log_beta_fn(1.0 - a, t + 2.0 * a));
        const EstimateWithError est = acc.estimate();
        report.rows.push_back({k, est, target, est.zscore_vs(target)});
    }
    return report;
}

double cn_scale_exponent(const PDParams& params) {
    params.validate_gamma_window();
    return (params.theta + params.alpha) / params.gamma;
}

double zeta_over_u_limit_mean(const PDParams& params) {
    params.validate_gamma_window();
    const double a = params.alpha, t = params.theta, g = params.gamma;
    return std::exp(log_gamma(1.0 + g - a) - log_gamma(1.0 - a) +
                    log_gamma(t + 1.0) - log_gamma(t + g + 1.0) +
                    log_gamma((t + g) / a + 1.0) - log_gamma(t / a + 1.0));
}

double cn_limit_constant(const PDParams& params) {
    const double s = cn_scale_exponent(params);
    if (!(s < 2.0))
        throw std::invalid_argument(
            "cn_limit_constant: requires theta < 2 gamma - alpha (s < 2)");
    const double a = params.alpha, t = params.theta, g = params.gamma;
    const double t_shift = t + a;
    // W = (Gamma(1+g-a)/Gamma(1-a)) K'^{-g} e^{g S'} under PD(alpha,
    // theta+alpha), so E'[W^{-s}] = W_c^{-s} E'[e^{-s g S'}] with the K'
    // factors cancelling between the two terms.
    const double log_k = std::log(k_const({a, t_shift, g}));
    const double log_wc = log_gamma(1.0 + g - a) - log_gamma(1.0 - a) - g * log_k;
    const double log_ews =
        -s * log_wc + std::log(exp_gamma_s_infty(a, t_shift, -s * g));
    return std::exp(log_beta_fn(s, 2.0 - s) - std::log(g) -
                    log_beta_fn(1.0 - a, t_shift) + log_ews);
}

double limit_merger_ratio(const PDParams& params, int b) {
    const double s = cn_scale_exponent(params);
    if (b < 2) throw std::invalid_argument("limit_merger_ratio: b must be >= 2");
    if (!(s < 2.0))
        throw std::invalid_argument("limit_merger_ratio: requires s < 2");
    return std::exp(log_beta_fn(s, double(b) - s) - log_beta_fn(s, 2.0 - s));
}

} // namespace coalgene
