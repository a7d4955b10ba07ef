#include "coalgene/commands.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "coalgene/diagnostics.hpp"
#include "coalgene/engine.hpp"
#include "coalgene/io_util.hpp"
#include "coalgene/pd_analysis.hpp"

namespace coalgene {

using nlohmann::json;

uint64_t require_seed(const RunConfig& cfg) {
    if (!cfg.seed)
        throw std::invalid_argument(
            "config error at run/seed: a seed is mandatory for stochastic commands");
    return *cfg.seed;
}

namespace {

const ModelSpec& require_model(const RunConfig& cfg) {
    if (!cfg.model)
        throw std::invalid_argument("config error at model: a model block is required");
    return *cfg.model;
}

const MeasureSpec& require_limit(const RunConfig& cfg) {
    if (!cfg.limit)
        throw std::invalid_argument("config error at limit: a limit block is required");
    return *cfg.limit;
}

int verdict_exit(const CheckReport& report) {
    switch (report.verdict) {
        case Verdict::Pass: return 0;
        case Verdict::Fail: return 2;
        case Verdict::Indeterminate: return 3;
    }
    return 3;
}

} // namespace

CheckReport run_named_check(const std::string& name, const RunConfig& cfg,
                            int threads) {
    const uint64_t seed = require_seed(cfg);
    const double tol = cfg.tolerance.value_or(0.0);
    if (name == "semigroup") {
        std::vector<double> times = cfg.times.empty() ? std::vector<double>{1.0}
                                                      : cfg.times;
        return check_semigroup(require_model(cfg), require_limit(cfg), cfg.n_list.back(),
                               cfg.sample_n, times, cfg.replicates, seed, threads,
                               cfg.raw_counting, tol > 0.0 ? tol : 0.05);
    }
    if (name == "lambda-criterion") {
        const auto& limit = require_limit(cfg);
        if (!std::holds_alternative<LambdaMeasure>(limit))
            throw std::invalid_argument(
                "config error at limit: lambda-criterion needs a Lambda measure");
        const int b_max = cfg.b_list.empty() ? 4 : *std::max_element(cfg.b_list.begin(),
                                                                     cfg.b_list.end());
        return check_lambda_criterion(require_model(cfg),
                                      std::get<LambdaMeasure>(limit), cfg.n_list, b_max,
                                      cfg.replicates, seed, threads,
                                      tol > 0.0 ? tol : 0.10);
    }
    if (name == "kingman-criterion") {
        return check_kingman_criterion(require_model(cfg), cfg.n_list,
                                       cfg.beta_exponent, cfg.replicates, seed, threads);
    }
    if (name == "xi-functionals") {
        auto shapes = cfg.shapes;
        if (shapes.empty()) shapes = {{2}, {2, 2}};
        return check_xi_functionals(require_model(cfg), cfg.limit, cfg.n_list, shapes,
                                    cfg.replicates, seed, threads,
                                    tol > 0.0 ? tol : 0.15);
    }
    if (name == "replacement") {
        return check_replacement_equivalence(require_model(cfg), cfg.n_list,
                                             cfg.sample_n, cfg.replicates, seed,
                                             threads);
    }
    if (name == "bottleneck") {
        const auto* bn = std::get_if<BottleneckSpec>(&require_model(cfg));
        if (!bn)
            throw std::invalid_argument(
                "config error at model: bottleneck check needs a bottleneck model");
        BottleneckRegime regime;
        if (cfg.regime == "i") regime = BottleneckRegime::RareBottleneck;
        else if (cfg.regime == "ii") regime = BottleneckRegime::FrequentBase;
        else if (cfg.regime == "iii") regime = BottleneckRegime::Balanced;
        else throw std::invalid_argument("config error at run/regime: must be i, ii or iii");
        return check_bottleneck_regimes(*bn, regime, cfg.limit, cfg.n_list,
                                        cfg.sample_n, cfg.replicates, seed, threads,
                                        tol > 0.0 ? tol : 0.10);
    }
    if (name == "pd-theorem") {
        const auto* pd = std::get_if<PDPowerSpec>(&require_model(cfg));
        if (!pd)
            throw std::invalid_argument(
                "config error at model: pd-theorem check needs a pd_power model");
        return check_pd_theorem(pd->params, cfg.n_list, cfg.replicates, seed, threads,
                                tol > 0.0 ? tol : 0.15);
    }
    if (name == "em-theorem") {
        const auto* em = std::get_if<ExponentialModelSpec>(&require_model(cfg));
        if (!em)
            throw std::invalid_argument(
                "config error at model: em-theorem check needs an exponential model");
        return check_em_theorem(em->beta, em->kappa, cfg.n_list, cfg.replicates, seed,
                                threads, tol > 0.0 ? tol : 0.15);
    }
    if (name == "em-equivalence") {
        const auto* em = std::get_if<ExponentialModelSpec>(&require_model(cfg));
        if (!em)
            throw std::invalid_argument(
                "config error at model: em-equivalence check needs an exponential model");
        const long long m = cfg.em_truncation > 0 ? cfg.em_truncation
                                                  : (em->truncation_m > 0
                                                         ? em->truncation_m
                                                         : 100ll * cfg.n_list.back());
        return check_em_equivalence(em->beta, em->kappa, cfg.n_list.back(), m,
                                    cfg.replicates, seed, threads);
    }
    if (name == "discrete-limit") {
        if (!cfg.rho_infty)
            throw std::invalid_argument(
                "config error at run/rho_infty: discrete-limit needs the limiting "
                "mass partition");
        return check_discrete_limit(require_model(cfg), MassPartition(*cfg.rho_infty),
                                    cfg.n_list.back(), cfg.sample_n, cfg.replicates,
                                    seed, threads);
    }
    throw std::invalid_argument("unknown check '" + name + "'");
}

int cmd_rates(const std::string& measure, int n, const std::optional<std::string>& out) {
    const MeasureSpec spec = parse_measure_spec(measure);
    std::ostringstream csv;
    if (std::holds_alternative<LambdaMeasure>(spec)) {
        const auto& lm = std::get<LambdaMeasure>(spec);
        if (n < 2) throw std::invalid_argument("rates: n must be >= 2");
        csv << "n_blocks,b,rate\n";
        for (int m = 2; m <= n; ++m)
            for (int b = 2; b <= m; ++b)
                csv << m << ',' << b << ',' << format_g17(lambda_rate(lm, m, b)) << "\n";
    } else {
        const auto& xi = std::get<XiMeasure>(spec);
        if (n < 2 || n > 6)
            throw std::invalid_argument("rates: Xi rate tables need 2 <= n <= 6");
        csv << "pi_prime,rate\n";
        for (const auto& pt : enumerate_partitions(n)) {
            if (pt.is_singletons()) continue;
            csv << pt.encode() << ',' << format_g17(xi_rate(xi, pt)) << "\n";
        }
    }
    write_output(out, csv.str());
    return 0;
}

int cmd_constants(double alpha, double theta, double gamma,
                  const std::optional<std::string>& out) {
    const PDParams p{alpha, theta, gamma};
    p.validate_gamma_window();
    json j;
    j["alpha"] = alpha;
    j["theta"] = theta;
    j["gamma"] = gamma;
    j["kappa_theta_over_alpha"] = em_const(theta / alpha);
    j["K"] = k_const(p);
    j["ell"] = ell_const(p);
    j["exp_gamma_s_infty"] = exp_gamma_s_infty(p);
    write_output(out, j.dump(2) + "\n");
    return 0;
}

int cmd_simulate(const RunConfig& cfg, int threads) {
    const uint64_t seed = require_seed(cfg);
    const ModelSpec& model = require_model(cfg);
    const int N = cfg.n_list.back();
    const int n = cfg.sample_n;
    long long horizon;
    if (cfg.horizon) {
        horizon = *cfg.horizon;
    } else if (cfg.t_max) {
        const CnEstimate cn = estimate_cn(model, N, std::min<long long>(cfg.replicates, 20000),
                                          seed ^ 0x517EDull, threads);
        if (!(cn.formula.value > 0.0))
            throw std::runtime_error("simulate: estimated c_N is zero; cannot rescale t_max");
        horizon = (long long)std::floor(*cfg.t_max / cn.formula.value);
    } else {
        throw std::invalid_argument(
            "config error at run: simulate needs horizon or t_max");
    }
    std::ostringstream csv;
    csv << "replicate,generation,n_blocks,partition\n";
    for (long long rep = 0; rep < cfg.replicates; ++rep) {
        RngStream rng(seed, uint32_t(rep), stream_salt::kGenealogy);
        const GenealogyTrajectory traj = simulate_genealogy(model, N, n, horizon, rng);
        for (const auto& [gen, part] : traj.steps)
            csv << rep << ',' << gen << ',' << part.block_count() << ','
                << '"' << part.encode() << '"' << "\n";
    }
    write_output(cfg.out_path, csv.str());
    return 0;
}

int cmd_estimate_cn(const RunConfig& cfg, int threads) {
    const uint64_t seed = require_seed(cfg);
    const ModelSpec& model = require_model(cfg);
    std::ostringstream csv;
    csv << "quantity,value,stderr,reps,seed\n";
    for (int N : cfg.n_list) {
        const CnEstimate cn = estimate_cn(model, N, cfg.replicates, seed, threads);
        csv << "cn_formula_N=" << N << ',' << format_g17(cn.formula.value) << ','
            << format_g17(cn.formula.stderror) << ',' << cn.formula.reps << ',' << seed
            << "\n";
        csv << "cn_empirical_N=" << N << ',' << format_g17(cn.empirical.value) << ','
            << format_g17(cn.empirical.stderror) << ',' << cn.empirical.reps << ','
            << seed << "\n";
    }
    write_output(cfg.out_path, csv.str());
    return 0;
}

int cmd_transition(const RunConfig& cfg, int threads) {
    const uint64_t seed = require_seed(cfg);
    const ModelSpec& model = require_model(cfg);
    std::ostringstream csv;
    csv << "partition,estimate,stderr,reps,seed\n";
    const TransitionEstimate est =
        estimate_transition(model, cfg.n_list.back(), cfg.sample_n, cfg.replicates,
                            seed, threads, cfg.raw_counting);
    for (size_t i = 0; i < est.states.size(); ++i) {
        csv << '"' << est.states[i].encode() << '"' << ','
            << format_g17(est.probabilities[i].value) << ','
            << format_g17(est.probabilities[i].stderror) << ','
            << est.probabilities[i].reps << ',' << seed << "\n";
    }
    write_output(cfg.out_path, csv.str());
    return 0;
}

int cmd_pd(double alpha, double theta, double gamma, int N, long long replicates,
           uint64_t seed, const std::optional<std::string>& out, int threads) {
    const PDParams p{alpha, theta, gamma};
    p.validate();
    threads = resolve_threads(threads);
    const double u = u_n(p, N);
    const double mu_target = mu_n(p, N);
    const long long chunks = n_chunks_for(replicates);
    // per chunk: e^{gS_N}, -sum log(1-Y), zeta/u, |identity residual|, M_bar/u
    std::vector<std::array<Accumulator, 5>> slots(static_cast<size_t>(chunks));
    run_replicates(replicates, threads, [&](long long rep, size_t chunk) {
        RngStream rng(seed, uint32_t(rep), 0x7Du);
        const StickBreakingPath path = stick_breaking(p, N, rng);
        double sum_log = 0.0;
        for (double l : path.log_one_minus_y) sum_log += l;
        slots[chunk][0].add(std::exp(gamma * path.s.back()));
        slots[chunk][1].add(-sum_log);
        const double z = zeta(path, gamma);
        slots[chunk][2].add(z / u);
        const MartingaleDecomposition dec = martingale_decomposition(path, gamma);
        const double resid = std::fabs(dec.m_bar + dec.sigma_sum - z) /
                             std::max(1.0, std::fabs(z));
        slots[chunk][3].add(resid);
        slots[chunk][4].add(dec.m_bar / u);
    });
    std::array<EstimateWithError, 5> est;
    for (int k = 0; k < 5; ++k) {
        std::vector<Accumulator> acc;
        for (auto& s : slots) acc.push_back(s[size_t(k)]);
        est[size_t(k)] = merge_chunks(acc).estimate();
    }
    std::ostringstream csv;
    csv << "quantity,estimate,stderr,target,zscore\n";
    auto row = [&](const std::string& q, const EstimateWithError& e, double target) {
        csv << q << ',' << format_g17(e.value) << ',' << format_g17(e.stderror) << ','
            << format_g17(target) << ',' << format_g17(e.zscore_vs(target)) << "\n";
    };
    row("exp_gamma_sN", est[0], exp_gamma_s_infty(p));
    row("neg_sum_log_one_minus_y", est[1], mu_target);
    row("zeta_over_uN", est[2], zeta_over_u_limit_mean(p));
    row("decomposition_residual", est[3], 0.0);
    row("mbar_over_uN", est[4], 0.0);
    write_output(out, csv.str());
    return 0;
}

int cmd_check(const std::string& check_name, const RunConfig& cfg, int threads) {
    const CheckReport report = run_named_check(check_name, cfg, threads);
    write_output(cfg.out_path, report.to_json() + "\n");
    return verdict_exit(report);
}

int cmd_plotdata(const std::string& check_name, const RunConfig& cfg, int threads) {
    const CheckReport report = run_named_check(check_name, cfg, threads);
    std::ostringstream csv;
    csv << "N,quantity,estimate,stderr,target\n";
    for (const auto& row : report.rows) {
        // rows carry their N in a "_N=<value>" suffix; others use the last N
        long long n_val = cfg.n_list.back();
        std::string quantity = row.quantity;
        const auto pos = quantity.rfind("_N=");
        if (pos != std::string::npos) {
            n_val = std::stoll(quantity.substr(pos + 3));
            quantity = quantity.substr(0, pos);
        }
        csv << n_val << ',' << quantity << ',' << format_g17(row.estimate) << ','
            << format_g17(row.stderror) << ',' << format_g17(row.target) << "\n";
    }
    write_output(cfg.out_path, csv.str());
    return verdict_exit(report);
}

} // namespace coalgene
