#include "coalgene/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "coalgene/pd_analysis.hpp"

namespace coalgene {

using nlohmann::json;

namespace {

uint64_t mix64(uint64_t seed, uint64_t tag) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double ratio_se(double a, double se_a, double b, double se_b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    const double r = a / b;
    return std::fabs(r) * std::sqrt((se_a / a) * (se_a / a) + (se_b / b) * (se_b / b));
}

CheckRow stat_row(std::string name, const EstimateWithError& est, double target,
                  double tol_z = 4.0) {
    CheckRow row;
    row.quantity = std::move(name);
    row.estimate = est.value;
    row.stderror = est.stderror;
    row.target = target;
    row.zscore = est.zscore_vs(target);
    row.tol_z = tol_z;
    return row;
}

CheckRow rel_row(std::string name, double est, double se, double target, double tol) {
    CheckRow row;
    row.quantity = std::move(name);
    row.estimate = est;
    row.stderror = se;
    row.target = target;
    row.zscore = se > 0.0 ? (est - target) / se : 0.0;
    row.tol_rel = tol;
    return row;
}

std::string shape_name(const std::vector<int>& shape) {
    std::string s = "(";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

Partition shape_partition(const std::vector<int>& shape) {
    std::vector<std::vector<int>> blocks;
    int at = 0;
    for (int b : shape) {
        std::vector<int> blk;
        for (int j = 0; j < b; ++j) blk.push_back(at++);
        blocks.push_back(std::move(blk));
    }
    return Partition::from_blocks(at, std::move(blocks));
}

// Rate of the increment pi_tilde under a pair-rate-normalized limit measure.
double limit_rate(const MeasureSpec& limit, const Partition& pi_tilde) {
    if (std::holds_alternative<LambdaMeasure>(limit)) {
        const auto& lm = std::get<LambdaMeasure>(limit);
        const auto sizes = block_sizes_desc(pi_tilde);
        if (sizes.size() >= 2 && sizes[1] >= 2) return 0.0;
        if (sizes[0] < 2) return 0.0;
        return lambda_rate(lm, pi_tilde.n(), sizes[0]);
    }
    return xi_rate(std::get<XiMeasure>(limit), pi_tilde);
}

} // namespace

bool CheckRow::within() const {
    if (informational) return true;
    if (!std::isfinite(estimate)) return false;
    if (tol_rel) {
        if (target == 0.0) return std::fabs(estimate) <= *tol_rel;
        return std::fabs(estimate - target) <= *tol_rel * std::fabs(target);
    }
    if (tol_z) return std::fabs(zscore) < *tol_z;
    return true;
}

void CheckReport::conclude(bool indeterminate) {
    if (indeterminate) {
        verdict = Verdict::Indeterminate;
        return;
    }
    for (const auto& row : rows) {
        if (!row.within()) {
            verdict = Verdict::Fail;
            return;
        }
    }
    verdict = Verdict::Pass;
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

std::string CheckReport::to_json() const {
    json j;
    j["name"] = name;
    json params = json::parse(params_echo, nullptr, false);
    j["params"] = params.is_discarded() ? json(params_echo) : params;
    j["rows"] = json::array();
    for (const auto& row : rows) {
        json r;
        r["quantity"] = row.quantity;
        r["estimate"] = row.estimate;
        r["stderr"] = row.stderror;
        r["target"] = row.target;
        r["zscore"] = row.zscore;
        if (row.tol_rel) r["tolerance_rel"] = *row.tol_rel;
        if (row.tol_z) r["tolerance_z"] = *row.tol_z;
        r["informational"] = row.informational;
        r["within"] = row.within();
        j["rows"].push_back(std::move(r));
    }
    j["verdict"] = verdict_name(verdict);
    j["tolerance_policy"] = tolerance_policy;
    j["notes"] = notes;
    return j.dump(2);
}

Matrix one_step_matrix(const ModelSpec& model, int N, int n, long long replicates,
                       uint64_t seed, int threads, bool raw_counting,
                       const std::vector<Partition>& states) {
    const int ns = int(states.size());
    Matrix p(ns, ns);
    // transition estimates per live block count
    std::vector<TransitionEstimate> per_m(size_t(n) + 1);
    for (int m = 2; m <= n; ++m)
        per_m[size_t(m)] = estimate_transition(model, N, m, replicates,
                                               mix64(seed, uint64_t(m)), threads,
                                               raw_counting);
    std::vector<std::vector<Partition>> increments(size_t(n) + 1);
    for (int m = 2; m <= n; ++m) increments[size_t(m)] = enumerate_partitions(m);
    for (int i = 0; i < ns; ++i) {
        const int m = states[size_t(i)].block_count();
        if (m == 1) {
            p(i, i) = 1.0;
            continue;
        }
        for (size_t k = 0; k < increments[size_t(m)].size(); ++k) {
            const Partition& inc = increments[size_t(m)][k];
            const Partition target = coagulate(states[size_t(i)], inc);
            int j = -1;
            for (int c = 0; c < ns; ++c)
                if (states[size_t(c)] == target) {
                    j = c;
                    break;
                }
            p(i, j) += per_m[size_t(m)].probabilities[k].value;
        }
    }
    return p;
}

CheckReport check_semigroup(const ModelSpec& model, const MeasureSpec& limit, int N,
                            int n, const std::vector<double>& times,
                            long long replicates, uint64_t seed, int threads,
                            bool raw_counting, double tol) {
    if (n < 2 || n > 4)
        throw std::invalid_argument("check_semigroup: need 2 <= n <= 4");
    CheckReport report;
    report.name = "semigroup";
    report.params_echo = json{{"N", N},
                              {"n", n},
                              {"times", times},
                              {"replicates", replicates},
                              {"seed", seed},
                              {"raw_counting", raw_counting},
                              {"model", model_kind_name(model)},
                              {"limit", measure_spec_to_string(limit)}}
                             .dump();
    report.tolerance_policy =
        "max entrywise |P_hat^k - e^{tQ}| <= " + std::to_string(tol);

    const CnEstimate cn = estimate_cn(model, N, replicates, mix64(seed, 0), threads);
    const double c_hat = cn.formula.value;
    const bool indeterminate =
        !(c_hat > 0.0) || cn.formula.stderror > 0.1 * c_hat;
    if (indeterminate)
        report.notes.push_back("c_N estimate too noisy (stderr above 10%)");
    report.rows.push_back(stat_row("c_hat", cn.formula, c_hat));
    report.rows.back().informational = true;

    const auto states = enumerate_partitions(n);
    const Matrix p_hat =
        one_step_matrix(model, N, n, replicates, seed, threads, raw_counting, states);
    const RateMatrix rm = RateMatrix::build(limit, n);
    // map between our state order and the rate matrix's
    std::vector<int> to_rm(states.size());
    for (size_t i = 0; i < states.size(); ++i)
        to_rm[i] = rm.index_of(states[i]);

    for (double t : times) {
        if (!(t >= 0.0)) throw std::invalid_argument("check_semigroup: t must be >= 0");
        const long long steps = c_hat > 0.0 ? (long long)std::floor(t / c_hat) : 0;
        const Matrix pk = matrix_power(p_hat, steps);
        const Matrix expq = semigroup(rm, t);
        Matrix discrete = rm.q();
        discrete *= c_hat;
        discrete += Matrix::identity(int(states.size()));
        const Matrix disc_k = matrix_power(discrete, steps);
        double d_exp = 0.0, d_disc = 0.0;
        for (size_t i = 0; i < states.size(); ++i)
            for (size_t j = 0; j < states.size(); ++j) {
                d_exp = std::max(d_exp, std::fabs(pk(int(i), int(j)) -
                                                  expq(to_rm[i], to_rm[j])));
                d_disc = std::max(d_disc, std::fabs(pk(int(i), int(j)) -
                                                    disc_k(int(i), int(j))));
            }
        std::ostringstream label;
        label << "max_abs_diff_vs_semigroup_t=" << t;
        report.rows.push_back(rel_row(label.str(), d_exp, 0.0, 0.0, tol));
        std::ostringstream label2;
        label2 << "max_abs_diff_vs_discrete_chain_t=" << t;
        report.rows.push_back(rel_row(label2.str(), d_disc, 0.0, 0.0, tol));
        report.rows.back().informational = true;
    }
    report.conclude(indeterminate);
    return report;
}

CheckReport check_lambda_criterion(const ModelSpec& model, const LambdaMeasure& limit,
                                   const std::vector<int>& n_list, int b_max,
                                   long long replicates, uint64_t seed, int threads,
                                   double tol) {
    if (b_max < 2 || b_max > 8)
        throw std::invalid_argument("check_lambda_criterion: need 2 <= b_max <= 8");
    if (n_list.empty())
        throw std::invalid_argument("check_lambda_criterion: empty N list");
    CheckReport report;
    report.name = "lambda-criterion";
    report.params_echo = json{{"N_list", n_list},
                              {"b_max", b_max},
                              {"replicates", replicates},
                              {"seed", seed},
                              {"model", model_kind_name(model)},
                              {"limit", measure_spec_to_string(MeasureSpec{limit})}}
                             .dump();
    report.tolerance_policy =
        "final-N ratios within " + std::to_string(tol) + " relative; earlier N informational";
    std::vector<int> b_list;
    for (int b = 2; b <= b_max; ++b) b_list.push_back(b);
    const double lam22 = lambda_rate(limit, 2, 2);
    for (size_t ni = 0; ni < n_list.size(); ++ni) {
        const int N = n_list[ni];
        const auto moments = estimate_weight_moments(model, N, b_list, replicates,
                                                     mix64(seed, uint64_t(N)), threads);
        const auto& c_row = moments[0]; // b = 2
        const double c_hat = c_row.total_sum.value;
        for (const auto& row : moments) {
            const double target = lambda_rate(limit, row.b, row.b) / lam22;
            const double est = row.first.value / c_hat;
            const double se = ratio_se(row.first.value, row.first.stderror, c_hat,
                                       c_row.total_sum.stderror);
            std::ostringstream label;
            label << "ratio_b=" << row.b << "_N=" << N;
            CheckRow r = rel_row(label.str(), est, se, target, tol);
            r.informational = (ni + 1 != n_list.size());
            report.rows.push_back(r);
        }
    }
    report.conclude();
    return report;
}

CheckReport check_kingman_criterion(const ModelSpec& model,
                                    const std::vector<int>& n_list,
                                    double beta_exponent, long long replicates,
                                    uint64_t seed, int threads) {
    if (!(beta_exponent > 2.0))
        throw std::invalid_argument("check_kingman_criterion: beta exponent must exceed 2");
    if (n_list.empty())
        throw std::invalid_argument("check_kingman_criterion: empty N list");
    CheckReport report;
    report.name = "kingman-criterion";
    report.params_echo = json{{"N_list", n_list},
                              {"beta_exponent", beta_exponent},
                              {"replicates", replicates},
                              {"seed", seed},
                              {"model", model_kind_name(model)}}
                             .dump();
    report.tolerance_policy =
        "both ratios decreasing along the N list with final values below 0.1";
    threads = resolve_threads(threads);
    std::vector<double> r_rest, r_first;
    for (int N : n_list) {
        const long long chunks = n_chunks_for(replicates);
        std::vector<std::array<Accumulator, 3>> slots(static_cast<size_t>(chunks));
        run_replicates(replicates, threads, [&](long long rep, size_t chunk) {
            RngStream rng(mix64(seed, uint64_t(N)), uint32_t(rep), 0x30u);
            const WeightVector eta = sample_weights(model, N, rng);
            double rest3 = 0.0;
            for (size_t i = 1; i < eta.size(); ++i) {
                const double w = eta[i];
                rest3 += w * w * w;
            }
            slots[chunk][0].add(rest3);
            slots[chunk][1].add(std::pow(eta[0], beta_exponent));
            slots[chunk][2].add(eta.sum_sq());
        });
        std::vector<Accumulator> a0, a1, a2;
        for (auto& s : slots) {
            a0.push_back(s[0]);
            a1.push_back(s[1]);
            a2.push_back(s[2]);
        }
        const auto rest = merge_chunks(a0).estimate();
        const auto first = merge_chunks(a1).estimate();
        const auto c_hat = merge_chunks(a2).estimate();
        const double rr = rest.value / c_hat.value;
        const double rf = first.value / c_hat.value;
        r_rest.push_back(rr);
        r_first.push_back(rf);
        CheckRow row1 = rel_row("rest_cubes_over_cN_N=" + std::to_string(N), rr,
                                ratio_se(rest.value, rest.stderror, c_hat.value,
                                         c_hat.stderror),
                                0.0, 0.1);
        CheckRow row2 = rel_row("first_beta_over_cN_N=" + std::to_string(N), rf,
                                ratio_se(first.value, first.stderror, c_hat.value,
                                         c_hat.stderror),
                                0.0, 0.1);
        const bool is_last = (N == n_list.back());
        row1.informational = !is_last;
        row2.informational = !is_last;
        report.rows.push_back(row1);
        report.rows.push_back(row2);
    }
    bool decreasing = true;
    for (size_t i = 1; i < r_rest.size(); ++i)
        decreasing = decreasing && r_rest[i] <= r_rest[i - 1] && r_first[i] <= r_first[i - 1];
    CheckRow trend;
    trend.quantity = "ratios_decreasing_along_N";
    trend.estimate = decreasing ? 1.0 : 0.0;
    trend.target = 1.0;
    trend.tol_rel = 0.0;
    report.rows.push_back(trend);
    report.conclude();
    return report;
}

CheckReport check_xi_functionals(const ModelSpec& model,
                                 const std::optional<MeasureSpec>& limit,
                                 const std::vector<int>& n_list,
                                 const std::vector<std::vector<int>>& shapes,
                                 long long replicates, uint64_t seed, int threads,
                                 double tol) {
    if (shapes.empty())
        throw std::invalid_argument("check_xi_functionals: no shapes given");
    for (const auto& s : shapes) {
        if (s.empty() || s.size() > 3)
            throw std::invalid_argument("check_xi_functionals: 1 <= j <= 3");
        for (size_t i = 0; i < s.size(); ++i) {
            if (s[i] < 2 || s[i] > 4)
                throw std::invalid_argument("check_xi_functionals: block sizes in [2,4]");
            if (i && s[i] > s[i - 1])
                throw std::invalid_argument("check_xi_functionals: non-increasing shapes");
        }
    }
    CheckReport report;
    report.name = "xi-functionals";
    {
        json shapes_json = json::array();
        for (const auto& s : shapes) shapes_json.push_back(s);
        report.params_echo =
            json{{"N_list", n_list},
                 {"shapes", shapes_json},
                 {"replicates", replicates},
                 {"seed", seed},
                 {"model", model_kind_name(model)},
                 {"limit", limit ? measure_spec_to_string(*limit) : "none"}}
                .dump();
    }
    report.tolerance_policy =
        "targets (when given) within " + std::to_string(tol) +
        " at the final N; zero targets require a decreasing N-trend";
    threads = resolve_threads(threads);
    std::vector<Partition> parts;
    for (const auto& s : shapes) parts.push_back(shape_partition(s));

    std::vector<std::vector<double>> ratio_by_shape(shapes.size());
    for (int N : n_list) {
        const long long chunks = n_chunks_for(replicates);
        std::vector<std::vector<Accumulator>> slots(
            size_t(chunks), std::vector<Accumulator>(shapes.size() + 1));
        run_replicates(replicates, threads, [&](long long rep, size_t chunk) {
            RngStream rng(mix64(seed, uint64_t(N)), uint32_t(rep),
                          stream_salt::kShape);
            const WeightVector eta = sample_weights(model, N, rng);
            slots[chunk][0].add(eta.sum_sq());
            for (size_t k = 0; k < parts.size(); ++k)
                slots[chunk][k + 1].add(exact_transition_awf(eta, parts[k]));
        });
        std::vector<Accumulator> cn_acc;
        for (auto& s : slots) cn_acc.push_back(s[0]);
        const auto c_hat = merge_chunks(cn_acc).estimate();
        for (size_t k = 0; k < shapes.size(); ++k) {
            std::vector<Accumulator> acc;
            for (auto& s : slots) acc.push_back(s[k + 1]);
            const auto est = merge_chunks(acc).estimate();
            const double ratio = est.value / c_hat.value;
            ratio_by_shape[k].push_back(ratio);
            std::optional<double> target;
            if (limit) target = limit_rate(*limit, parts[k]);
            std::ostringstream label;
            label << "phi" << shape_name(shapes[k]) << "_over_cN_N=" << N;
            CheckRow row = rel_row(
                label.str(), ratio,
                ratio_se(est.value, est.stderror, c_hat.value, c_hat.stderror),
                target.value_or(0.0), tol);
            // zero or absent targets are judged by the N-trend rows below
            row.informational =
                !target || *target == 0.0 || N != n_list.back();
            report.rows.push_back(row);
        }
    }
    if (n_list.size() >= 2) {
        for (size_t k = 0; k < shapes.size(); ++k) {
            const bool zero_target =
                !limit || limit_rate(*limit, parts[k]) == 0.0;
            if (!zero_target) continue;
            const double first = ratio_by_shape[k].front();
            const double last = ratio_by_shape[k].back();
            CheckRow row;
            row.quantity = "trend" + shape_name(shapes[k]) + "_last_over_first";
            row.estimate = first != 0.0 ? last / first : 0.0;
            row.target = 0.0;
            row.tol_rel = 1.0; // within iff the ratio did not grow
            row.informational = !limit;
            report.rows.push_back(row);
        }
    }
    report.conclude();
    return report;
}

CheckReport check_replacement_equivalence(const ModelSpec& model,
                                          const std::vector<int>& n_list, int n,
                                          long long replicates, uint64_t seed,
                                          int threads) {
    if (!model_is_ac(model))
        throw std::invalid_argument("check_replacement_equivalence: AC-type model required");
    if (n < 2 || n > 3)
        throw std::invalid_argument("check_replacement_equivalence: need 2 <= n <= 3");
    CheckReport report;
    report.name = "replacement";
    report.params_echo = json{{"N_list", n_list},
                              {"n", n},
                              {"replicates", replicates},
                              {"seed", seed},
                              {"model", model_kind_name(model)}}
                             .dump();
    report.tolerance_policy =
        "c_N/c_tilde_N within 10% of 1 at the final N; discrepancy/E[1/sigma] stable "
        "within a factor 2 across the N list";
    threads = resolve_threads(threads);
    const auto states = enumerate_partitions(n);
    std::vector<double> bound_ratios;
    for (int N : n_list) {
        const long long chunks = n_chunks_for(replicates);
        // per chunk: max-discrepancy, 1/sigma, cn (awf), cntilde stats
        std::vector<std::array<Accumulator, 4>> slots(static_cast<size_t>(chunks));
        run_replicates(replicates, threads, [&](long long rep, size_t chunk) {
            RngStream rng(mix64(seed, uint64_t(N)), uint32_t(rep), 0x31u);
            const OffspringVector nu = sample_offspring(model, N, rng);
            std::vector<double> eta(nu.nu.size());
            for (size_t i = 0; i < nu.nu.size(); ++i)
                eta[i] = double(nu.nu[i]) / double(nu.sigma);
            const WeightVector wv(std::move(eta));
            double dmax = 0.0;
            for (const auto& pt : states) {
                const double a = exact_transition_ac(nu, pt);
                const double b = exact_transition_awf(wv, pt);
                dmax = std::max(dmax, std::fabs(a - b));
            }
            slots[chunk][0].add(dmax);
            slots[chunk][1].add(1.0 / double(nu.sigma));
            slots[chunk][2].add(wv.sum_sq());
            double s = 0.0;
            for (long long c : nu.nu) s += double(c) * double(c - 1);
            slots[chunk][3].add(s / (double(nu.sigma) * double(nu.sigma - 1)));
        });
        std::array<EstimateWithError, 4> est;
        for (int k = 0; k < 4; ++k) {
            std::vector<Accumulator> acc;
            for (auto& s : slots) acc.push_back(s[size_t(k)]);
            est[size_t(k)] = merge_chunks(acc).estimate();
        }
        const double bound_ratio = est[0].value / est[1].value;
        bound_ratios.push_back(bound_ratio);
        const bool tilde_degenerate = !(est[3].value > 0.0);
        if (tilde_degenerate)
            report.notes.push_back(
                "N=" + std::to_string(N) +
                ": degenerate offspring law (no parent ever has two children); "
                "the c_N ratio is undefined");
        const double cn_ratio =
            tilde_degenerate ? 0.0 : est[2].value / est[3].value;
        const std::string suffix = "_N=" + std::to_string(N);
        CheckRow r1 = stat_row("mean_max_discrepancy" + suffix, est[0], est[0].value);
        r1.informational = true;
        report.rows.push_back(r1);
        CheckRow r2 = stat_row("E_inv_sigma" + suffix, est[1], est[1].value);
        r2.informational = true;
        report.rows.push_back(r2);
        CheckRow r3 = rel_row("discrepancy_over_E_inv_sigma" + suffix, bound_ratio,
                              0.0, bound_ratio, 1.0);
        r3.informational = true;
        report.rows.push_back(r3);
        CheckRow r4 = rel_row("cN_over_cNtilde" + suffix, cn_ratio,
                              ratio_se(est[2].value, est[2].stderror, est[3].value,
                                       est[3].stderror),
                              1.0, 0.10);
        r4.informational = (N != n_list.back()) || tilde_degenerate;
        report.rows.push_back(r4);
    }
    // stability of the fitted constant across N
    const auto [mn, mx] = std::minmax_element(bound_ratios.begin(), bound_ratios.end());
    CheckRow stab;
    stab.quantity = "bound_constant_max_over_min";
    stab.estimate = (*mn > 0.0) ? *mx / *mn : INFINITY;
    stab.target = 1.0;
    stab.tol_rel = 1.0; // within a factor 2 of 1
    report.rows.push_back(stab);
    report.conclude();
    return report;
}

namespace {

// E_{nu_bar_k}[paintbox probability of pi_tilde]. Exact for the uniform
// survivor frequencies; Monte Carlo over the Dirichlet ones with a standard
// error reported through *se.
double survivor_paintbox_mean(const BottleneckSpec& spec, int k,
                              const Partition& pi_tilde, long long replicates,
                              uint64_t seed, double* se) {
    if (spec.nu_bar == BottleneckSpec::NuBarKind::Uniform) {
        if (se) *se = 0.0;
        return paintbox_partition_prob(
            MassPartition(std::vector<double>(static_cast<size_t>(k), 1.0 / double(k))),
            pi_tilde);
    }
    RngStream rng(seed, uint32_t(k), 0xB0u);
    Accumulator acc;
    for (long long r = 0; r < replicates; ++r) {
        std::vector<double> w(static_cast<size_t>(k));
        double s = 0.0;
        for (int i = 0; i < k; ++i) {
            w[size_t(i)] = rng.gamma(spec.dirichlet_c);
            s += w[size_t(i)];
        }
        for (double& x : w) x /= s;
        std::sort(w.begin(), w.end(), std::greater<double>());
        acc.add(paintbox_partition_prob(MassPartition(std::move(w)), pi_tilde));
    }
    if (se) *se = acc.stderror();
    return acc.mean();
}

// sum_k F(k) E[paintbox prob]; the coagulation rates of the bottleneck limit.
double qbar_rate(const BottleneckSpec& spec, const Partition& pi_tilde, int b_n,
                 long long replicates, uint64_t seed, double* se_out) {
    double total = 0.0, var = 0.0;
    for (int k = 1; k <= b_n; ++k) {
        const double fk = spec.f_value(k, b_n);
        if (fk <= 0.0) continue;
        double se = 0.0;
        total += fk * survivor_paintbox_mean(spec, k, pi_tilde, replicates, seed, &se);
        var += fk * fk * se * se;
    }
    if (se_out) *se_out = std::sqrt(var);
    return total;
}

// E[sum rho_i^2] under nu_bar_k: 1/k for uniform survivors, and the
// symmetric-Dirichlet moment (c+1)/(kc+1) otherwise.
double survivor_sum_sq_mean(const BottleneckSpec& spec, int k) {
    if (spec.nu_bar == BottleneckSpec::NuBarKind::Uniform) return 1.0 / double(k);
    const double c = spec.dirichlet_c;
    return (c + 1.0) / (double(k) * c + 1.0);
}

} // namespace

CheckReport check_bottleneck_regimes(const BottleneckSpec& model,
                                     BottleneckRegime regime,
                                     const std::optional<MeasureSpec>& base_limit,
                                     const std::vector<int>& n_list, int n,
                                     long long replicates, uint64_t seed, int threads,
                                     double tol) {
    if (n < 2 || n > 4)
        throw std::invalid_argument("check_bottleneck_regimes: need 2 <= n <= 4");
    CheckReport report;
    report.name = "bottleneck";
    const char* regime_name = regime == BottleneckRegime::RareBottleneck ? "i"
                              : regime == BottleneckRegime::FrequentBase ? "ii"
                                                                         : "iii";
    report.params_echo = json{{"N_list", n_list},
                              {"n", n},
                              {"regime", regime_name},
                              {"replicates", replicates},
                              {"seed", seed}}
                             .dump();
    report.tolerance_policy = "scaled one-step transitions within " +
                              std::to_string(tol) + " of the regime target at the final N";
    if (regime != BottleneckRegime::RareBottleneck && !base_limit)
        throw std::invalid_argument(
            "check_bottleneck_regimes: regimes ii/iii need the base limit measure");
    threads = resolve_threads(threads);
    bool indeterminate = false;
    const auto states = enumerate_partitions(n);
    for (int N : n_list) {
        const int b_n = int(model.b_n_for(N));
        const double a_n = model.a_n_for(N);
        const double f_sum = model.f_sum(b_n);
        if (f_sum / a_n > 0.1 || double(b_n) / double(N) > 0.1) {
            indeterminate = true;
            report.notes.push_back(
                "N=" + std::to_string(N) +
                ": configured sequences violate the smallness conditions "
                "(sum F <= 0.1 a_N and b_N <= 0.1 N required)");
        }
        // exact base-model (no-bottleneck branch) quantities
        std::vector<double> eta_hat;
        if (model.eta_hat == BottleneckSpec::EtaHatKind::WrightFisher) {
            eta_hat.assign(size_t(N), 1.0 / double(N));
        } else {
            eta_hat = model.eta_hat_weights;
            eta_hat.resize(size_t(N), 0.0);
        }
        const WeightVector eta_hat_wv(eta_hat);
        const double c_base = eta_hat_wv.sum_sq();
        const double p_bn = f_sum / a_n;
        // conditioning on the bottleneck indicator and the survivor count
        // makes the one-step transition exactly computable; Monte Carlo only
        // enters through the Dirichlet survivor frequencies.
        double c_bn_part = 0.0;
        for (int k = 1; k <= b_n; ++k) {
            const double fk = model.f_value(k, b_n);
            if (fk > 0.0) c_bn_part += fk * survivor_sum_sq_mean(model, k);
        }
        const double c_exact = c_bn_part / a_n + c_base * (1.0 - p_bn);
        CheckRow crow = rel_row("c_N_N=" + std::to_string(N), c_exact, 0.0, c_exact, 1.0);
        crow.informational = true;
        report.rows.push_back(crow);
        for (size_t k = 0; k < states.size(); ++k) {
            const Partition& pt = states[k];
            if (pt.is_singletons()) continue;
            double qbar_se = 0.0;
            const double qbar =
                qbar_rate(model, pt, b_n, replicates, mix64(seed, 0xBB), &qbar_se);
            const double p_hat_part = exact_transition_awf(eta_hat_wv, pt);
            const double p_step = qbar / a_n + (1.0 - p_bn) * p_hat_part;
            const double p_step_se = qbar_se / a_n;
            double scale, target, target_se = 0.0;
            switch (regime) {
                case BottleneckRegime::RareBottleneck:
                    scale = a_n;
                    target = qbar;
                    target_se = qbar_se;
                    break;
                case BottleneckRegime::FrequentBase:
                    scale = 1.0 / c_exact;
                    target = limit_rate(*base_limit, pt);
                    break;
                case BottleneckRegime::Balanced:
                default: {
                    scale = a_n;
                    const double ell_hat = c_base * a_n;
                    target = qbar + ell_hat * limit_rate(*base_limit, pt);
                    target_se = qbar_se;
                    break;
                }
            }
            std::ostringstream label;
            label << "scaled_rate[" << pt.encode() << "]_N=" << N;
            CheckRow row = rel_row(label.str(), p_step * scale,
                                   std::sqrt(p_step_se * p_step_se + target_se * target_se) * scale,
                                   target, tol);
            row.informational = (N != n_list.back());
            report.rows.push_back(row);
        }
    }
    report.conclude(indeterminate);
    return report;
}

CheckReport check_pd_theorem(const PDParams& params, const std::vector<int>& n_list,
                             long long replicates, uint64_t seed, int threads,
                             double tol) {
    params.validate_gamma_window();
    if (n_list.empty()) throw std::invalid_argument("check_pd_theorem: empty N list");
    CheckReport report;
    report.name = "pd-theorem";
    report.params_echo = json{{"alpha", params.alpha},
                              {"theta", params.theta},
                              {"gamma", params.gamma},
                              {"N_list", n_list},
                              {"replicates", replicates},
                              {"seed", seed}}
                             .dump();
    const ModelSpec model = PDPowerSpec{params};
    const double x = params.theta / params.alpha;
    threads = resolve_threads(threads);

    if (params.theta > -params.alpha && params.theta < params.alpha) {
        report.tolerance_policy = "c_N u_N^{1+theta/alpha} within " +
                                  std::to_string(tol) +
                                  " of (1-theta/alpha)/ell at the final N; "
                                  "merger ratios at the same tolerance";
        const double ell = ell_const(params);
        const double target_paper = (1.0 - x) / ell;
        const double s_exp = cn_scale_exponent(params);
        const bool corrected_applies = s_exp < 2.0;
        const double target_corr =
            corrected_applies ? cn_limit_constant(params) : 0.0;
        std::vector<double> paper_errs, corr_errs;
        for (int N : n_list) {
            const CnEstimate cn =
                estimate_cn(model, N, replicates, mix64(seed, uint64_t(N)), threads);
            const double u = u_n(params, N);
            const double scale_paper = std::pow(u, 1.0 + x);
            CheckRow row = rel_row(
                "cN_x_uN_pow_1+theta/alpha_N=" + std::to_string(N),
                cn.formula.value * scale_paper, cn.formula.stderror * scale_paper,
                target_paper, tol);
            row.informational = (N != n_list.back());
            paper_errs.push_back(std::fabs(row.estimate / target_paper - 1.0));
            report.rows.push_back(row);
            if (corrected_applies) {
                const double scale_corr = std::pow(u, s_exp);
                CheckRow crow = rel_row(
                    "cN_x_uN_pow_s_N=" + std::to_string(N),
                    cn.formula.value * scale_corr, cn.formula.stderror * scale_corr,
                    target_corr, tol);
                crow.informational = true;
                corr_errs.push_back(std::fabs(crow.estimate / target_corr - 1.0));
                report.rows.push_back(crow);
            }
        }
        // merger-size ratios vs the Beta(1-x, 1+x) rates
        const LambdaMeasure beta_lim = LambdaMeasure::beta(1.0 - x, 1.0 + x);
        const int N_last = n_list.back();
        const auto moments =
            estimate_weight_moments(model, N_last, {2, 3, 4}, replicates,
                                    mix64(seed, 0x3D), threads);
        const double c_hat = moments[0].total_sum.value;
        for (const auto& mrow : moments) {
            if (mrow.b == 2) continue;
            const double target =
                lambda_rate(beta_lim, mrow.b, mrow.b) / lambda_rate(beta_lim, 2, 2);
            CheckRow row = rel_row(
                "merger_ratio_b=" + std::to_string(mrow.b) + "_N=" + std::to_string(N_last),
                mrow.first.value / c_hat,
                ratio_se(mrow.first.value, mrow.first.stderror, c_hat,
                         moments[0].total_sum.stderror),
                target, tol);
            report.rows.push_back(row);
            if (corrected_applies) {
                CheckRow crow = rel_row(
                    "merger_ratio_corrected_b=" + std::to_string(mrow.b) + "_N=" +
                        std::to_string(N_last),
                    mrow.first.value / c_hat,
                    ratio_se(mrow.first.value, mrow.first.stderror, c_hat,
                             moments[0].total_sum.stderror),
                    limit_merger_ratio(params, mrow.b), tol);
                crow.informational = true;
                report.rows.push_back(crow);
            }
        }
        if (corrected_applies && !corr_errs.empty()) {
            report.notes.push_back(
                paper_errs.back() <= corr_errs.back()
                    ? "data supports the ell-route scaling"
                    : "data supports the integral-route scaling (exponent s = "
                      "(theta+alpha)/gamma)");
        }
    } else {
        report.tolerance_policy =
            "c_N u_N^2 (log-corrected at theta = alpha) bounded: consecutive "
            "ratios in [0.5, 2]; Kingman ratios decreasing";
        std::vector<double> scaled;
        for (int N : n_list) {
            const CnEstimate cn =
                estimate_cn(model, N, replicates, mix64(seed, uint64_t(N)), threads);
            const double u = u_n(params, N);
            double v = cn.formula.value * u * u;
            if (params.theta == params.alpha) v /= std::log(u);
            scaled.push_back(v);
            CheckRow row = stat_row("cN_x_uN_sq_N=" + std::to_string(N), cn.formula,
                                    cn.formula.value);
            row.estimate = v;
            row.stderror = cn.formula.stderror * u * u;
            row.informational = true;
            report.rows.push_back(row);
        }
        for (size_t i = 1; i < scaled.size(); ++i) {
            CheckRow row;
            row.quantity = "boundedness_ratio_" + std::to_string(n_list[i - 1]) + "_to_" +
                           std::to_string(n_list[i]);
            row.estimate = scaled[i] / scaled[i - 1];
            row.target = 1.0;
            row.tol_rel = 1.0; // in [0, 2]; the lower bound is checked below
            report.rows.push_back(row);
            CheckRow low;
            low.quantity = row.quantity + "_above_half";
            low.estimate = row.estimate >= 0.5 ? 1.0 : 0.0;
            low.target = 1.0;
            low.tol_rel = 0.0;
            report.rows.push_back(low);
        }
        const auto king = check_kingman_criterion(model, n_list, 4.0, replicates,
                                                  mix64(seed, 0x4B), threads);
        for (const auto& krow : king.rows) {
            CheckRow copy = krow;
            copy.quantity = "kingman." + copy.quantity;
            copy.informational = copy.quantity.find("decreasing") == std::string::npos;
            report.rows.push_back(copy);
        }
    }
    report.conclude();
    return report;
}

CheckReport check_em_theorem(double beta, double kappa, const std::vector<int>& n_list,
                             long long replicates, uint64_t seed, int threads,
                             double tol) {
    if (!(beta > 1.0)) throw std::invalid_argument("check_em_theorem: beta must exceed 1");
    if (!(kappa > 0.5 && kappa <= 1.0))
        throw std::invalid_argument("check_em_theorem: kappa must lie in (1/2, 1]");
    CheckReport report;
    report.name = "em-theorem";
    report.params_echo = json{{"beta", beta},
                              {"kappa", kappa},
                              {"N_list", n_list},
                              {"replicates", replicates},
                              {"seed", seed}}
                             .dump();
    report.tolerance_policy = "c_N sum i^-kappa within " + std::to_string(tol) +
                              " of the closer candidate constant at the final N";
    threads = resolve_threads(threads);
    // candidate A: the displayed constant; candidate B: the theta = 0
    // specialization of the ell route (they differ in the third Gamma factor)
    const double cand_a =
        std::exp(log_gamma(2.0 - kappa) - std::log(kappa) -
                 log_gamma(1.0 - (1.0 - kappa) / beta) -
                 log_gamma(1.0 + (1.0 + kappa) / beta));
    const double cand_b =
        std::exp(log_gamma(2.0 - kappa) - std::log(kappa) -
                 log_gamma(1.0 - (1.0 - kappa) / beta) -
                 log_gamma(1.0 + (1.0 - kappa) / beta));
    const bool coincide = std::fabs(cand_a - cand_b) <=
                          0.02 * std::max(std::fabs(cand_a), std::fabs(cand_b));
    if (coincide)
        report.notes.push_back(
            "the two candidate constants coincide numerically at these parameters; "
            "the measurement cannot distinguish them");
    report.notes.push_back(
        "candidate_displayed and candidate_specialized differ in the third Gamma "
        "factor: 1+(1+kappa)/beta vs 1+(1-kappa)/beta; both are reported");

    const ModelSpec model = ExponentialModelSpec{beta, kappa, 0};
    const PDParams pd{1.0 / beta, 0.0, kappa / beta};
    double last_est = 0.0, last_se = 0.0;
    for (int N : n_list) {
        const CnEstimate cn =
            estimate_cn(model, N, replicates, mix64(seed, uint64_t(N)), threads);
        const double u = u_n(pd, N); // sum i^{-kappa}
        const double est = cn.formula.value * u;
        const double se = cn.formula.stderror * u;
        last_est = est;
        last_se = se;
        CheckRow ra = rel_row("cN_x_sum_i^-kappa_vs_displayed_N=" + std::to_string(N),
                              est, se, cand_a, tol);
        ra.informational = true;
        report.rows.push_back(ra);
        CheckRow rb = rel_row("cN_x_sum_i^-kappa_vs_specialized_N=" + std::to_string(N),
                              est, se, cand_b, tol);
        rb.informational = true;
        report.rows.push_back(rb);
    }
    const double err_a = std::fabs(last_est / cand_a - 1.0);
    const double err_b = std::fabs(last_est / cand_b - 1.0);
    const double supported = err_a <= err_b ? cand_a : cand_b;
    report.notes.push_back(err_a <= err_b
                               ? "data supports the displayed constant"
                               : "data supports the specialized (ell-route) constant");
    CheckRow fin = rel_row("cN_x_sum_i^-kappa_vs_supported_final", last_est, last_se,
                           supported, tol);
    report.rows.push_back(fin);
    // merger ratios against the Beta(1,1) rates 1/(b-1)
    const int N_last = n_list.back();
    const auto moments = estimate_weight_moments(model, N_last, {2, 3, 4}, replicates,
                                                 mix64(seed, 0xE1), threads);
    const double c_hat = moments[0].total_sum.value;
    for (const auto& mrow : moments) {
        if (mrow.b == 2) continue;
        CheckRow row = rel_row(
            "merger_ratio_b=" + std::to_string(mrow.b) + "_N=" + std::to_string(N_last),
            mrow.first.value / c_hat,
            ratio_se(mrow.first.value, mrow.first.stderror, c_hat,
                     moments[0].total_sum.stderror),
            1.0 / double(mrow.b - 1), tol);
        row.informational = true;
        report.rows.push_back(row);
    }
    report.conclude();
    return report;
}

CheckReport check_em_equivalence(double beta, double kappa, int N, long long M,
                                 long long replicates, uint64_t seed, int threads) {
    CheckReport report;
    report.name = "em-equivalence";
    report.params_echo = json{{"beta", beta},
                              {"kappa", kappa},
                              {"N", N},
                              {"M", M},
                              {"replicates", replicates},
                              {"seed", seed}}
                             .dump();
    report.tolerance_policy = "moment z-scores below 4";
    threads = resolve_threads(threads);
    // fixed parent configuration; the child-frequency law does not depend on it
    std::vector<double> parents(static_cast<size_t>(N));
    {
        RngStream rng(mix64(seed, 0xEE), 0, stream_salt::kEmDirect);
        for (auto& x : parents) x = rng.normal();
    }
    const long long chunks = n_chunks_for(replicates);
    std::vector<std::array<Accumulator, 6>> slots(static_cast<size_t>(chunks));
    std::atomic<long long> flagged{0};
    run_replicates(replicates, threads, [&](long long rep, size_t chunk) {
        {
            RngStream rng(seed, uint32_t(rep), stream_salt::kEmDirect);
            const EmGeneration gen =
                em_generation_direct(beta, kappa, parents, M, rng);
            if (gen.truncation_flagged) flagged.fetch_add(1);
            const WeightVector eta =
                em_weights_from_positions(kappa, gen.child_positions);
            double s2 = 0.0, s3 = 0.0;
            for (size_t i = 0; i < eta.size(); ++i) {
                s2 += eta[i] * eta[i];
                s3 += eta[i] * eta[i] * eta[i];
            }
            slots[chunk][0].add(s2);
            slots[chunk][1].add(s3);
            slots[chunk][2].add(eta[0] * eta[0]);
        }
        {
            RngStream rng(seed, uint32_t(rep), stream_salt::kMoments);
            const WeightVector eta =
                sample_weights(ExponentialModelSpec{beta, kappa, M}, N, rng);
            double s2 = 0.0, s3 = 0.0;
            for (size_t i = 0; i < eta.size(); ++i) {
                s2 += eta[i] * eta[i];
                s3 += eta[i] * eta[i] * eta[i];
            }
            slots[chunk][3].add(s2);
            slots[chunk][4].add(s3);
            slots[chunk][5].add(eta[0] * eta[0]);
        }
    });
    const char* names[3] = {"sum_eta_sq", "sum_eta_cube", "eta1_sq"};
    for (int k = 0; k < 3; ++k) {
        std::vector<Accumulator> da, pa;
        for (auto& s : slots) {
            da.push_back(s[size_t(k)]);
            pa.push_back(s[size_t(k + 3)]);
        }
        const auto d = merge_chunks(da).estimate();
        const auto p = merge_chunks(pa).estimate();
        CheckRow row;
        row.quantity = std::string(names[size_t(k)]) + "_direct_vs_pd";
        row.estimate = d.value;
        row.stderror = std::sqrt(d.stderror * d.stderror + p.stderror * p.stderror);
        row.target = p.value;
        row.zscore = row.stderror > 0.0 ? (d.value - p.value) / row.stderror : 0.0;
        row.tol_z = 4.0;
        report.rows.push_back(row);
    }
    if (flagged.load() > 0)
        report.notes.push_back(std::to_string(flagged.load()) +
                               " generations flagged for truncation tail weight above "
                               "1e-6 of the selection mass");
    report.conclude();
    return report;
}

CheckReport check_discrete_limit(const ModelSpec& model, const MassPartition& rho_infty,
                                 int N, int n, long long replicates, uint64_t seed,
                                 int threads) {
    if (n < 2 || n > 5)
        throw std::invalid_argument("check_discrete_limit: need 2 <= n <= 5");
    CheckReport report;
    report.name = "discrete-limit";
    report.params_echo = json{{"N", N},
                              {"n", n},
                              {"replicates", replicates},
                              {"seed", seed},
                              {"model", model_kind_name(model)}}
                             .dump();
    report.tolerance_policy = "per-partition z-scores below 4";
    const auto trans =
        estimate_transition(model, N, n, replicates, mix64(seed, 0xD1), threads);
    for (size_t k = 0; k < trans.states.size(); ++k) {
        const double target = paintbox_partition_prob(rho_infty, trans.states[k]);
        report.rows.push_back(stat_row("P[" + trans.states[k].encode() + "]",
                                       trans.probabilities[k], target));
    }
    report.conclude();
    return report;
}

} // namespace coalgene
