#include "coalgene/coag_measures.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "coalgene/special_functions.hpp"
#include "coalgene/quadrature.hpp"

namespace coalgene {

LambdaMeasure LambdaMeasure::kingman() {
    LambdaMeasure m;
    m.kind = Kind::Kingman;
    m.total_mass = 1.0;
    return m;
}

LambdaMeasure LambdaMeasure::point_masses(std::vector<std::pair<double, double>> pts) {
    for (auto& [p, w] : pts) {
        if (!(p > 0.0 && p <= 1.0))
            throw std::invalid_argument("LambdaMeasure: point locations must lie in (0,1]");
        if (!(w > 0.0))
            throw std::invalid_argument("LambdaMeasure: point weights must be positive");
    }
    LambdaMeasure m;
    m.kind = Kind::PointMasses;
    m.points = std::move(pts);
    return m;
}

LambdaMeasure LambdaMeasure::beta(double a, double b, double mass) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("LambdaMeasure: Beta parameters must be positive");
    if (!(mass > 0.0))
        throw std::invalid_argument("LambdaMeasure: total mass must be positive");
    LambdaMeasure m;
    m.kind = Kind::Beta;
    m.beta_a = a;
    m.beta_b = b;
    m.total_mass = mass;
    return m;
}

double LambdaMeasure::total() const {
    switch (kind) {
        case Kind::Kingman: return total_mass;
        case Kind::Beta: return total_mass;
        case Kind::PointMasses: {
            double s = 0.0;
            for (const auto& [p, w] : points) s += w;
            return s;
        }
    }
    return 0.0;
}

XiMeasure XiMeasure::from_lambda(const LambdaMeasure& lambda) {
    XiMeasure xi;
    switch (lambda.kind) {
        case LambdaMeasure::Kind::Kingman:
            xi.kingman_mass = lambda.total_mass;
            return xi;
        case LambdaMeasure::Kind::PointMasses:
            for (const auto& [p, w] : lambda.points)
                xi.atoms.push_back({w, MassPartition({p})});
            return xi;
        case LambdaMeasure::Kind::Beta:
            throw std::invalid_argument(
                "XiMeasure::from_lambda: Beta measures have no finite-atomic embedding");
    }
    throw std::logic_error("unreachable");
}

namespace {

// p^k with the paint-box convention 0^0 = 1.
double pow_conv(double p, int k) {
    if (k == 0) return 1.0;
    return std::pow(p, k);
}

void check_nb(int n, int b) {
    if (!(n >= 2) || !(b >= 2) || b > n)
        throw std::invalid_argument("lambda_rate: need 2 <= b <= n");
}

} // namespace

double lambda_rate(const LambdaMeasure& lambda, int n, int b) {
    check_nb(n, b);
    switch (lambda.kind) {
        case LambdaMeasure::Kind::Kingman:
            return b == 2 ? lambda.total_mass : 0.0;
        case LambdaMeasure::Kind::PointMasses: {
            double s = 0.0;
            for (const auto& [p, w] : lambda.points)
                s += w * pow_conv(p, b - 2) * pow_conv(1.0 - p, n - b);
            return s;
        }
        case LambdaMeasure::Kind::Beta:
            return lambda.total_mass *
                   std::exp(log_beta_fn(lambda.beta_a + b - 2, lambda.beta_b + n - b) -
                            log_beta_fn(lambda.beta_a, lambda.beta_b));
    }
    throw std::logic_error("unreachable");
}

double lambda_rate_quadrature(const LambdaMeasure& lambda, int n, int b,
                              double abs_tol) {
    check_nb(n, b);
    switch (lambda.kind) {
        case LambdaMeasure::Kind::Kingman:
        case LambdaMeasure::Kind::PointMasses:
            // atomic measures integrate by direct evaluation
            return lambda_rate(lambda, n, b);
        case LambdaMeasure::Kind::Beta: {
            const double norm =
                lambda.total_mass / beta_fn(lambda.beta_a, lambda.beta_b);
            auto f = [&](double p) {
                return pow_conv(p, b - 2) * pow_conv(1.0 - p, n - b);
            };
            return norm * beta_kernel_integral(f, lambda.beta_a, lambda.beta_b, 0.0,
                                               1.0, abs_tol);
        }
    }
    throw std::logic_error("unreachable");
}

double paintbox_partition_prob(const MassPartition& rho, const Partition& pi_prime) {
    if (pi_prime.n() > 12)
        throw std::invalid_argument("paintbox_partition_prob: n <= 12 required");
    const int r = pi_prime.block_count();
    const auto& w = rho.weights();
    const int k = int(w.size());
    const double dust = rho.dust();

    // Block k may be served by the dust interval only if it is a singleton.
    std::vector<int> sizes(static_cast<size_t>(r));
    uint32_t singleton_mask = 0;
    for (int j = 0; j < r; ++j) {
        sizes[size_t(j)] = int(pi_prime.block(j).size());
        if (sizes[size_t(j)] == 1) singleton_mask |= (1u << j);
    }

    // f[S] = sum over injective assignments of the blocks in S to distinct
    // atoms among those processed so far of prod rho^{size}.
    const uint32_t full = (r >= 31) ? 0 : ((1u << r) - 1);
    std::vector<double> f(size_t(full) + 1, 0.0);
    f[0] = 1.0;
    for (int atom = 0; atom < k; ++atom) {
        const double rw = w[size_t(atom)];
        if (rw <= 0.0) continue;
        std::vector<double> powers(static_cast<size_t>(r));
        for (int j = 0; j < r; ++j) powers[size_t(j)] = pow_conv(rw, sizes[size_t(j)]);
        for (uint32_t s = full;; --s) {
            if (f[s] != 0.0) {
                for (int j = 0; j < r; ++j) {
                    if (s & (1u << j)) continue;
                    f[s | (1u << j)] += f[s] * powers[size_t(j)];
                }
            }
            if (s == 0) break;
        }
    }
    // Unassigned blocks must be singletons served by dust.
    double total = 0.0;
    for (uint32_t s = 0; s <= full; ++s) {
        if (f[s] == 0.0) continue;
        const uint32_t missing = full & ~s;
        if ((missing & ~singleton_mask) != 0) continue;
        total += f[s] * std::pow(dust, double(__builtin_popcount(missing)));
    }
    return total;
}

double xi_rate(const XiMeasure& xi, const Partition& pi_prime) {
    if (pi_prime.is_singletons())
        throw std::invalid_argument("xi_rate: rates are defined for proper coagulations only");
    double rate = 0.0;
    for (const auto& atom : xi.atoms) {
        const double s2 = atom.rho.sum_sq();
        if (!(s2 > 0.0))
            throw std::invalid_argument("xi_rate: atom with sum rho_i^2 = 0");
        rate += atom.weight * paintbox_partition_prob(atom.rho, pi_prime) / s2;
    }
    if (xi.kingman_mass > 0.0 && pi_prime.is_single_pair_merger())
        rate += xi.kingman_mass;
    return rate;
}

template <typename RateFn>
RateMatrix RateMatrix::build_impl(int n, RateFn&& rate_of_increment) {
    if (n < 2 || n > 6)
        throw std::invalid_argument("RateMatrix: supported for 2 <= n <= 6");
    RateMatrix rm;
    rm.n_ = n;
    rm.states_ = enumerate_partitions(n);
    const int ns = int(rm.states_.size());
    for (int i = 0; i < ns; ++i) rm.index_.emplace(rm.states_[size_t(i)].encode(), i);
    rm.q_ = Matrix(ns, ns);

    // Rates depend on the increment only through block sizes, so cache by
    // the sorted block-size signature on each source block count.
    std::unordered_map<std::string, double> cache;
    for (int i = 0; i < ns; ++i) {
        const Partition& pi = rm.states_[size_t(i)];
        const int m = pi.block_count();
        if (m == 1) continue;
        const auto increments = enumerate_partitions(m);
        double exit = 0.0;
        for (const auto& inc : increments) {
            if (inc.is_singletons()) continue;
            std::string key = std::to_string(m) + ":";
            for (int s : block_sizes_desc(inc)) key += std::to_string(s) + ",";
            auto it = cache.find(key);
            double rate;
            if (it == cache.end()) {
                rate = rate_of_increment(inc);
                cache.emplace(std::move(key), rate);
            } else {
                rate = it->second;
            }
            if (rate == 0.0) continue;
            const Partition target = coagulate(pi, inc);
            const int j = rm.index_of(target);
            rm.q_(i, j) += rate;
            exit += rate;
        }
        rm.q_(i, i) = -exit;
    }
    return rm;
}

RateMatrix RateMatrix::build(const XiMeasure& xi, int n) {
    return build_impl(n, [&](const Partition& inc) { return xi_rate(xi, inc); });
}

RateMatrix RateMatrix::build(const LambdaMeasure& lambda, int n) {
    return build_impl(n, [&](const Partition& inc) {
        // Lambda-coalescents perform simple mergers: exactly one block of
        // size b >= 2, all others singletons.
        const auto sizes = block_sizes_desc(inc);
        if (sizes.size() >= 2 && sizes[1] >= 2) return 0.0;
        return lambda_rate(lambda, inc.n(), sizes[0]);
    });
}

RateMatrix RateMatrix::build(const MeasureSpec& spec, int n) {
    if (std::holds_alternative<LambdaMeasure>(spec))
        return build(std::get<LambdaMeasure>(spec), n);
    return build(std::get<XiMeasure>(spec), n);
}

int RateMatrix::index_of(const Partition& p) const {
    const auto it = index_.find(p.encode());
    if (it == index_.end())
        throw std::invalid_argument("RateMatrix: partition not in state space");
    return it->second;
}

Matrix semigroup(const RateMatrix& rm, double t) {
    Matrix p = matrix_exponential(rm.q(), t);
    for (int r = 0; r < p.rows(); ++r) {
        double sum = 0.0;
        for (int c = 0; c < p.cols(); ++c) {
            if (p(r, c) < 0.0) {
                if (p(r, c) < -1e-12) {
                    // genuine negativity would indicate a series failure
                    throw std::runtime_error("semigroup: entry below -1e-12");
                }
                p(r, c) = 0.0;
            }
            sum += p(r, c);
        }
        for (int c = 0; c < p.cols(); ++c) p(r, c) /= sum;
    }
    return p;
}

std::vector<std::pair<double, Partition>> simulate_lambda_coalescent(
    const LambdaMeasure& lambda, int n, double t_max, RngStream& rng) {
    if (n < 1 || n > 1000)
        throw std::invalid_argument("simulate_lambda_coalescent: need 1 <= n <= 1000");
    std::vector<std::pair<double, Partition>> traj;
    Partition current(n);
    traj.emplace_back(0.0, current);
    double t = 0.0;
    while (current.block_count() > 1) {
        const int m = current.block_count();
        // total rate sum_b C(m,b) lambda_{m,b}; weights kept in log space
        // because C(m,b) overflows for large m.
        std::vector<double> logw(static_cast<size_t>(m - 1));
        double logmax = -INFINITY;
        for (int b = 2; b <= m; ++b) {
            const double rate = lambda_rate(lambda, m, b);
            double lw;
            if (rate <= 0.0) {
                lw = -INFINITY;
            } else {
                lw = std::lgamma(m + 1.0) - std::lgamma(b + 1.0) -
                     std::lgamma(m - b + 1.0) + std::log(rate);
            }
            logw[size_t(b - 2)] = lw;
            logmax = std::max(logmax, lw);
        }
        if (logmax == -INFINITY)
            throw std::runtime_error("simulate_lambda_coalescent: total merger rate is 0");
        double total_scaled = 0.0;
        for (double& lw : logw) {
            lw = std::exp(lw - logmax);
            total_scaled += lw;
        }
        const double total_rate = total_scaled * std::exp(logmax);
        if (!std::isfinite(total_rate))
            throw std::runtime_error("simulate_lambda_coalescent: non-finite total rate");
        t += rng.exponential(total_rate);
        if (t > t_max) break;
        // pick the merger size b proportionally, then b blocks uniformly
        double u = rng.next_double() * total_scaled;
        int b = m;
        for (int i = 0; i < m - 1; ++i) {
            u -= logw[size_t(i)];
            if (u <= 0.0) {
                b = i + 2;
                break;
            }
        }
        std::vector<int> ids(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) ids[size_t(i)] = i;
        for (int i = 0; i < b; ++i) {
            const int j = i + int(rng.uniform_int(uint64_t(m - i)));
            std::swap(ids[size_t(i)], ids[size_t(j)]);
        }
        std::vector<std::vector<int>> inc_blocks;
        inc_blocks.push_back(std::vector<int>(ids.begin(), ids.begin() + b));
        for (int i = b; i < m; ++i) inc_blocks.push_back({ids[size_t(i)]});
        current = coagulate(current, Partition::from_blocks(m, std::move(inc_blocks)));
        traj.emplace_back(t, current);
    }
    return traj;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(tok);
    return out;
}

double parse_num(const std::string& s, const char* what) {
    size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != s.size())
        throw std::invalid_argument(std::string("measure spec: bad ") + what + " '" + s + "'");
    return v;
}

} // namespace

MeasureSpec parse_measure_spec(const std::string& text) {
    if (text == "kingman") return LambdaMeasure::kingman();
    if (text.rfind("beta:", 0) == 0) {
        const auto parts = split(text.substr(5), ',');
        if (parts.size() < 2 || parts.size() > 3)
            throw std::invalid_argument("measure spec: beta:a,b[,mass]");
        const double a = parse_num(parts[0], "beta parameter");
        const double b = parse_num(parts[1], "beta parameter");
        const double mass = parts.size() == 3 ? parse_num(parts[2], "mass") : 1.0;
        return LambdaMeasure::beta(a, b, mass);
    }
    if (text.rfind("point:", 0) == 0) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& item : split(text.substr(6), ',')) {
            const auto pw = split(item, ':');
            if (pw.size() != 2)
                throw std::invalid_argument("measure spec: point:p1:w1[,p2:w2...]");
            pts.emplace_back(parse_num(pw[0], "point location"),
                             parse_num(pw[1], "point weight"));
        }
        return LambdaMeasure::point_masses(std::move(pts));
    }
    if (text.rfind("xi:", 0) == 0) {
        XiMeasure xi;
        for (const auto& item : split(text.substr(3), ';')) {
            if (item.rfind("kingman:", 0) == 0) {
                xi.kingman_mass = parse_num(item.substr(8), "kingman mass");
                continue;
            }
            const auto wr = split(item, '@');
            if (wr.size() != 2)
                throw std::invalid_argument("measure spec: xi:w@r1/r2/...;...");
            std::vector<double> weights;
            for (const auto& r : wr[1]) (void)r;
            for (const auto& rtok : split(wr[1], '/'))
                weights.push_back(parse_num(rtok, "atom weight entry"));
            xi.atoms.push_back({parse_num(wr[0], "atom weight"),
                                MassPartition(std::move(weights))});
        }
        return xi;
    }
    throw std::invalid_argument("measure spec: unrecognized '" + text + "'");
}

std::string measure_spec_to_string(const MeasureSpec& spec) {
    std::ostringstream out;
    if (std::holds_alternative<LambdaMeasure>(spec)) {
        const auto& l = std::get<LambdaMeasure>(spec);
        switch (l.kind) {
            case LambdaMeasure::Kind::Kingman: return "kingman";
            case LambdaMeasure::Kind::Beta:
                out << "beta:" << l.beta_a << ',' << l.beta_b << ',' << l.total_mass;
                return out.str();
            case LambdaMeasure::Kind::PointMasses: {
                out << "point:";
                for (size_t i = 0; i < l.points.size(); ++i) {
                    if (i) out << ',';
                    out << l.points[i].first << ':' << l.points[i].second;
                }
                return out.str();
            }
        }
    }
    const auto& xi = std::get<XiMeasure>(spec);
    out << "xi:";
    for (size_t i = 0; i < xi.atoms.size(); ++i) {
        if (i) out << ';';
        out << xi.atoms[i].weight << '@';
        const auto& w = xi.atoms[i].rho.weights();
        for (size_t j = 0; j < w.size(); ++j) {
            if (j) out << '/';
            out << w[j];
        }
    }
    if (xi.kingman_mass > 0.0) out << ";kingman:" << xi.kingman_mass;
    return out.str();
}

} // namespace coalgene
