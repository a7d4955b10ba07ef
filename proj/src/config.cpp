#include "coalgene/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace coalgene {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw std::invalid_argument("config error at " + path + ": " + msg);
}

void require_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            fail(path + "/" + it.key(), "unknown key");
    }
}

double get_num(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) fail(path + "/" + key, "missing");
    if (!obj[key].is_number()) fail(path + "/" + key, "must be a number");
    return obj[key].get<double>();
}

double get_num_or(const json& obj, const std::string& path, const std::string& key,
                  double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) fail(path + "/" + key, "must be a number");
    return obj[key].get<double>();
}

std::vector<double> get_vec(const json& obj, const std::string& path,
                            const std::string& key) {
    if (!obj.contains(key) || !obj[key].is_array())
        fail(path + "/" + key, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : obj[key]) {
        if (!v.is_number()) fail(path + "/" + key, "must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

ModelSpec parse_model(const json& m, const std::string& path) {
    if (!m.is_object()) fail(path, "model must be an object");
    if (!m.contains("kind") || !m["kind"].is_string()) fail(path + "/kind", "missing");
    const std::string kind = m["kind"].get<std::string>();
    if (kind == "pd_power") {
        require_keys(m, path, {"kind", "alpha", "theta", "gamma"});
        PDParams p{get_num(m, path, "alpha"), get_num(m, path, "theta"),
                   get_num(m, path, "gamma")};
        p.validate();
        if (!(p.gamma > p.alpha / 2.0 && p.gamma <= p.alpha))
            fail(path + "/gamma",
                 "out of range: the power-weight asymptotics need alpha/2 < gamma <= alpha");
        return PDPowerSpec{p};
    }
    if (kind == "eldon_wakeley") {
        require_keys(m, path, {"kind", "measure", "epsilon"});
        if (!m.contains("measure") || !m["measure"].is_string())
            fail(path + "/measure", "missing measure spec string");
        const MeasureSpec ms = parse_measure_spec(m["measure"].get<std::string>());
        if (!std::holds_alternative<LambdaMeasure>(ms))
            fail(path + "/measure", "eldon_wakeley needs a Lambda measure");
        EldonWakeleySpec spec{std::get<LambdaMeasure>(ms), get_num(m, path, "epsilon")};
        if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0))
            fail(path + "/epsilon", "must lie in (0,1)");
        validate_model(ModelSpec{spec});
        return spec;
    }
    if (kind == "exponential") {
        require_keys(m, path, {"kind", "beta", "kappa", "truncation"});
        ExponentialModelSpec spec{get_num(m, path, "beta"), get_num(m, path, "kappa"),
                                  (long long)get_num_or(m, path, "truncation", 0)};
        if (!(spec.beta > 1.0)) fail(path + "/beta", "must exceed 1");
        if (!(spec.kappa > 0.5 && spec.kappa <= 1.0))
            fail(path + "/kappa", "must lie in (1/2, 1]");
        return spec;
    }
    if (kind == "bottleneck") {
        require_keys(m, path,
                     {"kind", "F", "F_power_tau", "a_exp", "b_exp", "nu_bar",
                      "dirichlet_c", "eta_hat", "eta_hat_weights"});
        BottleneckSpec spec;
        if (m.contains("F")) {
            if (!m["F"].is_array()) fail(path + "/F", "must be an array of [k, weight]");
            spec.f_kind = BottleneckSpec::FKind::Atoms;
            for (const auto& kv : m["F"]) {
                if (!kv.is_array() || kv.size() != 2)
                    fail(path + "/F", "entries must be [k, weight]");
                spec.f_atoms.emplace_back(kv[0].get<int>(), kv[1].get<double>());
            }
        } else if (m.contains("F_power_tau")) {
            spec.f_kind = BottleneckSpec::FKind::PowerLaw;
            spec.power_tau = get_num(m, path, "F_power_tau");
        } else {
            fail(path, "bottleneck needs F or F_power_tau");
        }
        spec.a_exp = get_num(m, path, "a_exp");
        spec.b_exp = get_num_or(m, path, "b_exp", 0.25);
        if (m.contains("nu_bar")) {
            const std::string nb = m["nu_bar"].get<std::string>();
            if (nb == "uniform") {
                spec.nu_bar = BottleneckSpec::NuBarKind::Uniform;
            } else if (nb == "dirichlet") {
                spec.nu_bar = BottleneckSpec::NuBarKind::Dirichlet;
                spec.dirichlet_c = get_num_or(m, path, "dirichlet_c", 1.0);
            } else {
                fail(path + "/nu_bar", "must be 'uniform' or 'dirichlet'");
            }
        }
        if (m.contains("eta_hat")) {
            const std::string eh = m["eta_hat"].get<std::string>();
            if (eh == "wright_fisher") {
                spec.eta_hat = BottleneckSpec::EtaHatKind::WrightFisher;
            } else if (eh == "explicit") {
                spec.eta_hat = BottleneckSpec::EtaHatKind::Explicit;
                spec.eta_hat_weights = get_vec(m, path, "eta_hat_weights");
            } else {
                fail(path + "/eta_hat", "must be 'wright_fisher' or 'explicit'");
            }
        }
        validate_model(ModelSpec{spec});
        return spec;
    }
    if (kind == "explicit") {
        require_keys(m, path, {"kind", "weights", "offspring"});
        ExplicitSpec spec;
        if (m.contains("weights")) spec.weights = get_vec(m, path, "weights");
        if (m.contains("offspring")) {
            std::vector<long long> nu;
            for (double v : get_vec(m, path, "offspring")) nu.push_back((long long)v);
            spec.offspring = std::move(nu);
        }
        validate_model(ModelSpec{spec});
        return spec;
    }
    fail(path + "/kind", "unknown model kind '" + kind + "'");
}

} // namespace

ModelSpec parse_model_json(const std::string& json_text) {
    const json j = json::parse(json_text);
    return parse_model(j, "model");
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config error: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config error: root must be an object");
    require_keys(j, "", {"model", "limit", "run", "output"});
    RunConfig cfg;
    if (j.contains("model")) cfg.model = parse_model(j["model"], "model");
    if (j.contains("limit")) {
        const auto& lim = j["limit"];
        require_keys(lim, "limit", {"measure"});
        if (!lim.contains("measure") || !lim["measure"].is_string())
            fail("limit/measure", "missing measure spec string");
        cfg.limit = parse_measure_spec(lim["measure"].get<std::string>());
    }
    if (j.contains("run")) {
        const auto& run = j["run"];
        require_keys(run, "run",
                     {"N", "N_list", "n", "replicates", "seed", "horizon", "t_max",
                      "times", "b_list", "shapes", "beta_exponent", "regime",
                      "rho_infty", "raw_counting", "tolerance", "em_truncation",
                      "threads"});
        if (run.contains("N")) cfg.n_list = {int(get_num(run, "run", "N"))};
        if (run.contains("N_list")) {
            cfg.n_list.clear();
            for (double v : get_vec(run, "run", "N_list")) cfg.n_list.push_back(int(v));
        }
        cfg.sample_n = int(get_num_or(run, "run", "n", 2));
        cfg.replicates = (long long)get_num_or(run, "run", "replicates", 10000);
        if (run.contains("seed"))
            cfg.seed = (uint64_t)get_num(run, "run", "seed");
        if (run.contains("horizon"))
            cfg.horizon = (long long)get_num(run, "run", "horizon");
        if (run.contains("t_max")) cfg.t_max = get_num(run, "run", "t_max");
        if (run.contains("times"))
            for (double v : get_vec(run, "run", "times")) cfg.times.push_back(v);
        if (run.contains("b_list"))
            for (double v : get_vec(run, "run", "b_list")) cfg.b_list.push_back(int(v));
        if (run.contains("shapes")) {
            if (!run["shapes"].is_array()) fail("run/shapes", "must be array of arrays");
            for (const auto& s : run["shapes"]) {
                std::vector<int> shape;
                for (const auto& v : s) shape.push_back(v.get<int>());
                cfg.shapes.push_back(std::move(shape));
            }
        }
        cfg.beta_exponent = get_num_or(run, "run", "beta_exponent", 3.0);
        if (run.contains("regime")) cfg.regime = run["regime"].get<std::string>();
        if (run.contains("rho_infty")) cfg.rho_infty = get_vec(run, "run", "rho_infty");
        if (run.contains("raw_counting")) cfg.raw_counting = run["raw_counting"].get<bool>();
        if (run.contains("tolerance")) cfg.tolerance = get_num(run, "run", "tolerance");
        cfg.em_truncation = (long long)get_num_or(run, "run", "em_truncation", 0);
    }
    if (j.contains("output")) {
        const auto& out = j["output"];
        require_keys(out, "output", {"path", "format"});
        if (out.contains("path")) cfg.out_path = out["path"].get<std::string>();
        if (out.contains("format")) cfg.out_format = out["format"].get<std::string>();
    }
    if (cfg.n_list.empty()) cfg.n_list = {100};
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config error: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string RunConfig::canonical_json() const {
    json j;
    if (model) j["model"]["kind"] = model_kind_name(*model);
    if (limit) j["limit"]["measure"] = measure_spec_to_string(*limit);
    j["run"]["N_list"] = n_list;
    j["run"]["n"] = sample_n;
    j["run"]["replicates"] = replicates;
    if (seed) j["run"]["seed"] = *seed;
    if (horizon) j["run"]["horizon"] = *horizon;
    if (t_max) j["run"]["t_max"] = *t_max;
    if (!times.empty()) j["run"]["times"] = times;
    if (!b_list.empty()) j["run"]["b_list"] = b_list;
    return j.dump(2);
}

} // namespace coalgene
