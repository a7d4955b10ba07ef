#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coalgene/coag_measures.hpp"
#include "coalgene/commands.hpp"
#include "coalgene/config.hpp"
#include "coalgene/diagnostics.hpp"
#include "coalgene/engine.hpp"
#include "coalgene/partition.hpp"
#include "coalgene/pd_analysis.hpp"
#include "coalgene/population_models.hpp"
#include "coalgene/rng.hpp"
#include "coalgene/special_functions.hpp"

namespace py = pybind11;
using namespace coalgene;

namespace {

// 1-based blocks for the python surface, matching the text encoding.
std::vector<std::vector<int>> blocks_1based(const Partition& p) {
    std::vector<std::vector<int>> out;
    for (const auto& b : p.blocks()) {
        std::vector<int> nb;
        for (int e : b) nb.push_back(e + 1);
        out.push_back(std::move(nb));
    }
    return out;
}

Partition partition_from_1based(int n, std::vector<std::vector<int>> blocks) {
    for (auto& b : blocks)
        for (int& e : b) e -= 1;
    return Partition::from_blocks(n, std::move(blocks));
}

ModelSpec model_from_json(const std::string& text) { return parse_model_json(text); }

} // namespace

PYBIND11_MODULE(_coalgene, m) {
    m.doc() = "genealogy simulation and coalescent-limit checks";

    py::class_<RngStream>(m, "RngStream")
        .def(py::init<uint64_t, uint32_t, uint32_t>(), py::arg("seed"),
             py::arg("replicate") = 0, py::arg("salt") = 0)
        .def("next_double", &RngStream::next_double)
        .def("next_u64", &RngStream::next_u64)
        .def("gamma", &RngStream::gamma)
        .def("beta", &RngStream::beta);

    py::class_<Partition>(m, "Partition")
        .def(py::init<int>(), py::arg("n"))
        .def_static("from_blocks", &partition_from_1based, py::arg("n"),
                    py::arg("blocks"))
        .def_static("decode", &Partition::decode)
        .def_property_readonly("n", &Partition::n)
        .def_property_readonly("block_count", &Partition::block_count)
        .def_property_readonly("blocks", &blocks_1based)
        .def("encode", &Partition::encode)
        .def("__eq__", [](const Partition& a, const Partition& b) { return a == b; })
        .def("__repr__", [](const Partition& p) { return "Partition(" + p.encode() + ")"; });

    m.def("coagulate", &coagulate);
    m.def("restrict_to", &restrict_to);
    m.def("block_sizes_desc", &block_sizes_desc);
    m.def("group_by_parent", [](const std::vector<long long>& parents) {
        return group_by_parent(parents);
    });
    m.def("enumerate_partitions", &enumerate_partitions);
    m.def("bell_number", &bell_number);

    py::class_<MassPartition>(m, "MassPartition")
        .def(py::init<std::vector<double>>())
        .def_property_readonly("weights", &MassPartition::weights)
        .def_property_readonly("dust", &MassPartition::dust)
        .def("sum_sq", &MassPartition::sum_sq);
    m.def("paintbox_sample", &paintbox_sample);
    m.def("paintbox_partition_prob", &paintbox_partition_prob);

    m.def("log_gamma", &log_gamma);
    m.def("digamma", &digamma);
    m.def("beta_fn", &beta_fn);
    m.def("em_const", &em_const);
    m.def("k_const", [](double a, double t) { return k_const({a, t, a}); },
          py::arg("alpha"), py::arg("theta"));
    m.def("ell_const",
          [](double a, double t, double g) { return ell_const({a, t, g}); },
          py::arg("alpha"), py::arg("theta"), py::arg("gamma"));
    m.def("exp_gamma_s_infty",
          py::overload_cast<double, double, double>(&exp_gamma_s_infty),
          py::arg("alpha"), py::arg("theta"), py::arg("gamma"));

    m.def("lambda_rate", [](const std::string& measure, int n, int b) {
        const MeasureSpec spec = parse_measure_spec(measure);
        return lambda_rate(std::get<LambdaMeasure>(spec), n, b);
    });
    m.def("xi_rate", [](const std::string& measure, const Partition& pt) {
        const MeasureSpec spec = parse_measure_spec(measure);
        if (std::holds_alternative<XiMeasure>(spec))
            return xi_rate(std::get<XiMeasure>(spec), pt);
        return xi_rate(XiMeasure::from_lambda(std::get<LambdaMeasure>(spec)), pt);
    });

    py::class_<EstimateWithError>(m, "EstimateWithError")
        .def_readonly("value", &EstimateWithError::value)
        .def_readonly("stderror", &EstimateWithError::stderror)
        .def_readonly("reps", &EstimateWithError::reps);

    m.def("sample_weights", [](const std::string& model_json, int N, uint64_t seed,
                               uint32_t replicate) {
        RngStream rng(seed, replicate);
        return sample_weights(model_from_json(model_json), N, rng).eta();
    }, py::arg("model_json"), py::arg("N"), py::arg("seed"), py::arg("replicate") = 0);

    m.def("estimate_cn", [](const std::string& model_json, int N, long long reps,
                            uint64_t seed, int threads) {
        const CnEstimate cn =
            estimate_cn(model_from_json(model_json), N, reps, seed, threads);
        return py::make_tuple(cn.formula, cn.empirical);
    }, py::arg("model_json"), py::arg("N"), py::arg("replicates"), py::arg("seed"),
       py::arg("threads") = 0);

    m.def("estimate_transition", [](const std::string& model_json, int N, int n,
                                    long long reps, uint64_t seed, int threads,
                                    bool raw) {
        const TransitionEstimate est = estimate_transition(
            model_from_json(model_json), N, n, reps, seed, threads, raw);
        py::dict out;
        for (size_t i = 0; i < est.states.size(); ++i)
            out[py::str(est.states[i].encode())] = est.probabilities[i];
        return out;
    }, py::arg("model_json"), py::arg("N"), py::arg("n"), py::arg("replicates"),
       py::arg("seed"), py::arg("threads") = 0, py::arg("raw_counting") = false);

    m.def("stick_breaking_zeta", [](double a, double t, double g, int N,
                                    uint64_t seed, uint32_t replicate) {
        RngStream rng(seed, replicate);
        const StickBreakingPath path = stick_breaking({a, t, g}, N, rng);
        return py::make_tuple(zeta(path, g), path.s.back());
    }, py::arg("alpha"), py::arg("theta"), py::arg("gamma"), py::arg("N"),
       py::arg("seed"), py::arg("replicate") = 0);

    m.def("u_n", [](double a, double t, double g, long long N) {
        return u_n({a, t, g}, N);
    });
    m.def("mu_n", [](double a, double t, double g, long long N) {
        return mu_n({a, t, g}, N);
    });

    m.def("check_report", [](const std::string& name, const std::string& config_json,
                             int threads) {
        const RunConfig cfg = parse_config(config_json);
        CheckReport report;
        {
            py::gil_scoped_release release;
            report = run_named_check(name, cfg, threads);
        }
        return report.to_json();
    }, py::arg("name"), py::arg("config_json"), py::arg("threads") = 0);
}
