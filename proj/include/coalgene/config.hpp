#ifndef COALGENE_CONFIG_HPP
#define COALGENE_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coalgene/coag_measures.hpp"
#include "coalgene/population_models.hpp"

namespace coalgene {

// Parsed run configuration. Strict: unknown keys anywhere are rejected with
// the offending JSON path; parameter-range checks of the owning modules run
// eagerly at parse time.
struct RunConfig {
    std::optional<ModelSpec> model;
    std::optional<MeasureSpec> limit;

    std::vector<int> n_list;          // population sizes (one or many)
    int sample_n = 2;
    long long replicates = 10000;
    std::optional<uint64_t> seed;
    std::optional<long long> horizon;
    std::optional<double> t_max;
    std::vector<double> times;
    std::vector<int> b_list;
    std::vector<std::vector<int>> shapes;
    double beta_exponent = 3.0;
    std::string regime = "i";
    std::optional<std::vector<double>> rho_infty;
    bool raw_counting = false;
    std::optional<double> tolerance;
    long long em_truncation = 0;

    std::optional<std::string> out_path;
    std::string out_format = "csv";

    std::string canonical_json() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

// Model block parser shared by config and tests (strict keys).
ModelSpec parse_model_json(const std::string& json_text);

} // namespace coalgene

#endif
