#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pgsrhb/hp_space.hpp"
#include "pgsrhb/objectives.hpp"
#include "pgsrhb/pgsr.hpp"
#include "pgsrhb/scheduler.hpp"

namespace pgsrhb {

enum class Algorithm { kPgsrHb, kHyperband, kSuccessiveHalving, kRandomSearch };

std::string_view to_string(Algorithm a);
Algorithm algorithm_from(std::string_view name);

struct GeneratedTermsSpec {
    int count = 0;
    int max_degree = 1;
    std::uint64_t seed = 0;
    double coeff_lo = 1.0;
    double coeff_hi = 3.0;
};

struct SyntheticSparseSpec {
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::vector<SurrogateTerm> terms;           // explicit terms, or
    std::optional<GeneratedTermsSpec> generate; // drawn from this recipe
};

struct LogLinear2dSpec {
    std::string x, y;  // names of two numeric categories, in space order
    double center_x = 0.0, center_y = 0.0;
    double width_x = 1.0, width_y = 1.0;
    double base = 0.0;
    double noise = 0.0;
    std::uint64_t seed = 0;
};

struct ExternalCommandSpec {
    std::string command;
};

using ObjectiveSpec = std::variant<SyntheticSparseSpec, LogLinear2dSpec, ExternalCommandSpec>;

struct ExperimentConfig {
    std::vector<Category> categories;
    ObjectiveSpec objective;
    Algorithm algorithm = Algorithm::kPgsrHb;
    BudgetParams budget;
    double rs_multiplier = 2.0;
    PgsrSettings pgsr;
    std::uint64_t seed = 0;
    int parallelism = 1;
    std::string log_path;  // empty means the default
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);
nlohmann::ordered_json to_json(const ExperimentConfig& cfg);

// The fields that must agree between a config and a log header for a resume
// to be sound (everything that shapes the deterministic run).
nlohmann::ordered_json config_signature(const ExperimentConfig& cfg);

SearchSpace make_space(const ExperimentConfig& cfg);
std::unique_ptr<Objective> make_objective(const ExperimentConfig& cfg, const SearchSpace& space);

}  // namespace pgsrhb
