#include "pgsrhb/experiment_config.hpp"

#include <fstream>
#include <set>

#include "pgsrhb/errors.hpp"

namespace pgsrhb {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void expect_keys(const json& j, const char* where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
    for (const auto& [k, _] : j.items())
        if (!allowed.count(k))
            throw ConfigError(std::string("unknown key '") + k + "' in " + where);
}

template <typename T>
T require(const json& j, const char* where, const char* key) {
    if (!j.contains(key))
        throw ConfigError(std::string(where) + " is missing required key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("bad value for '") + key + "' in " + where);
    }
}

template <typename T>
T optional_or(const json& j, const char* where, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("bad value for '") + key + "' in " + where);
    }
}

Category parse_category(const json& j) {
    std::string type = require<std::string>(j, "space entry", "type");
    if (type == "numeric") {
        expect_keys(j, "numeric category",
                    {"type", "name", "exponent_bits", "mantissa_bits", "e_min"});
        NumericCategory c;
        c.name = require<std::string>(j, "numeric category", "name");
        c.exponent_bits = require<int>(j, "numeric category", "exponent_bits");
        c.mantissa_bits = require<int>(j, "numeric category", "mantissa_bits");
        c.e_min = require<int>(j, "numeric category", "e_min");
        return c;
    }
    if (type == "categorical") {
        expect_keys(j, "categorical category", {"type", "name", "choices"});
        CategoricalCategory c;
        c.name = require<std::string>(j, "categorical category", "name");
        c.choices = require<std::vector<std::string>>(j, "categorical category", "choices");
        return c;
    }
    throw ConfigError("unknown category type: " + type);
}

std::vector<SurrogateTerm> parse_terms(const json& arr) {
    if (!arr.is_array()) throw ConfigError("objective terms must be an array");
    std::vector<SurrogateTerm> terms;
    for (const auto& t : arr) {
        expect_keys(t, "objective term", {"vars", "coeff"});
        SurrogateTerm term;
        term.vars = require<std::vector<int>>(t, "objective term", "vars");
        term.coeff = require<double>(t, "objective term", "coeff");
        terms.push_back(std::move(term));
    }
    return terms;
}

ObjectiveSpec parse_objective(const json& j) {
    std::string type = require<std::string>(j, "objective", "type");
    if (type == "synthetic-sparse") {
        expect_keys(j, "synthetic-sparse objective", {"type", "noise", "seed", "terms", "generate"});
        SyntheticSparseSpec spec;
        spec.noise = optional_or<double>(j, "objective", "noise", 0.0);
        spec.seed = optional_or<std::uint64_t>(j, "objective", "seed", 0);
        if (j.contains("terms")) spec.terms = parse_terms(j.at("terms"));
        if (j.contains("generate")) {
            const json& g = j.at("generate");
            expect_keys(g, "generate", {"count", "max_degree", "seed", "coeff_lo", "coeff_hi"});
            GeneratedTermsSpec gen;
            gen.count = require<int>(g, "generate", "count");
            gen.max_degree = require<int>(g, "generate", "max_degree");
            gen.seed = require<std::uint64_t>(g, "generate", "seed");
            gen.coeff_lo = optional_or<double>(g, "generate", "coeff_lo", 1.0);
            gen.coeff_hi = optional_or<double>(g, "generate", "coeff_hi", 3.0);
            spec.generate = gen;
        }
        if (spec.terms.empty() == !spec.generate.has_value())
            throw ConfigError("synthetic-sparse needs either explicit terms or a generate block");
        return spec;
    }
    if (type == "loglinear-2d") {
        expect_keys(j, "loglinear-2d objective",
                    {"type", "x", "y", "center", "width", "base", "noise", "seed"});
        LogLinear2dSpec spec;
        spec.x = require<std::string>(j, "objective", "x");
        spec.y = require<std::string>(j, "objective", "y");
        auto center = require<std::vector<double>>(j, "objective", "center");
        auto width = optional_or<std::vector<double>>(j, "objective", "width", {1.0, 1.0});
        if (center.size() != 2 || width.size() != 2)
            throw ConfigError("loglinear-2d center and width must have two entries");
        spec.center_x = center[0];
        spec.center_y = center[1];
        spec.width_x = width[0];
        spec.width_y = width[1];
        spec.base = optional_or<double>(j, "objective", "base", 0.0);
        spec.noise = optional_or<double>(j, "objective", "noise", 0.0);
        spec.seed = optional_or<std::uint64_t>(j, "objective", "seed", 0);
        return spec;
    }
    if (type == "external-command") {
        expect_keys(j, "external-command objective", {"type", "command"});
        ExternalCommandSpec spec;
        spec.command = require<std::string>(j, "objective", "command");
        return spec;
    }
    throw ConfigError("unknown objective type: " + type);
}

}  // namespace

std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::kPgsrHb: return "pgsr-hb";
        case Algorithm::kHyperband: return "hyperband";
        case Algorithm::kSuccessiveHalving: return "sh";
        case Algorithm::kRandomSearch: return "random-search";
    }
    return "pgsr-hb";
}

Algorithm algorithm_from(std::string_view name) {
    if (name == "pgsr-hb") return Algorithm::kPgsrHb;
    if (name == "hyperband") return Algorithm::kHyperband;
    if (name == "sh") return Algorithm::kSuccessiveHalving;
    if (name == "random-search") return Algorithm::kRandomSearch;
    throw ConfigError("unknown algorithm: " + std::string(name));
}

ExperimentConfig parse_config(const json& j) {
    expect_keys(j, "config",
                {"space", "objective", "algorithm", "budget", "pgsr", "seed", "parallelism",
                 "log"});

    ExperimentConfig cfg;
    if (!j.contains("space") || !j.at("space").is_array() || j.at("space").empty())
        throw ConfigError("config needs a non-empty space array");
    for (const auto& c : j.at("space")) cfg.categories.push_back(parse_category(c));

    if (!j.contains("objective")) throw ConfigError("config needs an objective");
    cfg.objective = parse_objective(j.at("objective"));

    cfg.algorithm = algorithm_from(optional_or<std::string>(j, "config", "algorithm", "pgsr-hb"));

    if (!j.contains("budget")) throw ConfigError("config needs a budget");
    const json& b = j.at("budget");
    expect_keys(b, "budget", {"max_resource", "eta", "cycles", "rs_multiplier"});
    cfg.budget.max_resource = require<int>(b, "budget", "max_resource");
    cfg.budget.eta = optional_or<int>(b, "budget", "eta", 3);
    cfg.budget.cycles = optional_or<int>(b, "budget", "cycles", 1);
    cfg.rs_multiplier = optional_or<double>(b, "budget", "rs_multiplier", 2.0);

    if (j.contains("pgsr")) {
        const json& p = j.at("pgsr");
        expect_keys(p, "pgsr",
                    {"sparsity", "degree", "min_observations", "reset_prob", "lambda", "solver"});
        cfg.pgsr.sparsity = optional_or<int>(p, "pgsr", "sparsity", 5);
        cfg.pgsr.degree = optional_or<int>(p, "pgsr", "degree", 2);
        cfg.pgsr.min_observations = optional_or<int>(p, "pgsr", "min_observations", 1);
        cfg.pgsr.reset_prob = optional_or<double>(p, "pgsr", "reset_prob", 0.0);
        cfg.pgsr.lambda = optional_or<double>(p, "pgsr", "lambda", 1.0);
        if (p.contains("solver")) {
            const json& s = p.at("solver");
            expect_keys(s, "solver", {"tol", "max_sweeps", "standardize", "fit_intercept"});
            cfg.pgsr.solver.tol = optional_or<double>(s, "solver", "tol", 1e-8);
            cfg.pgsr.solver.max_sweeps = optional_or<int>(s, "solver", "max_sweeps", 10000);
            cfg.pgsr.solver.standardize = optional_or<bool>(s, "solver", "standardize", true);
            cfg.pgsr.solver.fit_intercept = optional_or<bool>(s, "solver", "fit_intercept", true);
        }
        if (cfg.pgsr.sparsity < 1) throw ConfigError("pgsr.sparsity must be positive");
        if (cfg.pgsr.degree < 1) throw ConfigError("pgsr.degree must be positive");
        if (cfg.pgsr.reset_prob < 0.0 || cfg.pgsr.reset_prob > 1.0)
            throw ConfigError("pgsr.reset_prob must lie in [0, 1]");
        if (cfg.pgsr.lambda < 0.0) throw ConfigError("pgsr.lambda must be nonnegative");
    }

    cfg.seed = optional_or<std::uint64_t>(j, "config", "seed", 0);
    cfg.parallelism = optional_or<int>(j, "config", "parallelism", 1);
    if (cfg.parallelism < 1) throw ConfigError("parallelism must be at least 1");
    cfg.log_path = optional_or<std::string>(j, "config", "log", "");

    make_space(cfg);  // surfaces bad category definitions early
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(j);
}

ordered_json to_json(const ExperimentConfig& cfg) {
    ordered_json j;
    ordered_json space = ordered_json::array();
    for (const auto& cat : cfg.categories) {
        ordered_json c;
        if (const auto* num = std::get_if<NumericCategory>(&cat)) {
            c["type"] = "numeric";
            c["name"] = num->name;
            c["exponent_bits"] = num->exponent_bits;
            c["mantissa_bits"] = num->mantissa_bits;
            c["e_min"] = num->e_min;
        } else {
            const auto& cc = std::get<CategoricalCategory>(cat);
            c["type"] = "categorical";
            c["name"] = cc.name;
            c["choices"] = cc.choices;
        }
        space.push_back(std::move(c));
    }
    j["space"] = std::move(space);

    ordered_json obj;
    if (const auto* syn = std::get_if<SyntheticSparseSpec>(&cfg.objective)) {
        obj["type"] = "synthetic-sparse";
        obj["noise"] = syn->noise;
        obj["seed"] = syn->seed;
        if (!syn->terms.empty()) {
            ordered_json terms = ordered_json::array();
            for (const auto& t : syn->terms) {
                ordered_json tj;
                tj["vars"] = t.vars;
                tj["coeff"] = t.coeff;
                terms.push_back(std::move(tj));
            }
            obj["terms"] = std::move(terms);
        }
        if (syn->generate) {
            ordered_json g;
            g["count"] = syn->generate->count;
            g["max_degree"] = syn->generate->max_degree;
            g["seed"] = syn->generate->seed;
            g["coeff_lo"] = syn->generate->coeff_lo;
            g["coeff_hi"] = syn->generate->coeff_hi;
            obj["generate"] = std::move(g);
        }
    } else if (const auto* ll = std::get_if<LogLinear2dSpec>(&cfg.objective)) {
        obj["type"] = "loglinear-2d";
        obj["x"] = ll->x;
        obj["y"] = ll->y;
        obj["center"] = {ll->center_x, ll->center_y};
        obj["width"] = {ll->width_x, ll->width_y};
        obj["base"] = ll->base;
        obj["noise"] = ll->noise;
        obj["seed"] = ll->seed;
    } else {
        obj["type"] = "external-command";
        obj["command"] = std::get<ExternalCommandSpec>(cfg.objective).command;
    }
    j["objective"] = std::move(obj);

    j["algorithm"] = std::string(to_string(cfg.algorithm));
    j["budget"] = {{"max_resource", cfg.budget.max_resource},
                   {"eta", cfg.budget.eta},
                   {"cycles", cfg.budget.cycles},
                   {"rs_multiplier", cfg.rs_multiplier}};
    j["pgsr"] = {{"sparsity", cfg.pgsr.sparsity},
                 {"degree", cfg.pgsr.degree},
                 {"min_observations", cfg.pgsr.min_observations},
                 {"reset_prob", cfg.pgsr.reset_prob},
                 {"lambda", cfg.pgsr.lambda},
                 {"solver",
                  {{"tol", cfg.pgsr.solver.tol},
                   {"max_sweeps", cfg.pgsr.solver.max_sweeps},
                   {"standardize", cfg.pgsr.solver.standardize},
                   {"fit_intercept", cfg.pgsr.solver.fit_intercept}}}};
    j["seed"] = cfg.seed;
    j["parallelism"] = cfg.parallelism;
    j["log"] = cfg.log_path;
    return j;
}

ordered_json config_signature(const ExperimentConfig& cfg) {
    ordered_json j = to_json(cfg);
    j.erase("parallelism");
    j.erase("log");
    return j;
}

SearchSpace make_space(const ExperimentConfig& cfg) { return SearchSpace(cfg.categories); }

std::unique_ptr<Objective> make_objective(const ExperimentConfig& cfg, const SearchSpace& space) {
    if (const auto* syn = std::get_if<SyntheticSparseSpec>(&cfg.objective)) {
        std::vector<SurrogateTerm> terms = syn->terms;
        if (syn->generate)
            terms = random_sparse_terms(space.total_bits(), syn->generate->count,
                                        syn->generate->max_degree, syn->generate->seed,
                                        syn->generate->coeff_lo, syn->generate->coeff_hi);
        try {
            return std::make_unique<SyntheticSparseObjective>(space.total_bits(), std::move(terms),
                                                              syn->noise, syn->seed);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("bad synthetic objective: ") + e.what());
        }
    }
    if (const auto* ll = std::get_if<LogLinear2dSpec>(&cfg.objective)) {
        if (space.categories().size() != 2)
            throw ConfigError("loglinear-2d expects a space with exactly the two named categories");
        const auto* x = std::get_if<NumericCategory>(&space.categories()[0]);
        const auto* y = std::get_if<NumericCategory>(&space.categories()[1]);
        if (!x || !y || x->name != ll->x || y->name != ll->y)
            throw ConfigError("loglinear-2d needs numeric categories '" + ll->x + "' then '" +
                              ll->y + "' in the space");
        return std::make_unique<LogLinear2dObjective>(*x, *y, ll->center_x, ll->center_y,
                                                      ll->width_x, ll->width_y, ll->base,
                                                      ll->noise, ll->seed);
    }
    const auto& cmd = std::get<ExternalCommandSpec>(cfg.objective);
    return std::make_unique<ExternalCommandObjective>(cmd.command, space);
}

}  // namespace pgsrhb
