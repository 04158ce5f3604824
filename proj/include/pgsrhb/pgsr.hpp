#pragma once

#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "pgsrhb/fourier.hpp"
#include "pgsrhb/group_lasso.hpp"
#include "pgsrhb/hp_space.hpp"
#include "pgsrhb/rng.hpp"

namespace pgsrhb {

struct Observation {
    BinaryConfig config;
    double loss = 0.0;
};

// Completed evaluations pooled per resource level, append-only.
class History {
public:
    void append(double resource, BinaryConfig config, double loss);
    const std::vector<Observation>& at(double resource) const;
    std::vector<double> resources() const;  // ascending
    std::size_t count(double resource) const;
    std::size_t total() const;
    bool empty() const { return pools_.empty(); }

private:
    std::map<double, std::vector<Observation>> pools_;
};

struct PgsrSettings {
    int sparsity = 5;
    int degree = 2;
    int min_observations = 1;
    double reset_prob = 0.0;
    double lambda = 1.0;
    SolverSettings solver;
};

struct CategoryRange {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
};

// A fitted restriction: the variables J touched by the strongest surrogate
// terms, pinned to the surrogate's minimizer z over those variables.
struct Guidance {
    Restriction restriction;
    Surrogate surrogate;
    double source_resource = 0.0;
    std::vector<CategoryRange> ranges;
};

struct SelectedHistory {
    double resource = 0.0;
    const std::vector<Observation>* records = nullptr;
};

// Largest resource level holding at least min_observations records.
std::optional<SelectedHistory> select_history(const History& h, int min_observations);

// Fit the grouped sparse surrogate on (inputs, outputs) and derive (J, z):
// top `sparsity` coefficients by magnitude (ties by basis order), J their
// union, z the surrogate minimizer over J with -1 preferred on ties.
Guidance fit_guidance(const std::vector<BinaryConfig>& inputs, const std::vector<double>& outputs,
                      const SearchSpace& space, const PgsrSettings& settings);

// Per numeric category, the decodable value range once the restricted bits
// are pinned; categories with no pinned bits report their full range.
std::vector<CategoryRange> reduced_ranges(const Restriction& r, const SearchSpace& space);

enum class SamplerTag { kUniform, kRestricted, kReset };

std::string_view to_string(SamplerTag tag);
SamplerTag sampler_tag_from(std::string_view s);

struct DrawnSample {
    BinaryConfig config;
    SamplerTag tag = SamplerTag::kUniform;
};

// Stateful sampler: refits guidance whenever the selected history snapshot
// (resource, record count) changes, then mixes restricted draws with
// probability (1 - reset_prob) and full-domain resets otherwise. Guidance
// failures fall back to uniform sampling with a warning.
class PgsrSampler {
public:
    PgsrSampler(SearchSpace space, PgsrSettings settings, std::ostream* warnings = nullptr);

    DrawnSample sample(const History& history, Rng& rng);

    const std::optional<Guidance>& guidance() const { return guidance_; }
    int warning_count() const { return warning_count_; }

private:
    SearchSpace space_;
    PgsrSettings settings_;
    std::ostream* warnings_;
    std::optional<Guidance> guidance_;
    bool fit_failed_ = false;
    double cached_resource_ = -1.0;
    std::size_t cached_count_ = 0;
    int warning_count_ = 0;
};

}  // namespace pgsrhb
