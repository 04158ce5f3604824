#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pgsrhb/fourier.hpp"
#include "pgsrhb/hp_space.hpp"
#include "pgsrhb/rng.hpp"

namespace pgsrhb {

// Deterministic standard normal keyed by the evaluation identity, so a
// (config, resource) pair always sees the same noise within a run.
double keyed_normal(const BinaryConfig& config, double resource, std::uint64_t seed,
                    std::uint64_t trial_seed);

// A loss function over binary configs at a resource level. Implementations
// must be deterministic in (config, resource, trial_seed) and thread-safe.
class Objective {
public:
    virtual ~Objective() = default;
    virtual int total_bits() const = 0;
    virtual double evaluate(const BinaryConfig& config, double resource,
                            std::uint64_t trial_seed) const = 0;

    // Evaluation from named category values, for surface grids. Must agree
    // with evaluate() on values that decode from a config.
    virtual bool supports_values() const { return false; }
    virtual double evaluate_values(const std::vector<DecodedAssignment>& values, double resource,
                                   std::uint64_t trial_seed) const;
};

// Sparse polynomial in the parity basis plus noise scaled by sigma/sqrt(r).
class SyntheticSparseObjective : public Objective {
public:
    SyntheticSparseObjective(int bits, std::vector<SurrogateTerm> terms, double noise_scale,
                             std::uint64_t seed);

    int total_bits() const override { return bits_; }
    double evaluate(const BinaryConfig& config, double resource,
                    std::uint64_t trial_seed) const override;

    const std::vector<SurrogateTerm>& terms() const { return terms_; }
    std::vector<BasisIndex> known_support() const;

private:
    int bits_;
    std::vector<SurrogateTerm> terms_;
    double noise_scale_;
    std::uint64_t seed_;
};

// Distinct random index sets of degree <= max_degree with coefficient
// magnitudes uniform in [coeff_lo, coeff_hi] and random signs.
std::vector<SurrogateTerm> random_sparse_terms(int bits, int term_count, int max_degree,
                                               std::uint64_t seed, double coeff_lo = 1.0,
                                               double coeff_hi = 3.0);

// Quadratic basin in log10 of two numeric hyperparameters:
// loss = base + ((log10 x - cx)/wx)^2 + ((log10 y - cy)/wy)^2 + noise.
class LogLinear2dObjective : public Objective {
public:
    LogLinear2dObjective(NumericCategory x, NumericCategory y, double cx, double cy, double wx,
                         double wy, double base, double noise_scale, std::uint64_t seed);

    int total_bits() const override;
    double evaluate(const BinaryConfig& config, double resource,
                    std::uint64_t trial_seed) const override;
    bool supports_values() const override { return true; }
    double evaluate_values(const std::vector<DecodedAssignment>& values, double resource,
                           std::uint64_t trial_seed) const override;

private:
    NumericCategory x_, y_;
    double cx_, cy_, wx_, wy_, base_, noise_scale_;
    std::uint64_t seed_;
};

// Runs a shell command with `name=value` arguments plus `resource=r` and
// reads the loss from the last numeric token of the last non-empty stdout
// line. Nonzero exit or unparseable output raises ObjectiveError.
class ExternalCommandObjective : public Objective {
public:
    ExternalCommandObjective(std::string command, SearchSpace space);

    int total_bits() const override { return space_.total_bits(); }
    double evaluate(const BinaryConfig& config, double resource,
                    std::uint64_t trial_seed) const override;
    bool supports_values() const override { return true; }
    double evaluate_values(const std::vector<DecodedAssignment>& values, double resource,
                           std::uint64_t trial_seed) const override;

private:
    std::string command_;
    SearchSpace space_;
};

}  // namespace pgsrhb
