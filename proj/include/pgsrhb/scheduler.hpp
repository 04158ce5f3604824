#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pgsrhb/hp_space.hpp"
#include "pgsrhb/objectives.hpp"
#include "pgsrhb/pgsr.hpp"
#include "pgsrhb/rng.hpp"

namespace pgsrhb {

struct BudgetParams {
    int max_resource = 1;  // R
    int eta = 3;
    int cycles = 1;

    int s_max() const;              // largest s with eta^s <= R
    double bracket_budget() const;  // B = (s_max + 1) * R
};

struct RungSpec {
    int configs = 0;
    double resource = 0.0;
};

struct BracketSchedule {
    int s = 0;
    int initial_configs = 0;      // n
    double initial_resource = 0;  // r
    std::vector<RungSpec> rungs;  // rung i holds floor(n / eta^i) configs at r * eta^i
};

BracketSchedule bracket_schedule(const BudgetParams& p, int s);

struct TrialRecord {
    BinaryConfig config;
    double resource = 0.0;
    double loss = 0.0;
    int cycle = 0;
    int bracket_s = 0;
    int rung = 0;
    SamplerTag tag = SamplerTag::kUniform;
};

struct RunResult {
    BinaryConfig best_config;
    double best_loss = 0.0;
    bool has_best = false;
    History history;
    std::vector<TrialRecord> records;
    double total_resource_spent = 0.0;
};

// Durable sinks get each record the moment its evaluation settles (ordered
// by position within the rung) and a marker when a rung completes. The rng
// cursor is the draw count after the owning bracket's sampling, so a resumed
// run can fast-forward to an identical stream.
class TrialSink {
public:
    virtual ~TrialSink() = default;
    virtual void on_trial(const TrialRecord& record, std::uint64_t rng_cursor) = 0;
    virtual void on_rung_end(int cycle, int bracket_s, int rung, int count,
                             std::uint64_t rng_cursor) = 0;
    virtual void on_run_end(const RunResult& result) { (void)result; }
};

struct LogMarker {
    int cycle = 0;
    int bracket_s = 0;
    int rung = 0;
    std::uint64_t rng_cursor = 0;
};

// Prior state rebuilt from a trial log: everything through the last complete
// rung. The driver replays its plan up to the marker without consuming
// randomness, then continues evaluating.
struct ResumeState {
    History history;
    std::vector<TrialRecord> trials;
    std::optional<LogMarker> last_marker;
};

struct RunOptions {
    int parallelism = 1;
    TrialSink* sink = nullptr;
    std::ostream* progress = nullptr;  // one line per rung when set
    std::ostream* warnings = nullptr;
    const ResumeState* resume = nullptr;
};

using SamplerFn = std::function<DrawnSample(const History&, Rng&)>;

RunResult run_pgsr_hb(const BudgetParams& params, const SearchSpace& space,
                      const Objective& objective, const PgsrSettings& pgsr, std::uint64_t seed,
                      const RunOptions& opts = {});

RunResult run_hyperband(const BudgetParams& params, const SearchSpace& space,
                        const Objective& objective, std::uint64_t seed,
                        const RunOptions& opts = {});

// Repeated single-bracket halving at a fixed aggressiveness (default s_max),
// budget-matched to run_hyperband by running cycles * (s_max + 1) brackets.
RunResult run_successive_halving(const BudgetParams& params, const SearchSpace& space,
                                 const Objective& objective, std::uint64_t seed,
                                 const RunOptions& opts = {},
                                 std::optional<int> bracket_s = std::nullopt,
                                 std::optional<int> bracket_count = std::nullopt);

// Uniform configs all evaluated at full resource, spending `multiplier`
// times one Hyperband cycle's budget per cycle.
RunResult run_random_search(const BudgetParams& params, const SearchSpace& space,
                            const Objective& objective, std::uint64_t seed,
                            const RunOptions& opts = {}, double multiplier = 2.0);

int sh_bracket_count(const BudgetParams& params);
int rs_configs_per_cycle(const BudgetParams& params, double multiplier);

}  // namespace pgsrhb
