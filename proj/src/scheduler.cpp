#include "pgsrhb/scheduler.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <future>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "pgsrhb/errors.hpp"
#include "pgsrhb/text_util.hpp"

namespace pgsrhb {

namespace {

std::int64_t ipow(int base, int exp) {
    std::int64_t v = 1;
    for (int i = 0; i < exp; ++i) v *= base;
    return v;
}

void validate(const BudgetParams& p) {
    if (p.max_resource < 1) throw ConfigError("max resource must be at least 1");
    if (p.eta < 2) throw ConfigError("eta must be at least 2");
    if (p.cycles < 1) throw ConfigError("cycles must be at least 1");
}

struct PlannedBracket {
    int cycle = 0;
    int s = 0;
    BracketSchedule schedule;
};

double safe_eval(const Objective& objective, const BinaryConfig& config, double resource) {
    try {
        double loss = objective.evaluate(config, resource, 0);
        return std::isfinite(loss) ? loss : std::numeric_limits<double>::infinity();
    } catch (const ObjectiveError&) {
        return std::numeric_limits<double>::infinity();
    }
}

struct Candidate {
    BinaryConfig config;
    SamplerTag tag = SamplerTag::kUniform;
};

// Stable sort by loss, keep floor(count / eta) survivors, drop failures.
std::vector<Candidate> promote(const std::vector<TrialRecord>& rung_records, int eta) {
    std::vector<int> order(rung_records.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return rung_records[std::size_t(a)].loss < rung_records[std::size_t(b)].loss;
    });
    std::size_t keep = rung_records.size() / std::size_t(eta);
    std::vector<Candidate> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        const TrialRecord& rec = rung_records[std::size_t(order[i])];
        if (!std::isfinite(rec.loss)) break;  // failures sorted last
        out.push_back({rec.config, rec.tag});
    }
    return out;
}

RunResult run_plan(const BudgetParams& params, const std::vector<PlannedBracket>& plan,
                   const SearchSpace& space, const Objective& objective, const SamplerFn& sampler,
                   std::uint64_t seed, const RunOptions& opts) {
    if (objective.total_bits() != space.total_bits())
        throw ConfigError("objective and space disagree on config width");
    if (opts.parallelism < 1) throw ConfigError("parallelism must be at least 1");

    Rng rng(seed);
    RunResult result;
    result.best_loss = std::numeric_limits<double>::infinity();

    auto note_record = [&](const TrialRecord& rec) {
        result.total_resource_spent += rec.resource;
        if (rec.resource == double(params.max_resource) && rec.loss < result.best_loss) {
            result.best_loss = rec.loss;
            result.best_config = rec.config;
            result.has_best = true;
        }
    };

    // Where to pick up: plan index and rung of the last completed rung.
    std::ptrdiff_t marker_bracket = -1;
    int marker_rung = -1;
    if (opts.resume && opts.resume->last_marker) {
        const LogMarker& m = *opts.resume->last_marker;
        for (std::size_t i = 0; i < plan.size(); ++i) {
            if (plan[i].cycle == m.cycle && plan[i].s == m.bracket_s) {
                marker_bracket = std::ptrdiff_t(i);
                marker_rung = m.rung;
                break;
            }
        }
        if (marker_bracket < 0 || marker_rung > plan[std::size_t(marker_bracket)].s)
            throw LogError("resume marker does not match the planned schedule");
        result.history = opts.resume->history;
        result.records = opts.resume->trials;
        for (const TrialRecord& rec : result.records) note_record(rec);
        rng.skip(m.rng_cursor);
    }

    for (std::size_t bi = 0; bi < plan.size(); ++bi) {
        const PlannedBracket& bracket = plan[bi];
        const std::vector<RungSpec>& rungs = bracket.schedule.rungs;

        int start_rung = 0;
        std::uint64_t bracket_cursor = 0;
        std::vector<Candidate> population;

        if (std::ptrdiff_t(bi) < marker_bracket) continue;
        if (std::ptrdiff_t(bi) == marker_bracket) {
            start_rung = marker_rung + 1;
            if (start_rung >= int(rungs.size())) continue;
            if (rungs[std::size_t(start_rung)].configs == 0) continue;
            // Rebuild survivors of the last completed rung from the loaded
            // records; the rng cursor already covers this bracket's sampling.
            std::vector<TrialRecord> prev;
            for (const TrialRecord& rec : result.records)
                if (rec.cycle == bracket.cycle && rec.bracket_s == bracket.s &&
                    rec.rung == start_rung - 1)
                    prev.push_back(rec);
            population = promote(prev, params.eta);
            bracket_cursor = opts.resume->last_marker->rng_cursor;
            if (population.empty()) continue;
        } else {
            population.reserve(std::size_t(bracket.schedule.initial_configs));
            for (int i = 0; i < bracket.schedule.initial_configs; ++i) {
                DrawnSample s = sampler(result.history, rng);
                population.push_back({std::move(s.config), s.tag});
            }
            bracket_cursor = rng.draws();
        }

        for (int rung = start_rung; rung < int(rungs.size()); ++rung) {
            if (rungs[std::size_t(rung)].configs == 0 || population.empty()) break;
            const double resource = rungs[std::size_t(rung)].resource;

            std::vector<double> losses(population.size());
            std::exception_ptr failure;
            if (opts.parallelism > 1 && population.size() > 1) {
                std::atomic<std::size_t> cursor{0};
                std::mutex failure_mutex;
                auto worker = [&]() {
                    for (;;) {
                        std::size_t i = cursor.fetch_add(1);
                        if (i >= population.size()) return;
                        try {
                            losses[i] = safe_eval(objective, population[i].config, resource);
                        } catch (...) {
                            std::lock_guard<std::mutex> lock(failure_mutex);
                            if (!failure) failure = std::current_exception();
                            return;
                        }
                    }
                };
                std::vector<std::future<void>> workers;
                std::size_t count = std::min(std::size_t(opts.parallelism), population.size());
                for (std::size_t w = 0; w < count; ++w)
                    workers.push_back(std::async(std::launch::async, worker));
                for (auto& f : workers) f.get();
                if (failure) std::rethrow_exception(failure);
            } else {
                for (std::size_t i = 0; i < population.size(); ++i)
                    losses[i] = safe_eval(objective, population[i].config, resource);
            }

            std::vector<TrialRecord> rung_records;
            rung_records.reserve(population.size());
            for (std::size_t i = 0; i < population.size(); ++i) {
                TrialRecord rec{population[i].config, resource,  losses[i], bracket.cycle,
                                bracket.s,            rung,      population[i].tag};
                note_record(rec);
                if (opts.sink) opts.sink->on_trial(rec, bracket_cursor);
                rung_records.push_back(rec);
                result.records.push_back(std::move(rec));
            }
            for (const TrialRecord& rec : rung_records)
                if (std::isfinite(rec.loss))
                    result.history.append(resource, rec.config, rec.loss);
            if (opts.sink)
                opts.sink->on_rung_end(bracket.cycle, bracket.s, rung, int(rung_records.size()),
                                       bracket_cursor);
            if (opts.progress) {
                *opts.progress << "cycle " << bracket.cycle << " s=" << bracket.s << " rung "
                               << rung << ": " << rung_records.size() << " configs at r="
                               << format_double(resource) << ", best@R="
                               << (result.has_best ? format_double(result.best_loss) : "-")
                               << "\n";
            }

            if (rung + 1 < int(rungs.size()))
                population = promote(rung_records, params.eta);
        }
    }

    if (opts.sink) opts.sink->on_run_end(result);
    return result;
}

std::vector<PlannedBracket> hyperband_plan(const BudgetParams& params) {
    std::vector<PlannedBracket> plan;
    for (int cycle = 1; cycle <= params.cycles; ++cycle)
        for (int s = params.s_max(); s >= 0; --s)
            plan.push_back({cycle, s, bracket_schedule(params, s)});
    return plan;
}

}  // namespace

int BudgetParams::s_max() const {
    validate(*this);
    int s = 0;
    std::int64_t p = 1;
    while (p * eta <= max_resource) {
        p *= eta;
        ++s;
    }
    return s;
}

double BudgetParams::bracket_budget() const { return double(s_max() + 1) * max_resource; }

BracketSchedule bracket_schedule(const BudgetParams& p, int s) {
    validate(p);
    const int smax = p.s_max();
    if (s < 0 || s > smax)
        throw ConfigError("bracket index " + std::to_string(s) + " outside 0.." +
                          std::to_string(smax));

    BracketSchedule b;
    b.s = s;
    // n = ceil((B/R) * eta^s / (s+1)) with B = (s_max+1) R, so B/R is exact.
    std::int64_t scaled = std::int64_t(smax + 1) * ipow(p.eta, s);
    b.initial_configs = int((scaled + s) / (s + 1));
    b.initial_resource = double(p.max_resource) / double(ipow(p.eta, s));
    for (int i = 0; i <= s; ++i) {
        RungSpec rung;
        rung.configs = int(std::int64_t(b.initial_configs) / ipow(p.eta, i));
        rung.resource = double(p.max_resource) / double(ipow(p.eta, s - i));
        b.rungs.push_back(rung);
    }
    return b;
}

RunResult run_pgsr_hb(const BudgetParams& params, const SearchSpace& space,
                      const Objective& objective, const PgsrSettings& pgsr, std::uint64_t seed,
                      const RunOptions& opts) {
    PgsrSampler sampler(space, pgsr, opts.warnings);
    SamplerFn fn = [&sampler](const History& h, Rng& rng) { return sampler.sample(h, rng); };
    return run_plan(params, hyperband_plan(params), space, objective, fn, seed, opts);
}

RunResult run_hyperband(const BudgetParams& params, const SearchSpace& space,
                        const Objective& objective, std::uint64_t seed, const RunOptions& opts) {
    SamplerFn fn = [&space](const History&, Rng& rng) {
        return DrawnSample{random_config(space, rng), SamplerTag::kUniform};
    };
    return run_plan(params, hyperband_plan(params), space, objective, fn, seed, opts);
}

RunResult run_successive_halving(const BudgetParams& params, const SearchSpace& space,
                                 const Objective& objective, std::uint64_t seed,
                                 const RunOptions& opts, std::optional<int> bracket_s,
                                 std::optional<int> bracket_count) {
    validate(params);
    int s = bracket_s.value_or(params.s_max());
    int count = bracket_count.value_or(sh_bracket_count(params));
    if (count < 1) throw ConfigError("need at least one halving bracket");
    std::vector<PlannedBracket> plan;
    for (int b = 1; b <= count; ++b) plan.push_back({b, s, bracket_schedule(params, s)});
    SamplerFn fn = [&space](const History&, Rng& rng) {
        return DrawnSample{random_config(space, rng), SamplerTag::kUniform};
    };
    return run_plan(params, plan, space, objective, fn, seed, opts);
}

RunResult run_random_search(const BudgetParams& params, const SearchSpace& space,
                            const Objective& objective, std::uint64_t seed, const RunOptions& opts,
                            double multiplier) {
    validate(params);
    int per_cycle = rs_configs_per_cycle(params, multiplier);
    std::vector<PlannedBracket> plan;
    for (int cycle = 1; cycle <= params.cycles; ++cycle) {
        BracketSchedule schedule;
        schedule.s = 0;
        schedule.initial_configs = per_cycle;
        schedule.initial_resource = double(params.max_resource);
        schedule.rungs.push_back({per_cycle, double(params.max_resource)});
        plan.push_back({cycle, 0, std::move(schedule)});
    }
    SamplerFn fn = [&space](const History&, Rng& rng) {
        return DrawnSample{random_config(space, rng), SamplerTag::kUniform};
    };
    return run_plan(params, plan, space, objective, fn, seed, opts);
}

int sh_bracket_count(const BudgetParams& params) { return params.cycles * (params.s_max() + 1); }

int rs_configs_per_cycle(const BudgetParams& params, double multiplier) {
    if (!(multiplier > 0.0)) throw ConfigError("budget multiplier must be positive");
    double brackets = double(params.s_max() + 1);
    int count = int(std::floor(multiplier * brackets * brackets));
    if (count < 1) throw ConfigError("budget multiplier too small for one config");
    return count;
}

}  // namespace pgsrhb
