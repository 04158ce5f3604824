#include "pgsrhb/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "pgsrhb/errors.hpp"
#include "pgsrhb/text_util.hpp"

namespace pgsrhb {

namespace {

using nlohmann::ordered_json;

std::string value_str(const DecodedValue& v) {
    return std::holds_alternative<double>(v) ? format_double(std::get<double>(v))
                                             : std::get<std::string>(v);
}

RunResult dispatch(const ExperimentConfig& cfg, const SearchSpace& space,
                   const Objective& objective, const RunOptions& opts) {
    switch (cfg.algorithm) {
        case Algorithm::kPgsrHb:
            return run_pgsr_hb(cfg.budget, space, objective, cfg.pgsr, cfg.seed, opts);
        case Algorithm::kHyperband:
            return run_hyperband(cfg.budget, space, objective, cfg.seed, opts);
        case Algorithm::kSuccessiveHalving:
            return run_successive_halving(cfg.budget, space, objective, cfg.seed, opts);
        case Algorithm::kRandomSearch:
            return run_random_search(cfg.budget, space, objective, cfg.seed, opts,
                                     cfg.rs_multiplier);
    }
    throw ConfigError("unhandled algorithm");
}

void print_summary(const ExperimentConfig& cfg, const SearchSpace& space, const RunResult& result,
                   const std::string& log_path, std::ostream& out) {
    out << "algorithm: " << to_string(cfg.algorithm) << "\n";
    out << "seed: " << cfg.seed << "\n";
    out << "trials: " << result.records.size()
        << ", resource spent: " << format_double(result.total_resource_spent) << "\n";
    if (result.has_best) {
        out << "best at r=" << cfg.budget.max_resource << ": loss "
            << format_double(result.best_loss) << "\n";
        for (const auto& a : decode_config(space, result.best_config))
            out << "  " << a.name << " = " << value_str(a.value) << "\n";
    } else {
        out << "no finite loss observed at full resource\n";
    }
    out << "log: " << log_path << "\n";
}

}  // namespace

std::string resolve_log_path(const ExperimentConfig& cfg, const std::optional<std::string>& flag) {
    std::string path = flag ? *flag : (!cfg.log_path.empty() ? cfg.log_path : "trials.jsonl");
    if (const char* dir = std::getenv("PGSRHB_LOG_DIR"); dir && *dir)
        path = (std::filesystem::path(dir) / std::filesystem::path(path).filename()).string();
    return path;
}

int cmd_run(ExperimentConfig cfg, const RunFlags& flags, bool resume, std::ostream& out,
            std::ostream& err) {
    if (flags.seed) {
        if (resume) throw ConfigError("the seed cannot change on resume");
        cfg.seed = *flags.seed;
    }
    if (flags.parallelism) cfg.parallelism = *flags.parallelism;
    const std::string path = resolve_log_path(cfg, flags.log);

    SearchSpace space = make_space(cfg);
    auto objective = make_objective(cfg, space);

    std::optional<TrialLog> sink;
    std::optional<ResumeState> prior;
    if (resume) {
        LoadedLog loaded = load_log(path);
        if (!loaded.header.contains("config"))
            throw LogError("log header carries no config; cannot resume");
        ExperimentConfig logged = parse_config(loaded.header.at("config"));
        if (config_signature(logged) != config_signature(cfg))
            throw ConfigError("config does not match the log header; refusing to resume");
        if (loaded.run_ended) {
            out << "run already complete; nothing to resume\n";
            return 0;
        }
        if (loaded.torn_tail || !loaded.partial.empty())
            err << "resume: dropping " << loaded.partial.size() << " partial trial(s)"
                << (loaded.torn_tail ? " and a torn final line" : "") << "\n";
        compact_log(path);
        prior = loaded.resume_state();
        sink = TrialLog::append_to(path, space);
    } else {
        ordered_json header;
        header["algorithm"] = std::string(to_string(cfg.algorithm));
        header["seed"] = cfg.seed;
        header["config"] = to_json(cfg);
        sink = TrialLog::create(path, header, space);
    }

    RunOptions opts;
    opts.parallelism = cfg.parallelism;
    opts.sink = &*sink;
    opts.progress = &err;
    opts.warnings = &err;
    opts.resume = prior ? &*prior : nullptr;

    RunResult result = dispatch(cfg, space, *objective, opts);
    sink->close();
    print_summary(cfg, space, result, path, out);
    return 0;
}

namespace {

// Uniform grid on the log10 scale spanning a category's representable range,
// with as many points as the category has bit patterns.
struct EvenLogGrid {
    int bits = 0;
    double log_lo = 0.0, log_hi = 0.0;

    double step() const {
        std::uint64_t points = std::uint64_t{1} << bits;
        return points > 1 ? (log_hi - log_lo) / double(points - 1) : 0.0;
    }
    double value(std::uint64_t j) const { return std::pow(10.0, log_lo + step() * double(j)); }
    std::uint64_t index(double v) const {
        double s = step();
        if (s <= 0.0) return 0;
        double j = std::round((std::log10(v) - log_lo) / s);
        double top = double((std::uint64_t{1} << bits) - 1);
        return std::uint64_t(std::clamp(j, 0.0, top));
    }
};

EvenLogGrid grid_for(const NumericCategory& c) {
    return {c.bit_count(), std::log10(c.min_value()), std::log10(c.max_value())};
}

std::vector<CategoryRange> evenlog_ranges(const Restriction& r, const SearchSpace& space) {
    std::vector<CategoryRange> out;
    for (std::size_t ci = 0; ci < space.categories().size(); ++ci) {
        const auto* num = std::get_if<NumericCategory>(&space.categories()[ci]);
        if (!num) continue;
        int offset = space.category_offset(int(ci));
        int width = num->bit_count();
        BinaryConfig lo_bits(std::size_t(width), -1), hi_bits(std::size_t(width), 1);
        for (std::size_t i = 0; i < r.indices.size(); ++i) {
            int local = r.indices[i] - offset;
            if (local < 0 || local >= width) continue;
            lo_bits[std::size_t(local)] = r.values[i];
            hi_bits[std::size_t(local)] = r.values[i];
        }
        EvenLogGrid grid = grid_for(*num);
        out.push_back({num->name, grid.value(bits_to_uint(lo_bits)),
                       grid.value(bits_to_uint(hi_bits))});
    }
    return out;
}

}  // namespace

GuidanceTable compute_guidance_rows(const ExperimentConfig& cfg, const History& history,
                                    const std::vector<double>& lambdas) {
    SearchSpace space = make_space(cfg);
    auto sel = select_history(history, cfg.pgsr.min_observations);
    if (!sel)
        throw InsufficientHistoryError("no resource level holds " +
                                       std::to_string(cfg.pgsr.min_observations) +
                                       " observations");

    std::vector<BinaryConfig> xs;
    std::vector<double> ys;
    xs.reserve(sel->records->size());
    ys.reserve(sel->records->size());
    for (const auto& obs : *sel->records) {
        xs.push_back(obs.config);
        ys.push_back(obs.loss);
    }

    // The same observations re-encoded onto the uniform log grid, category by
    // category; categorical bits carry over unchanged.
    std::vector<BinaryConfig> xs_grid = xs;
    for (std::size_t ci = 0; ci < space.categories().size(); ++ci) {
        const auto* num = std::get_if<NumericCategory>(&space.categories()[ci]);
        if (!num) continue;
        int offset = space.category_offset(int(ci));
        int width = num->bit_count();
        EvenLogGrid grid = grid_for(*num);
        for (std::size_t row = 0; row < xs.size(); ++row) {
            auto bits = space.category_bits(xs[row], int(ci));
            double v = decode_numeric(*num, bits.subspan(0, std::size_t(num->exponent_bits)),
                                      bits.subspan(std::size_t(num->exponent_bits)));
            BinaryConfig regrid = uint_to_bits(grid.index(v), width);
            std::copy(regrid.begin(), regrid.end(), xs_grid[row].begin() + offset);
        }
    }

    SearchSpace singles = space.with_singleton_groups();
    auto settings_with = [&](double lambda) {
        PgsrSettings s = cfg.pgsr;
        s.lambda = lambda;
        return s;
    };

    GuidanceTable table;
    table.resource = sel->resource;
    table.observations = xs.size();
    for (double lambda : lambdas)
        table.rows.push_back({"pgsr", lambda, fit_guidance(xs, ys, space, settings_with(lambda)).ranges});
    for (double lambda : lambdas)
        table.rows.push_back(
            {"psr", lambda, fit_guidance(xs, ys, singles, settings_with(lambda)).ranges});
    for (double lambda : lambdas) {
        Guidance g = fit_guidance(xs_grid, ys, singles, settings_with(lambda));
        table.rows.push_back({"psr-evenlog", lambda, evenlog_ranges(g.restriction, space)});
    }
    return table;
}

int cmd_guidance(const ExperimentConfig& cfg, const std::optional<std::string>& log_flag,
                 const std::vector<double>& lambdas, std::ostream& out, std::ostream& err) {
    const std::string path = resolve_log_path(cfg, log_flag);
    LoadedLog loaded = load_log(path);
    if (loaded.header.contains("config")) {
        ExperimentConfig logged = parse_config(loaded.header.at("config"));
        if (to_json(logged)["space"] != to_json(cfg)["space"])
            throw ConfigError("log was written for a different space");
    }
    if (loaded.torn_tail) err << "note: dropped a torn final line\n";

    GuidanceTable table = compute_guidance_rows(cfg, loaded.history, lambdas);
    out << "source: r=" << format_double(table.resource) << " with " << table.observations
        << " observations\n";

    std::vector<std::string> names;
    if (!table.rows.empty())
        for (const auto& r : table.rows.front().ranges) names.push_back(r.name);

    out << std::left << std::setw(14) << "method" << std::setw(8) << "lambda";
    for (const auto& n : names) out << std::setw(28) << n;
    out << "\n";
    for (const auto& row : table.rows) {
        out << std::left << std::setw(14) << row.method << std::setw(8)
            << format_double(row.lambda);
        for (const auto& r : row.ranges)
            out << std::setw(28) << ("[" + format_double(r.lo) + ", " + format_double(r.hi) + "]");
        out << "\n";
    }
    return 0;
}

int cmd_surface(const ExperimentConfig& cfg, const SurfaceRequest& req, std::ostream& out,
                std::ostream& err) {
    (void)err;
    if (req.nx < 1 || req.ny < 1) throw ConfigError("surface resolution must be at least 1x1");
    SearchSpace space = make_space(cfg);
    auto objective = make_objective(cfg, space);

    auto find_numeric = [&](const std::string& name) -> const NumericCategory& {
        for (const auto& cat : space.categories())
            if (const auto* num = std::get_if<NumericCategory>(&cat))
                if (num->name == name) return *num;
        throw ConfigError("no numeric category named '" + name + "'");
    };
    if (req.x == req.y) throw ConfigError("surface axes must differ");
    const NumericCategory& xcat = find_numeric(req.x);
    const NumericCategory& ycat = find_numeric(req.y);

    std::map<std::string, std::string> fixes(req.fixes.begin(), req.fixes.end());
    for (const auto& [name, _] : fixes) {
        if (name == req.x || name == req.y)
            throw ConfigError("cannot fix the axis category '" + name + "'");
        bool known = false;
        for (const auto& cat : space.categories()) known |= category_name(cat) == name;
        if (!known) throw ConfigError("unknown category in fix: " + name);
    }

    auto axis_points = [](const NumericCategory& c, int n) {
        double lo = std::log10(c.min_value()), hi = std::log10(c.max_value());
        std::vector<double> pts;
        if (n == 1) {
            pts.push_back((lo + hi) / 2.0);
        } else {
            for (int i = 0; i < n; ++i) pts.push_back(lo + (hi - lo) * double(i) / double(n - 1));
        }
        return pts;
    };
    std::vector<double> xs = axis_points(xcat, req.nx), ys = axis_points(ycat, req.ny);
    const double resource = req.resource.value_or(double(cfg.budget.max_resource));

    // Values (or an encoded config) for one grid point, in space order.
    auto point_values = [&](double vx, double vy) {
        std::vector<DecodedAssignment> values;
        for (const auto& cat : space.categories()) {
            const std::string& name = category_name(cat);
            if (name == req.x) {
                values.push_back({name, vx});
            } else if (name == req.y) {
                values.push_back({name, vy});
            } else {
                auto it = fixes.find(name);
                if (it == fixes.end())
                    throw ConfigError("category '" + name + "' needs a --fix value");
                if (std::holds_alternative<NumericCategory>(cat)) {
                    try {
                        values.push_back({name, std::stod(it->second)});
                    } catch (const std::exception&) {
                        throw ConfigError("fix for '" + name + "' is not a number");
                    }
                } else {
                    values.push_back({name, it->second});
                }
            }
        }
        return values;
    };

    auto encode_point = [&](const std::vector<DecodedAssignment>& values) {
        BinaryConfig config;
        for (std::size_t ci = 0; ci < space.categories().size(); ++ci) {
            const Category& cat = space.categories()[ci];
            const DecodedAssignment& a = values[ci];
            BinaryConfig part;
            if (const auto* num = std::get_if<NumericCategory>(&cat)) {
                part = encode_numeric(*num, std::get<double>(a.value));
            } else {
                const auto& cc = std::get<CategoricalCategory>(cat);
                const std::string& label = std::get<std::string>(a.value);
                auto it = std::find(cc.choices.begin(), cc.choices.end(), label);
                if (it == cc.choices.end())
                    throw ConfigError("'" + label + "' is not a choice of " + cc.name);
                part = cc.encode(int(it - cc.choices.begin()));
            }
            config.insert(config.end(), part.begin(), part.end());
        }
        return config;
    };

    std::ofstream file;
    std::ostream* dest = &out;
    if (req.out_path != "-") {
        file.open(req.out_path, std::ios::out | std::ios::trunc);
        if (!file) throw ConfigError("cannot open surface output: " + req.out_path);
        dest = &file;
    }

    *dest << "log10_" << req.x << ",log10_" << req.y << ",loss\n";
    for (double ly : ys) {
        for (double lx : xs) {
            auto values = point_values(std::pow(10.0, lx), std::pow(10.0, ly));
            double loss = objective->supports_values()
                              ? objective->evaluate_values(values, resource, 0)
                              : objective->evaluate(encode_point(values), resource, 0);
            *dest << format_double(lx) << ',' << format_double(ly) << ',' << format_double(loss)
                  << '\n';
        }
    }
    if (dest == &file) {
        file.flush();
        if (!file) throw LogError("write to " + req.out_path + " failed");
    }
    return 0;
}

namespace {

struct LogDigest {
    std::string algorithm;
    double best_loss = std::numeric_limits<double>::infinity();
    bool has_best = false;
};

LogDigest digest_log(const LoadedLog& loaded) {
    LogDigest d;
    d.algorithm = loaded.header.value("algorithm", "?");
    double max_r = 0.0;
    auto scan = [&](const std::vector<LoggedTrial>& trials) {
        for (const auto& t : trials) max_r = std::max(max_r, t.record.resource);
    };
    scan(loaded.complete);
    scan(loaded.partial);
    auto best = [&](const std::vector<LoggedTrial>& trials) {
        for (const auto& t : trials)
            if (t.record.resource == max_r && std::isfinite(t.record.loss) &&
                t.record.loss < d.best_loss) {
                d.best_loss = t.record.loss;
                d.has_best = true;
            }
    };
    best(loaded.complete);
    best(loaded.partial);
    return d;
}

int report_directory(const std::string& dir, std::ostream& out, std::ostream& err) {
    std::vector<std::string> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
            paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());

    std::map<std::string, std::vector<double>> bests;
    std::map<std::string, int> runs;
    for (const auto& p : paths) {
        try {
            LogDigest d = digest_log(load_log(p));
            ++runs[d.algorithm];
            if (d.has_best) bests[d.algorithm].push_back(d.best_loss);
        } catch (const LogError& e) {
            err << "skipping " << p << ": " << e.what() << "\n";
        }
    }
    if (runs.empty()) {
        out << "no logs found in " << dir << "\n";
        return 0;
    }

    out << std::left << std::setw(16) << "algorithm" << std::setw(8) << "runs" << std::setw(16)
        << "min best" << std::setw(16) << "median best" << "\n";
    for (const auto& [algo, count] : runs) {
        auto& v = bests[algo];
        std::sort(v.begin(), v.end());
        std::string min_s = "-", med_s = "-";
        if (!v.empty()) {
            min_s = format_double(v.front());
            double med = v.size() % 2 ? v[v.size() / 2]
                                      : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
            med_s = format_double(med);
        }
        out << std::left << std::setw(16) << algo << std::setw(8) << count << std::setw(16)
            << min_s << std::setw(16) << med_s << "\n";
    }
    return 0;
}

}  // namespace

int cmd_report(const ReportRequest& req, std::ostream& out, std::ostream& err) {
    if (std::filesystem::is_directory(req.path)) {
        if (!req.csv_path.empty())
            throw ConfigError("CSV export works on a single log, not a directory");
        return report_directory(req.path, out, err);
    }

    LoadedLog loaded = load_log(req.path);
    if (!loaded.header.contains("config")) throw LogError("log header carries no config");
    ExperimentConfig logged = parse_config(loaded.header.at("config"));
    SearchSpace space = make_space(logged);

    std::vector<LoggedTrial> all = loaded.complete;
    all.insert(all.end(), loaded.partial.begin(), loaded.partial.end());

    double total = 0.0;
    for (const auto& t : all) total += t.record.resource;

    out << "algorithm: " << loaded.header.value("algorithm", "?") << "\n";
    out << "seed: " << loaded.header.value("seed", 0ull) << "\n";
    out << "trials: " << all.size() << " (" << loaded.complete.size() << " in complete rungs, "
        << loaded.partial.size() << " partial)\n";
    if (loaded.torn_tail) out << "note: a torn final line was dropped\n";
    out << "resource spent: " << format_double(total) << "\n";
    out << "run complete: " << (loaded.run_ended ? "yes" : "no") << "\n";

    const double R = double(logged.budget.max_resource);
    const LoggedTrial* best = nullptr;
    for (const auto& t : all)
        if (t.record.resource == R && std::isfinite(t.record.loss) &&
            (!best || t.record.loss < best->record.loss))
            best = &t;
    if (best) {
        out << "best at r=" << format_double(R) << ": loss " << format_double(best->record.loss)
            << "\n";
        for (const auto& a : decode_config(space, best->record.config))
            out << "  " << a.name << " = " << value_str(a.value) << "\n";
    } else {
        out << "no finite loss at full resource\n";
    }

    // Bracket digest: deepest rung reached and the best loss there.
    std::map<std::pair<int, int>, std::pair<double, double>> brackets;  // (cycle,s) -> (r, best)
    for (const auto& t : all) {
        auto key = std::make_pair(t.record.cycle, t.record.bracket_s);
        auto it = brackets.find(key);
        if (it == brackets.end()) {
            brackets[key] = {t.record.resource, t.record.loss};
        } else if (t.record.resource > it->second.first) {
            it->second = {t.record.resource, t.record.loss};
        } else if (t.record.resource == it->second.first &&
                   t.record.loss < it->second.second) {
            it->second.second = t.record.loss;
        }
    }
    out << "brackets:\n";
    for (const auto& [key, val] : brackets)
        out << "  cycle " << key.first << " s=" << key.second << ": reached r="
            << format_double(val.first) << ", best " << format_double(val.second) << "\n";

    if (!req.csv_path.empty()) {
        std::ofstream csv(req.csv_path, std::ios::out | std::ios::trunc);
        if (!csv) throw ConfigError("cannot open CSV output: " + req.csv_path);
        write_trials_csv(loaded, space, csv);
        csv.flush();
        if (!csv) throw LogError("write to " + req.csv_path + " failed");
        out << "csv: " << req.csv_path << "\n";
    }
    (void)err;
    return 0;
}

}  // namespace pgsrhb
