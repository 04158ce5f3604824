#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pgsrhb/experiment_config.hpp"
#include "pgsrhb/history_store.hpp"

namespace pgsrhb {

// Command-line overrides applied on top of the config file.
struct RunFlags {
    std::optional<std::string> log;
    std::optional<std::uint64_t> seed;
    std::optional<int> parallelism;
};

// Log location: flag beats config beats the default name, then the
// PGSRHB_LOG_DIR environment variable redirects the directory part.
std::string resolve_log_path(const ExperimentConfig& cfg, const std::optional<std::string>& flag);

int cmd_run(ExperimentConfig cfg, const RunFlags& flags, bool resume, std::ostream& out,
            std::ostream& err);

struct GuidanceRow {
    std::string method;  // pgsr | psr | psr-evenlog
    double lambda = 0.0;
    std::vector<CategoryRange> ranges;
};

struct GuidanceTable {
    double resource = 0.0;
    std::size_t observations = 0;
    std::vector<GuidanceRow> rows;
};

// The guidance comparison behind `guidance`: the grouped fit, the plain
// lasso fit on the same encoding, and the plain lasso fit on a uniform
// log-scale binning of the decoded values.
GuidanceTable compute_guidance_rows(const ExperimentConfig& cfg, const History& history,
                                    const std::vector<double>& lambdas);

int cmd_guidance(const ExperimentConfig& cfg, const std::optional<std::string>& log_flag,
                 const std::vector<double>& lambdas, std::ostream& out, std::ostream& err);

struct SurfaceRequest {
    std::string x, y;
    int nx = 8, ny = 8;
    std::optional<double> resource;
    std::vector<std::pair<std::string, std::string>> fixes;  // name -> value/label
    std::string out_path = "-";                              // "-" writes to stdout
};

int cmd_surface(const ExperimentConfig& cfg, const SurfaceRequest& req, std::ostream& out,
                std::ostream& err);

struct ReportRequest {
    std::string path;      // one log file or a directory of logs
    std::string csv_path;  // optional flat export (single log only)
};

int cmd_report(const ReportRequest& req, std::ostream& out, std::ostream& err);

}  // namespace pgsrhb
