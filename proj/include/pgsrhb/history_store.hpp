#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pgsrhb/pgsr.hpp"
#include "pgsrhb/scheduler.hpp"

namespace pgsrhb {

inline constexpr int kLogSchemaVersion = 1;

// Append-only JSONL writer for one run: a header line, one line per trial,
// a rung_end marker per completed rung, and a run_end line. Every append is
// flushed so a crash loses at most the line in flight.
class TrialLog : public TrialSink {
public:
    // Start a fresh log (truncates). `header_fields` lands in the header
    // record next to the schema version.
    static TrialLog create(const std::string& path, const nlohmann::ordered_json& header_fields,
                           SearchSpace space);

    // Continue an existing log after validating its header.
    static TrialLog append_to(const std::string& path, SearchSpace space);

    void on_trial(const TrialRecord& record, std::uint64_t rng_cursor) override;
    void on_rung_end(int cycle, int bracket_s, int rung, int count,
                     std::uint64_t rng_cursor) override;
    void on_run_end(const RunResult& result) override;

    void close();
    const std::string& path() const { return path_; }

private:
    TrialLog(std::string path, SearchSpace space);
    void write_line(const nlohmann::ordered_json& record);

    std::string path_;
    SearchSpace space_;
    std::ofstream out_;
    bool closed_ = false;
};

struct LoggedTrial {
    TrialRecord record;
    std::uint64_t rng_cursor = 0;
    std::string timestamp;
};

// Parsed log contents. Trials after the last rung_end marker are partial
// (their rung never completed) and are excluded from resume state.
struct LoadedLog {
    nlohmann::json header;
    std::vector<LoggedTrial> complete;
    std::vector<LoggedTrial> partial;
    std::optional<LogMarker> last_marker;
    bool run_ended = false;
    bool torn_tail = false;  // unparseable final line was dropped
    History history;         // finite losses of complete trials

    ResumeState resume_state() const;
};

LoadedLog load_log(const std::string& path);

// Rewrite the log to end at its last rung_end marker (or just the header),
// dropping partial trials and any torn tail. Replaces the file atomically.
void compact_log(const std::string& path);

// Flat CSV of every trial in the log, decoded against `space`.
void write_trials_csv(const LoadedLog& log, const SearchSpace& space, std::ostream& out);

}  // namespace pgsrhb
