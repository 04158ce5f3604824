#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "pgsrhb/errors.hpp"
#include "pgsrhb/history_store.hpp"
#include "pgsrhb/objectives.hpp"

using namespace pgsrhb;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() /
              ("pgsrhb_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(dir);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(dir, ec); }
    std::string file(const std::string& name) const { return (dir / name).string(); }
};

SearchSpace demo_space() {
    return SearchSpace({NumericCategory{"lr", 1, 1, -3}, CategoricalCategory{"opt", {"x", "y"}}});
}

TrialRecord demo_record(int rung, double loss, std::initializer_list<int> config) {
    TrialRecord r;
    for (int v : config) r.config.push_back(std::int8_t(v));
    r.resource = rung == 0 ? 1.0 : 3.0;
    r.loss = loss;
    r.cycle = 0;
    r.bracket_s = 1;
    r.rung = rung;
    r.tag = SamplerTag::kUniform;
    return r;
}

}  // namespace

TEST_CASE("a log round-trips records, markers, and the end line") {
    TempDir tmp;
    std::string path = tmp.file("run.jsonl");
    SearchSpace space = demo_space();

    nlohmann::ordered_json header;
    header["algorithm"] = "hyperband";
    header["seed"] = 7;
    {
        TrialLog log = TrialLog::create(path, header, space);
        log.on_trial(demo_record(0, 0.5, {1, -1, 1}), 3);
        log.on_trial(demo_record(0, 0.25, {-1, -1, 1}), 3);
        log.on_rung_end(0, 1, 0, 2, 3);
        log.on_trial(demo_record(1, 0.125, {-1, -1, 1}), 3);
        log.close();
    }

    LoadedLog loaded = load_log(path);
    CHECK(loaded.header.at("algorithm") == "hyperband");
    CHECK(loaded.header.at("seed") == 7);
    CHECK(loaded.header.at("schema") == kLogSchemaVersion);
    REQUIRE(loaded.complete.size() == 2);
    REQUIRE(loaded.partial.size() == 1);
    CHECK(!loaded.run_ended);
    CHECK(!loaded.torn_tail);
    CHECK(loaded.complete[0].record.loss == 0.5);
    CHECK((loaded.complete[0].record.config == BinaryConfig{1, -1, 1}));
    CHECK(loaded.complete[0].rng_cursor == 3);
    CHECK(loaded.partial[0].record.rung == 1);
    REQUIRE(loaded.last_marker.has_value());
    CHECK(loaded.last_marker->cycle == 0);
    CHECK(loaded.last_marker->bracket_s == 1);
    CHECK(loaded.last_marker->rung == 0);
    CHECK(loaded.last_marker->rng_cursor == 3);

    // history pools only complete finite trials
    CHECK(loaded.history.count(1.0) == 2);
    CHECK(loaded.history.count(3.0) == 0);

    ResumeState state = loaded.resume_state();
    CHECK(state.trials.size() == 2);
    REQUIRE(state.last_marker.has_value());
    CHECK(state.last_marker->rung == 0);
}

TEST_CASE("infinite and nan losses survive the round trip") {
    TempDir tmp;
    std::string path = tmp.file("inf.jsonl");
    SearchSpace space = demo_space();
    {
        TrialLog log = TrialLog::create(path, {}, space);
        log.on_trial(demo_record(0, std::numeric_limits<double>::infinity(), {1, 1, 1}), 0);
        log.on_trial(demo_record(0, 0.75, {-1, 1, 1}), 0);
        log.on_rung_end(0, 1, 0, 2, 0);
        log.close();
    }
    LoadedLog loaded = load_log(path);
    REQUIRE(loaded.complete.size() == 2);
    CHECK(std::isinf(loaded.complete[0].record.loss));
    CHECK(loaded.complete[0].record.loss > 0);
    // the infinite loss stays out of the history pool
    CHECK(loaded.history.count(1.0) == 1);
}

TEST_CASE("run_end marks completion") {
    TempDir tmp;
    std::string path = tmp.file("done.jsonl");
    SearchSpace space = demo_space();
    {
        TrialLog log = TrialLog::create(path, {}, space);
        log.on_trial(demo_record(0, 0.5, {1, -1, 1}), 1);
        log.on_rung_end(0, 1, 0, 1, 1);
        RunResult result;
        result.best_config = {std::int8_t(1), std::int8_t(-1), std::int8_t(1)};
        result.best_loss = 0.5;
        result.has_best = true;
        result.total_resource_spent = 1.0;
        result.records.push_back(demo_record(0, 0.5, {1, -1, 1}));
        log.on_run_end(result);
        log.close();
    }
    LoadedLog loaded = load_log(path);
    CHECK(loaded.run_ended);
}

TEST_CASE("a torn final line is dropped, a torn middle line is an error") {
    TempDir tmp;
    std::string path = tmp.file("torn.jsonl");
    SearchSpace space = demo_space();
    {
        TrialLog log = TrialLog::create(path, {}, space);
        log.on_trial(demo_record(0, 0.5, {1, -1, 1}), 0);
        log.on_rung_end(0, 1, 0, 1, 0);
        log.close();
    }
    {
        std::ofstream f(path, std::ios::app);
        f << "{\"schema\":1,\"kind\":\"trial\",\"cycle\":0,\"s\":1,\"ru";
    }
    LoadedLog loaded = load_log(path);
    CHECK(loaded.torn_tail);
    CHECK(loaded.complete.size() == 1);

    // now garbage in the middle
    std::string mid = tmp.file("mid.jsonl");
    {
        std::ofstream f(mid);
        std::ifstream in(path);
        std::string line;
        std::getline(in, line);
        f << line << "\n{not json}\n" << "{\"schema\":1,\"kind\":\"rung_end\",\"cycle\":0,"
          << "\"s\":1,\"rung\":0,\"count\":0,\"cursor\":0}\n";
    }
    CHECK_THROWS_AS(load_log(mid), LogError);
}

TEST_CASE("load_log validates the header") {
    TempDir tmp;
    std::string missing = tmp.file("missing.jsonl");
    CHECK_THROWS_AS(load_log(missing), LogError);

    std::string empty = tmp.file("empty.jsonl");
    std::ofstream(empty).close();
    CHECK_THROWS_AS(load_log(empty), LogError);

    std::string bad = tmp.file("bad.jsonl");
    {
        std::ofstream f(bad);
        f << "{\"schema\":999,\"kind\":\"header\"}\n";
    }
    CHECK_THROWS_AS(load_log(bad), LogError);

    std::string notheader = tmp.file("notheader.jsonl");
    {
        std::ofstream f(notheader);
        f << "{\"schema\":1,\"kind\":\"trial\"}\n";
    }
    CHECK_THROWS_AS(load_log(notheader), LogError);
}

TEST_CASE("compact_log cuts back to the last complete rung") {
    TempDir tmp;
    std::string path = tmp.file("compact.jsonl");
    SearchSpace space = demo_space();
    {
        TrialLog log = TrialLog::create(path, {}, space);
        log.on_trial(demo_record(0, 0.5, {1, -1, 1}), 0);
        log.on_trial(demo_record(0, 0.7, {-1, 1, 1}), 0);
        log.on_rung_end(0, 1, 0, 2, 0);
        log.on_trial(demo_record(1, 0.4, {1, -1, 1}), 0);
        log.close();
    }
    {
        std::ofstream f(path, std::ios::app);
        f << "{\"torn";
    }
    compact_log(path);
    LoadedLog loaded = load_log(path);
    CHECK(loaded.complete.size() == 2);
    CHECK(loaded.partial.empty());
    CHECK(!loaded.torn_tail);
    REQUIRE(loaded.last_marker.has_value());

    // appending continues cleanly after compaction
    {
        TrialLog log = TrialLog::append_to(path, space);
        log.on_trial(demo_record(1, 0.4, {1, -1, 1}), 0);
        log.on_rung_end(0, 1, 1, 1, 0);
        log.close();
    }
    loaded = load_log(path);
    CHECK(loaded.complete.size() == 3);
    CHECK(loaded.last_marker->rung == 1);
}

TEST_CASE("append_to refuses a foreign or damaged header") {
    TempDir tmp;
    std::string path = tmp.file("foreign.jsonl");
    {
        std::ofstream f(path);
        f << "{\"kind\":\"header\"}\n";  // no schema
    }
    CHECK_THROWS_AS(TrialLog::append_to(path, demo_space()), LogError);
    CHECK_THROWS_AS(TrialLog::append_to(tmp.file("nofile.jsonl"), demo_space()), LogError);
}

TEST_CASE("writes after close raise LogError") {
    TempDir tmp;
    SearchSpace space = demo_space();
    TrialLog log = TrialLog::create(tmp.file("closed.jsonl"), {}, space);
    log.close();
    CHECK_THROWS_AS(log.on_trial(demo_record(0, 0.5, {1, -1, 1}), 0), LogError);
}

TEST_CASE("trial lines carry the decoded assignment") {
    TempDir tmp;
    std::string path = tmp.file("decoded.jsonl");
    SearchSpace space = demo_space();
    {
        TrialLog log = TrialLog::create(path, {}, space);
        log.on_trial(demo_record(0, 0.5, {1, -1, 1}), 0);
        log.close();
    }
    std::ifstream in(path);
    std::string header_line, trial_line;
    std::getline(in, header_line);
    std::getline(in, trial_line);
    auto j = nlohmann::json::parse(trial_line);
    CHECK(j.at("kind") == "trial");
    // lr: exponent bit 1 -> e = -2, mantissa bit 0 -> 0.5 => 0.005
    CHECK(j.at("decoded").at("lr") == doctest::Approx(0.005));
    CHECK(j.at("decoded").at("opt") == "y");
    CHECK(j.at("bits").size() == 3);
    CHECK(j.at("tag") == "uniform");
}

TEST_CASE("csv export flattens every trial") {
    TempDir tmp;
    std::string path = tmp.file("csv.jsonl");
    SearchSpace space = demo_space();
    {
        TrialLog log = TrialLog::create(path, {}, space);
        log.on_trial(demo_record(0, 0.5, {1, -1, 1}), 0);
        log.on_trial(demo_record(0, 0.25, {-1, 1, -1}), 0);
        log.on_rung_end(0, 1, 0, 2, 0);
        log.on_trial(demo_record(1, 0.1, {-1, 1, -1}), 0);
        log.close();
    }
    LoadedLog loaded = load_log(path);
    std::ostringstream out;
    write_trials_csv(loaded, space, out);
    std::istringstream lines(out.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "cycle,s,rung,resource,loss,tag,cursor,ts,lr,opt,bits");
    int rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 3);
}
