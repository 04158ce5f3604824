#include "pgsrhb/history_store.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>
#include <sstream>

#include "pgsrhb/errors.hpp"
#include "pgsrhb/text_util.hpp"

namespace pgsrhb {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

json loss_to_json(double loss) {
    if (std::isfinite(loss)) return loss;
    if (std::isnan(loss)) return "nan";
    return loss > 0 ? "inf" : "-inf";
}

double loss_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw LogError("unreadable loss value in trial record");
}

json bits_to_json(const BinaryConfig& bits) {
    json arr = json::array();
    for (std::int8_t b : bits) arr.push_back(int(b));
    return arr;
}

BinaryConfig bits_from_json(const json& arr) {
    if (!arr.is_array()) throw LogError("trial record bits must be an array");
    BinaryConfig bits;
    bits.reserve(arr.size());
    for (const auto& v : arr) {
        int b = v.get<int>();
        if (b != 1 && b != -1) throw LogError("trial record bit outside {-1,+1}");
        bits.push_back(std::int8_t(b));
    }
    return bits;
}

}  // namespace

TrialLog::TrialLog(std::string path, SearchSpace space)
    : path_(std::move(path)), space_(std::move(space)) {}

TrialLog TrialLog::create(const std::string& path, const ordered_json& header_fields,
                          SearchSpace space) {
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);

    TrialLog log(path, std::move(space));
    log.out_.open(path, std::ios::out | std::ios::trunc);
    if (!log.out_) throw LogError("cannot open log for writing: " + path);

    ordered_json header;
    header["schema"] = kLogSchemaVersion;
    header["kind"] = "header";
    for (const auto& [k, v] : header_fields.items()) header[k] = v;
    log.write_line(header);
    return log;
}

TrialLog TrialLog::append_to(const std::string& path, SearchSpace space) {
    {
        std::ifstream in(path);
        if (!in) throw LogError("cannot open log: " + path);
        std::string first;
        if (!std::getline(in, first)) throw LogError("log has no header: " + path);
        json header;
        try {
            header = json::parse(first);
        } catch (const json::exception&) {
            throw LogError("log header is not valid JSON: " + path);
        }
        if (header.value("kind", "") != "header")
            throw LogError("log does not start with a header record: " + path);
        if (header.value("schema", -1) != kLogSchemaVersion)
            throw LogError("log schema version mismatch in " + path);
    }
    TrialLog log(path, std::move(space));
    log.out_.open(path, std::ios::out | std::ios::app);
    if (!log.out_) throw LogError("cannot open log for appending: " + path);
    return log;
}

void TrialLog::write_line(const ordered_json& record) {
    if (closed_) throw LogError("append to a closed log");
    out_ << record.dump() << '\n';
    out_.flush();
    if (!out_) throw LogError("write to log failed: " + path_);
}

void TrialLog::on_trial(const TrialRecord& record, std::uint64_t rng_cursor) {
    ordered_json j;
    j["schema"] = kLogSchemaVersion;
    j["kind"] = "trial";
    j["cycle"] = record.cycle;
    j["s"] = record.bracket_s;
    j["rung"] = record.rung;
    j["resource"] = record.resource;
    j["bits"] = bits_to_json(record.config);
    ordered_json decoded;
    for (const auto& a : decode_config(space_, record.config)) {
        if (std::holds_alternative<double>(a.value))
            decoded[a.name] = std::get<double>(a.value);
        else
            decoded[a.name] = std::get<std::string>(a.value);
    }
    j["decoded"] = decoded;
    j["loss"] = loss_to_json(record.loss);
    j["tag"] = to_string(record.tag);
    j["cursor"] = rng_cursor;
    j["ts"] = iso8601_now();
    write_line(j);
}

void TrialLog::on_rung_end(int cycle, int bracket_s, int rung, int count,
                           std::uint64_t rng_cursor) {
    ordered_json j;
    j["schema"] = kLogSchemaVersion;
    j["kind"] = "rung_end";
    j["cycle"] = cycle;
    j["s"] = bracket_s;
    j["rung"] = rung;
    j["count"] = count;
    j["cursor"] = rng_cursor;
    write_line(j);
}

void TrialLog::on_run_end(const RunResult& result) {
    ordered_json j;
    j["schema"] = kLogSchemaVersion;
    j["kind"] = "run_end";
    j["best_loss"] = loss_to_json(result.has_best ? result.best_loss
                                                  : std::numeric_limits<double>::infinity());
    j["best_bits"] = bits_to_json(result.best_config);
    j["total_resource"] = result.total_resource_spent;
    j["trials"] = result.records.size();
    write_line(j);
}

void TrialLog::close() {
    if (!closed_) {
        out_.flush();
        out_.close();
        closed_ = true;
    }
}

ResumeState LoadedLog::resume_state() const {
    ResumeState state;
    state.history = history;
    state.trials.reserve(complete.size());
    for (const auto& t : complete) state.trials.push_back(t.record);
    state.last_marker = last_marker;
    return state;
}

LoadedLog load_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LogError("cannot open log: " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);

    LoadedLog log;
    std::vector<LoggedTrial> pending;
    bool saw_header = false;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(lines[i]);
        } catch (const json::exception&) {
            if (i + 1 == lines.size()) {
                log.torn_tail = true;  // interrupted mid-write; drop it
                break;
            }
            throw LogError("corrupt record on line " + std::to_string(i + 1) + " of " + path);
        }

        std::string kind = j.value("kind", "");
        if (!saw_header) {
            if (kind != "header") throw LogError("log does not start with a header: " + path);
            if (j.value("schema", -1) != kLogSchemaVersion)
                throw LogError("log schema version mismatch in " + path);
            log.header = j;
            saw_header = true;
            continue;
        }

        try {
            if (kind == "trial") {
                LoggedTrial t;
                t.record.cycle = j.at("cycle").get<int>();
                t.record.bracket_s = j.at("s").get<int>();
                t.record.rung = j.at("rung").get<int>();
                t.record.resource = j.at("resource").get<double>();
                t.record.config = bits_from_json(j.at("bits"));
                t.record.loss = loss_from_json(j.at("loss"));
                t.record.tag = sampler_tag_from(j.at("tag").get<std::string>());
                t.rng_cursor = j.at("cursor").get<std::uint64_t>();
                t.timestamp = j.value("ts", "");
                pending.push_back(std::move(t));
            } else if (kind == "rung_end") {
                LogMarker m;
                m.cycle = j.at("cycle").get<int>();
                m.bracket_s = j.at("s").get<int>();
                m.rung = j.at("rung").get<int>();
                m.rng_cursor = j.at("cursor").get<std::uint64_t>();
                log.last_marker = m;
                for (auto& t : pending) log.complete.push_back(std::move(t));
                pending.clear();
            } else if (kind == "run_end") {
                log.run_ended = true;
            } else {
                throw LogError("unknown record kind '" + kind + "' in " + path);
            }
        } catch (const json::exception& e) {
            throw LogError("malformed record on line " + std::to_string(i + 1) + ": " + e.what());
        }
    }

    if (!saw_header) throw LogError("log has no header: " + path);
    log.partial = std::move(pending);
    for (const auto& t : log.complete)
        if (std::isfinite(t.record.loss))
            log.history.append(t.record.resource, t.record.config, t.record.loss);
    return log;
}

void compact_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LogError("cannot open log: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    in.close();

    std::ptrdiff_t keep_to = -1;  // index of the last line to keep
    for (std::size_t i = 0; i < lines.size(); ++i) {
        json j;
        try {
            j = json::parse(lines[i]);
        } catch (const json::exception&) {
            continue;
        }
        std::string kind = j.value("kind", "");
        if (kind == "header" && keep_to < 0) keep_to = std::ptrdiff_t(i);
        if (kind == "rung_end") keep_to = std::ptrdiff_t(i);
    }
    if (keep_to < 0) throw LogError("log has no header: " + path);

    std::string tmp = path + ".compact.tmp";
    {
        std::ofstream out(tmp, std::ios::out | std::ios::trunc);
        if (!out) throw LogError("cannot write " + tmp);
        for (std::ptrdiff_t i = 0; i <= keep_to; ++i) out << lines[std::size_t(i)] << '\n';
        out.flush();
        if (!out) throw LogError("write to " + tmp + " failed");
    }
    std::filesystem::rename(tmp, path);
}

void write_trials_csv(const LoadedLog& log, const SearchSpace& space, std::ostream& out) {
    out << "cycle,s,rung,resource,loss,tag,cursor,ts";
    for (const auto& cat : space.categories()) out << ',' << category_name(cat);
    out << ",bits\n";

    auto emit = [&](const LoggedTrial& t) {
        out << t.record.cycle << ',' << t.record.bracket_s << ',' << t.record.rung << ','
            << format_double(t.record.resource) << ',' << format_double(t.record.loss) << ','
            << to_string(t.record.tag) << ',' << t.rng_cursor << ',' << t.timestamp;
        for (const auto& a : decode_config(space, t.record.config)) {
            if (std::holds_alternative<double>(a.value))
                out << ',' << format_double(std::get<double>(a.value));
            else
                out << ',' << std::get<std::string>(a.value);
        }
        out << ',';
        for (std::int8_t b : t.record.config) out << (b > 0 ? '+' : '-');
        out << '\n';
    };
    for (const auto& t : log.complete) emit(t);
    for (const auto& t : log.partial) emit(t);
}

}  // namespace pgsrhb
