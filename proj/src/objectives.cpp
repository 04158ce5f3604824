#include "pgsrhb/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pgsrhb/errors.hpp"
#include "pgsrhb/text_util.hpp"

namespace pgsrhb {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double unit_real(std::uint64_t x) { return double(x >> 11) * 0x1.0p-53; }

}  // namespace

double keyed_normal(const BinaryConfig& config, double resource, std::uint64_t seed,
                    std::uint64_t trial_seed) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    h = fnv1a(h, &seed, sizeof seed);
    h = fnv1a(h, &trial_seed, sizeof trial_seed);
    std::uint64_t rbits;
    std::memcpy(&rbits, &resource, sizeof rbits);
    h = fnv1a(h, &rbits, sizeof rbits);
    if (!config.empty()) h = fnv1a(h, config.data(), config.size());

    std::uint64_t state = h;
    double u1 = std::max(unit_real(splitmix64(state)), 0x1.0p-60);
    double u2 = unit_real(splitmix64(state));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Objective::evaluate_values(const std::vector<DecodedAssignment>&, double,
                                  std::uint64_t) const {
    throw ObjectiveError("objective does not support evaluation from values");
}

SyntheticSparseObjective::SyntheticSparseObjective(int bits, std::vector<SurrogateTerm> terms,
                                                   double noise_scale, std::uint64_t seed)
    : bits_(bits), terms_(std::move(terms)), noise_scale_(noise_scale), seed_(seed) {
    if (bits < 1) throw ConfigError("objective needs at least one bit");
    for (const auto& t : terms_)
        for (int v : t.vars)
            if (v < 0 || v >= bits) throw ConfigError("term variable out of range");
}

double SyntheticSparseObjective::evaluate(const BinaryConfig& config, double resource,
                                          std::uint64_t trial_seed) const {
    if (int(config.size()) != bits_) throw EncodingError("config width does not match objective");
    double v = 0.0;
    for (const auto& t : terms_) v += t.coeff * double(eval_basis(t.vars, config));
    if (noise_scale_ > 0.0)
        v += noise_scale_ / std::sqrt(resource) * keyed_normal(config, resource, seed_, trial_seed);
    return v;
}

std::vector<BasisIndex> SyntheticSparseObjective::known_support() const {
    std::vector<BasisIndex> sets;
    sets.reserve(terms_.size());
    for (const auto& t : terms_) sets.push_back(t.vars);
    std::sort(sets.begin(), sets.end());
    return sets;
}

std::vector<SurrogateTerm> random_sparse_terms(int bits, int term_count, int max_degree,
                                               std::uint64_t seed, double coeff_lo,
                                               double coeff_hi) {
    if (max_degree < 1 || max_degree > bits) throw ConfigError("bad term degree bound");
    Rng rng(seed);
    std::set<BasisIndex> seen;
    std::vector<SurrogateTerm> terms;
    while (int(terms.size()) < term_count) {
        int d = 1 + int(rng.below(std::uint64_t(max_degree)));
        std::set<int> vars;
        while (int(vars.size()) < d) vars.insert(int(rng.below(std::uint64_t(bits))));
        BasisIndex idx(vars.begin(), vars.end());
        if (!seen.insert(idx).second) continue;
        double mag = coeff_lo + (coeff_hi - coeff_lo) * rng.real();
        double sign = rng.sign() > 0 ? 1.0 : -1.0;
        terms.push_back({std::move(idx), sign * mag});
    }
    return terms;
}

LogLinear2dObjective::LogLinear2dObjective(NumericCategory x, NumericCategory y, double cx,
                                           double cy, double wx, double wy, double base,
                                           double noise_scale, std::uint64_t seed)
    : x_(std::move(x)),
      y_(std::move(y)),
      cx_(cx),
      cy_(cy),
      wx_(wx),
      wy_(wy),
      base_(base),
      noise_scale_(noise_scale),
      seed_(seed) {
    if (wx_ <= 0.0 || wy_ <= 0.0) throw ConfigError("basin widths must be positive");
}

int LogLinear2dObjective::total_bits() const { return x_.bit_count() + y_.bit_count(); }

double LogLinear2dObjective::evaluate(const BinaryConfig& config, double resource,
                                      std::uint64_t trial_seed) const {
    if (int(config.size()) != total_bits())
        throw EncodingError("config width does not match objective");
    std::span<const std::int8_t> all(config);
    auto xb = all.subspan(0, std::size_t(x_.bit_count()));
    auto yb = all.subspan(std::size_t(x_.bit_count()));
    double vx = decode_numeric(x_, xb.subspan(0, std::size_t(x_.exponent_bits)),
                               xb.subspan(std::size_t(x_.exponent_bits)));
    double vy = decode_numeric(y_, yb.subspan(0, std::size_t(y_.exponent_bits)),
                               yb.subspan(std::size_t(y_.exponent_bits)));
    double dx = (std::log10(vx) - cx_) / wx_;
    double dy = (std::log10(vy) - cy_) / wy_;
    double v = base_ + dx * dx + dy * dy;
    if (noise_scale_ > 0.0)
        v += noise_scale_ / std::sqrt(resource) * keyed_normal(config, resource, seed_, trial_seed);
    return v;
}

double LogLinear2dObjective::evaluate_values(const std::vector<DecodedAssignment>& values,
                                             double resource, std::uint64_t trial_seed) const {
    // Route through the encoded config so both entry points agree exactly,
    // noise included, on any value that decodes from a config.
    double vx = 0.0, vy = 0.0;
    bool got_x = false, got_y = false;
    for (const auto& a : values) {
        if (a.name == x_.name && std::holds_alternative<double>(a.value)) {
            vx = std::get<double>(a.value);
            got_x = true;
        } else if (a.name == y_.name && std::holds_alternative<double>(a.value)) {
            vy = std::get<double>(a.value);
            got_y = true;
        }
    }
    if (!got_x || !got_y)
        throw ObjectiveError("missing numeric values for " + x_.name + " and " + y_.name);
    BinaryConfig config = encode_numeric(x_, vx);
    BinaryConfig yb = encode_numeric(y_, vy);
    config.insert(config.end(), yb.begin(), yb.end());
    // Evaluate the basin at the requested values but key noise by the config.
    double dx = (std::log10(vx) - cx_) / wx_;
    double dy = (std::log10(vy) - cy_) / wy_;
    double v = base_ + dx * dx + dy * dy;
    if (noise_scale_ > 0.0)
        v += noise_scale_ / std::sqrt(resource) * keyed_normal(config, resource, seed_, trial_seed);
    return v;
}

ExternalCommandObjective::ExternalCommandObjective(std::string command, SearchSpace space)
    : command_(std::move(command)), space_(std::move(space)) {
    if (command_.empty()) throw ConfigError("external command is empty");
}

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    out += "'";
    return out;
}

double run_command_for_loss(const std::string& cmd) {
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw ObjectiveError("failed to start external command");
    std::string output;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
    int status = pclose(pipe);
    if (status != 0)
        throw ObjectiveError("external command exited with status " + std::to_string(status));

    // Last numeric token of the last non-empty line.
    std::istringstream lines(output);
    std::string line, last_line;
    while (std::getline(lines, line)) {
        if (line.find_first_not_of(" \t\r") != std::string::npos) last_line = line;
    }
    if (last_line.empty()) throw ObjectiveError("external command produced no output");
    std::istringstream tokens(last_line);
    std::string tok, last_tok;
    while (tokens >> tok) last_tok = tok;
    try {
        std::size_t used = 0;
        double loss = std::stod(last_tok, &used);
        if (used != last_tok.size()) throw std::invalid_argument("trailing characters");
        return loss;
    } catch (const std::exception&) {
        throw ObjectiveError("could not parse loss from command output: " + last_tok);
    }
}

}  // namespace

double ExternalCommandObjective::evaluate(const BinaryConfig& config, double resource,
                                          std::uint64_t trial_seed) const {
    return evaluate_values(decode_config(space_, config), resource, trial_seed);
}

double ExternalCommandObjective::evaluate_values(const std::vector<DecodedAssignment>& values,
                                                 double resource, std::uint64_t) const {
    std::string cmd = command_;
    for (const auto& a : values) {
        std::string v = std::holds_alternative<double>(a.value)
                            ? format_double(std::get<double>(a.value))
                            : std::get<std::string>(a.value);
        cmd += " " + shell_quote(a.name + "=" + v);
    }
    cmd += " " + shell_quote("resource=" + format_double(resource));
    return run_command_for_loss(cmd);
}

}  // namespace pgsrhb
