#include "pgsrhb/pgsr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "pgsrhb/errors.hpp"

namespace pgsrhb {

void History::append(double resource, BinaryConfig config, double loss) {
    if (!(resource > 0.0)) throw std::invalid_argument("resource must be positive");
    if (!std::isfinite(loss)) throw std::invalid_argument("history only holds finite losses");
    pools_[resource].push_back({std::move(config), loss});
}

const std::vector<Observation>& History::at(double resource) const {
    static const std::vector<Observation> empty;
    auto it = pools_.find(resource);
    return it == pools_.end() ? empty : it->second;
}

std::vector<double> History::resources() const {
    std::vector<double> out;
    out.reserve(pools_.size());
    for (const auto& [r, _] : pools_) out.push_back(r);
    return out;
}

std::size_t History::count(double resource) const { return at(resource).size(); }

std::size_t History::total() const {
    std::size_t n = 0;
    for (const auto& [_, pool] : pools_) n += pool.size();
    return n;
}

std::optional<SelectedHistory> select_history(const History& h, int min_observations) {
    std::size_t needed = std::size_t(std::max(1, min_observations));
    auto levels = h.resources();
    for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
        if (h.count(*it) >= needed) return SelectedHistory{*it, &h.at(*it)};
    }
    return std::nullopt;
}

Guidance fit_guidance(const std::vector<BinaryConfig>& inputs, const std::vector<double>& outputs,
                      const SearchSpace& space, const PgsrSettings& settings) {
    if (inputs.empty()) throw std::invalid_argument("guidance needs at least one observation");
    if (inputs.size() != outputs.size())
        throw std::invalid_argument("inputs and outputs differ in length");
    for (const auto& x : inputs)
        if (int(x.size()) != space.total_bits())
            throw EncodingError("observation width does not match space");
    if (settings.sparsity < 1) throw std::invalid_argument("sparsity must be positive");

    const int n = space.total_bits();
    const int degree = std::min(settings.degree, n);
    auto basis = enumerate_basis(n, degree);
    DesignMatrix design = build_design(inputs, basis);
    design.column_groups = group_columns(basis, space.groups());

    GroupedProblem problem;
    problem.y = Eigen::Map<const Eigen::VectorXd>(outputs.data(), Eigen::Index(outputs.size()));
    problem.design = std::move(design.values);
    problem.column_groups = std::move(design.column_groups);
    problem.lambda = settings.lambda;
    Solution sol = solve(problem, settings.solver);

    // Strongest coefficients first, basis order breaking ties.
    std::vector<int> order(basis.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(sol.coefficients[a]) > std::abs(sol.coefficients[b]);
    });

    Guidance g;
    g.surrogate.intercept = sol.intercept;
    std::vector<char> in_j(std::size_t(n), 0);
    for (int c : order) {
        if (int(g.surrogate.terms.size()) >= settings.sparsity) break;
        if (sol.coefficients[c] == 0.0) break;
        g.surrogate.terms.push_back({basis[std::size_t(c)], sol.coefficients[c]});
        for (int v : basis[std::size_t(c)]) in_j[std::size_t(v)] = 1;
    }
    for (int v = 0; v < n; ++v)
        if (in_j[std::size_t(v)]) g.restriction.indices.push_back(v);

    const int j_size = int(g.restriction.indices.size());
    if (j_size > 24)
        throw GuidanceError("restriction spans " + std::to_string(j_size) +
                            " variables; refusing to enumerate");

    // Minimize the surrogate over the restricted variables by enumeration,
    // counting big-endian with -1 before +1 so ties keep the
    // lexicographically smallest assignment.
    g.restriction.values.assign(std::size_t(j_size), -1);
    if (j_size > 0) {
        BinaryConfig probe(std::size_t(n), -1);
        double best = std::numeric_limits<double>::infinity();
        for (std::uint64_t c = 0; c < (std::uint64_t{1} << j_size); ++c) {
            for (int i = 0; i < j_size; ++i)
                probe[std::size_t(g.restriction.indices[std::size_t(i)])] =
                    (c >> (j_size - 1 - i)) & 1 ? std::int8_t{1} : std::int8_t{-1};
            double v = eval_surrogate(g.surrogate, probe);
            if (v < best) {
                best = v;
                for (int i = 0; i < j_size; ++i)
                    g.restriction.values[std::size_t(i)] =
                        probe[std::size_t(g.restriction.indices[std::size_t(i)])];
            }
        }
    }

    g.ranges = reduced_ranges(g.restriction, space);
    return g;
}

std::vector<CategoryRange> reduced_ranges(const Restriction& r, const SearchSpace& space) {
    std::vector<CategoryRange> out;
    for (std::size_t ci = 0; ci < space.categories().size(); ++ci) {
        const auto* num = std::get_if<NumericCategory>(&space.categories()[ci]);
        if (!num) continue;
        int offset = space.category_offset(int(ci));
        int width = num->bit_count();

        // The decoded value is monotone in both the exponent integer and the
        // mantissa integer, so the extremes set every free bit at once.
        BinaryConfig lo_bits(std::size_t(width), -1), hi_bits(std::size_t(width), 1);
        for (std::size_t i = 0; i < r.indices.size(); ++i) {
            int local = r.indices[i] - offset;
            if (local < 0 || local >= width) continue;
            lo_bits[std::size_t(local)] = r.values[i];
            hi_bits[std::size_t(local)] = r.values[i];
        }
        auto decode = [&](const BinaryConfig& bits) {
            std::span<const std::int8_t> all(bits);
            return decode_numeric(*num, all.subspan(0, std::size_t(num->exponent_bits)),
                                  all.subspan(std::size_t(num->exponent_bits)));
        };
        out.push_back({num->name, decode(lo_bits), decode(hi_bits)});
    }
    return out;
}

std::string_view to_string(SamplerTag tag) {
    switch (tag) {
        case SamplerTag::kUniform: return "uniform";
        case SamplerTag::kRestricted: return "pgsr-restricted";
        case SamplerTag::kReset: return "pgsr-reset";
    }
    return "uniform";
}

SamplerTag sampler_tag_from(std::string_view s) {
    if (s == "uniform") return SamplerTag::kUniform;
    if (s == "pgsr-restricted") return SamplerTag::kRestricted;
    if (s == "pgsr-reset") return SamplerTag::kReset;
    throw std::invalid_argument("unknown sampler tag: " + std::string(s));
}

PgsrSampler::PgsrSampler(SearchSpace space, PgsrSettings settings, std::ostream* warnings)
    : space_(std::move(space)), settings_(settings), warnings_(warnings) {}

DrawnSample PgsrSampler::sample(const History& history, Rng& rng) {
    auto sel = select_history(history, settings_.min_observations);
    if (!sel) return {random_config(space_, rng), SamplerTag::kUniform};

    if (sel->resource != cached_resource_ || sel->records->size() != cached_count_) {
        cached_resource_ = sel->resource;
        cached_count_ = sel->records->size();
        std::vector<BinaryConfig> xs;
        std::vector<double> ys;
        xs.reserve(sel->records->size());
        ys.reserve(sel->records->size());
        for (const auto& obs : *sel->records) {
            xs.push_back(obs.config);
            ys.push_back(obs.loss);
        }
        try {
            Guidance g = fit_guidance(xs, ys, space_, settings_);
            g.source_resource = sel->resource;
            guidance_ = std::move(g);
            fit_failed_ = false;
        } catch (const GuidanceError& e) {
            guidance_.reset();
            fit_failed_ = true;
            ++warning_count_;
            if (warnings_)
                *warnings_ << "warning: guidance fit failed (" << e.what()
                           << "); falling back to uniform sampling\n";
        }
    }

    if (!guidance_) return {random_config(space_, rng), SamplerTag::kUniform};
    if (rng.real() < settings_.reset_prob)
        return {random_config(space_, rng), SamplerTag::kReset};
    return {restrict_sample(space_.total_bits(), guidance_->restriction, rng),
            SamplerTag::kRestricted};
}

}  // namespace pgsrhb
