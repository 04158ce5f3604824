#include "pgsrhb/hp_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>

namespace pgsrhb {

namespace {

void check_sign(std::int8_t b) {
    if (b != 1 && b != -1)
        throw EncodingError("bit entry outside {-1,+1}: " + std::to_string(int(b)));
}

}  // namespace

std::uint64_t bits_to_uint(std::span<const std::int8_t> bits) {
    if (bits.size() > 63) throw EncodingError("bit pattern too wide");
    std::uint64_t v = 0;
    for (std::int8_t b : bits) {
        check_sign(b);
        v = (v << 1) | std::uint64_t(b == 1);
    }
    return v;
}

BinaryConfig uint_to_bits(std::uint64_t value, int width) {
    if (width < 0 || width > 63) throw EncodingError("bit width out of range");
    if (width < 63 && (value >> width) != 0)
        throw EncodingError("value does not fit in " + std::to_string(width) + " bits");
    BinaryConfig bits(width);
    for (int i = 0; i < width; ++i)
        bits[i] = (value >> (width - 1 - i)) & 1 ? std::int8_t{1} : std::int8_t{-1};
    return bits;
}

double pow10_int(int e) {
    double r = 1.0;
    double base = 10.0;
    unsigned k = unsigned(e < 0 ? -e : e);
    for (; k; k >>= 1) {
        if (k & 1) r *= base;
        base *= base;
    }
    return e < 0 ? 1.0 / r : r;
}

double NumericCategory::min_value() const {
    return pow10_int(e_min) / double(std::uint64_t{1} << mantissa_bits);
}

double NumericCategory::max_value() const {
    return pow10_int(e_max());
}

double decode_numeric(const NumericCategory& cat,
                      std::span<const std::int8_t> exponent,
                      std::span<const std::int8_t> mantissa) {
    if (int(exponent.size()) != cat.exponent_bits || int(mantissa.size()) != cat.mantissa_bits)
        throw EncodingError("bit widths do not match category " + cat.name);
    int e = cat.e_min + int(bits_to_uint(exponent));
    double h = double(bits_to_uint(mantissa) + 1) / double(std::uint64_t{1} << cat.mantissa_bits);
    return pow10_int(e) * h;
}

BinaryConfig encode_numeric(const NumericCategory& cat, double value) {
    if (!(value > 0.0) || !std::isfinite(value))
        throw EncodingError("cannot encode non-positive value for " + cat.name);
    const double target = std::log10(value);
    const std::uint64_t mant_count = std::uint64_t{1} << cat.mantissa_bits;

    double best_d = 0.0, best_v = 0.0;
    std::uint64_t best_e = 0, best_k = 0;
    bool have = false;
    // Distances are O(1) on the log scale; the epsilon only absorbs rounding
    // in log10 so that exact geometric midpoints resolve as ties.
    const double tie_eps = 1e-12;

    for (int eu = 0; eu < (1 << cat.exponent_bits); ++eu) {
        int e = cat.e_min + eu;
        // Nearest mantissa index on the linear scale, then neighbours; the
        // log-scale winner is always among them (or a clamped end).
        double guess = value / pow10_int(e) * double(mant_count) - 1.0;
        std::int64_t k0 = std::llround(guess);
        for (std::int64_t k = k0 - 1; k <= k0 + 1; ++k) {
            std::int64_t kc = std::clamp<std::int64_t>(k, 0, std::int64_t(mant_count) - 1);
            double h = double(kc + 1) / double(mant_count);
            double v = pow10_int(e) * h;
            double d = std::abs(target - (double(e) + std::log10(h)));
            if (!have || d < best_d - tie_eps ||
                (d <= best_d + tie_eps && v < best_v)) {
                have = true;
                best_d = d;
                best_v = v;
                best_e = std::uint64_t(eu);
                best_k = std::uint64_t(kc);
            }
        }
    }

    BinaryConfig out = uint_to_bits(best_e, cat.exponent_bits);
    BinaryConfig mant = uint_to_bits(best_k, cat.mantissa_bits);
    out.insert(out.end(), mant.begin(), mant.end());
    return out;
}

int CategoricalCategory::bit_count() const {
    int bits = 0;
    while ((std::size_t{1} << bits) < choices.size()) ++bits;
    return bits;
}

int CategoricalCategory::decode(std::span<const std::int8_t> bits) const {
    if (int(bits.size()) != bit_count())
        throw EncodingError("bit width does not match category " + name);
    return int(bits_to_uint(bits) % choices.size());
}

BinaryConfig CategoricalCategory::encode(int choice) const {
    if (choice < 0 || choice >= int(choices.size()))
        throw EncodingError("choice index out of range for " + name);
    return uint_to_bits(std::uint64_t(choice), bit_count());
}

const std::string& category_name(const Category& cat) {
    return std::visit([](const auto& c) -> const std::string& { return c.name; }, cat);
}

int category_bit_count(const Category& cat) {
    return std::visit([](const auto& c) { return c.bit_count(); }, cat);
}

SearchSpace::SearchSpace(std::vector<Category> categories)
    : categories_(std::move(categories)) {
    std::set<std::string> names;
    for (std::size_t i = 0; i < categories_.size(); ++i) {
        const Category& cat = categories_[i];
        const std::string& name = category_name(cat);
        if (name.empty()) throw ConfigError("category without a name");
        if (!names.insert(name).second)
            throw ConfigError("duplicate category name: " + name);

        if (const auto* num = std::get_if<NumericCategory>(&cat)) {
            if (num->exponent_bits < 0 || num->mantissa_bits < 1 || num->bit_count() > 32)
                throw ConfigError("bad bit widths for category " + name);
        } else {
            const auto& cc = std::get<CategoricalCategory>(cat);
            if (cc.choices.size() < 2)
                throw ConfigError("categorical " + name + " needs at least two choices");
        }

        int offset = total_bits_;
        offsets_.push_back(offset);
        int width = category_bit_count(cat);
        total_bits_ += width;

        auto span_indices = [&](int from, int count) {
            std::vector<int> idx(count);
            for (int j = 0; j < count; ++j) idx[j] = from + j;
            return idx;
        };
        if (const auto* num = std::get_if<NumericCategory>(&cat)) {
            if (num->exponent_bits > 0)
                groups_.push_back({name + ".exp", span_indices(offset, num->exponent_bits)});
            groups_.push_back(
                {name + ".mant", span_indices(offset + num->exponent_bits, num->mantissa_bits)});
        } else {
            groups_.push_back({name, span_indices(offset, width)});
        }
    }
}

std::span<const std::int8_t> SearchSpace::category_bits(const BinaryConfig& config,
                                                        int index) const {
    if (int(config.size()) != total_bits_)
        throw EncodingError("config width does not match space");
    return {config.data() + offsets_[index], std::size_t(category_bit_count(categories_[index]))};
}

SearchSpace SearchSpace::with_singleton_groups() const {
    SearchSpace copy = *this;
    copy.groups_.clear();
    for (int i = 0; i < total_bits_; ++i)
        copy.groups_.push_back({"b" + std::to_string(i), {i}});
    return copy;
}

std::vector<DecodedAssignment> decode_config(const SearchSpace& space, const BinaryConfig& config) {
    std::vector<DecodedAssignment> out;
    out.reserve(space.categories().size());
    for (std::size_t i = 0; i < space.categories().size(); ++i) {
        const Category& cat = space.categories()[i];
        auto bits = space.category_bits(config, int(i));
        if (const auto* num = std::get_if<NumericCategory>(&cat)) {
            out.push_back({num->name,
                           decode_numeric(*num, bits.subspan(0, num->exponent_bits),
                                          bits.subspan(num->exponent_bits))});
        } else {
            const auto& cc = std::get<CategoricalCategory>(cat);
            out.push_back({cc.name, cc.choices[std::size_t(cc.decode(bits))]});
        }
    }
    return out;
}

BinaryConfig random_config(int total_bits, Rng& rng) {
    BinaryConfig config(total_bits);
    for (auto& b : config) b = rng.sign();
    return config;
}

BinaryConfig random_config(const SearchSpace& space, Rng& rng) {
    return random_config(space.total_bits(), rng);
}

}  // namespace pgsrhb
