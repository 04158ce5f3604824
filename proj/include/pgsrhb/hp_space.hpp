#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pgsrhb/errors.hpp"
#include "pgsrhb/rng.hpp"

namespace pgsrhb {

// A point in {-1,+1}^n. Entries are validated where it matters; anything
// outside {-1,+1} raises EncodingError.
using BinaryConfig = std::vector<std::int8_t>;

// Big-endian read of a sign pattern as an unsigned integer, -1 |-> 0, +1 |-> 1.
std::uint64_t bits_to_uint(std::span<const std::int8_t> bits);

// Inverse of bits_to_uint for a fixed width. value must fit in `width` bits.
BinaryConfig uint_to_bits(std::uint64_t value, int width);

// 10^e for integer e, computed from exact powers of ten so that negative
// exponents incur a single rounding.
double pow10_int(int e);

// Numeric hyperparameter on a log-linear grid: value = 10^e * h where
// e = e_min + <exponent bits> walks a contiguous range of decades and
// h = (<mantissa bits> + 1) / 2^mantissa_bits is one of 2^mantissa_bits
// evenly spaced points in (0, 1].
struct NumericCategory {
    std::string name;
    int exponent_bits = 0;  // zero means a single fixed decade
    int mantissa_bits = 1;  // at least one
    int e_min = 0;

    int bit_count() const { return exponent_bits + mantissa_bits; }
    int e_max() const { return e_min + (1 << exponent_bits) - 1; }
    std::uint64_t value_count() const { return std::uint64_t{1} << bit_count(); }
    double min_value() const;
    double max_value() const;
};

double decode_numeric(const NumericCategory& cat,
                      std::span<const std::int8_t> exponent,
                      std::span<const std::int8_t> mantissa);

// Nearest representable value by log10 distance, ties to the smaller value.
// Values outside the representable range clamp to its ends; value <= 0 is an
// EncodingError. Returns exponent bits followed by mantissa bits.
BinaryConfig encode_numeric(const NumericCategory& cat, double value);

struct CategoricalCategory {
    std::string name;
    std::vector<std::string> choices;

    int bit_count() const;
    // Patterns beyond the choice count wrap around: index = pattern mod size.
    int decode(std::span<const std::int8_t> bits) const;
    BinaryConfig encode(int choice) const;
};

using Category = std::variant<NumericCategory, CategoricalCategory>;

const std::string& category_name(const Category& cat);
int category_bit_count(const Category& cat);

// A block of bit positions that the grouped penalty treats as one unit.
struct Group {
    std::string label;
    std::vector<int> indices;  // ascending bit positions
};

// Ordered categories laid out over consecutive bits, plus the group
// partition: each numeric category contributes an exponent group and a
// mantissa group, each categorical category a single group.
class SearchSpace {
public:
    SearchSpace() = default;
    explicit SearchSpace(std::vector<Category> categories);

    int total_bits() const { return total_bits_; }
    const std::vector<Category>& categories() const { return categories_; }
    const std::vector<Group>& groups() const { return groups_; }
    int category_offset(int index) const { return offsets_[index]; }

    std::span<const std::int8_t> category_bits(const BinaryConfig& config, int index) const;

    // Same categories but every bit in its own group (plain-lasso layout).
    SearchSpace with_singleton_groups() const;

private:
    std::vector<Category> categories_;
    std::vector<Group> groups_;
    std::vector<int> offsets_;
    int total_bits_ = 0;
};

using DecodedValue = std::variant<double, std::string>;

struct DecodedAssignment {
    std::string name;
    DecodedValue value;
};

std::vector<DecodedAssignment> decode_config(const SearchSpace& space, const BinaryConfig& config);

BinaryConfig random_config(int total_bits, Rng& rng);
BinaryConfig random_config(const SearchSpace& space, Rng& rng);

}  // namespace pgsrhb
