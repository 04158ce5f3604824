#include "doctest.h"

#include <cmath>

#include "pgsrhb/errors.hpp"
#include "pgsrhb/hp_space.hpp"

using namespace pgsrhb;

namespace {

BinaryConfig bits(std::initializer_list<int> vs) {
    BinaryConfig out;
    for (int v : vs) out.push_back(std::int8_t(v));
    return out;
}

}  // namespace

TEST_CASE("bits_to_uint reads sign patterns big-endian") {
    CHECK(bits_to_uint(bits({1, 1})) == 3);
    CHECK(bits_to_uint(bits({-1, -1, -1})) == 0);
    CHECK(bits_to_uint(bits({1, -1, 1})) == 5);
    CHECK(bits_to_uint(bits({})) == 0);
}

TEST_CASE("bits_to_uint rejects entries outside the alphabet") {
    CHECK_THROWS_AS(bits_to_uint(bits({1, 0})), EncodingError);
    CHECK_THROWS_AS(bits_to_uint(bits({2})), EncodingError);
}

TEST_CASE("uint_to_bits inverts bits_to_uint") {
    for (std::uint64_t v = 0; v < 32; ++v) {
        BinaryConfig b = uint_to_bits(v, 5);
        CHECK(b.size() == 5);
        CHECK(bits_to_uint(b) == v);
    }
    CHECK(uint_to_bits(5, 3) == bits({1, -1, 1}));
    CHECK_THROWS_AS(uint_to_bits(8, 3), EncodingError);
}

TEST_CASE("pow10_int matches literal powers") {
    CHECK(pow10_int(0) == 1.0);
    CHECK(pow10_int(3) == 1000.0);
    CHECK(pow10_int(-3) == 1e-3);
    CHECK(pow10_int(-6) == 1e-6);
    CHECK(pow10_int(18) == 1e18);
}

TEST_CASE("decode_numeric composes decade and mantissa") {
    NumericCategory cat{"lr", 3, 1, -6};
    // exponent bits 011 -> e = -6 + 3 = -3, mantissa bit 0 -> h = 1/2
    BinaryConfig exp = bits({-1, 1, 1}), mant = bits({-1});
    CHECK(decode_numeric(cat, exp, mant) == 5e-4);

    NumericCategory flat{"x", 0, 2, -1};
    double expect[] = {0.025, 0.05, 0.075, 0.1};
    for (std::uint64_t m = 0; m < 4; ++m) {
        BinaryConfig mb = uint_to_bits(m, 2);
        CHECK(decode_numeric(flat, {}, mb) == doctest::Approx(expect[m]).epsilon(1e-14));
    }
}

TEST_CASE("numeric range endpoints") {
    NumericCategory cat{"lr", 2, 2, -4};
    CHECK(cat.e_max() == -1);
    CHECK(cat.min_value() == doctest::Approx(1e-4 * 0.25).epsilon(1e-14));
    CHECK(cat.max_value() == doctest::Approx(1e-1).epsilon(1e-14));
    CHECK(cat.value_count() == 16);
}

TEST_CASE("encode_numeric picks the nearest value in log space") {
    NumericCategory cat{"lr", 2, 1, -3};
    // exactly representable values come back unchanged
    CHECK(decode_numeric(cat, bits({1, -1}), bits({1})) == 0.1);
    BinaryConfig enc = encode_numeric(cat, 0.1);
    CHECK(bits_to_uint(enc) == bits_to_uint(bits({1, -1, 1})));

    // 0.6e-2 sits between 0.5e-2 and 1e-2; log10 midpoint is sqrt(0.5)e-2
    CHECK(bits_to_uint(encode_numeric(cat, 0.6e-2)) == bits_to_uint(encode_numeric(cat, 0.5e-2)));
    CHECK(bits_to_uint(encode_numeric(cat, 0.9e-2)) == bits_to_uint(encode_numeric(cat, 1e-2)));
}

TEST_CASE("encode_numeric breaks log-midpoint ties toward the smaller value") {
    NumericCategory cat{"lr", 0, 1, -1};  // values 0.05 and 0.1
    double tie = std::sqrt(0.5) * 0.1;
    BinaryConfig enc = encode_numeric(cat, tie);
    CHECK(decode_numeric(cat, {}, enc) == 0.05);
}

TEST_CASE("encode_numeric clamps out-of-range values and rejects nonpositive ones") {
    NumericCategory cat{"lr", 2, 2, -4};
    auto decode_all = [&](const BinaryConfig& enc) {
        std::span<const std::int8_t> s(enc);
        return decode_numeric(cat, s.subspan(0, 2), s.subspan(2));
    };
    CHECK(decode_all(encode_numeric(cat, 1e3)) == doctest::Approx(cat.max_value()));
    CHECK(decode_all(encode_numeric(cat, 1e-9)) == doctest::Approx(cat.min_value()));
    CHECK_THROWS_AS(encode_numeric(cat, 0.0), EncodingError);
    CHECK_THROWS_AS(encode_numeric(cat, -1.0), EncodingError);
}

TEST_CASE("encode inverts decode over whole categories") {
    for (NumericCategory cat : {NumericCategory{"a", 2, 2, -3}, NumericCategory{"b", 0, 3, -1},
                                NumericCategory{"c", 3, 1, -6}}) {
        for (std::uint64_t p = 0; p < cat.value_count(); ++p) {
            BinaryConfig all = uint_to_bits(p, cat.bit_count());
            std::span<const std::int8_t> s(all);
            double v = decode_numeric(cat, s.subspan(0, std::size_t(cat.exponent_bits)),
                                      s.subspan(std::size_t(cat.exponent_bits)));
            CHECK(encode_numeric(cat, v) == all);
        }
    }
}

TEST_CASE("categorical patterns wrap around the choice list") {
    CategoricalCategory cat{"opt", {"sgd", "adam", "rmsprop"}};
    CHECK(cat.bit_count() == 2);
    CHECK(cat.decode(bits({-1, -1})) == 0);
    CHECK(cat.decode(bits({1, 1})) == 0);  // pattern 3 mod 3
    CHECK(cat.decode(bits({-1, 1})) == 1);
    CHECK(cat.decode(cat.encode(2)) == 2);
    CHECK_THROWS_AS(cat.encode(3), EncodingError);
}

TEST_CASE("search space lays out categories and builds the group partition") {
    SearchSpace space({NumericCategory{"lr", 2, 1, -4},
                       CategoricalCategory{"opt", {"sgd", "adam", "rmsprop"}},
                       NumericCategory{"wd", 0, 2, -5}});
    CHECK(space.total_bits() == 7);
    CHECK(space.category_offset(0) == 0);
    CHECK(space.category_offset(1) == 3);
    CHECK(space.category_offset(2) == 5);

    const auto& groups = space.groups();
    REQUIRE(groups.size() == 4);  // lr.exp, lr.mant, opt, wd.mant
    CHECK(groups[0].label == "lr.exp");
    CHECK((groups[0].indices == std::vector<int>{0, 1}));
    CHECK(groups[1].label == "lr.mant");
    CHECK(groups[1].indices == std::vector<int>{2});
    CHECK(groups[2].label == "opt");
    CHECK((groups[2].indices == std::vector<int>{3, 4}));
    CHECK(groups[3].label == "wd.mant");
    CHECK((groups[3].indices == std::vector<int>{5, 6}));
}

TEST_CASE("singleton view keeps the layout but splits every bit") {
    SearchSpace space({NumericCategory{"lr", 1, 1, -2}, CategoricalCategory{"b", {"u", "v"}}});
    SearchSpace singles = space.with_singleton_groups();
    CHECK(singles.total_bits() == space.total_bits());
    REQUIRE(singles.groups().size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(singles.groups()[i].indices == std::vector<int>{i});
        CHECK(singles.groups()[i].label == "b" + std::to_string(i));
    }
}

TEST_CASE("space validation rejects malformed categories") {
    CHECK_THROWS_AS(SearchSpace({NumericCategory{"", 1, 1, 0}}), ConfigError);
    CHECK_THROWS_AS(SearchSpace({NumericCategory{"a", 1, 0, 0}}), ConfigError);
    CHECK_THROWS_AS(
        SearchSpace({NumericCategory{"a", 1, 1, 0}, NumericCategory{"a", 1, 1, 0}}),
        ConfigError);
    CHECK_THROWS_AS(SearchSpace({CategoricalCategory{"c", {"only"}}}), ConfigError);
    CHECK_THROWS_AS(SearchSpace({NumericCategory{"big", 30, 10, 0}}), ConfigError);
}

TEST_CASE("decode_config names every category") {
    SearchSpace space({NumericCategory{"lr", 2, 1, -4}, CategoricalCategory{"opt", {"sgd", "adam"}}});
    BinaryConfig c = bits({1, -1, 1, /*opt*/ 1});
    auto decoded = decode_config(space, c);
    REQUIRE(decoded.size() == 2);
    CHECK(decoded[0].name == "lr");
    CHECK(std::get<double>(decoded[0].value) == 1e-2);
    CHECK(decoded[1].name == "opt");
    CHECK(std::get<std::string>(decoded[1].value) == "adam");
}

TEST_CASE("random_config fills every bit with a sign") {
    Rng rng(11);
    SearchSpace space({NumericCategory{"lr", 2, 2, -4}});
    for (int i = 0; i < 50; ++i) {
        BinaryConfig c = random_config(space, rng);
        REQUIRE(c.size() == 4);
        for (auto b : c) CHECK((b == 1 || b == -1));
    }
    CHECK(rng.draws() == 200);
}
