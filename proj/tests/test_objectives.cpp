#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "pgsrhb/errors.hpp"
#include "pgsrhb/objectives.hpp"
#include "pgsrhb/rng.hpp"

using namespace pgsrhb;

namespace {

BinaryConfig bits(std::initializer_list<int> vs) {
    BinaryConfig out;
    for (int v : vs) out.push_back(std::int8_t(v));
    return out;
}

std::string write_script(const std::string& name, const std::string& body) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream f(path);
    f << body;
    f.close();
    return path.string();
}

}  // namespace

TEST_CASE("keyed noise is a pure function of its key") {
    BinaryConfig a = bits({1, -1, 1}), b = bits({1, -1, -1});
    CHECK(keyed_normal(a, 3.0, 7, 11) == keyed_normal(a, 3.0, 7, 11));
    CHECK(keyed_normal(a, 3.0, 7, 11) != keyed_normal(b, 3.0, 7, 11));
    CHECK(keyed_normal(a, 3.0, 7, 11) != keyed_normal(a, 9.0, 7, 11));
    CHECK(keyed_normal(a, 3.0, 7, 11) != keyed_normal(a, 3.0, 8, 11));
    CHECK(keyed_normal(a, 3.0, 7, 11) != keyed_normal(a, 3.0, 7, 12));
}

TEST_CASE("keyed noise looks standard normal") {
    Rng rng(99);
    double sum = 0.0, sumsq = 0.0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
        BinaryConfig c = random_config(8, rng);
        double v = keyed_normal(c, 1.0, 5, std::uint64_t(i));
        sum += v;
        sumsq += v * v;
    }
    double mean = sum / n, var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 0.08);
    CHECK(var == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("synthetic objective is the planted polynomial when noiseless") {
    std::vector<SurrogateTerm> terms{{{0}, 2.0}, {{1, 3}, -1.5}};
    SyntheticSparseObjective obj(4, terms, 0.0, 42);
    // chi_{0} = +1, chi_{1,3} = (-1)(-1) = +1
    BinaryConfig x = bits({1, -1, 1, -1});
    CHECK(obj.evaluate(x, 1.0, 0) == doctest::Approx(0.5));
    CHECK(obj.evaluate(x, 81.0, 5) == doctest::Approx(0.5));
    BinaryConfig x2 = bits({1, -1, 1, 1});
    CHECK(obj.evaluate(x2, 1.0, 0) == doctest::Approx(2.0 + 1.5));

    auto support = obj.known_support();
    REQUIRE(support.size() == 2);
    CHECK(support[0] == BasisIndex{0});
    CHECK((support[1] == BasisIndex{1, 3}));
}

TEST_CASE("noise scales linearly in sigma and decays with resource") {
    std::vector<SurrogateTerm> terms{{{0}, 1.0}};
    SyntheticSparseObjective clean(4, terms, 0.0, 7);
    SyntheticSparseObjective low(4, terms, 0.5, 7);
    SyntheticSparseObjective high(4, terms, 1.0, 7);
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        BinaryConfig x = random_config(4, rng);
        double base = clean.evaluate(x, 9.0, 1);
        double nl = low.evaluate(x, 9.0, 1) - base;
        double nh = high.evaluate(x, 9.0, 1) - base;
        CHECK(nh == doctest::Approx(2.0 * nl).epsilon(1e-12));
    }
    // same key at two resources: the sigma/sqrt(r) factor is visible through
    // the standardized draw magnitudes
    double spread1 = 0.0, spread81 = 0.0;
    for (int i = 0; i < 400; ++i) {
        BinaryConfig x = random_config(4, rng);
        spread1 += std::abs(high.evaluate(x, 1.0, 2) - clean.evaluate(x, 1.0, 2));
        spread81 += std::abs(high.evaluate(x, 81.0, 2) - clean.evaluate(x, 81.0, 2));
    }
    CHECK(spread81 < spread1 / 4.0);
}

TEST_CASE("random_sparse_terms draws distinct bounded terms") {
    auto terms = random_sparse_terms(12, 8, 3, 99, 1.0, 3.0);
    REQUIRE(terms.size() == 8);
    std::set<BasisIndex> seen;
    for (const auto& t : terms) {
        CHECK(!t.vars.empty());
        CHECK(t.vars.size() <= 3);
        CHECK(seen.insert(t.vars).second);
        CHECK(std::abs(t.coeff) >= 1.0);
        CHECK(std::abs(t.coeff) <= 3.0);
        for (int v : t.vars) {
            CHECK(v >= 0);
            CHECK(v < 12);
        }
    }
    CHECK(random_sparse_terms(12, 8, 3, 99) == terms);  // deterministic
    CHECK(random_sparse_terms(12, 8, 3, 100) != terms);
}

TEST_CASE("loglinear basin evaluates its closed form") {
    NumericCategory x{"lr", 2, 2, -4}, y{"wd", 2, 1, -5};
    LogLinear2dObjective obj(x, y, -2.0, -3.0, 1.0, 2.0, 0.25, 0.0, 1);
    CHECK(obj.total_bits() == 7);

    std::vector<DecodedAssignment> at_center{{"lr", 1e-2}, {"wd", 1e-3}};
    CHECK(obj.evaluate_values(at_center, 1.0, 0) == doctest::Approx(0.25).epsilon(1e-12));

    std::vector<DecodedAssignment> off{{"lr", 1e-1}, {"wd", 1e-5}};
    // (1/1)^2 + (2/2)^2 = 2 on top of the base
    CHECK(obj.evaluate_values(off, 1.0, 0) == doctest::Approx(2.25).epsilon(1e-12));
}

TEST_CASE("loglinear values path agrees with the encoded path exactly") {
    NumericCategory x{"lr", 2, 2, -4}, y{"wd", 2, 1, -5};
    LogLinear2dObjective obj(x, y, -2.0, -3.0, 1.0, 2.0, 0.25, 0.3, 17);
    SearchSpace space({x, y});
    Rng rng(8);
    for (int i = 0; i < 30; ++i) {
        BinaryConfig c = random_config(space, rng);
        auto decoded = decode_config(space, c);
        CHECK(obj.evaluate(c, 3.0, 9) == obj.evaluate_values(decoded, 3.0, 9));
    }
}

TEST_CASE("external command objective parses the last numeric token") {
    SearchSpace space({NumericCategory{"lr", 1, 1, -2}});
    std::string fixed = write_script("pgsrhb_test_fixed.sh", "echo 'final loss 0.125'\n");
    ExternalCommandObjective obj("sh " + fixed, space);
    CHECK(obj.evaluate(bits({1, -1}), 4.0, 0) == 0.125);

    // the resource argument is the last name=value passed in
    std::string echo_r = write_script("pgsrhb_test_res.sh",
                                      "for a in \"$@\"; do v=${a##*=}; done\necho \"$v\"\n");
    ExternalCommandObjective robj("sh " + echo_r, space);
    CHECK(robj.evaluate(bits({1, -1}), 9.0, 0) == 9.0);
}

TEST_CASE("external command failures raise ObjectiveError") {
    SearchSpace space({NumericCategory{"lr", 1, 1, -2}});
    std::string failing = write_script("pgsrhb_test_fail.sh", "exit 3\n");
    ExternalCommandObjective obj("sh " + failing, space);
    CHECK_THROWS_AS(obj.evaluate(bits({1, -1}), 1.0, 0), ObjectiveError);

    std::string silent = write_script("pgsrhb_test_silent.sh", "true\n");
    ExternalCommandObjective sobj("sh " + silent, space);
    CHECK_THROWS_AS(sobj.evaluate(bits({1, -1}), 1.0, 0), ObjectiveError);

    std::string garbled = write_script("pgsrhb_test_garbled.sh", "echo no numbers here\n");
    ExternalCommandObjective gobj("sh " + garbled, space);
    CHECK_THROWS_AS(gobj.evaluate(bits({1, -1}), 1.0, 0), ObjectiveError);
}
