#include "doctest.h"

#include "pgsrhb/rng.hpp"

using namespace pgsrhb;

TEST_CASE("equal seeds give equal streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 200; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("different seeds diverge") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i) same += a.next() == b.next();
    CHECK(same < 4);
}

TEST_CASE("every mapping advances the draw counter by one") {
    Rng r(7);
    CHECK(r.draws() == 0);
    r.next();
    CHECK(r.draws() == 1);
    r.real();
    r.sign();
    r.below(10);
    CHECK(r.draws() == 4);
}

TEST_CASE("skip lands on the same state as drawing") {
    Rng a(9), b(9);
    for (int i = 0; i < 57; ++i) a.next();
    b.skip(57);
    CHECK(b.draws() == 57);
    for (int i = 0; i < 16; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("real stays in the unit interval") {
    Rng r(3);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 5000; ++i) {
        double v = r.real();
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo < 0.05);
    CHECK(hi > 0.95);
}

TEST_CASE("sign is balanced and below respects its bound") {
    Rng r(5);
    int plus = 0;
    for (int i = 0; i < 2000; ++i) {
        auto s = r.sign();
        CHECK((s == 1 || s == -1));
        plus += s == 1;
    }
    CHECK(plus > 850);
    CHECK(plus < 1150);

    bool saw_zero = false, saw_top = false;
    for (int i = 0; i < 500; ++i) {
        auto v = r.below(7);
        CHECK(v < 7);
        saw_zero |= v == 0;
        saw_top |= v == 6;
    }
    CHECK(saw_zero);
    CHECK(saw_top);
}
