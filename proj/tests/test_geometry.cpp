#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "expeq/geometry.hpp"
#include "support.hpp"

#include <random>

using namespace expeq::geometry;
using expeq::abelian::Int;
using expeq::freeprod::FreeProductElement;
using expeq::freeprod::GroupSpecPtr;
using expeq::freeprod::parse_element;
using testsupport::make_f2;
using testsupport::make_z2_zmod6;
using testsupport::make_zmod;
using testsupport::random_element;
using testsupport::random_loxodromic;

namespace {

FreeProductElement P(const GroupSpecPtr& g, const std::string& s) { return parse_element(g, s); }

bool conjugates_to(const FreeProductElement& g, const FreeProductElement& u,
                   const FreeProductElement& v) {
    return multiply(multiply(g, u), invert(g)) == v;
}

}  // namespace

TEST_CASE("cyclic reduction") {
    const GroupSpecPtr g = make_f2();
    SUBCASE("peels a full conjugating pair") {
        const auto cf = cyclic_reduce(P(g, "a*b*a^-1"));
        CHECK(cf.reduced == P(g, "b"));
        CHECK(cf.conjugator == P(g, "a"));
    }
    SUBCASE("already reduced") {
        const auto cf = cyclic_reduce(P(g, "a*b"));
        CHECK(cf.reduced == P(g, "a*b"));
        CHECK(cf.conjugator.is_identity());
    }
    SUBCASE("splits a boundary syllable") {
        const auto cf = cyclic_reduce(P(g, "a^2*b*a^-1"));
        CHECK(cf.reduced == P(g, "a*b"));
        CHECK(cf.conjugator == P(g, "a"));
        CHECK(multiply(multiply(cf.conjugator, cf.reduced), invert(cf.conjugator)) ==
              P(g, "a^2*b*a^-1"));
    }
    SUBCASE("invariants on random elements") {
        const GroupSpecPtr h = make_z2_zmod6();
        std::mt19937_64 rng(31);
        for (int i = 0; i < 400; ++i) {
            const FreeProductElement e = random_element(h, static_cast<int>(rng() % 8), rng);
            const auto cf = cyclic_reduce(e);
            CHECK(multiply(multiply(cf.conjugator, cf.reduced), invert(cf.conjugator)) == e);
            CHECK(cf.conjugator.rel_length() <= e.rel_length());
            const auto& s = cf.reduced.syllables();
            if (s.size() >= 2) CHECK(s.front().factor != s.back().factor);
        }
    }
}

TEST_CASE("classification trichotomy") {
    const GroupSpecPtr g = make_f2();
    SUBCASE("factor element is parabolic with trivial witness") {
        const ElementType t = classify(P(g, "a"));
        CHECK(t.kind == ElementKind::Parabolic);
        CHECK(t.factor == 0);
        CHECK(t.witness.is_identity());
    }
    SUBCASE("two-syllable core is loxodromic, translation length 2") {
        CHECK(classify(P(g, "a*b")).kind == ElementKind::Loxodromic);
        // Axis check: |(ab)^n| grows exactly linearly with slope 2.
        for (int n = 1; n <= 20; ++n)
            CHECK(power(P(g, "a*b"), n).rel_length() == 2 * n);
    }
    SUBCASE("conjugated factor element") {
        const ElementType t = classify(P(g, "b*a^3*b^-1"));
        CHECK(t.kind == ElementKind::Parabolic);
        CHECK(t.factor == 0);
        CHECK(t.witness == P(g, "b"));
        CHECK(conjugates_to(invert(t.witness), P(g, "b*a^3*b^-1"),
                            expeq::freeprod::syllable_element(g, t.factor, t.factor_element)));
    }
    SUBCASE("identity is trivial") { CHECK(classify(P(g, "1")).kind == ElementKind::Trivial); }
}

TEST_CASE("stable norm") {
    const GroupSpecPtr g = make_f2();
    CHECK(stable_norm(P(g, "a")) == 0);
    SUBCASE("limit of |g^n|/n is the core length") {
        const FreeProductElement ab = P(g, "a*b");
        CHECK(stable_norm(ab) == 2);
        for (int n = 1; n <= 20; ++n) CHECK(power(ab, n).rel_length() == 2 * n);
    }
    CHECK(stable_norm(power(P(g, "a*b"), 3)) == 6);

    SUBCASE("homogeneity and conjugacy invariance") {
        const GroupSpecPtr h = make_z2_zmod6();
        std::mt19937_64 rng(41);
        for (int i = 0; i < 200; ++i) {
            const FreeProductElement e = random_element(h, static_cast<int>(rng() % 6), rng);
            const Int norm = stable_norm(e);
            for (long k = -5; k <= 5; ++k)
                CHECK(stable_norm(power(e, k)) == abs(Int(k)) * norm);
            const FreeProductElement w = random_element(h, static_cast<int>(rng() % 4), rng);
            CHECK(stable_norm(multiply(multiply(w, e), invert(w))) == norm);
        }
    }
    SUBCASE("loxodromic iff positive stable norm; cores achieve it exactly") {
        const GroupSpecPtr h = make_z2_zmod6();
        std::mt19937_64 rng(43);
        for (int i = 0; i < 200; ++i) {
            const FreeProductElement e = random_element(h, static_cast<int>(rng() % 7), rng);
            const bool lox = classify(e).kind == ElementKind::Loxodromic;
            CHECK(lox == (stable_norm(e) >= 1));
            if (lox) {
                const auto cf = cyclic_reduce(e);
                CHECK(stable_norm(cf.reduced) == cf.reduced.rel_length());
            }
        }
    }
}

TEST_CASE("conjugacy test") {
    const GroupSpecPtr g = make_f2();
    SUBCASE("rotation pair with explicit conjugator") {
        const auto c = conjugacy_test(P(g, "a*b"), P(g, "b*a"));
        REQUIRE(c.has_value());
        CHECK(*c == P(g, "a^-1"));
        CHECK(conjugates_to(*c, P(g, "a*b"), P(g, "b*a")));
    }
    SUBCASE("distinct abelian elements are not conjugate") {
        CHECK_FALSE(conjugacy_test(P(g, "a"), P(g, "a^2")).has_value());
    }
    SUBCASE("reflexive") {
        const FreeProductElement e = P(g, "a*b^2*a");
        const auto c = conjugacy_test(e, e);
        REQUIRE(c.has_value());
        CHECK(c->is_identity());
    }
    SUBCASE("verified on random conjugate pairs, refused on random non-pairs") {
        const GroupSpecPtr h = make_z2_zmod6();
        std::mt19937_64 rng(47);
        for (int i = 0; i < 300; ++i) {
            const FreeProductElement u = random_element(h, 1 + static_cast<int>(rng() % 6), rng);
            const FreeProductElement w = random_element(h, static_cast<int>(rng() % 4), rng);
            const FreeProductElement v = multiply(multiply(w, u), invert(w));
            const auto c = conjugacy_test(u, v);
            REQUIRE(c.has_value());
            CHECK(conjugates_to(*c, u, v));
        }
        for (int i = 0; i < 300; ++i) {
            const FreeProductElement u = random_element(h, 1 + static_cast<int>(rng() % 5), rng);
            const FreeProductElement v = random_element(h, 1 + static_cast<int>(rng() % 5), rng);
            const auto c = conjugacy_test(u, v);
            if (c) CHECK(conjugates_to(*c, u, v));
        }
    }
}

TEST_CASE("short conjugators") {
    const GroupSpecPtr g = make_f2();
    SUBCASE("rotation pair") {
        const auto c = find_short_conjugator(P(g, "a*b"), P(g, "b*a"));
        REQUIRE(c.has_value());
        CHECK(c->rel_length() == 1);
        CHECK(conjugates_to(*c, P(g, "a*b"), P(g, "b*a")));
    }
    SUBCASE("parabolic pair") {
        const auto c = find_short_conjugator(P(g, "b"), P(g, "a*b*a^-1"));
        REQUIRE(c.has_value());
        CHECK(*c == P(g, "a"));
    }
    SUBCASE("non-conjugate pair yields nothing") {
        CHECK_FALSE(find_short_conjugator(P(g, "a*b"), P(g, "a^2*b")).has_value());
    }
    SUBCASE("linear budget |g| <= |h1| + |h2| on random conjugate pairs") {
        const GroupSpecPtr h = make_z2_zmod6();
        std::mt19937_64 rng(53);
        for (int i = 0; i < 200; ++i) {
            const FreeProductElement u = random_element(h, 1 + static_cast<int>(rng() % 8), rng);
            const FreeProductElement w = random_element(h, static_cast<int>(rng() % 5), rng);
            const FreeProductElement v = multiply(multiply(w, u), invert(w));
            const auto c = find_short_conjugator(u, v);
            REQUIRE(c.has_value());
            CHECK(conjugates_to(*c, u, v));
            CHECK(c->rel_length() <= u.rel_length() + v.rel_length());
        }
    }
}

TEST_CASE("commensurability indices") {
    const GroupSpecPtr g = make_f2();
    SUBCASE("element vs its square") {
        const auto idx = commensurable(P(g, "a*b"), power(P(g, "a*b"), 2));
        REQUIRE(idx.has_value());
        CHECK(idx->k == 2);
        CHECK(idx->ell == 1);
    }
    SUBCASE("conjugate elements") {
        const auto idx = commensurable(P(g, "a*b"), P(g, "b*a"));
        REQUIRE(idx.has_value());
        CHECK(idx->k == 1);
        CHECK(idx->ell == 1);
    }
    SUBCASE("independent elements of the free group") {
        CHECK_FALSE(commensurable(P(g, "a*b"), P(g, "a*b^-1")).has_value());
    }
    SUBCASE("index laws on constructed commensurable pairs") {
        const GroupSpecPtr h = make_z2_zmod6();
        std::mt19937_64 rng(59);
        for (int i = 0; i < 150; ++i) {
            const FreeProductElement root = random_loxodromic(h, 2 + static_cast<int>(rng() % 2), rng);
            const long p = 1 + static_cast<long>(rng() % 3);
            const long q = 1 + static_cast<long>(rng() % 3);
            const FreeProductElement cu = random_element(h, static_cast<int>(rng() % 3), rng);
            const FreeProductElement cv = random_element(h, static_cast<int>(rng() % 3), rng);
            const bool flip = (rng() % 2) == 0;
            const FreeProductElement u = multiply(multiply(cu, power(root, p)), invert(cu));
            const FreeProductElement v =
                multiply(multiply(cv, power(root, flip ? -q : q)), invert(cv));
            const auto idx = commensurable(u, v);
            REQUIRE(idx.has_value());
            // k ||u|| = ell ||v||, and k is bounded by ||v||.
            CHECK(idx->k * stable_norm(u) == idx->ell * stable_norm(v));
            CHECK(idx->k <= stable_norm(v));
            // Minimality of k against an exhaustive search.
            bool found_smaller = false;
            for (Int k = 1; k < idx->k && !found_smaller; ++k)
                for (Int s = 1; s <= 12 && !found_smaller; ++s)
                    if (conjugacy_test(power(u, k), power(v, s)) ||
                        conjugacy_test(power(u, k), power(v, -s)))
                        found_smaller = true;
            CHECK_FALSE(found_smaller);
            // The returned pair really is a conjugate power pair.
            CHECK(conjugacy_test(power(u, idx->k), power(v, idx->sign * idx->ell)).has_value());
        }
    }
    SUBCASE("rejects non-loxodromic input") {
        CHECK_THROWS_AS(commensurable(P(g, "a"), P(g, "a*b")), std::invalid_argument);
    }
    SUBCASE("commensurability through inversion carries a negative sign") {
        const FreeProductElement u = P(g, "a*b");
        const FreeProductElement v = power(invert(u), 2);  // (b^-1 a^-1)^2
        const auto idx = commensurable(u, v);
        REQUIRE(idx.has_value());
        CHECK(idx->sign == -1);
        CHECK(idx->k == 2);
        CHECK(idx->ell == 1);
        CHECK(conjugacy_test(power(u, idx->k), power(v, idx->sign * idx->ell)).has_value());
    }
    SUBCASE("in an infinite dihedral shape the root conjugates to its inverse") {
        // Z/2 * Z/2: pq and its inverse qp are cyclic rotations.
        const GroupSpecPtr z2 = make_zmod(2);
        const FreeProductElement pq = P(z2, "p*q");
        CHECK(conjugacy_test(pq, invert(pq)).has_value());
        const auto idx = commensurable(pq, invert(pq));
        REQUIRE(idx.has_value());
        CHECK(idx->k == 1);
        CHECK(idx->ell == 1);
        // Power-conjugacy normalization still verifies with mixed signs.
        const auto [s, t] = power_conjugacy_normalize(P(z2, "p"), pq, pq, 1, -1);
        CHECK(s == 1);
        CHECK(multiply(multiply(P(z2, "p"), power(pq, s)), P(z2, "p")) == power(pq, t));
    }
}

TEST_CASE("power-conjugacy normalization") {
    const GroupSpecPtr g = make_f2();
    const FreeProductElement ab = P(g, "a*b");
    SUBCASE("identity conjugation of equal bases") {
        const auto [s, t] = power_conjugacy_normalize(P(g, "1"), ab, ab, 3, 3);
        CHECK(s == 1);
        CHECK(t == 1);
    }
    SUBCASE("rotation conjugator") {
        // z = a satisfies z^-1 (ab)^2 z = (ba)^2.
        const FreeProductElement ba = P(g, "b*a");
        REQUIRE(multiply(multiply(P(g, "a^-1"), power(ab, 2)), P(g, "a")) == power(ba, 2));
        const auto [s, t] = power_conjugacy_normalize(P(g, "a"), ab, ba, 2, 2);
        CHECK(s == 1);
        CHECK(t == 1);
        CHECK(multiply(multiply(P(g, "a^-1"), power(ab, s)), P(g, "a")) == power(ba, t));
    }
    SUBCASE("base against its square") {
        const auto [s, t] = power_conjugacy_normalize(P(g, "1"), ab, power(ab, 2), 2, 1);
        CHECK(s == 2);
        CHECK(t == 1);
    }
    SUBCASE("positive inputs produce positive outputs, verified exactly") {
        const GroupSpecPtr h = make_z2_zmod6();
        std::mt19937_64 rng(61);
        for (int i = 0; i < 100; ++i) {
            const FreeProductElement root = random_loxodromic(h, 2, rng);
            const long p = 1 + static_cast<long>(rng() % 3);
            const long q = 1 + static_cast<long>(rng() % 3);
            const long w = 1 + static_cast<long>(rng() % 2);
            const FreeProductElement c = random_element(h, static_cast<int>(rng() % 3), rng);
            const FreeProductElement d = random_element(h, static_cast<int>(rng() % 3), rng);
            const FreeProductElement a = multiply(multiply(c, power(root, p)), invert(c));
            const FreeProductElement b = multiply(multiply(d, power(root, q)), invert(d));
            // z = c root^e d^-1 conjugates a^(qw) to b^(pw).
            const FreeProductElement z =
                multiply(multiply(c, power(root, static_cast<long>(rng() % 3))), invert(d));
            const Int n(q * w), m(p * w);
            REQUIRE(multiply(multiply(invert(z), power(a, n)), z) == power(b, m));
            const auto [s, t] = power_conjugacy_normalize(z, a, b, n, m);
            CHECK(s > 0);
            CHECK(t > 0);
            CHECK(multiply(multiply(invert(z), power(a, s)), z) == power(b, t));
        }
    }
    SUBCASE("precondition violations are rejected") {
        CHECK_THROWS_AS(power_conjugacy_normalize(P(g, "a"), ab, ab, 1, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS(power_conjugacy_normalize(P(g, "1"), P(g, "a"), ab, 1, 1),
                        std::invalid_argument);
        CHECK_THROWS_AS(power_conjugacy_normalize(P(g, "1"), ab, ab, 0, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("periodicity witness on overlapping axes") {
    const GroupSpecPtr g = make_f2();
    const FreeProductElement ab = P(g, "a*b");
    SUBCASE("aligned powers of one word") {
        const FreeProductElement abab = power(ab, 2);
        AxisOverlap ov;
        ov.length = 6;  // >= |ab| + |abab|
        const auto st = periodicity_witness(P(g, "1"), ab, P(g, "1"), abab, ov);
        REQUIRE(st.has_value());
        CHECK(st->first == 2);
        CHECK(st->second == 1);
    }
    SUBCASE("rotation alignment produces the conjugacy relation") {
        // Window starts at vertex a on both axes: offset 1 into ab, axis of
        // ba through y = a.
        const FreeProductElement ba = P(g, "b*a");
        AxisOverlap ov;
        ov.a_offset = 1;
        ov.b_offset = 0;
        ov.length = 4;  // >= |ab| + |ba|
        const auto st = periodicity_witness(P(g, "1"), ab, P(g, "a"), ba, ov);
        REQUIRE(st.has_value());
        CHECK(st->first == 1);
        CHECK(st->second == 1);
        CHECK(multiply(multiply(P(g, "a^-1"), ab), P(g, "a")) == ba);
    }
    SUBCASE("below the threshold no witness is claimed") {
        const FreeProductElement abab = power(ab, 2);
        AxisOverlap ov;
        ov.length = 3;  // < |ab| + |abab| = 6
        CHECK_FALSE(periodicity_witness(P(g, "1"), ab, P(g, "1"), abab, ov).has_value());
    }
    SUBCASE("misaligned or disagreeing overlaps are malformed") {
        AxisOverlap ov;
        ov.length = 4;
        CHECK_THROWS_AS(periodicity_witness(P(g, "1"), ab, P(g, "b"), P(g, "b*a"), ov),
                        std::invalid_argument);
        AxisOverlap bad;
        bad.a_offset = -1;
        CHECK_THROWS_AS(periodicity_witness(P(g, "1"), ab, P(g, "1"), ab, bad),
                        std::invalid_argument);
        CHECK_THROWS_AS(
            periodicity_witness(P(g, "1"), P(g, "a"), P(g, "1"), ab, AxisOverlap{}),
            std::invalid_argument);
    }
}

TEST_CASE("primitive roots and element orders") {
    const GroupSpecPtr g = make_f2();
    CHECK(primitive_root(power(P(g, "a*b"), 3)) == P(g, "a*b"));
    CHECK(primitive_root(P(g, "a*b^2*a*b")) == P(g, "a*b^2*a*b"));
    CHECK(element_order(P(g, "1")) == Int(1));
    CHECK_FALSE(element_order(P(g, "a")).has_value());
    CHECK_FALSE(element_order(P(g, "a*b")).has_value());

    const GroupSpecPtr zm = make_zmod(6);
    CHECK(element_order(P(zm, "p^2")) == Int(3));
    CHECK(element_order(P(zm, "q*p^2*q^-1")) == Int(3));
    // In Z/2 * Z/2 the product of the two involutions has infinite order.
    const GroupSpecPtr z2 = make_zmod(2);
    CHECK_FALSE(element_order(P(z2, "p*q")).has_value());
    CHECK(stable_norm(P(z2, "p*q")) == 2);
}
