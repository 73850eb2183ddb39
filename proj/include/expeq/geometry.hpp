#pragma once

// Conjugacy toolkit for free products of abelian groups: cyclic reduction,
// the trivial/parabolic/loxodromic trichotomy, stable norm, conjugacy tests
// with explicit conjugators, commensurability indices, power-conjugacy
// normalization, and the overlapping-axes periodicity witness.
//
// Conventions. cyclic_reduce(g) returns (core, c) with g = c * core * c^-1 and
// core cyclically reduced (at most one syllable, or first and last syllables
// in distinct factors). In a free product two cyclically reduced elements of
// length >= 2 are conjugate iff their syllable sequences are cyclic rotations
// of each other, and the centralizer of such an element is generated by its
// primitive root; both facts drive the searches below and every returned
// conjugator or exponent pair is re-verified by exact multiplication.

#include "expeq/freeprod.hpp"

#include <algorithm>
#include <optional>
#include <utility>

namespace expeq::geometry {

using abelian::AbelianElement;
using abelian::Int;
using freeprod::FreeProductElement;
using freeprod::GroupSpecPtr;
using freeprod::Syllable;

struct CyclicForm {
    FreeProductElement reduced;     // cyclically reduced core
    FreeProductElement conjugator;  // c with input = c * reduced * c^-1
};

inline CyclicForm cyclic_reduce(const FreeProductElement& g) {
    std::vector<Syllable> sylls = g.syllables();
    std::vector<Syllable> conj;
    while (sylls.size() >= 2 && sylls.front().factor == sylls.back().factor) {
        // g = f * w * l with f, l in the same factor. Split s = -l off the
        // front so that g = s * ((f+l) * w) * s^-1; when f + l = 0 this peels
        // a full cancelling pair, otherwise it rotates the remainder of the
        // boundary syllable to the front.
        Syllable last = sylls.back();
        sylls.pop_back();
        Syllable first = sylls.front();
        sylls.erase(sylls.begin());
        AbelianElement merged = abelian::ab_add(first.value, last.value);
        if (!merged.is_identity()) sylls.insert(sylls.begin(), {first.factor, merged});
        conj.push_back({last.factor, abelian::ab_neg(last.value)});
    }
    CyclicForm out;
    out.conjugator = FreeProductElement::normalize(g.spec(), conj);
    out.reduced = FreeProductElement::from_normal_syllables(g.spec(), std::move(sylls));
    return out;
}

enum class ElementKind { Trivial, Parabolic, Loxodromic };

struct ElementType {
    ElementKind kind = ElementKind::Trivial;
    // Parabolic data: witness^-1 * g * witness = factor_element in `factor`.
    int factor = -1;
    FreeProductElement witness;
    AbelianElement factor_element;
};

/// Trichotomy: identity, conjugate into a factor, or nothing of the sort.
inline ElementType classify(const FreeProductElement& g) {
    CyclicForm cf = cyclic_reduce(g);
    ElementType t;
    if (cf.reduced.is_identity()) {
        t.kind = ElementKind::Trivial;
        return t;
    }
    if (cf.reduced.rel_length() == 1) {
        t.kind = ElementKind::Parabolic;
        t.factor = cf.reduced.syllables()[0].factor;
        t.witness = cf.conjugator;
        t.factor_element = cf.reduced.syllables()[0].value;
        return t;
    }
    t.kind = ElementKind::Loxodromic;
    return t;
}

/// lim |g^n| / n in the syllable metric; equals the cyclically reduced core
/// length for loxodromic elements and 0 otherwise.
inline Int stable_norm(const FreeProductElement& g) {
    CyclicForm cf = cyclic_reduce(g);
    if (cf.reduced.rel_length() < 2) return 0;
    return cf.reduced.rel_length();
}

/// Order of a group element: finite only for torsion parabolics.
inline std::optional<Int> element_order(const FreeProductElement& g) {
    ElementType t = classify(g);
    switch (t.kind) {
        case ElementKind::Trivial: return Int(1);
        case ElementKind::Parabolic: return abelian::element_order(t.factor_element);
        case ElementKind::Loxodromic: return std::nullopt;
    }
    return std::nullopt;
}

/// g^k via the cyclic form: powers of a cyclically reduced core concatenate
/// with no cancellation, so this is linear in |k| * |g|.
inline FreeProductElement power(const FreeProductElement& g, const Int& k) {
    if (k == 0 || g.is_identity()) return FreeProductElement::identity(g.spec());
    CyclicForm cf = cyclic_reduce(g);
    const std::vector<Syllable>& core = cf.reduced.syllables();
    FreeProductElement core_pow;
    if (core.size() == 1) {
        core_pow = freeprod::syllable_element(g.spec(), core[0].factor,
                                              abelian::ab_scale(k, core[0].value));
    } else {
        const bool neg = k < 0;
        Int reps = abs(k);
        if (!reps.fits_ulong_p())
            throw std::invalid_argument("power: exponent magnitude too large to materialize");
        std::vector<Syllable> sylls;
        sylls.reserve(core.size() * reps.get_ui());
        FreeProductElement base = neg ? invert(cf.reduced) : cf.reduced;
        for (unsigned long i = 0; i < reps.get_ui(); ++i)
            for (const Syllable& s : base.syllables()) sylls.push_back(s);
        core_pow = FreeProductElement::from_normal_syllables(g.spec(), std::move(sylls));
    }
    return multiply(multiply(cf.conjugator, core_pow), invert(cf.conjugator));
}

namespace detail {

inline bool rotation_matches(const std::vector<Syllable>& a, const std::vector<Syllable>& b,
                             std::size_t shift) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[(i + shift) % a.size()] == b[i])) return false;
    return true;
}

inline std::vector<std::size_t> matching_rotations(const std::vector<Syllable>& a,
                                                   const std::vector<Syllable>& b) {
    std::vector<std::size_t> out;
    if (a.size() != b.size()) return out;
    for (std::size_t s = 0; s < a.size(); ++s)
        if (rotation_matches(a, b, s)) out.push_back(s);
    return out;
}

inline FreeProductElement prefix_element(const FreeProductElement& e, std::size_t count) {
    std::vector<Syllable> sylls(e.syllables().begin(),
                                e.syllables().begin() + static_cast<long>(count));
    return FreeProductElement::from_normal_syllables(e.spec(), std::move(sylls));
}

inline FreeProductElement suffix_element(const FreeProductElement& e, std::size_t from) {
    std::vector<Syllable> sylls(e.syllables().begin() + static_cast<long>(from),
                                e.syllables().end());
    return FreeProductElement::from_normal_syllables(e.spec(), std::move(sylls));
}

}  // namespace detail

/// Smallest period of the cyclic syllable sequence (failure-function string
/// matching); the core is the returned root raised to core length / period.
inline FreeProductElement primitive_root(const FreeProductElement& cyc_reduced) {
    const std::vector<Syllable>& s = cyc_reduced.syllables();
    const std::size_t n = s.size();
    if (n <= 1) return cyc_reduced;
    std::vector<std::size_t> fail(n, 0);
    for (std::size_t i = 1; i < n; ++i) {
        std::size_t k = fail[i - 1];
        while (k > 0 && !(s[i] == s[k])) k = fail[k - 1];
        if (s[i] == s[k]) ++k;
        fail[i] = k;
    }
    std::size_t period = n - fail[n - 1];
    if (n % period != 0) period = n;
    return detail::prefix_element(cyc_reduced, period);
}

/// Explicit conjugator c with v = c * u * c^-1, or nothing. For loxodromic
/// pairs the cores must match up to cyclic rotation; for parabolic pairs the
/// factor elements must be equal (conjugation inside an abelian factor is
/// trivial).
inline std::optional<FreeProductElement> conjugacy_test(const FreeProductElement& u,
                                                        const FreeProductElement& v) {
    FreeProductElement::require_same_spec(u, v);
    CyclicForm cu = cyclic_reduce(u);
    CyclicForm cv = cyclic_reduce(v);
    const int lu = cu.reduced.rel_length();
    const int lv = cv.reduced.rel_length();
    if (lu != lv) return std::nullopt;
    if (lu == 0) return FreeProductElement::identity(u.spec());
    if (lu == 1) {
        const Syllable& su = cu.reduced.syllables()[0];
        const Syllable& sv = cv.reduced.syllables()[0];
        if (su.factor != sv.factor || !(su.value == sv.value)) return std::nullopt;
        return multiply(cv.conjugator, invert(cu.conjugator));
    }
    const auto rots = detail::matching_rotations(cu.reduced.syllables(), cv.reduced.syllables());
    if (rots.empty()) return std::nullopt;
    // rot(core_u, s) == core_v, so core_v = p^-1 * core_u * p with p the
    // length-s prefix of core_u.
    FreeProductElement p = detail::prefix_element(cu.reduced, rots.front());
    return multiply(multiply(cv.conjugator, invert(p)), invert(cu.conjugator));
}

/// Shortest conjugator among the rotation and centralizer-boundary candidates;
/// every candidate is exhaustive for free products, so the minimum is over the
/// full conjugator coset. Always satisfies |g| <= |h1| + |h2|.
inline std::optional<FreeProductElement> find_short_conjugator(const FreeProductElement& h1,
                                                               const FreeProductElement& h2) {
    FreeProductElement::require_same_spec(h1, h2);
    CyclicForm c1 = cyclic_reduce(h1);
    CyclicForm c2 = cyclic_reduce(h2);
    const int l1 = c1.reduced.rel_length();
    const int l2 = c2.reduced.rel_length();
    if (l1 != l2) return std::nullopt;

    std::vector<FreeProductElement> candidates;
    if (l1 == 0) {
        candidates.push_back(FreeProductElement::identity(h1.spec()));
    } else if (l1 == 1) {
        const Syllable& s1 = c1.reduced.syllables()[0];
        const Syllable& s2 = c2.reduced.syllables()[0];
        if (s1.factor != s2.factor || !(s1.value == s2.value)) return std::nullopt;
        // Full coset: c2 * z * c1^-1 with z anywhere in the abelian factor.
        // Only z killing a boundary syllable of c2 or c1^-1 can shorten.
        std::vector<AbelianElement> zs;
        zs.push_back(AbelianElement::identity(s1.value.signature));
        const auto& c2s = c2.conjugator.syllables();
        const auto& c1s = c1.conjugator.syllables();
        std::optional<AbelianElement> from_c2, from_c1;
        if (!c2s.empty() && c2s.back().factor == s1.factor)
            from_c2 = abelian::ab_neg(c2s.back().value);
        if (!c1s.empty() && c1s.back().factor == s1.factor)
            from_c1 = c1s.back().value;  // first syllable of c1^-1 is -back
        if (from_c2) zs.push_back(*from_c2);
        if (from_c1) zs.push_back(*from_c1);
        if (from_c2 && from_c1) zs.push_back(abelian::ab_add(*from_c2, *from_c1));
        for (const AbelianElement& z : zs) {
            FreeProductElement mid = freeprod::syllable_element(h1.spec(), s1.factor, z);
            candidates.push_back(multiply(multiply(c2.conjugator, mid), invert(c1.conjugator)));
        }
    } else {
        const auto rots =
            detail::matching_rotations(c1.reduced.syllables(), c2.reduced.syllables());
        if (rots.empty()) return std::nullopt;
        for (std::size_t s : rots) {
            FreeProductElement p = detail::prefix_element(c1.reduced, s);
            FreeProductElement q = detail::suffix_element(c1.reduced, s);
            candidates.push_back(multiply(multiply(c2.conjugator, invert(p)),
                                          invert(c1.conjugator)));
            candidates.push_back(multiply(multiply(c2.conjugator, q), invert(c1.conjugator)));
        }
    }

    std::optional<FreeProductElement> best;
    for (const FreeProductElement& g : candidates) {
        if (!(multiply(multiply(g, h1), invert(g)) == h2)) continue;
        if (!best || g.rel_length() < best->rel_length()) best = g;
    }
    return best;
}

/// Minimal positive exponents with u^k conjugate to v^(sign*ell).
struct IndexPair {
    Int k;     // minimal k > 0 with u^k conjugate to a power of v
    Int ell;   // minimal ell > 0 with v^ell conjugate to a power of u
    int sign;  // u^k ~ v^(sign*ell)
};

/// Commensurability via primitive roots: a cyclically reduced core is a
/// proper power exactly when its syllable sequence is periodic, and u, v are
/// commensurable iff their primitive roots are conjugate up to inversion.
/// search_cap bounds the fallback exponent search used only if the verifying
/// multiplication ever disagrees with the root computation.
inline std::optional<IndexPair> commensurable(const FreeProductElement& u,
                                              const FreeProductElement& v,
                                              const Int& search_cap = 32) {
    FreeProductElement::require_same_spec(u, v);
    if (classify(u).kind != ElementKind::Loxodromic ||
        classify(v).kind != ElementKind::Loxodromic)
        throw std::invalid_argument("commensurable: both elements must be loxodromic");
    CyclicForm cu = cyclic_reduce(u);
    CyclicForm cv = cyclic_reduce(v);
    FreeProductElement ru = primitive_root(cu.reduced);
    FreeProductElement rv = primitive_root(cv.reduced);

    int sign = 0;
    if (!detail::matching_rotations(ru.syllables(), rv.syllables()).empty())
        sign = 1;
    else if (!detail::matching_rotations(ru.syllables(), invert(rv).syllables()).empty())
        sign = -1;
    if (sign == 0) return std::nullopt;

    const Int eu = cu.reduced.rel_length() / ru.rel_length();
    const Int ev = cv.reduced.rel_length() / rv.rel_length();
    Int g;
    mpz_gcd(g.get_mpz_t(), eu.get_mpz_t(), ev.get_mpz_t());
    IndexPair out{ev / g, eu / g, sign};

    if (conjugacy_test(power(u, out.k), power(v, out.sign * out.ell))) return out;
    if (conjugacy_test(power(u, out.k), power(v, -out.sign * out.ell))) {
        out.sign = -out.sign;
        return out;
    }
    // Exhaustive fallback, bounded by search_cap.
    for (Int k = 1; k <= search_cap; ++k)
        for (Int s = 1; s <= search_cap; ++s) {
            if (conjugacy_test(power(u, k), power(v, s))) return IndexPair{k, s, 1};
            if (conjugacy_test(power(u, k), power(v, -s))) return IndexPair{k, s, -1};
        }
    return std::nullopt;
}

/// Given z^-1 a^n z = b^m with loxodromic a, b, produces exponents (s, t)
/// with z^-1 a^s z = b^t for the same z, s = Ind of [a] in [a] v [b], and
/// s, t > 0 whenever n, m > 0. Verified by multiplication before returning.
inline std::pair<Int, Int> power_conjugacy_normalize(const FreeProductElement& z,
                                                     const FreeProductElement& a,
                                                     const FreeProductElement& b, const Int& n,
                                                     const Int& m) {
    if (n == 0 || m == 0)
        throw std::invalid_argument("power_conjugacy_normalize: exponents must be nonzero");
    if (classify(a).kind != ElementKind::Loxodromic ||
        classify(b).kind != ElementKind::Loxodromic)
        throw std::invalid_argument("power_conjugacy_normalize: elements must be loxodromic");
    const FreeProductElement zi = invert(z);
    if (!(multiply(multiply(zi, power(a, n)), z) == power(b, m)))
        throw std::invalid_argument("power_conjugacy_normalize: z^-1 a^n z != b^m");

    auto idx = commensurable(a, b);
    if (!idx)
        throw std::invalid_argument("power_conjugacy_normalize: elements not commensurable");
    const Int s = idx->k;
    const FreeProductElement lhs = multiply(multiply(zi, power(a, s)), z);
    Int t;
    if (lhs == power(b, idx->ell))
        t = idx->ell;
    else if (lhs == power(b, -idx->ell))
        t = -idx->ell;
    else
        throw std::logic_error("power_conjugacy_normalize: index verification failed");
    if (n > 0 && m > 0 && t < 0)
        throw std::logic_error("power_conjugacy_normalize: sign contract violated");
    return {s, t};
}

/// Description of aligned subpaths of the axes L(x,a) and L(y,b): the window
/// starts at the vertex x * a^a_period_shift * prefix(a, a_offset), which must
/// equal y * b^b_period_shift * prefix(b, b_offset), and extends for `length`
/// syllables along both periodic words.
struct AxisOverlap {
    Int a_period_shift = 0;
    int a_offset = 0;
    Int b_period_shift = 0;
    int b_offset = 0;
    int length = 0;
};

namespace detail {

inline FreeProductElement rotate_core(const FreeProductElement& core, int offset) {
    FreeProductElement p = prefix_element(core, static_cast<std::size_t>(offset));
    return multiply(multiply(invert(p), core), p);
}

}  // namespace detail

/// Overlapping-axes periodicity witness. When the aligned window spans at
/// least |a| + |b| syllables the two periodic words share a primitive root
/// (Fine and Wilf), which yields positive s, t with
/// (y^-1 x) a^s (x^-1 y) = b^t; the identity is verified exactly before it is
/// returned. Shorter windows yield nothing.
inline std::optional<std::pair<Int, Int>> periodicity_witness(const FreeProductElement& x,
                                                              const FreeProductElement& a,
                                                              const FreeProductElement& y,
                                                              const FreeProductElement& b,
                                                              const AxisOverlap& overlap) {
    const int la = a.rel_length();
    const int lb = b.rel_length();
    if (classify(a).kind != ElementKind::Loxodromic ||
        classify(b).kind != ElementKind::Loxodromic ||
        !cyclic_reduce(a).conjugator.is_identity() ||
        !cyclic_reduce(b).conjugator.is_identity())
        throw std::invalid_argument(
            "periodicity_witness: bases must be cyclically reduced loxodromics");
    if (overlap.length < 0 || overlap.a_offset < 0 || overlap.a_offset >= la ||
        overlap.b_offset < 0 || overlap.b_offset >= lb)
        throw std::invalid_argument("periodicity_witness: malformed overlap");

    // Window start must be a common vertex of both axes.
    const FreeProductElement pa =
        detail::prefix_element(a, static_cast<std::size_t>(overlap.a_offset));
    const FreeProductElement pb =
        detail::prefix_element(b, static_cast<std::size_t>(overlap.b_offset));
    const FreeProductElement va =
        multiply(multiply(x, power(a, overlap.a_period_shift)), pa);
    const FreeProductElement vb =
        multiply(multiply(y, power(b, overlap.b_period_shift)), pb);
    if (!(va == vb))
        throw std::invalid_argument("periodicity_witness: overlap is not aligned");

    // The continuations from the window start are the rotated periodic words.
    const std::vector<Syllable>& sa = a.syllables();
    const std::vector<Syllable>& sb = b.syllables();
    for (int i = 0; i < overlap.length; ++i) {
        const Syllable& ca = sa[static_cast<std::size_t>((overlap.a_offset + i) % la)];
        const Syllable& cb = sb[static_cast<std::size_t>((overlap.b_offset + i) % lb)];
        if (!(ca == cb))
            throw std::invalid_argument("periodicity_witness: words disagree on the overlap");
    }

    if (overlap.length < la + lb) return std::nullopt;

    const FreeProductElement a1 = detail::rotate_core(a, overlap.a_offset);
    const FreeProductElement b1 = detail::rotate_core(b, overlap.b_offset);
    const FreeProductElement root = primitive_root(a1);
    if (!(primitive_root(b1) == root))
        throw std::logic_error("periodicity_witness: periodic words lost their common root");
    const Int ea = la / root.rel_length();
    const Int eb = lb / root.rel_length();
    Int g;
    mpz_gcd(g.get_mpz_t(), ea.get_mpz_t(), eb.get_mpz_t());
    const Int s = eb / g;
    const Int t = ea / g;

    const FreeProductElement conj = multiply(invert(y), x);
    if (!(multiply(multiply(conj, power(a, s)), invert(conj)) == power(b, t)))
        throw std::logic_error("periodicity_witness: verification failed");
    return std::make_pair(s, t);
}

}  // namespace expeq::geometry
