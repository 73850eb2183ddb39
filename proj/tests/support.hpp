#pragma once

// Shared fixtures for the test suites: standard groups, seeded random
// elements and equations, and small independent oracles.

#include "expeq/equation.hpp"
#include "expeq/freeprod.hpp"
#include "expeq/geometry.hpp"

#include <array>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

using expeq::abelian::AbelianElement;
using expeq::abelian::AbelianSignature;
using expeq::abelian::Int;
using expeq::freeprod::FreeProductElement;
using expeq::freeprod::GroupSpec;
using expeq::freeprod::GroupSpecPtr;
using expeq::freeprod::Syllable;

inline AbelianSignature sig_z() { return {1, {}}; }
inline AbelianSignature sig_z2() { return {2, {}}; }
inline AbelianSignature sig_zmod(long m) { return {0, {Int(m)}}; }

inline GroupSpecPtr make_f2() {
    // Z * Z with generators a, b.
    std::vector<expeq::freeprod::FactorDecl> factors{{"A", sig_z()}, {"B", sig_z()}};
    std::vector<expeq::freeprod::GeneratorDecl> gens{
        {"a", 0, AbelianElement::from_coords(sig_z(), {Int(1)})},
        {"b", 1, AbelianElement::from_coords(sig_z(), {Int(1)})}};
    return std::make_shared<const GroupSpec>(std::move(factors), std::move(gens));
}

inline GroupSpecPtr make_z2_zmod6() {
    // Z^2 * Z/6 with generators a1, a2, t.
    std::vector<expeq::freeprod::FactorDecl> factors{{"A", sig_z2()}, {"T", sig_zmod(6)}};
    std::vector<expeq::freeprod::GeneratorDecl> gens{
        {"a1", 0, AbelianElement::from_coords(sig_z2(), {Int(1), Int(0)})},
        {"a2", 0, AbelianElement::from_coords(sig_z2(), {Int(0), Int(1)})},
        {"t", 1, AbelianElement::from_coords(sig_zmod(6), {Int(1)})}};
    return std::make_shared<const GroupSpec>(std::move(factors), std::move(gens));
}

inline GroupSpecPtr make_z_z_zmod4() {
    // Z * Z * Z/4 with generators a, b, t.
    std::vector<expeq::freeprod::FactorDecl> factors{
        {"A", sig_z()}, {"B", sig_z()}, {"T", sig_zmod(4)}};
    std::vector<expeq::freeprod::GeneratorDecl> gens{
        {"a", 0, AbelianElement::from_coords(sig_z(), {Int(1)})},
        {"b", 1, AbelianElement::from_coords(sig_z(), {Int(1)})},
        {"t", 2, AbelianElement::from_coords(sig_zmod(4), {Int(1)})}};
    return std::make_shared<const GroupSpec>(std::move(factors), std::move(gens));
}

inline GroupSpecPtr make_zmod(long m) {
    // Z/m * Z/m, two torsion factors.
    std::vector<expeq::freeprod::FactorDecl> factors{{"P", sig_zmod(m)}, {"Q", sig_zmod(m)}};
    std::vector<expeq::freeprod::GeneratorDecl> gens{
        {"p", 0, AbelianElement::from_coords(sig_zmod(m), {Int(1)})},
        {"q", 1, AbelianElement::from_coords(sig_zmod(m), {Int(1)})}};
    return std::make_shared<const GroupSpec>(std::move(factors), std::move(gens));
}

/// Nontrivial random element of one factor.
inline AbelianElement random_factor_element(const GroupSpec& g, int factor, std::mt19937_64& rng,
                                            long coord_bound = 3) {
    const AbelianSignature& sig = g.factors()[static_cast<std::size_t>(factor)].signature;
    std::uniform_int_distribution<long> free_dist(-coord_bound, coord_bound);
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<Int> coords;
        for (int i = 0; i < sig.free_rank; ++i) coords.emplace_back(free_dist(rng));
        for (const Int& m : sig.torsion_moduli) {
            std::uniform_int_distribution<long> tor(0, static_cast<long>(m.get_si()) - 1);
            coords.emplace_back(tor(rng));
        }
        AbelianElement e = AbelianElement::from_coords(sig, std::move(coords));
        if (!e.is_identity()) return e;
    }
    // All-zero draws 64 times in a row: force a generator.
    std::vector<Int> coords(static_cast<std::size_t>(sig.coord_count()), Int(0));
    coords[0] = 1;
    return AbelianElement::from_coords(sig, std::move(coords));
}

/// Random normal form with exactly `len` syllables.
inline FreeProductElement random_element(const GroupSpecPtr& spec, int len,
                                         std::mt19937_64& rng, long coord_bound = 3) {
    const int nfactors = static_cast<int>(spec->factors().size());
    std::uniform_int_distribution<int> fdist(0, nfactors - 1);
    std::vector<Syllable> sylls;
    int prev = -1;
    for (int i = 0; i < len; ++i) {
        int f = fdist(rng);
        if (f == prev) f = (f + 1) % nfactors;
        sylls.push_back({f, random_factor_element(*spec, f, rng, coord_bound)});
        prev = f;
    }
    return FreeProductElement::normalize(spec, sylls);
}

/// Equation from (coefficient, base, variable) string triples.
inline expeq::ExponentialEquation make_equation(
    const GroupSpecPtr& spec,
    const std::vector<std::array<std::string, 3>>& triples) {
    expeq::ExponentialEquation eq;
    eq.spec = spec;
    for (const auto& t : triples) {
        expeq::EquationTerm term;
        term.coefficient = expeq::freeprod::parse_element(spec, t[0]);
        term.base = expeq::freeprod::parse_element(spec, t[1]);
        term.variable = t[2];
        eq.terms.push_back(std::move(term));
    }
    eq.validate();
    return eq;
}

/// Random cyclically reduced element with >= 2 syllables (loxodromic). In a
/// two-factor product cyclically reduced words have even length, so odd
/// requests are rounded up there.
inline FreeProductElement random_loxodromic(const GroupSpecPtr& spec, int len,
                                            std::mt19937_64& rng, long coord_bound = 3) {
    if (len < 2) len = 2;
    if (spec->factors().size() == 2 && len % 2 == 1) ++len;
    for (int attempt = 0; attempt < 256; ++attempt) {
        FreeProductElement e = random_element(spec, len, rng, coord_bound);
        const auto& s = e.syllables();
        if (static_cast<int>(s.size()) == len && s.front().factor != s.back().factor) return e;
    }
    // Deterministic fallback: alternate the first two factors, even length.
    std::vector<Syllable> sylls;
    const int even_len = std::max(len + (len % 2), 2);
    for (int i = 0; i < even_len; ++i) {
        const int f = i % 2;
        const AbelianSignature& sig = spec->factors()[static_cast<std::size_t>(f)].signature;
        std::vector<Int> coords(static_cast<std::size_t>(sig.coord_count()), Int(0));
        coords[0] = 1;
        sylls.push_back({f, AbelianElement::from_coords(sig, coords)});
    }
    return FreeProductElement::from_normal_syllables(spec, std::move(sylls));
}

}  // namespace testsupport
