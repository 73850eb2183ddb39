#pragma once

// Constants ledger and the solution-size bounds that make loxodromic
// exponent search finite. The ledger holds the geometric constants of the
// free-product action on its relative Cayley graph (with the factor alphabet
// as generating set); every entry can be overridden, and overrides are
// tracked by provenance.
//
// Ledger defaults for a free product of abelian groups:
//   delta   = 4   configured default for the hyperbolicity constant; the
//                 relative Cayley graph is a block graph (factor-coset cliques
//                 glued along cut vertices), so this is conservative.
//   kappa=1, epsilon=0   axes of cyclically reduced loxodromics are geodesic
//                 in the syllable metric.
//   inj     = 1   stable norms are positive integers.
//   L       = 1   the maximal virtually cyclic subgroup around a loxodromic
//                 element acts on its primitive root by powers.
//   C       = 1   polygon constant for the relative metric; the free-product
//                 relative metric is 0-or-infinite, so any positive value
//                 yields the singleton bounded-label set.
//   f, F    affine period-count thresholds, f(r) = (2/inj) r + 3 and
//           F(r) = f(r) + kappa (4r + 4 delta + 5 mu) + epsilon + 1 with
//           mu = 2 delta + kappa + epsilon.
//   M       closed-form composition of the chain above (see default_ledger);
//           generous by construction and validated empirically by the
//           acceptance suite.

#include "expeq/equation.hpp"
#include "expeq/geometry.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>

namespace expeq::bounds {

using abelian::Int;
using freeprod::GroupSpec;
using Rat = mpq_class;

enum class Provenance { DerivedDefault, UserConfigured };

struct AffineFn {
    Rat slope = 0;
    Rat intercept = 0;
    Rat operator()(const Rat& r) const { return slope * r + intercept; }
};

struct ConstantsLedger {
    Int delta = 0;
    Rat kappa = 1;
    Rat epsilon = 0;
    Int L = 1;
    Rat inj = 1;
    Rat C_kappa_eps = 1;
    AffineFn f;
    AffineFn F;
    Rat M = 1;
    std::map<std::string, Provenance> provenance;

    void validate() const {
        if (delta < 0) throw std::invalid_argument("ledger: delta must be >= 0");
        if (kappa < 1) throw std::invalid_argument("ledger: kappa must be >= 1");
        if (epsilon < 0) throw std::invalid_argument("ledger: epsilon must be >= 0");
        if (L < 1) throw std::invalid_argument("ledger: L must be a positive integer");
        if (inj <= 0) throw std::invalid_argument("ledger: inj must be positive");
        if (C_kappa_eps <= 0) throw std::invalid_argument("ledger: C must be positive");
        if (M < 1) throw std::invalid_argument("ledger: M must be >= 1");
    }
};

/// Greedy ball count of radius r in the finite truncation of the factor
/// alphabet: free coordinates contribute 2r+1 values each, torsion
/// coordinates min(m, 2r+1); factor counts are summed with the identity
/// shared.
inline Int truncated_ball_size(const GroupSpec& spec, const Int& radius) {
    Int total = 1;
    for (const freeprod::FactorDecl& f : spec.factors()) {
        Int ball = 1;
        const Int per_free = 2 * radius + 1;
        for (int i = 0; i < f.signature.free_rank; ++i) ball *= per_free;
        for (const Int& m : f.signature.torsion_moduli) ball *= (m < per_free ? m : per_free);
        total += ball - 1;
    }
    return total;
}

inline Rat acylindricity_radius(const Rat& eps) { return 6 * eps + 2; }

inline Int acylindricity_count(const GroupSpec& spec, const Int& eps) {
    return (6 * eps + 2) * truncated_ball_size(spec, 2 * eps);
}

namespace detail {

inline Int ceil_rat(const Rat& q) {
    Int num = q.get_num(), den = q.get_den();
    Int out;
    mpz_cdiv_q(out.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return out;
}

inline Rat rat_max(const Rat& a, const Rat& b) { return a > b ? a : b; }

}  // namespace detail

/// Ledger with the free-product defaults described above. M is composed as
///   mu    = 2 delta + kappa + epsilon
///   nu    = 4 delta + 2 mu
///   alpha = kappa (2 nu + 3 + f(nu))
///   beta  = kappa (2 nu + 3 + F(nu)) L
///   M1    = max(alpha, beta, 2 kappa nu + epsilon + f(nu) + 2, 1)
///   M     = 4 M1 (L^2 / inj) (8 delta + 2).
inline ConstantsLedger default_ledger(const GroupSpec& /*spec*/, const Int& delta = 4) {
    ConstantsLedger lg;
    lg.delta = delta;
    lg.kappa = 1;
    lg.epsilon = 0;
    lg.L = 1;
    lg.inj = 1;
    lg.C_kappa_eps = 1;
    const Rat d(delta);
    const Rat mu = 2 * d + lg.kappa + lg.epsilon;
    const Rat nu = 4 * d + 2 * mu;
    lg.f = AffineFn{2 / lg.inj, Rat(3)};
    lg.F = AffineFn{lg.f.slope + 4 * lg.kappa,
                    lg.f.intercept + lg.kappa * (4 * d + 5 * mu) + lg.epsilon + 1};
    const Rat alpha = lg.kappa * (2 * nu + 3 + lg.f(nu));
    const Rat beta = lg.kappa * (2 * nu + 3 + lg.F(nu)) * Rat(lg.L);
    const Rat additive = 2 * lg.kappa * nu + lg.epsilon + lg.f(nu) + 2;
    const Rat m1 = detail::rat_max(detail::rat_max(alpha, beta),
                                   detail::rat_max(additive, Rat(1)));
    lg.M = 4 * m1 * (Rat(lg.L) * Rat(lg.L) / lg.inj) * (8 * d + 2);
    for (const char* key : {"delta", "kappa", "epsilon", "L", "inj", "C", "f", "F", "M"})
        lg.provenance[key] = Provenance::DerivedDefault;
    lg.validate();
    return lg;
}

// --------------------------------------------------------------------------
// key = value text form.
// --------------------------------------------------------------------------

inline std::string ledger_to_text(const ConstantsLedger& lg) {
    std::ostringstream os;
    os << "delta = " << lg.delta.get_str() << "\n";
    os << "kappa = " << lg.kappa.get_str() << "\n";
    os << "epsilon = " << lg.epsilon.get_str() << "\n";
    os << "L = " << lg.L.get_str() << "\n";
    os << "inj = " << lg.inj.get_str() << "\n";
    os << "C = " << lg.C_kappa_eps.get_str() << "\n";
    os << "f_slope = " << lg.f.slope.get_str() << "\n";
    os << "f_intercept = " << lg.f.intercept.get_str() << "\n";
    os << "F_slope = " << lg.F.slope.get_str() << "\n";
    os << "F_intercept = " << lg.F.intercept.get_str() << "\n";
    os << "M = " << lg.M.get_str() << "\n";
    return os.str();
}

/// Applies one `key = value` override; values are integers or fractions p/q.
inline void ledger_set(ConstantsLedger& lg, const std::string& key, const std::string& value) {
    Rat v;
    try {
        v = Rat(value);
        v.canonicalize();
    } catch (const std::exception&) {
        throw std::invalid_argument("ledger: bad value '" + value + "' for " + key);
    }
    auto as_int = [&](const char* what) {
        if (v.get_den() != 1)
            throw std::invalid_argument(std::string("ledger: ") + what + " must be an integer");
        return v.get_num();
    };
    if (key == "delta") lg.delta = as_int("delta");
    else if (key == "kappa") lg.kappa = v;
    else if (key == "epsilon") lg.epsilon = v;
    else if (key == "L") lg.L = as_int("L");
    else if (key == "inj") lg.inj = v;
    else if (key == "C") lg.C_kappa_eps = v;
    else if (key == "f_slope") lg.f.slope = v;
    else if (key == "f_intercept") lg.f.intercept = v;
    else if (key == "F_slope") lg.F.slope = v;
    else if (key == "F_intercept") lg.F.intercept = v;
    else if (key == "M") lg.M = v;
    else throw std::invalid_argument("ledger: unknown key '" + key + "'");
    const std::string prov_key = (key.rfind("f_", 0) == 0)   ? "f"
                                 : (key.rfind("F_", 0) == 0) ? "F"
                                                             : key;
    lg.provenance[prov_key] = Provenance::UserConfigured;
    lg.validate();
}

inline void ledger_apply_text(ConstantsLedger& lg, const std::string& text) {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!key.empty()) ledger_set(lg, key, value);
    }
}

// --------------------------------------------------------------------------
// Bounds.
// --------------------------------------------------------------------------

struct BoundEntry {
    std::string variable;
    Int bound;
    // Trace of the bracket before scaling by M.
    Rat n_squared;
    Rat coefficient_sum;
    Rat noncommensurable_sum;
    Rat commensurable_sum;
};

struct BoundReport {
    std::vector<BoundEntry> entries;  // one per loxodromic base, equation order
    Int n = 0;
    Int total_coefficient_length = 0;
    Int total_base_length = 0;
    ConstantsLedger ledger;
};

/// Uniform bound (n^2 + sum |a_i| + sum |g_i|) * M for every loxodromic base,
/// lengths in the syllable metric, rounded up.
inline BoundReport bound_simple(const ExponentialEquation& eq, const ConstantsLedger& ledger) {
    eq.validate();
    ledger.validate();
    BoundReport rep;
    rep.ledger = ledger;
    rep.n = static_cast<long>(eq.terms.size());
    for (const EquationTerm& t : eq.terms) {
        rep.total_coefficient_length += t.coefficient.rel_length();
        rep.total_base_length += t.base.rel_length();
    }
    const Rat bracket =
        Rat(rep.n * rep.n) + Rat(rep.total_coefficient_length) + Rat(rep.total_base_length);
    for (const EquationTerm& t : eq.terms) {
        if (geometry::classify(t.base).kind != geometry::ElementKind::Loxodromic) continue;
        BoundEntry e;
        e.variable = t.variable;
        e.n_squared = Rat(rep.n * rep.n);
        e.coefficient_sum = Rat(rep.total_coefficient_length);
        e.noncommensurable_sum = Rat(rep.total_base_length);
        e.commensurable_sum = 0;
        e.bound = detail::ceil_rat(bracket * ledger.M);
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

/// Refined per-variable bound: the coefficient and non-commensurable base
/// sums are divided by the shortest conjugate length of the variable's base,
/// commensurable bases contribute their full length; scaled by M and rounded
/// up. Never exceeds bound_simple for the same ledger.
inline BoundReport bound_refined(const ExponentialEquation& eq, const ConstantsLedger& ledger) {
    eq.validate();
    ledger.validate();
    BoundReport rep;
    rep.ledger = ledger;
    rep.n = static_cast<long>(eq.terms.size());
    for (const EquationTerm& t : eq.terms) {
        rep.total_coefficient_length += t.coefficient.rel_length();
        rep.total_base_length += t.base.rel_length();
    }
    std::vector<geometry::ElementKind> kinds;
    kinds.reserve(eq.terms.size());
    for (const EquationTerm& t : eq.terms) kinds.push_back(geometry::classify(t.base).kind);

    for (std::size_t j = 0; j < eq.terms.size(); ++j) {
        if (kinds[j] != geometry::ElementKind::Loxodromic) continue;
        const Int short_len = geometry::stable_norm(eq.terms[j].base);
        BoundEntry e;
        e.variable = eq.terms[j].variable;
        e.n_squared = Rat(rep.n * rep.n);
        e.coefficient_sum = Rat(rep.total_coefficient_length) / Rat(short_len);
        e.noncommensurable_sum = 0;
        e.commensurable_sum = 0;
        for (std::size_t i = 0; i < eq.terms.size(); ++i) {
            const Int len = eq.terms[i].base.rel_length();
            const bool com = kinds[i] == geometry::ElementKind::Loxodromic &&
                             geometry::commensurable(eq.terms[j].base, eq.terms[i].base)
                                 .has_value();
            if (com)
                e.commensurable_sum += Rat(len);
            else
                e.noncommensurable_sum += Rat(len) / Rat(short_len);
        }
        const Rat bracket =
            e.n_squared + e.coefficient_sum + e.noncommensurable_sum + e.commensurable_sum;
        e.bound = detail::ceil_rat(bracket * ledger.M);
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

}  // namespace expeq::bounds
