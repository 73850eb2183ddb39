#pragma once

// Free products of finitely generated abelian groups: normal forms,
// multiplication, inversion, word metrics, and the element text grammar
//   element := term ('*' term)*
//   term    := '1' | generator ('^' integer)? | factor '(' ints ')' ('^' integer)?
//
// A normal form is an alternating sequence of nontrivial syllables from
// distinct consecutive factors; the empty sequence is the identity.

#include "expeq/abelian.hpp"

#include <cctype>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace expeq::freeprod {

using abelian::AbelianElement;
using abelian::AbelianSignature;
using abelian::Int;

struct FactorDecl {
    std::string name;
    AbelianSignature signature;
    bool operator==(const FactorDecl&) const = default;
};

struct GeneratorDecl {
    std::string name;
    int factor = -1;
    AbelianElement value;
};

/// Declaration of the ambient group: an ordered list of abelian factors plus
/// named generators living in those factors.
class GroupSpec {
public:
    GroupSpec(std::vector<FactorDecl> factors, std::vector<GeneratorDecl> generators)
        : factors_(std::move(factors)), generators_(std::move(generators)) {
        if (factors_.empty()) throw std::invalid_argument("group needs at least one factor");
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            factors_[i].signature.validate();
            for (std::size_t j = i + 1; j < factors_.size(); ++j)
                if (factors_[i].name == factors_[j].name)
                    throw std::invalid_argument("duplicate factor name " + factors_[i].name);
        }
        for (std::size_t i = 0; i < generators_.size(); ++i) {
            const GeneratorDecl& g = generators_[i];
            if (g.factor < 0 || g.factor >= static_cast<int>(factors_.size()))
                throw std::invalid_argument("generator factor out of range");
            if (g.value.signature != factors_[static_cast<std::size_t>(g.factor)].signature)
                throw std::invalid_argument("generator signature mismatch: " + g.name);
            if (g.value.is_identity())
                throw std::invalid_argument("generator must be nontrivial: " + g.name);
            for (std::size_t j = i + 1; j < generators_.size(); ++j)
                if (g.name == generators_[j].name)
                    throw std::invalid_argument("duplicate generator name " + g.name);
        }
    }

    const std::vector<FactorDecl>& factors() const { return factors_; }
    const std::vector<GeneratorDecl>& generators() const { return generators_; }

    int factor_index(const std::string& name) const {
        for (std::size_t i = 0; i < factors_.size(); ++i)
            if (factors_[i].name == name) return static_cast<int>(i);
        return -1;
    }

    const GeneratorDecl* find_generator(const std::string& name) const {
        for (const GeneratorDecl& g : generators_)
            if (g.name == name) return &g;
        return nullptr;
    }

    /// Same algebraic content: factor lists agree.
    bool same_group(const GroupSpec& other) const { return factors_ == other.factors_; }

private:
    std::vector<FactorDecl> factors_;
    std::vector<GeneratorDecl> generators_;
};

using GroupSpecPtr = std::shared_ptr<const GroupSpec>;

struct Syllable {
    int factor = -1;
    AbelianElement value;  // never the identity in a normal form
    bool operator==(const Syllable&) const = default;
};

class FreeProductElement {
public:
    FreeProductElement() = default;

    static FreeProductElement identity(GroupSpecPtr spec) {
        FreeProductElement e;
        e.spec_ = std::move(spec);
        return e;
    }

    /// Normal form of an arbitrary letter sequence: merges adjacent
    /// same-factor letters, deletes resulting identities, and cascades.
    static FreeProductElement normalize(GroupSpecPtr spec, const std::vector<Syllable>& raw) {
        FreeProductElement e = identity(std::move(spec));
        for (const Syllable& s : raw) e.push(s, *e.spec_);
        return e;
    }

    const GroupSpecPtr& spec() const { return spec_; }
    const std::vector<Syllable>& syllables() const { return syllables_; }
    bool is_identity() const { return syllables_.empty(); }

    /// Word length in the alphabet made of all nontrivial factor elements:
    /// the syllable count of the normal form.
    int rel_length() const { return static_cast<int>(syllables_.size()); }

    bool operator==(const FreeProductElement& other) const {
        return syllables_ == other.syllables_;
    }

    friend FreeProductElement multiply(const FreeProductElement& u, const FreeProductElement& v) {
        require_same_spec(u, v);
        FreeProductElement r = u;
        for (const Syllable& s : v.syllables_) r.push(s, *r.spec_);
        return r;
    }

    friend FreeProductElement invert(const FreeProductElement& u) {
        FreeProductElement r;
        r.spec_ = u.spec_;
        r.syllables_.reserve(u.syllables_.size());
        for (auto it = u.syllables_.rbegin(); it != u.syllables_.rend(); ++it)
            r.syllables_.push_back({it->factor, abelian::ab_neg(it->value)});
        return r;
    }

    static void require_same_spec(const FreeProductElement& u, const FreeProductElement& v) {
        if (u.spec_ == v.spec_) return;
        if (u.spec_ && v.spec_ && u.spec_->same_group(*v.spec_)) return;
        throw std::invalid_argument("elements belong to different groups");
    }

    /// Raw constructor for syllable sequences already known to be normal.
    static FreeProductElement from_normal_syllables(GroupSpecPtr spec,
                                                    std::vector<Syllable> sylls) {
        FreeProductElement e;
        e.spec_ = std::move(spec);
        e.syllables_ = std::move(sylls);
        for (std::size_t i = 0; i < e.syllables_.size(); ++i) {
            if (e.syllables_[i].value.is_identity())
                throw std::invalid_argument("trivial syllable in normal form");
            if (i + 1 < e.syllables_.size() &&
                e.syllables_[i].factor == e.syllables_[i + 1].factor)
                throw std::invalid_argument("adjacent syllables share a factor");
        }
        return e;
    }

private:
    void push(const Syllable& s, const GroupSpec& spec) {
        if (s.factor < 0 || s.factor >= static_cast<int>(spec.factors().size()))
            throw std::invalid_argument("syllable factor out of range");
        if (s.value.signature != spec.factors()[static_cast<std::size_t>(s.factor)].signature)
            throw std::invalid_argument("syllable signature does not match its factor");
        if (s.value.is_identity()) return;
        if (!syllables_.empty() && syllables_.back().factor == s.factor) {
            AbelianElement sum = abelian::ab_add(syllables_.back().value, s.value);
            syllables_.pop_back();
            if (!sum.is_identity()) syllables_.push_back({s.factor, std::move(sum)});
        } else {
            syllables_.push_back(s);
        }
    }

    GroupSpecPtr spec_;
    std::vector<Syllable> syllables_;
};

inline FreeProductElement syllable_element(GroupSpecPtr spec, int factor,
                                           const AbelianElement& value) {
    return FreeProductElement::normalize(std::move(spec), {Syllable{factor, value}});
}

// ---------------------------------------------------------------------------
// Text form.
// ---------------------------------------------------------------------------

namespace detail {

/// Coordinate -> generator name when the factor's declared generators contain
/// the standard basis; empty when they do not.
inline std::vector<std::string> unit_basis_names(const GroupSpec& spec, int factor) {
    const AbelianSignature& sig = spec.factors()[static_cast<std::size_t>(factor)].signature;
    const int n = sig.coord_count();
    std::vector<std::string> names(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
        bool found = false;
        for (const GeneratorDecl& g : spec.generators()) {
            if (g.factor != factor) continue;
            bool unit = true;
            for (int k = 0; k < n; ++k)
                if (g.value.coords[static_cast<std::size_t>(k)] != (k == c ? 1 : 0)) unit = false;
            if (unit) {
                names[static_cast<std::size_t>(c)] = g.name;
                found = true;
                break;
            }
        }
        if (!found) return {};
    }
    return names;
}

}  // namespace detail

/// Canonical serialization: generator-power words like a^3*b^-1 whenever the
/// factor generators contain a standard basis, coordinate literals F(..)
/// otherwise, and "1" for the identity.
inline std::string print_element(const FreeProductElement& e) {
    if (e.is_identity()) return "1";
    const GroupSpec& spec = *e.spec();
    std::ostringstream os;
    bool first = true;
    for (const Syllable& s : e.syllables()) {
        const auto names = detail::unit_basis_names(spec, s.factor);
        if (!names.empty()) {
            for (std::size_t c = 0; c < names.size(); ++c) {
                const Int& k = s.value.coords[c];
                if (k == 0) continue;
                if (!first) os << '*';
                first = false;
                os << names[c];
                if (k != 1) os << '^' << k.get_str();
            }
        } else {
            if (!first) os << '*';
            first = false;
            os << spec.factors()[static_cast<std::size_t>(s.factor)].name << '(';
            for (std::size_t c = 0; c < s.value.coords.size(); ++c) {
                if (c) os << ',';
                os << s.value.coords[c].get_str();
            }
            os << ')';
        }
    }
    return os.str();
}

/// Informational word length over the declared finite generator alphabet,
/// using a greedy per-syllable decomposition. Falls back to one letter per
/// syllable when a factor lacks a standard basis.
inline Int y_length(const FreeProductElement& e) {
    Int total = 0;
    const GroupSpec& spec = *e.spec();
    for (const Syllable& s : e.syllables()) {
        const auto names = detail::unit_basis_names(spec, s.factor);
        if (names.empty()) {
            total += 1;
            continue;
        }
        const AbelianSignature& sig = s.value.signature;
        for (int c = 0; c < sig.coord_count(); ++c) {
            const Int& k = s.value.coords[static_cast<std::size_t>(c)];
            if (c < sig.free_rank) {
                total += abs(k);
            } else {
                const Int& m = sig.torsion_moduli[static_cast<std::size_t>(c - sig.free_rank)];
                Int down = m - k;
                total += (k < down) ? k : down;
            }
        }
    }
    return total;
}

class ElementParseError : public std::runtime_error {
public:
    explicit ElementParseError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

struct ElementLexer {
    const std::string& text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool eof() {
        skip_ws();
        return pos >= text.size();
    }
    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }
    bool accept(char c) {
        if (peek() == c) {
            ++pos;
            return true;
        }
        return false;
    }
    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        if (start == pos) throw ElementParseError("expected identifier at offset " +
                                                  std::to_string(start));
        return text.substr(start, pos - start);
    }
    Int integer() {
        skip_ws();
        std::size_t start = pos;
        if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) ++pos;
        std::size_t digits = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == digits) throw ElementParseError("expected integer at offset " +
                                                   std::to_string(start));
        return Int(text.substr(start, pos - start));
    }
};

}  // namespace detail

namespace detail {

inline FreeProductElement parse_element_seq(detail::ElementLexer& lx, const GroupSpecPtr& spec,
                                            bool stop_at_close);

inline FreeProductElement parse_element_rec(detail::ElementLexer& lx, const GroupSpecPtr& spec,
                                            bool stop_at_close) {
    return parse_element_seq(lx, spec, stop_at_close);
}

}  // namespace detail

/// Parses the element grammar against a group declaration. Supports '1',
/// generator powers, factor coordinate literals F(..), and parenthesized
/// subelements with integer exponents.
inline FreeProductElement parse_element(GroupSpecPtr spec, const std::string& text);

namespace detail {

inline FreeProductElement parse_element_seq(detail::ElementLexer& lx, const GroupSpecPtr& spec,
                                            bool stop_at_close) {
    const GroupSpec& g = *spec;
    FreeProductElement acc = FreeProductElement::identity(spec);
    bool first = true;
    while (true) {
        if (lx.eof()) break;
        if (stop_at_close && lx.peek() == ')') break;
        if (!first) {
            if (!lx.accept('*'))
                throw ElementParseError("expected '*' at offset " + std::to_string(lx.pos));
        }
        first = false;
        if (lx.peek() == '(') {
            lx.accept('(');
            FreeProductElement inner = parse_element_seq(lx, spec, true);
            if (!lx.accept(')'))
                throw ElementParseError("expected ')' at offset " + std::to_string(lx.pos));
            Int p = 1;
            if (lx.accept('^')) p = lx.integer();
            FreeProductElement piece = FreeProductElement::identity(spec);
            const FreeProductElement inner_inv = invert(inner);
            const bool neg = p < 0;
            for (Int i = 0; i < abs(p); ++i) piece = multiply(piece, neg ? inner_inv : inner);
            acc = multiply(acc, piece);
            continue;
        }
        if (lx.peek() == '1') {
            ++lx.pos;
            continue;
        }
        std::string name = lx.ident();
        int fidx = g.factor_index(name);
        if (fidx >= 0 && lx.peek() == '(') {
            lx.accept('(');
            std::vector<Int> coords;
            if (lx.peek() != ')') {
                coords.push_back(lx.integer());
                while (lx.accept(',')) coords.push_back(lx.integer());
            }
            if (!lx.accept(')'))
                throw ElementParseError("expected ')' at offset " + std::to_string(lx.pos));
            AbelianElement value = AbelianElement::from_coords(
                g.factors()[static_cast<std::size_t>(fidx)].signature, std::move(coords));
            Int power = 1;
            if (lx.accept('^')) power = lx.integer();
            acc = multiply(acc,
                           syllable_element(spec, fidx, abelian::ab_scale(power, value)));
            continue;
        }
        const GeneratorDecl* gen = g.find_generator(name);
        if (!gen) throw ElementParseError("unknown generator '" + name + "'");
        Int power = 1;
        if (lx.accept('^')) power = lx.integer();
        acc = multiply(acc,
                       syllable_element(spec, gen->factor, abelian::ab_scale(power, gen->value)));
    }
    return acc;
}

}  // namespace detail

inline FreeProductElement parse_element(GroupSpecPtr spec, const std::string& text) {
    detail::ElementLexer lx{text};
    FreeProductElement out = detail::parse_element_seq(lx, spec, false);
    if (!lx.eof())
        throw ElementParseError("trailing input at offset " + std::to_string(lx.pos));
    return out;
}

}  // namespace expeq::freeprod
