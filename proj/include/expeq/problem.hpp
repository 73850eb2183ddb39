#pragma once

// Single-file problem format:
//
//   # comment
//   factor A = Z^2 x Z/6 ;
//   gen a in A = (1,0,0) ;
//   ledger M = 32 ;                      # optional overrides
//   equation a^3 * (a)^x1 * b * (a*b)^y = 1 ;
//
// equation := term ('*' term)* '=' '1'
// term     := '1' | generator ('^' (integer|variable))?
//           | '(' element ')' ('^' (integer|variable))?
// A term with a variable exponent contributes one (coefficient, base,
// variable) triple; literal terms multiply into the pending coefficient and a
// trailing constant is rotated to the front (w c = 1 iff c w = 1). Duplicate
// variables are rejected.

#include "expeq/equation.hpp"
#include "expeq/freeprod.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace expeq::problem {

using abelian::AbelianSignature;
using abelian::Int;
using freeprod::FreeProductElement;
using freeprod::GroupSpec;
using freeprod::GroupSpecPtr;

struct ParseError : std::runtime_error {
    int line;
    int column;
    ParseError(int l, int c, const std::string& msg)
        : std::runtime_error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg),
          line(l),
          column(c) {}
};

struct ProblemFile {
    GroupSpecPtr spec;
    ExponentialEquation equation;
    std::vector<std::pair<std::string, std::string>> ledger_overrides;
};

namespace detail {

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;
    int line = 1;
    int col = 1;

    void advance() {
        if (pos < text.size()) {
            if (text[pos] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++pos;
        }
    }
    void skip_ws_and_comments() {
        while (pos < text.size()) {
            const char c = text[pos];
            if (c == '#') {
                while (pos < text.size() && text[pos] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }
    bool eof() {
        skip_ws_and_comments();
        return pos >= text.size();
    }
    char peek() {
        skip_ws_and_comments();
        return pos < text.size() ? text[pos] : '\0';
    }
    [[noreturn]] void fail(const std::string& msg) { throw ParseError(line, col, msg); }
    void expect(char c, const std::string& what) {
        if (peek() != c) fail("expected '" + std::string(1, c) + "' " + what);
        advance();
    }
    bool accept(char c) {
        if (peek() == c) {
            advance();
            return true;
        }
        return false;
    }
    std::string ident() {
        skip_ws_and_comments();
        if (pos >= text.size() || !(std::isalpha(static_cast<unsigned char>(text[pos])) ||
                                    text[pos] == '_'))
            fail("expected identifier");
        std::string out;
        while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                                     text[pos] == '_')) {
            out.push_back(text[pos]);
            advance();
        }
        return out;
    }
    Int integer() {
        skip_ws_and_comments();
        std::string out;
        if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
            out.push_back(text[pos]);
            advance();
        }
        if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
            fail("expected integer");
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            out.push_back(text[pos]);
            advance();
        }
        return Int(out);
    }
    Int unsigned_integer() {
        skip_ws_and_comments();
        if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
            fail("expected nonnegative integer");
        std::string out;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            out.push_back(text[pos]);
            advance();
        }
        return Int(out);
    }
    /// Raw run of non-space, non-';' characters (ledger values like 3/2).
    std::string raw_value() {
        skip_ws_and_comments();
        std::string out;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
               text[pos] != ';' && text[pos] != '#') {
            out.push_back(text[pos]);
            advance();
        }
        if (out.empty()) fail("expected value");
        return out;
    }
};

// factor signature:  Z ('^' r)? ('x' (Z/m | Z('^' r)?))*  with the free part
// first, as the coordinate order is free-then-torsion.
inline AbelianSignature parse_signature(Cursor& cur) {
    AbelianSignature sig;
    bool saw_torsion = false;
    while (true) {
        cur.skip_ws_and_comments();
        if (cur.peek() != 'Z') cur.fail("expected 'Z' in factor signature");
        cur.advance();
        if (cur.accept('/')) {
            Int m = cur.unsigned_integer();
            if (m < 2) cur.fail("torsion modulus must be >= 2");
            sig.torsion_moduli.push_back(m);
            saw_torsion = true;
        } else {
            if (saw_torsion) cur.fail("free part must precede torsion part");
            Int r(1);
            if (cur.accept('^')) r = cur.unsigned_integer();
            if (!r.fits_sint_p()) cur.fail("free rank too large");
            sig.free_rank += static_cast<int>(r.get_si());
        }
        cur.skip_ws_and_comments();
        if (cur.peek() == 'x') {
            cur.advance();
            continue;
        }
        break;
    }
    sig.validate();
    return sig;
}

struct EquationBuilder {
    GroupSpecPtr spec;
    FreeProductElement pending;
    std::vector<EquationTerm> terms;
    std::map<std::string, bool> used_vars;

    explicit EquationBuilder(GroupSpecPtr s)
        : spec(std::move(s)), pending(FreeProductElement::identity(spec)) {}

    void push_constant(const FreeProductElement& e) { pending = multiply(pending, e); }

    void push_variable(Cursor& cur, const FreeProductElement& base, const std::string& var) {
        if (spec->find_generator(var)) cur.fail("'" + var + "' is a generator, not a variable");
        if (used_vars.count(var)) cur.fail("variable '" + var + "' used twice");
        used_vars[var] = true;
        EquationTerm t;
        t.coefficient = pending;
        t.base = base;
        t.variable = var;
        terms.push_back(std::move(t));
        pending = FreeProductElement::identity(spec);
    }

    ExponentialEquation finish(Cursor& cur) {
        if (terms.empty()) cur.fail("equation needs at least one variable term");
        if (!pending.is_identity())
            terms.front().coefficient = multiply(pending, terms.front().coefficient);
        ExponentialEquation eq;
        eq.spec = spec;
        eq.terms = std::move(terms);
        eq.validate();
        return eq;
    }
};

// element inside parentheses: term ('*' term)*, constants only; nested
// parenthesized subelements take integer exponents.
inline FreeProductElement parse_paren_element(Cursor& cur, const GroupSpecPtr& spec) {
    FreeProductElement acc = FreeProductElement::identity(spec);
    bool first = true;
    while (true) {
        if (!first && !cur.accept('*')) break;
        first = false;
        if (cur.peek() == '(') {
            cur.advance();
            FreeProductElement inner = parse_paren_element(cur, spec);
            cur.expect(')', "after element");
            Int p(1);
            if (cur.accept('^')) p = cur.integer();
            acc = multiply(acc, expeq::geometry::power(inner, p));
            continue;
        }
        if (cur.accept('1')) continue;
        const std::string name = cur.ident();
        const GroupSpec& g = *spec;
        const int fidx = g.factor_index(name);
        if (fidx >= 0 && cur.peek() == '(') {
            cur.advance();
            std::vector<Int> coords;
            if (cur.peek() != ')') {
                coords.push_back(cur.integer());
                while (cur.accept(',')) coords.push_back(cur.integer());
            }
            cur.expect(')', "after coordinates");
            abelian::AbelianElement value = abelian::AbelianElement::from_coords(
                g.factors()[static_cast<std::size_t>(fidx)].signature, std::move(coords));
            Int p(1);
            if (cur.accept('^')) p = cur.integer();
            acc = multiply(acc, freeprod::syllable_element(spec, fidx, abelian::ab_scale(p, value)));
            continue;
        }
        const freeprod::GeneratorDecl* gen = g.find_generator(name);
        if (!gen) cur.fail("unknown generator '" + name + "'");
        Int p(1);
        if (cur.accept('^')) p = cur.integer();
        acc = multiply(acc,
                       freeprod::syllable_element(spec, gen->factor, abelian::ab_scale(p, gen->value)));
    }
    return acc;
}

inline void parse_equation_body(Cursor& cur, EquationBuilder& eb) {
    bool first = true;
    while (true) {
        if (!first) {
            if (cur.peek() == '=') break;
            cur.expect('*', "between terms");
        }
        first = false;
        if (cur.accept('(')) {
            FreeProductElement inner = parse_paren_element(cur, eb.spec);
            cur.expect(')', "after element");
            if (cur.accept('^')) {
                cur.skip_ws_and_comments();
                const char c = cur.peek();
                if (c == '-' || c == '+' || std::isdigit(static_cast<unsigned char>(c))) {
                    eb.push_constant(geometry::power(inner, cur.integer()));
                } else {
                    eb.push_variable(cur, inner, cur.ident());
                }
            } else {
                eb.push_constant(inner);
            }
            continue;
        }
        if (cur.accept('1')) continue;
        const std::string name = cur.ident();
        const GroupSpec& g = *eb.spec;
        const int fidx = g.factor_index(name);
        if (fidx >= 0 && cur.peek() == '(') {
            cur.advance();
            std::vector<Int> coords;
            if (cur.peek() != ')') {
                coords.push_back(cur.integer());
                while (cur.accept(',')) coords.push_back(cur.integer());
            }
            cur.expect(')', "after coordinates");
            abelian::AbelianElement value = abelian::AbelianElement::from_coords(
                g.factors()[static_cast<std::size_t>(fidx)].signature, std::move(coords));
            FreeProductElement lit = freeprod::syllable_element(eb.spec, fidx, value);
            if (cur.accept('^')) {
                cur.skip_ws_and_comments();
                const char c = cur.peek();
                if (c == '-' || c == '+' || std::isdigit(static_cast<unsigned char>(c)))
                    eb.push_constant(geometry::power(lit, cur.integer()));
                else
                    eb.push_variable(cur, lit, cur.ident());
            } else {
                eb.push_constant(lit);
            }
            continue;
        }
        const freeprod::GeneratorDecl* gen = g.find_generator(name);
        if (!gen) cur.fail("unknown generator '" + name + "'");
        FreeProductElement lit = freeprod::syllable_element(eb.spec, gen->factor, gen->value);
        if (cur.accept('^')) {
            cur.skip_ws_and_comments();
            const char c = cur.peek();
            if (c == '-' || c == '+' || std::isdigit(static_cast<unsigned char>(c)))
                eb.push_constant(geometry::power(lit, cur.integer()));
            else
                eb.push_variable(cur, lit, cur.ident());
        } else {
            eb.push_constant(lit);
        }
    }
}

}  // namespace detail

inline ProblemFile parse_problem(const std::string& text) {
    detail::Cursor cur{text};
    std::vector<freeprod::FactorDecl> factors;
    struct PendingGen {
        std::string name;
        std::string factor;
        std::vector<Int> coords;
        int line, col;
    };
    std::vector<PendingGen> gens;
    std::vector<std::pair<std::string, std::string>> overrides;
    GroupSpecPtr spec;
    std::optional<ExponentialEquation> equation;

    auto build_spec = [&]() {
        if (factors.empty()) throw ParseError(cur.line, cur.col, "no factor declarations");
        std::vector<freeprod::GeneratorDecl> gen_decls;
        for (const PendingGen& pg : gens) {
            int idx = -1;
            for (std::size_t i = 0; i < factors.size(); ++i)
                if (factors[i].name == pg.factor) idx = static_cast<int>(i);
            if (idx < 0) throw ParseError(pg.line, pg.col, "unknown factor '" + pg.factor + "'");
            freeprod::GeneratorDecl gd;
            gd.name = pg.name;
            gd.factor = idx;
            try {
                gd.value = abelian::AbelianElement::from_coords(
                    factors[static_cast<std::size_t>(idx)].signature, pg.coords);
            } catch (const std::invalid_argument& e) {
                throw ParseError(pg.line, pg.col, e.what());
            }
            gen_decls.push_back(std::move(gd));
        }
        try {
            spec = std::make_shared<const GroupSpec>(factors, std::move(gen_decls));
        } catch (const std::invalid_argument& e) {
            throw ParseError(1, 1, e.what());
        }
    };

    while (!cur.eof()) {
        const int kw_line = cur.line, kw_col = cur.col;
        const std::string kw = cur.ident();
        if (kw == "factor") {
            if (spec) cur.fail("factor declarations must precede the equation");
            freeprod::FactorDecl f;
            f.name = cur.ident();
            cur.expect('=', "after factor name");
            f.signature = detail::parse_signature(cur);
            cur.expect(';', "after factor declaration");
            factors.push_back(std::move(f));
        } else if (kw == "gen") {
            if (spec) cur.fail("generator declarations must precede the equation");
            PendingGen pg;
            pg.line = cur.line;
            pg.col = cur.col;
            pg.name = cur.ident();
            if (cur.ident() != "in") cur.fail("expected 'in'");
            pg.factor = cur.ident();
            cur.expect('=', "after generator factor");
            cur.expect('(', "before coordinates");
            if (cur.peek() != ')') {
                pg.coords.push_back(cur.integer());
                while (cur.accept(',')) pg.coords.push_back(cur.integer());
            }
            cur.expect(')', "after coordinates");
            cur.expect(';', "after generator declaration");
            gens.push_back(std::move(pg));
        } else if (kw == "ledger") {
            const std::string key = cur.ident();
            cur.expect('=', "after ledger key");
            const std::string value = cur.raw_value();
            cur.expect(';', "after ledger override");
            overrides.emplace_back(key, value);
        } else if (kw == "equation") {
            if (equation) cur.fail("only one equation per problem");
            build_spec();
            detail::EquationBuilder eb(spec);
            detail::parse_equation_body(cur, eb);
            cur.expect('=', "before right-hand side");
            if (!cur.accept('1')) cur.fail("right-hand side must be 1");
            cur.expect(';', "after equation");
            equation = eb.finish(cur);
        } else {
            throw ParseError(kw_line, kw_col, "unknown keyword '" + kw + "'");
        }
    }
    if (!equation) throw ParseError(cur.line, cur.col, "no equation");

    ProblemFile pf;
    pf.spec = spec;
    pf.equation = std::move(*equation);
    pf.ledger_overrides = std::move(overrides);
    return pf;
}

/// Canonical printer; parse_problem(print_problem(p)) reproduces the same
/// group, equation, and overrides.
inline std::string print_problem(const ProblemFile& pf) {
    std::ostringstream os;
    const GroupSpec& g = *pf.spec;
    for (const freeprod::FactorDecl& f : g.factors()) {
        os << "factor " << f.name << " = ";
        bool first = true;
        if (f.signature.free_rank > 0) {
            os << "Z";
            if (f.signature.free_rank > 1) os << "^" << f.signature.free_rank;
            first = false;
        }
        for (const Int& m : f.signature.torsion_moduli) {
            if (!first) os << " x ";
            os << "Z/" << m.get_str();
            first = false;
        }
        if (first) os << "Z^0";
        os << ";\n";
    }
    for (const freeprod::GeneratorDecl& gd : g.generators()) {
        os << "gen " << gd.name << " in "
           << g.factors()[static_cast<std::size_t>(gd.factor)].name << " = (";
        for (std::size_t i = 0; i < gd.value.coords.size(); ++i) {
            if (i) os << ",";
            os << gd.value.coords[i].get_str();
        }
        os << ");\n";
    }
    for (const auto& [k, v] : pf.ledger_overrides) os << "ledger " << k << " = " << v << ";\n";
    os << "equation ";
    bool first = true;
    for (const EquationTerm& t : pf.equation.terms) {
        if (!t.coefficient.is_identity()) {
            if (!first) os << " * ";
            os << freeprod::print_element(t.coefficient);
            first = false;
        }
        if (!first) os << " * ";
        os << "(" << freeprod::print_element(t.base) << ")^" << t.variable;
        first = false;
    }
    os << " = 1;\n";
    return os.str();
}

}  // namespace expeq::problem
