#pragma once

// Exponential equations  a_1 g_1^{x_1} a_2 g_2^{x_2} ... a_n g_n^{x_n} = 1
// over a free product of abelian groups: constants a_i, g_i from the group,
// integer variables x_i.

#include "expeq/freeprod.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace expeq {

using abelian::Int;
using freeprod::FreeProductElement;
using freeprod::GroupSpecPtr;

struct EquationTerm {
    FreeProductElement coefficient;  // a_i
    FreeProductElement base;         // g_i
    std::string variable;            // x_i
};

struct ExponentialEquation {
    GroupSpecPtr spec;
    std::vector<EquationTerm> terms;

    void validate() const {
        if (!spec) throw std::invalid_argument("equation needs a group");
        if (terms.empty()) throw std::invalid_argument("equation needs at least one term");
        std::set<std::string> seen;
        for (const EquationTerm& t : terms) {
            if (t.variable.empty()) throw std::invalid_argument("empty variable name");
            if (!seen.insert(t.variable).second)
                throw std::invalid_argument("variable used twice: " + t.variable);
            FreeProductElement::require_same_spec(t.coefficient, t.base);
        }
    }

    std::vector<std::string> variables() const {
        std::vector<std::string> out;
        out.reserve(terms.size());
        for (const EquationTerm& t : terms) out.push_back(t.variable);
        return out;
    }
};

/// Substitutes an assignment by exact normal-form multiplication.
inline FreeProductElement evaluate(const ExponentialEquation& eq,
                                   const std::map<std::string, Int>& assignment);

}  // namespace expeq

#include "expeq/geometry.hpp"

namespace expeq {

inline FreeProductElement evaluate(const ExponentialEquation& eq,
                                   const std::map<std::string, Int>& assignment) {
    FreeProductElement acc = FreeProductElement::identity(eq.spec);
    for (const EquationTerm& t : eq.terms) {
        auto it = assignment.find(t.variable);
        if (it == assignment.end())
            throw std::invalid_argument("evaluate: missing variable " + t.variable);
        acc = multiply(acc, multiply(t.coefficient, geometry::power(t.base, it->second)));
    }
    return acc;
}

}  // namespace expeq
