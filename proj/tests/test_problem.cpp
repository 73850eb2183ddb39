#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "expeq/problem.hpp"
#include "support.hpp"

#include <random>

using namespace expeq::problem;
using expeq::ExponentialEquation;
using expeq::abelian::AbelianElement;
using expeq::abelian::Int;
using expeq::freeprod::FreeProductElement;
using expeq::freeprod::GroupSpecPtr;

namespace {

const char* kBasic = R"(
# comment
factor A = Z;
factor B = Z;
gen a in A = (1);
gen b in B = (1);
equation a^3 * (a)^x1 * b^2 * (b)^x2 = 1;
)";

bool equations_equal(const ExponentialEquation& l, const ExponentialEquation& r) {
    if (l.terms.size() != r.terms.size()) return false;
    for (std::size_t i = 0; i < l.terms.size(); ++i) {
        if (!(l.terms[i].coefficient == r.terms[i].coefficient)) return false;
        if (!(l.terms[i].base == r.terms[i].base)) return false;
        if (l.terms[i].variable != r.terms[i].variable) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("basic problem parses") {
    const ProblemFile pf = parse_problem(kBasic);
    CHECK(pf.spec->factors().size() == 2);
    CHECK(pf.spec->generators().size() == 2);
    REQUIRE(pf.equation.terms.size() == 2);
    CHECK(pf.equation.terms[0].variable == "x1");
    CHECK(pf.equation.terms[0].coefficient ==
          expeq::freeprod::parse_element(pf.spec, "a^3"));
    CHECK(pf.equation.terms[1].coefficient ==
          expeq::freeprod::parse_element(pf.spec, "b^2"));
}

TEST_CASE("parenthesized constant powers and trailing constants") {
    const ProblemFile pf = parse_problem(R"(
factor A = Z; factor B = Z;
gen a in A = (1); gen b in B = (1);
equation ((a*b)^-5) * (a*b)^x = 1;
)");
    REQUIRE(pf.equation.terms.size() == 1);
    CHECK(pf.equation.terms[0].coefficient ==
          expeq::geometry::power(expeq::freeprod::parse_element(pf.spec, "a*b"), -5));

    // A trailing constant is rotated into the first coefficient.
    const ProblemFile rot = parse_problem(R"(
factor A = Z; factor B = Z;
gen a in A = (1); gen b in B = (1);
equation (a)^x * b = 1;
)");
    REQUIRE(rot.equation.terms.size() == 1);
    CHECK(rot.equation.terms[0].coefficient == expeq::freeprod::parse_element(rot.spec, "b"));
}

TEST_CASE("syntax errors carry positions") {
    try {
        parse_problem("factor A = Z;\ngen a in A = (1);\nequation a^ = 1;\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
        CHECK(std::string(e.what()).find("3:") != std::string::npos);
    }
}

TEST_CASE("duplicate variables are rejected") {
    CHECK_THROWS_AS(parse_problem(R"(
factor A = Z; factor B = Z;
gen a in A = (1); gen b in B = (1);
equation (a)^x * b * (a)^x = 1;
)"),
                    ParseError);
}

TEST_CASE("unknown generators and factors are rejected") {
    CHECK_THROWS_AS(parse_problem("factor A = Z;\ngen a in A = (1);\nequation (c)^x = 1;\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_problem("factor A = Z;\ngen a in Q = (1);\nequation (a)^x = 1;\n"),
                    ParseError);
}

TEST_CASE("equations without variables are rejected") {
    CHECK_THROWS_AS(parse_problem("factor A = Z;\ngen a in A = (1);\nequation a^2 = 1;\n"),
                    ParseError);
}

TEST_CASE("generator names cannot be reused as variables") {
    CHECK_THROWS_AS(parse_problem(R"(
factor A = Z; factor B = Z;
gen a in A = (1); gen b in B = (1);
equation (a)^b = 1;
)"),
                    ParseError);
}

TEST_CASE("torsion must follow the free part") {
    CHECK_THROWS_AS(parse_problem("factor A = Z/4 x Z;\ngen a in A = (1,0);\n"
                                  "equation (a)^x = 1;\n"),
                    ParseError);
    const ProblemFile ok = parse_problem(
        "factor A = Z^2 x Z/4 x Z/6;\ngen a in A = (1,0,0,0);\nequation (a)^x = 1;\n");
    CHECK(ok.spec->factors()[0].signature.free_rank == 2);
    CHECK(ok.spec->factors()[0].signature.torsion_moduli.size() == 2);
}

TEST_CASE("ledger overrides are collected") {
    const ProblemFile pf = parse_problem(R"(
factor A = Z; gen a in A = (1);
ledger M = 32;
ledger delta = 2;
equation (a)^x = 1;
)");
    REQUIRE(pf.ledger_overrides.size() == 2);
    CHECK(pf.ledger_overrides[0] == std::pair<std::string, std::string>{"M", "32"});
    CHECK(pf.ledger_overrides[1] == std::pair<std::string, std::string>{"delta", "2"});
}

TEST_CASE("print and reparse 200 generated problems") {
    std::mt19937_64 rng(113);
    const std::vector<GroupSpecPtr> groups{testsupport::make_f2(), testsupport::make_z2_zmod6(),
                                           testsupport::make_z_z_zmod4()};
    int produced = 0;
    for (int iter = 0; iter < 200; ++iter) {
        const GroupSpecPtr& g = groups[iter % groups.size()];
        ProblemFile pf;
        pf.spec = g;
        pf.equation.spec = g;
        const int n = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < n; ++i) {
            expeq::EquationTerm t;
            t.coefficient = testsupport::random_element(g, static_cast<int>(rng() % 4), rng);
            t.base = testsupport::random_element(g, 1 + static_cast<int>(rng() % 3), rng);
            t.variable = "x" + std::to_string(i);
            pf.equation.terms.push_back(std::move(t));
        }
        if (iter % 3 == 0) pf.ledger_overrides.emplace_back("M", "7/2");
        const std::string text = print_problem(pf);
        const ProblemFile back = parse_problem(text);
        CHECK(back.spec->same_group(*pf.spec));
        CHECK(equations_equal(back.equation, pf.equation));
        CHECK(back.ledger_overrides == pf.ledger_overrides);
        ++produced;
    }
    CHECK(produced == 200);
}
