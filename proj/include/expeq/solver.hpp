#pragma once

// Orchestrator: classify every base, branch loxodromic exponents inside the
// ledger bounds by iterative deepening on the max-norm, fold the branched
// powers into coefficients, reduce the remaining all-parabolic equation to
// peripheral systems, and solve those exactly. Every SAT verdict carries a
// certificate that has been re-verified by exact normal-form multiplication.
// UNSAT is only reported after exhausting every loxodromic box and every
// branch of the reduction; UNKNOWN is reserved for user-imposed resource
// caps.
//
// All operations here are pure over immutable inputs and safe to call from
// concurrent workers; exploration within one call is sequential so that
// identical inputs and options always yield identical certificates.

#include "expeq/bounds.hpp"
#include "expeq/equation.hpp"
#include "expeq/geometry.hpp"
#include "expeq/reduction.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace expeq::solver {

using abelian::Int;
using freeprod::FreeProductElement;

struct BranchTrace {
    std::map<std::string, Int> loxodromic;  // branched exponents
    long phi_branch = -1;                   // index into the surviving disjunction
    std::map<std::string, Int> peripheral;  // witnesses of the peripheral rows
    std::vector<std::string> freed;         // trivial-base variables, assigned 0
};

struct SolutionCertificate {
    std::map<std::string, Int> assignment;
    BranchTrace trace;
    bool verified = false;
};

struct SolveStats {
    std::uint64_t branches = 0;           // loxodromic assignments explored
    std::uint64_t phi_branches = 0;       // peripheral systems examined
    std::uint64_t diophantine_calls = 0;
    double wall_ms = 0;
};

struct Verdict {
    enum class Status { Sat, Unsat, Unknown } status = Status::Unknown;
    std::optional<SolutionCertificate> certificate;
    std::optional<bounds::BoundReport> bound_report;
    std::string reason;  // for Unknown
    SolveStats stats;
};

struct SolveOptions {
    std::uint64_t max_branches = 100000;  // loxodromic assignments; 0 = unlimited
    long max_depth = -1;                  // cap on the exponent max-norm; -1 = bounds only
    abelian::WitnessOptions witness;      // peripheral witness search box
    std::uint64_t seed = 0;               // nonzero: shuffle branch order inside each shell
};

namespace detail {

struct LoxVar {
    std::size_t term_index;
    Int bound;           // per-variable box [-bound, bound]
    std::optional<Int> finite_order;  // branch over [0, order) instead
};

// Folds fixed exponents into coefficients, leaving only the terms whose
// variables stay symbolic. A trailing constant c is rotated to the front
// (w c = 1 iff c w = 1).
inline std::optional<ExponentialEquation> fold_assignment(
    const ExponentialEquation& eq, const std::map<std::string, Int>& fixed,
    FreeProductElement& folded_constant) {
    ExponentialEquation sub;
    sub.spec = eq.spec;
    FreeProductElement carry = FreeProductElement::identity(eq.spec);
    for (const EquationTerm& t : eq.terms) {
        auto it = fixed.find(t.variable);
        if (it != fixed.end()) {
            carry = multiply(multiply(carry, t.coefficient), geometry::power(t.base, it->second));
        } else {
            EquationTerm nt;
            nt.coefficient = multiply(carry, t.coefficient);
            nt.base = t.base;
            nt.variable = t.variable;
            sub.terms.push_back(std::move(nt));
            carry = FreeProductElement::identity(eq.spec);
        }
    }
    if (sub.terms.empty()) {
        folded_constant = carry;
        return std::nullopt;  // fully constant
    }
    sub.terms.front().coefficient = multiply(carry, sub.terms.front().coefficient);
    return sub;
}

}  // namespace detail

/// Merges a solution of one branch of the disjunction with the branched
/// loxodromic exponents and zeroed free variables into a full assignment,
/// then verifies it against the original equation by exact multiplication.
/// A verification failure signals an internal reduction bug and aborts
/// loudly.
inline SolutionCertificate extend_phi_solution(
    const ExponentialEquation& eq, const reduction::DisjunctionPhi& phi,
    std::size_t branch_index, const std::map<std::string, Int>& peripheral_solution,
    const std::map<std::string, Int>& loxodromic_assignment = {}) {
    if (branch_index >= phi.branches.size())
        throw std::invalid_argument("extend_phi_solution: branch index out of range");
    const reduction::PhiBranch& branch = phi.branches[branch_index];
    for (const reduction::PeripheralEquation& pe : branch.peripheral)
        if (!abelian::substitute_row(pe.row, peripheral_solution).is_identity())
            throw std::invalid_argument(
                "extend_phi_solution: peripheral solution does not satisfy its rows");
    for (const FreeProductElement& w : branch.trivial_checks)
        if (!w.is_identity())
            throw std::invalid_argument("extend_phi_solution: branch has failing trivial checks");

    SolutionCertificate cert;
    cert.trace.loxodromic = loxodromic_assignment;
    cert.trace.phi_branch = static_cast<long>(branch_index);
    cert.trace.freed = phi.freed_variables;
    cert.assignment = loxodromic_assignment;
    for (const auto& [var, idx] : branch.variable_map) {
        auto it = peripheral_solution.find(var);
        if (it == peripheral_solution.end())
            throw std::invalid_argument("extend_phi_solution: missing value for " + var);
        cert.assignment[var] = it->second;
        cert.trace.peripheral[var] = it->second;
        (void)idx;
    }
    for (const std::string& var : phi.freed_variables) cert.assignment[var] = 0;

    if (!evaluate(eq, cert.assignment).is_identity())
        throw std::logic_error("extend_phi_solution: verified substitution failed; "
                               "the reduction produced an unsound branch");
    cert.verified = true;
    return cert;
}

namespace detail {

// Solves the all-parabolic remainder for one loxodromic assignment.
inline std::optional<SolutionCertificate> solve_parabolic_part(
    const ExponentialEquation& original, const ExponentialEquation& sub,
    const std::map<std::string, Int>& lox_assignment, const SolveOptions& opts,
    SolveStats& stats) {
    reduction::DisjunctionPhi phi = reduction::reduce(sub);
    for (std::size_t bi = 0; bi < phi.branches.size(); ++bi) {
        ++stats.phi_branches;
        const reduction::PhiBranch& branch = phi.branches[bi];
        std::map<std::string, Int> peripheral;
        bool ok = true;
        for (const reduction::PeripheralEquation& pe : branch.peripheral) {
            abelian::DiophantineSystem sys;
            sys.signature = pe.row.constant.signature;
            sys.rows = {pe.row};
            ++stats.diophantine_calls;
            abelian::SolutionSet sol = abelian::solve_diophantine(sys, opts.witness);
            if (!sol.sat) {
                ok = false;
                break;
            }
            for (const auto& [v, k] : sol.witness) peripheral[v] = k;
        }
        if (!ok) continue;
        SolutionCertificate cert =
            extend_phi_solution(original, phi, bi, peripheral, lox_assignment);
        return cert;
    }
    return std::nullopt;
}

}  // namespace detail

inline Verdict solve(const ExponentialEquation& eq, const bounds::ConstantsLedger& ledger,
                     const SolveOptions& opts = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    eq.validate();
    ledger.validate();
    Verdict verdict;
    auto finish = [&](Verdict v) {
        v.stats.wall_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
        return v;
    };

    const bounds::BoundReport report = bounds::bound_refined(eq, ledger);
    verdict.bound_report = report;

    std::vector<detail::LoxVar> lox;
    for (std::size_t i = 0; i < eq.terms.size(); ++i) {
        const geometry::ElementType type = geometry::classify(eq.terms[i].base);
        if (type.kind != geometry::ElementKind::Loxodromic) continue;
        detail::LoxVar lv;
        lv.term_index = i;
        lv.finite_order = geometry::element_order(eq.terms[i].base);
        for (const bounds::BoundEntry& e : report.entries)
            if (e.variable == eq.terms[i].variable) lv.bound = e.bound;
        lox.push_back(std::move(lv));
    }

    std::mt19937_64 rng(opts.seed);

    // Explores one loxodromic assignment; returns a certificate when SAT.
    auto explore = [&](const std::map<std::string, Int>& lox_assignment)
        -> std::optional<SolutionCertificate> {
        ++verdict.stats.branches;
        FreeProductElement folded = FreeProductElement::identity(eq.spec);
        std::optional<ExponentialEquation> sub =
            detail::fold_assignment(eq, lox_assignment, folded);
        if (!sub) {
            // Every variable was branched; the equation is now constant.
            if (!folded.is_identity()) return std::nullopt;
            SolutionCertificate cert;
            cert.trace.loxodromic = lox_assignment;
            cert.assignment = lox_assignment;
            if (!evaluate(eq, cert.assignment).is_identity())
                throw std::logic_error("solve: constant branch verification failed");
            cert.verified = true;
            return cert;
        }
        return detail::solve_parabolic_part(eq, *sub, lox_assignment, opts, verdict.stats);
    };

    if (lox.empty()) {
        std::optional<SolutionCertificate> cert = explore({});
        if (cert) {
            verdict.status = Verdict::Status::Sat;
            verdict.certificate = std::move(cert);
        } else {
            verdict.status = Verdict::Status::Unsat;
        }
        return finish(verdict);
    }

    // Iterative deepening on the max-norm of the loxodromic exponent vector,
    // so the first certificate found minimizes that norm. Bases of finite
    // order (absent in free products, present in torsion backends) branch
    // over one period instead.
    auto var_cap = [&](const detail::LoxVar& lv) {
        return lv.finite_order ? Int(*lv.finite_order - 1) : lv.bound;
    };
    Int depth_limit = 0;
    bool depth_capped = false;
    for (const detail::LoxVar& lv : lox) {
        const Int cap = var_cap(lv);
        if (cap > depth_limit) depth_limit = cap;
    }
    if (opts.max_depth >= 0 && Int(opts.max_depth) < depth_limit) {
        depth_limit = opts.max_depth;
        depth_capped = true;
    }

    bool branch_capped = false;
    for (Int d = 0; d <= depth_limit && !branch_capped; ++d) {
        std::vector<Int> lo(lox.size()), hi(lox.size());
        bool shell_reachable = false;
        for (std::size_t j = 0; j < lox.size(); ++j) {
            const detail::LoxVar& lv = lox[j];
            const Int cap = var_cap(lv);
            const Int c = cap < d ? cap : d;
            if (lv.finite_order) {
                lo[j] = 0;
                hi[j] = c;
            } else {
                lo[j] = -c;
                hi[j] = c;
            }
            if (c == d) shell_reachable = true;
        }
        if (d > 0 && !shell_reachable) break;

        // Collect the shell max|k| = d, respecting the branch budget so the
        // materialized list stays bounded.
        std::vector<std::vector<Int>> shell;
        std::vector<Int> k = lo;
        while (true) {
            Int maxnorm = 0;
            for (const Int& kj : k) {
                Int a = abs(kj);
                if (a > maxnorm) maxnorm = a;
            }
            if (maxnorm == d) {
                if (opts.max_branches != 0 &&
                    verdict.stats.branches + shell.size() >= opts.max_branches) {
                    branch_capped = true;
                    break;
                }
                shell.push_back(k);
            }
            std::size_t j = 0;
            while (j < lox.size() && k[j] == hi[j]) {
                k[j] = lo[j];
                ++j;
            }
            if (j == lox.size()) break;
            ++k[j];
        }
        if (opts.seed != 0) std::shuffle(shell.begin(), shell.end(), rng);

        for (const std::vector<Int>& ks : shell) {
            std::map<std::string, Int> assignment;
            for (std::size_t j = 0; j < lox.size(); ++j)
                assignment[eq.terms[lox[j].term_index].variable] = ks[j];
            std::optional<SolutionCertificate> cert = explore(assignment);
            if (cert) {
                verdict.status = Verdict::Status::Sat;
                verdict.certificate = std::move(cert);
                return finish(verdict);
            }
        }
    }

    if (branch_capped) {
        verdict.status = Verdict::Status::Unknown;
        verdict.reason = "branch cap reached before the loxodromic boxes were exhausted";
    } else if (depth_capped) {
        verdict.status = Verdict::Status::Unknown;
        verdict.reason = "depth cap reached before the loxodromic boxes were exhausted";
    } else {
        verdict.status = Verdict::Status::Unsat;
    }
    return finish(verdict);
}

/// Exhaustive oracle: evaluates the equation on every assignment in the box
/// by normal-form multiplication and returns all solutions found, in
/// lexicographic order of the variable list. The box volume is capped.
inline std::vector<std::map<std::string, Int>> solve_brute(
    const ExponentialEquation& eq, const std::map<std::string, std::pair<Int, Int>>& box,
    const Int& volume_cap = 4000000) {
    eq.validate();
    Int volume = 1;
    std::vector<std::pair<Int, Int>> ranges;
    for (const EquationTerm& t : eq.terms) {
        auto it = box.find(t.variable);
        if (it == box.end())
            throw std::invalid_argument("solve_brute: no box for variable " + t.variable);
        if (it->second.second < it->second.first)
            throw std::invalid_argument("solve_brute: empty range for " + t.variable);
        ranges.push_back(it->second);
        volume *= it->second.second - it->second.first + 1;
    }
    if (volume > volume_cap) throw std::invalid_argument("solve_brute: box volume cap exceeded");

    const std::size_t n = eq.terms.size();
    // Precompute base powers over each range.
    std::vector<std::vector<FreeProductElement>> powers(n);
    for (std::size_t i = 0; i < n; ++i)
        for (Int kk = ranges[i].first; kk <= ranges[i].second; ++kk)
            powers[i].push_back(geometry::power(eq.terms[i].base, kk));

    std::vector<std::map<std::string, Int>> solutions;
    std::vector<Int> current(n);
    // prefix holds a_1 g_1^{k_1} ... a_i g_i^{k_i}; the innermost level
    // compares g_n^{k_n} against the inverse of the accumulated prefix.
    std::function<void(std::size_t, const FreeProductElement&)> rec =
        [&](std::size_t i, const FreeProductElement& prefix) {
            const FreeProductElement with_coeff = multiply(prefix, eq.terms[i].coefficient);
            if (i + 1 == n) {
                const FreeProductElement target = invert(with_coeff);
                std::size_t idx = 0;
                for (Int kk = ranges[i].first; kk <= ranges[i].second; ++kk, ++idx) {
                    if (powers[i][idx] == target) {
                        std::map<std::string, Int> sol;
                        for (std::size_t j = 0; j + 1 < n; ++j)
                            sol[eq.terms[j].variable] = current[j];
                        sol[eq.terms[i].variable] = kk;
                        solutions.push_back(std::move(sol));
                    }
                }
                return;
            }
            std::size_t idx = 0;
            for (Int kk = ranges[i].first; kk <= ranges[i].second; ++kk, ++idx) {
                current[i] = kk;
                rec(i + 1, multiply(with_coeff, powers[i][idx]));
            }
        };
    rec(0, FreeProductElement::identity(eq.spec));
    return solutions;
}

/// Convenience box [-radius, radius] for every variable.
inline std::map<std::string, std::pair<Int, Int>> uniform_box(const ExponentialEquation& eq,
                                                              const Int& radius) {
    std::map<std::string, std::pair<Int, Int>> box;
    for (const EquationTerm& t : eq.terms) box[t.variable] = {-radius, radius};
    return box;
}

}  // namespace expeq::solver
