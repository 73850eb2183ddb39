// Command-line front end for the exponential-equation solver over free
// products of finitely generated abelian groups.
//
// Subcommands: solve, reduce, classify, bounds, oracle. Problem files use the
// single-file format of expeq/problem.hpp. JSON goes to stdout, diagnostics
// to stderr. Exit codes: 0 SAT / 1 UNSAT / 2 UNKNOWN / 64 usage or input
// errors.

#include "expeq/bounds.hpp"
#include "expeq/json_io.hpp"
#include "expeq/problem.hpp"
#include "expeq/reduction.hpp"
#include "expeq/solver.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

constexpr int kExitSat = 0;
constexpr int kExitUnsat = 1;
constexpr int kExitUnknown = 2;
constexpr int kExitUsage = 64;

struct CommonArgs {
    std::string problem_path;
    std::string ledger_path;
    std::string bound_multiplier = "1";
    bool json = false;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct LoadedProblem {
    expeq::problem::ProblemFile file;
    expeq::bounds::ConstantsLedger ledger;
};

LoadedProblem load(const CommonArgs& args) {
    LoadedProblem lp;
    lp.file = expeq::problem::parse_problem(read_file(args.problem_path));
    lp.ledger = expeq::bounds::default_ledger(*lp.file.spec);
    if (!args.ledger_path.empty())
        expeq::bounds::ledger_apply_text(lp.ledger, read_file(args.ledger_path));
    for (const auto& [key, value] : lp.file.ledger_overrides)
        expeq::bounds::ledger_set(lp.ledger, key, value);
    if (args.bound_multiplier != "1") {
        mpq_class m(args.bound_multiplier);
        m.canonicalize();
        if (m <= 0) throw std::runtime_error("--bound-multiplier must be positive");
        lp.ledger.M *= m;
        lp.ledger.provenance["M"] = expeq::bounds::Provenance::UserConfigured;
        lp.ledger.validate();
    }
    return lp;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("problem", args.problem_path, "problem file")->required();
    cmd->add_option("--ledger", args.ledger_path, "constants ledger file (key = value lines)");
    cmd->add_option("--bound-multiplier", args.bound_multiplier,
                    "rational factor applied to the ledger constant M");
    cmd->add_flag("--json", args.json, "machine-readable output on stdout");
}

int run_solve(const CommonArgs& args, const expeq::solver::SolveOptions& opts,
              bool certified_off) {
    LoadedProblem lp = load(args);
    const expeq::solver::Verdict verdict =
        expeq::solver::solve(lp.file.equation, lp.ledger, opts);
    nlohmann::json out = expeq::jsonio::verdict_to_json(verdict);
    if (certified_off && verdict.status == expeq::solver::Verdict::Status::Unsat)
        out["caveat"] =
            "UNSAT is relative to the ledger-derived exponent bounds; its soundness "
            "depends on the configured constant M";
    if (args.json) {
        std::cout << out.dump(2) << "\n";
    } else {
        switch (verdict.status) {
            case expeq::solver::Verdict::Status::Sat: {
                std::cout << "SAT\n";
                for (const auto& [var, val] : verdict.certificate->assignment)
                    std::cout << "  " << var << " = " << val.get_str() << "\n";
                break;
            }
            case expeq::solver::Verdict::Status::Unsat:
                std::cout << "UNSAT (" << verdict.stats.branches
                          << " loxodromic branches exhausted)\n";
                if (certified_off) std::cout << "  caveat: " << out["caveat"].get<std::string>()
                                             << "\n";
                break;
            case expeq::solver::Verdict::Status::Unknown:
                std::cout << "UNKNOWN: " << verdict.reason << "\n";
                break;
        }
    }
    switch (verdict.status) {
        case expeq::solver::Verdict::Status::Sat: return kExitSat;
        case expeq::solver::Verdict::Status::Unsat: return kExitUnsat;
        case expeq::solver::Verdict::Status::Unknown: return kExitUnknown;
    }
    return kExitUnknown;
}

int run_reduce(const CommonArgs& args) {
    LoadedProblem lp = load(args);
    const expeq::reduction::DisjunctionPhi phi = expeq::reduction::reduce(lp.file.equation);
    if (args.json) {
        std::cout << expeq::jsonio::phi_to_json(phi).dump(2) << "\n";
    } else {
        std::cout << phi.branches.size() << " branch(es), " << phi.branches_pruned
                  << " pruned of " << phi.plans_enumerated << " plans\n";
        for (std::size_t i = 0; i < phi.branches.size(); ++i) {
            std::cout << "branch " << i << ":\n";
            for (const auto& pe : phi.branches[i].peripheral) {
                std::cout << "  over factor " << pe.factor << ": ";
                bool first = true;
                for (const auto& [var, coeff] : pe.row.terms) {
                    if (!first) std::cout << " + ";
                    std::cout << var << "*(";
                    for (std::size_t c = 0; c < coeff.coords.size(); ++c) {
                        if (c) std::cout << ",";
                        std::cout << coeff.coords[c].get_str();
                    }
                    std::cout << ")";
                    first = false;
                }
                std::cout << " + (";
                for (std::size_t c = 0; c < pe.row.constant.coords.size(); ++c) {
                    if (c) std::cout << ",";
                    std::cout << pe.row.constant.coords[c].get_str();
                }
                std::cout << ") = 0\n";
            }
        }
    }
    return phi.branches.empty() ? kExitUnsat : kExitSat;
}

int run_classify(const CommonArgs& args) {
    LoadedProblem lp = load(args);
    nlohmann::json out = nlohmann::json::array();
    auto describe = [&](const std::string& role, const std::string& var,
                        const expeq::freeprod::FreeProductElement& e) {
        const expeq::geometry::ElementType t = expeq::geometry::classify(e);
        nlohmann::json j;
        j["role"] = role;
        if (!var.empty()) j["variable"] = var;
        j["element"] = expeq::freeprod::print_element(e);
        j["rel_length"] = e.rel_length();
        j["y_length"] = expeq::freeprod::y_length(e).get_str();
        switch (t.kind) {
            case expeq::geometry::ElementKind::Trivial: j["type"] = "trivial"; break;
            case expeq::geometry::ElementKind::Parabolic: {
                j["type"] = "parabolic";
                j["factor"] =
                    lp.file.spec->factors()[static_cast<std::size_t>(t.factor)].name;
                j["witness"] = expeq::freeprod::print_element(t.witness);
                break;
            }
            case expeq::geometry::ElementKind::Loxodromic: {
                j["type"] = "loxodromic";
                j["stable_norm"] = expeq::geometry::stable_norm(e).get_str();
                break;
            }
        }
        out.push_back(std::move(j));
    };
    for (const expeq::EquationTerm& t : lp.file.equation.terms) {
        describe("coefficient", t.variable, t.coefficient);
        describe("base", t.variable, t.base);
    }
    if (args.json) {
        std::cout << out.dump(2) << "\n";
    } else {
        for (const auto& j : out) {
            std::cout << j["role"].get<std::string>() << " of " << j["variable"].get<std::string>()
                      << ": " << j["element"].get<std::string>() << " is "
                      << j["type"].get<std::string>();
            if (j.contains("witness"))
                std::cout << " (witness " << j["witness"].get<std::string>() << ")";
            std::cout << "\n";
        }
    }
    return kExitSat;
}

int run_bounds(const CommonArgs& args, bool refined) {
    LoadedProblem lp = load(args);
    const expeq::bounds::BoundReport rep =
        refined ? expeq::bounds::bound_refined(lp.file.equation, lp.ledger)
                : expeq::bounds::bound_simple(lp.file.equation, lp.ledger);
    if (args.json) {
        std::cout << expeq::jsonio::bound_report_to_json(rep).dump(2) << "\n";
    } else {
        if (rep.entries.empty()) std::cout << "no loxodromic bases; no exponent bounds\n";
        for (const expeq::bounds::BoundEntry& e : rep.entries)
            std::cout << "|" << e.variable << "| <= " << e.bound.get_str() << "\n";
    }
    return kExitSat;
}

int run_oracle(const CommonArgs& args, long radius) {
    LoadedProblem lp = load(args);
    const auto box = expeq::solver::uniform_box(lp.file.equation, radius);
    const auto solutions = expeq::solver::solve_brute(lp.file.equation, box);
    if (args.json) {
        nlohmann::json out;
        out["box_radius"] = radius;
        out["count"] = solutions.size();
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& s : solutions) arr.push_back(expeq::jsonio::assignment_to_json(s));
        out["solutions"] = arr;
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << solutions.size() << " solution(s) in the box [-" << radius << ", " << radius
                  << "]\n";
        for (const auto& s : solutions) {
            std::cout << "  ";
            bool first = true;
            for (const auto& [var, val] : s) {
                if (!first) std::cout << ", ";
                std::cout << var << " = " << val.get_str();
                first = false;
            }
            std::cout << "\n";
        }
    }
    return solutions.empty() ? kExitUnsat : kExitSat;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact solver for exponential equations over free products of "
                 "finitely generated abelian groups"};
    app.require_subcommand(1);

    CommonArgs solve_args, reduce_args, classify_args, bounds_args, oracle_args;
    expeq::solver::SolveOptions solve_opts;
    bool certified_off = false;
    bool bounds_refined = false;
    long oracle_radius = 10;
    long max_depth = -1;

    CLI::App* solve_cmd = app.add_subcommand("solve", "run the full decision pipeline");
    add_common(solve_cmd, solve_args);
    solve_cmd->add_option("--max-branches", solve_opts.max_branches,
                          "loxodromic branch budget (0 = unlimited)");
    solve_cmd->add_option("--max-depth", max_depth,
                          "cap on the exponent max-norm (-1 = ledger bounds only)");
    solve_cmd->add_option("--seed", solve_opts.seed,
                          "nonzero: shuffle branch order within each max-norm shell");
    solve_cmd->add_flag("--certified-off", certified_off,
                        "annotate UNSAT verdicts with the bound-validity caveat");

    CLI::App* reduce_cmd =
        app.add_subcommand("reduce", "print the peripheral disjunction of an "
                                     "all-parabolic equation");
    add_common(reduce_cmd, reduce_args);

    CLI::App* classify_cmd = app.add_subcommand("classify", "classify coefficients and bases");
    add_common(classify_cmd, classify_args);

    CLI::App* bounds_cmd = app.add_subcommand("bounds", "print per-variable exponent bounds");
    add_common(bounds_cmd, bounds_args);
    bounds_cmd->add_flag("--refined", bounds_refined,
                         "per-variable refined bound instead of the uniform one");

    CLI::App* oracle_cmd = app.add_subcommand("oracle", "exhaustive search in a box");
    add_common(oracle_cmd, oracle_args);
    oracle_cmd->add_option("--box", oracle_radius, "box radius (search [-B, B] per variable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*solve_cmd) {
            solve_opts.max_depth = max_depth;
            return run_solve(solve_args, solve_opts, certified_off);
        }
        if (*reduce_cmd) return run_reduce(reduce_args);
        if (*classify_cmd) return run_classify(classify_args);
        if (*bounds_cmd) return run_bounds(bounds_args, bounds_refined);
        if (*oracle_cmd) return run_oracle(oracle_args, oracle_radius);
    } catch (const expeq::problem::ParseError& e) {
        std::cerr << solve_args.problem_path << ":" << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
