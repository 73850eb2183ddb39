#pragma once

// JSON views of the solver's public artifacts: verdicts, disjunctions,
// bound reports, classifications, and oracle runs. Big integers are encoded
// as decimal strings.

#include "expeq/bounds.hpp"
#include "expeq/problem.hpp"
#include "expeq/reduction.hpp"
#include "expeq/solver.hpp"

#include <json.hpp>

#include <map>
#include <string>

namespace expeq::jsonio {

using nlohmann::json;

inline json assignment_to_json(const std::map<std::string, abelian::Int>& a) {
    json out = json::object();
    for (const auto& [k, v] : a) out[k] = v.get_str();
    return out;
}

inline json element_to_json(const freeprod::FreeProductElement& e) {
    return freeprod::print_element(e);
}

inline json abelian_to_json(const abelian::AbelianElement& e) {
    json coords = json::array();
    for (const abelian::Int& c : e.coords) coords.push_back(c.get_str());
    return coords;
}

inline json ledger_to_json(const bounds::ConstantsLedger& lg) {
    auto prov = [&](const std::string& key) {
        auto it = lg.provenance.find(key);
        return (it != lg.provenance.end() && it->second == bounds::Provenance::UserConfigured)
                   ? "user-configured"
                   : "derived-default";
    };
    json out;
    out["delta"] = lg.delta.get_str();
    out["kappa"] = lg.kappa.get_str();
    out["epsilon"] = lg.epsilon.get_str();
    out["L"] = lg.L.get_str();
    out["inj"] = lg.inj.get_str();
    out["C"] = lg.C_kappa_eps.get_str();
    out["f"] = {{"slope", lg.f.slope.get_str()}, {"intercept", lg.f.intercept.get_str()}};
    out["F"] = {{"slope", lg.F.slope.get_str()}, {"intercept", lg.F.intercept.get_str()}};
    out["M"] = lg.M.get_str();
    json provenance = json::object();
    for (const char* key : {"delta", "kappa", "epsilon", "L", "inj", "C", "f", "F", "M"})
        provenance[key] = prov(key);
    out["provenance"] = provenance;
    return out;
}

inline json bound_report_to_json(const bounds::BoundReport& rep) {
    json out;
    out["n"] = rep.n.get_str();
    out["total_coefficient_length"] = rep.total_coefficient_length.get_str();
    out["total_base_length"] = rep.total_base_length.get_str();
    json entries = json::array();
    for (const bounds::BoundEntry& e : rep.entries) {
        entries.push_back({{"variable", e.variable},
                           {"bound", e.bound.get_str()},
                           {"trace",
                            {{"n_squared", e.n_squared.get_str()},
                             {"coefficient_sum", e.coefficient_sum.get_str()},
                             {"noncommensurable_sum", e.noncommensurable_sum.get_str()},
                             {"commensurable_sum", e.commensurable_sum.get_str()}}}});
    }
    out["per_variable"] = entries;
    out["ledger"] = ledger_to_json(rep.ledger);
    return out;
}

inline json phi_to_json(const reduction::DisjunctionPhi& phi) {
    json branches = json::array();
    for (const reduction::PhiBranch& b : phi.branches) {
        json rows = json::array();
        for (const reduction::PeripheralEquation& pe : b.peripheral) {
            json terms = json::array();
            for (const auto& [var, coeff] : pe.row.terms)
                terms.push_back({{"variable", var}, {"coefficient", abelian_to_json(coeff)}});
            rows.push_back({{"factor", pe.factor},
                            {"constant", abelian_to_json(pe.row.constant)},
                            {"terms", terms}});
        }
        json checks = json::array();
        for (const freeprod::FreeProductElement& w : b.trivial_checks)
            checks.push_back(element_to_json(w));
        json vmap = json::object();
        for (const auto& [var, idx] : b.variable_map) vmap[var] = idx;
        branches.push_back({{"peripheral_rows", rows},
                            {"trivial_checks", checks},
                            {"variable_map", vmap}});
    }
    return json{{"branches", branches},
                {"freed_variables", phi.freed_variables},
                {"plans_enumerated", phi.plans_enumerated},
                {"branches_pruned", phi.branches_pruned}};
}

inline json verdict_to_json(const solver::Verdict& v) {
    json out;
    switch (v.status) {
        case solver::Verdict::Status::Sat: out["status"] = "SAT"; break;
        case solver::Verdict::Status::Unsat: out["status"] = "UNSAT"; break;
        case solver::Verdict::Status::Unknown: out["status"] = "UNKNOWN"; break;
    }
    if (v.certificate) {
        out["assignment"] = assignment_to_json(v.certificate->assignment);
        out["branch_trace"] = {
            {"loxodromic", assignment_to_json(v.certificate->trace.loxodromic)},
            {"phi_branch", v.certificate->trace.phi_branch},
            {"peripheral", assignment_to_json(v.certificate->trace.peripheral)},
            {"freed", v.certificate->trace.freed}};
        out["verified"] = v.certificate->verified;
    }
    if (v.bound_report) {
        json bounds_json = json::object();
        for (const bounds::BoundEntry& e : v.bound_report->entries)
            bounds_json[e.variable] = e.bound.get_str();
        out["bounds"] = bounds_json;
    }
    if (!v.reason.empty()) out["reason"] = v.reason;
    out["stats"] = {{"branches", v.stats.branches},
                    {"phi_branches", v.stats.phi_branches},
                    {"diophantine_calls", v.stats.diophantine_calls},
                    {"wall_time_ms", v.stats.wall_ms}};
    return out;
}

}  // namespace expeq::jsonio
