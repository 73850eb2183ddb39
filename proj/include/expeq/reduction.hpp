#pragma once

// Rewrites an exponential equation whose bases are all parabolic (or trivial)
// into a finite disjunction of systems of abelian peripheral equations plus
// variable-free trivial checks.
//
// Pipeline: conjugate every base into its factor and absorb the conjugators
// into neighbouring coefficients (parabolic_rewrite), read the result as a
// cyclic word over the factor alphabet with variable letters, split it into
// maximal same-factor components, enumerate every complete non-crossing
// grouping of components into single-factor regions (enumerate_region_plans),
// and emit one branch per grouping: each region contributes one abelian
// equation, each complementary face contributes a variable-free word that
// must equal the identity (plan_to_system). Branches whose trivial checks
// fail are pruned.
//
// Internal region sides carry labels from a per-factor finite set. For free
// products the relative metric on a factor is 0 on the identity and infinite
// elsewhere (a lone factor syllable cannot be cancelled through the other
// factors), so the bounded-label set is the singleton {identity}; the label
// sets stay an explicit parameter so a backend with a richer relative metric
// can plug in unchanged.

#include "expeq/abelian.hpp"
#include "expeq/equation.hpp"
#include "expeq/geometry.hpp"

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace expeq::reduction {

using abelian::AbelianElement;
using abelian::Int;
using freeprod::FreeProductElement;
using freeprod::GroupSpecPtr;
using freeprod::Syllable;

/// Relative metric of a factor: distance from the identity to h through paths
/// avoiding the factor's own complete subgraph. 0 for the identity, infinite
/// (nullopt) otherwise.
inline std::optional<Int> relative_metric(int /*factor*/, const AbelianElement& h) {
    if (h.is_identity()) return Int(0);
    return std::nullopt;
}

/// Bounded-label set of a factor for a given search budget: every element at
/// finite relative distance within the budget. The budget is immaterial for
/// free products; the set is always {identity}.
inline std::vector<AbelianElement> bounded_label_set(const freeprod::GroupSpec& spec, int factor,
                                                     const Int& /*budget*/) {
    return {AbelianElement::identity(
        spec.factors()[static_cast<std::size_t>(factor)].signature)};
}

struct VariableLetter {
    std::string variable;
    AbelianElement base;  // nontrivial element of the factor
    int factor = -1;
};

using AnnotatedLetter = std::variant<Syllable, VariableLetter>;

inline int letter_factor(const AnnotatedLetter& l) {
    if (std::holds_alternative<Syllable>(l)) return std::get<Syllable>(l).factor;
    return std::get<VariableLetter>(l).factor;
}

/// Cyclic word equivalent to the equation's left-hand side for every
/// assignment: constants are syllables, each variable occurs as one letter
/// carrying its factor base.
struct AnnotatedWord {
    GroupSpecPtr spec;
    std::vector<AnnotatedLetter> letters;       // cyclic
    std::vector<std::string> freed_variables;   // trivial bases, assigned 0
};

namespace detail {

inline void append_constant(std::vector<AnnotatedLetter>& letters,
                            const FreeProductElement& c) {
    for (const Syllable& s : c.syllables()) letters.emplace_back(s);
}

}  // namespace detail

/// Conjugates every parabolic base into its factor, absorbing the conjugators
/// into neighbouring coefficients; trivial bases free their variables. The
/// result evaluates, for every assignment, to exactly the same group element
/// as the original left-hand side; runs that merge across the cyclic seam are
/// handled by decompose.
inline AnnotatedWord parabolic_rewrite(const ExponentialEquation& eq) {
    eq.validate();
    AnnotatedWord out;
    out.spec = eq.spec;
    FreeProductElement carry = FreeProductElement::identity(eq.spec);
    for (const EquationTerm& t : eq.terms) {
        const FreeProductElement coeff = multiply(carry, t.coefficient);
        const geometry::ElementType type = geometry::classify(t.base);
        switch (type.kind) {
            case geometry::ElementKind::Trivial:
                out.freed_variables.push_back(t.variable);
                carry = coeff;
                break;
            case geometry::ElementKind::Parabolic: {
                detail::append_constant(out.letters, multiply(coeff, type.witness));
                out.letters.emplace_back(
                    VariableLetter{t.variable, type.factor_element, type.factor});
                carry = invert(type.witness);
                break;
            }
            case geometry::ElementKind::Loxodromic:
                throw std::invalid_argument("parabolic_rewrite: loxodromic base for variable " +
                                            t.variable);
        }
    }
    detail::append_constant(out.letters, carry);
    return out;
}

/// Maximal same-factor run of the cyclic word. Components partition the word
/// (the relative generating set outside the factors is empty, so there are no
/// separator stretches); adjacent components always have distinct factors.
struct Component {
    int factor = -1;
    bool special = false;  // contains a variable letter
    AbelianElement constant_sum;
    std::vector<std::pair<std::string, AbelianElement>> vars;  // (variable, base)
};

struct ComponentDecomposition {
    AnnotatedWord word;
    std::vector<Component> components;  // cyclic order
};

inline ComponentDecomposition decompose(AnnotatedWord aw) {
    ComponentDecomposition dec;
    const std::size_t n = aw.letters.size();
    dec.word = std::move(aw);
    if (n == 0) return dec;
    const auto& letters = dec.word.letters;
    // Start at a run boundary; if all letters share one factor there is a
    // single component.
    std::size_t start = 0;
    bool boundary_found = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (letter_factor(letters[(i + n - 1) % n]) != letter_factor(letters[i])) {
            start = i;
            boundary_found = true;
            break;
        }
    }
    const freeprod::GroupSpec& spec = *dec.word.spec;
    auto new_component = [&](int factor) {
        Component c;
        c.factor = factor;
        c.constant_sum = AbelianElement::identity(
            spec.factors()[static_cast<std::size_t>(factor)].signature);
        return c;
    };
    Component current = new_component(letter_factor(letters[start]));
    for (std::size_t k = 0; k < n; ++k) {
        const AnnotatedLetter& l = letters[(start + k) % n];
        if (boundary_found && letter_factor(l) != current.factor) {
            dec.components.push_back(std::move(current));
            current = new_component(letter_factor(l));
        }
        if (std::holds_alternative<Syllable>(l)) {
            current.constant_sum =
                abelian::ab_add(current.constant_sum, std::get<Syllable>(l).value);
        } else {
            const VariableLetter& v = std::get<VariableLetter>(l);
            current.special = true;
            current.vars.emplace_back(v.variable, v.base);
        }
    }
    dec.components.push_back(std::move(current));
    return dec;
}

/// Single-factor group of components forming one region; members are listed
/// in ascending cyclic position, side_labels[j] labels the internal side from
/// members[j] to members[(j+1) % size].
struct RegionBlock {
    int factor = -1;
    std::vector<std::size_t> members;
    std::vector<AbelianElement> side_labels;
};

struct RegionPlan {
    std::vector<RegionBlock> blocks;
};

/// Per-factor label alphabet for internal sides.
using SideLabelSets = std::map<int, std::vector<AbelianElement>>;

inline SideLabelSets default_side_labels(const freeprod::GroupSpec& spec) {
    SideLabelSets out;
    for (std::size_t f = 0; f < spec.factors().size(); ++f)
        out[static_cast<int>(f)] = {AbelianElement::identity(spec.factors()[f].signature)};
    return out;
}

namespace detail {

inline bool blocks_cross(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                         std::size_t n) {
    // Cyclic interleaving test: a and b cross iff, walking the circle, the
    // membership pattern alternates a, b, a, b.
    std::vector<std::pair<std::size_t, int>> marks;
    for (std::size_t x : a) marks.emplace_back(x, 0);
    for (std::size_t x : b) marks.emplace_back(x, 1);
    std::sort(marks.begin(), marks.end());
    (void)n;
    // Count sign changes around the circle.
    int changes = 0;
    for (std::size_t i = 0; i < marks.size(); ++i)
        if (marks[i].second != marks[(i + 1) % marks.size()].second) ++changes;
    return changes >= 4;
}

// Incremental plan enumerator. Blocks acquire their members one at a time in
// cyclic walk order; the gap closed by each new internal side is processed
// recursively before the block grows further, so with `prune` set a subtree
// dies the moment a completed face fails its identity check. This keeps the
// interval recursion linear on words whose plain stretches cannot cancel,
// which is what the solver's branch loop produces. Every complete
// non-crossing plan is generated exactly once: the block of a stretch's first
// participating component drives the recursion, enclosed gaps recurse, and
// the tail continues at the same level.
struct PlanEnumerator {
    const ComponentDecomposition& dec;
    const SideLabelSets& labels;
    bool prune;
    const std::function<void(const RegionPlan&, const std::vector<FreeProductElement>&)>& emit;

    const std::vector<Component>& comps;
    std::size_t r;
    GroupSpecPtr spec;
    RegionPlan plan;
    std::vector<FreeProductElement> faces;
    std::size_t pruned_events = 0;

    PlanEnumerator(const ComponentDecomposition& d, const SideLabelSets& l, bool p,
                   const std::function<void(const RegionPlan&,
                                            const std::vector<FreeProductElement>&)>& e)
        : dec(d), labels(l), prune(p), emit(e), comps(d.components), r(d.components.size()),
          spec(d.word.spec) {}

    const std::vector<AbelianElement>& alphabet(int factor) const {
        auto it = labels.find(factor);
        if (it == labels.end() || it->second.empty())
            throw std::invalid_argument("enumerate_region_plans: missing side labels for factor");
        return it->second;
    }

    FreeProductElement component_label(std::size_t i) const {
        return freeprod::syllable_element(spec, comps[i].factor, comps[i].constant_sum);
    }

    FreeProductElement label_inverse(int factor, const AbelianElement& lab) const {
        return freeprod::syllable_element(spec, factor, abelian::ab_neg(lab));
    }

    bool face_ok(const FreeProductElement& f) {
        if (!prune || f.is_identity()) return true;
        ++pruned_events;
        return false;
    }

    void run() {
        bool any_special = false;
        for (const Component& c : comps) any_special = any_special || c.special;
        if (!any_special) {
            FreeProductElement whole = FreeProductElement::identity(spec);
            for (std::size_t i = 0; i < r; ++i) whole = multiply(whole, component_label(i));
            if (!face_ok(whole)) return;
            faces.push_back(std::move(whole));
            emit(plan, faces);
            faces.pop_back();
            return;
        }
        std::size_t s0 = 0;
        while (!comps[s0].special) ++s0;
        plan.blocks.push_back(RegionBlock{comps[s0].factor, {s0}, {}});
        cyclic_block(s0, 1);
        plan.blocks.pop_back();
    }

    // Grows the reference block (index 0, containing the first special). The
    // scan position is s0 + from (cyclic); closing consumes the rest of the
    // circle as the final gap and emits.
    void cyclic_block(std::size_t s0, std::size_t from) {
        // Close: the wrap side spans every remaining position.
        {
            std::vector<std::size_t> rest;
            for (std::size_t k = from; k < r; ++k) rest.push_back((s0 + k) % r);
            gap(rest, 0, FreeProductElement::identity(spec), [&](const FreeProductElement& w) {
                for (const AbelianElement& lab : alphabet(plan.blocks[0].factor)) {
                    const FreeProductElement face =
                        multiply(label_inverse(plan.blocks[0].factor, lab), w);
                    if (!face_ok(face)) continue;
                    plan.blocks[0].side_labels.push_back(lab);
                    faces.push_back(face);
                    emit_canonical();
                    faces.pop_back();
                    plan.blocks[0].side_labels.pop_back();
                }
            });
        }
        // Extend: pick the next member among same-factor positions.
        std::vector<std::size_t> between;
        for (std::size_t k = from; k < r; ++k) {
            const std::size_t p = (s0 + k) % r;
            if (comps[p].factor == plan.blocks[0].factor) {
                const std::size_t next_from = k + 1;
                gap(between, 0, FreeProductElement::identity(spec),
                    [&](const FreeProductElement& w) {
                        for (const AbelianElement& lab : alphabet(plan.blocks[0].factor)) {
                            const FreeProductElement face =
                                multiply(label_inverse(plan.blocks[0].factor, lab), w);
                            if (!face_ok(face)) continue;
                            plan.blocks[0].side_labels.push_back(lab);
                            plan.blocks[0].members.push_back(p);
                            faces.push_back(face);
                            cyclic_block(s0, next_from);
                            faces.pop_back();
                            plan.blocks[0].members.pop_back();
                            plan.blocks[0].side_labels.pop_back();
                        }
                    });
            }
            between.push_back(p);
        }
    }

    // Processes a linear stretch of positions; `k` receives the stretch's
    // depth-0 word (the face contribution seen by the enclosing side).
    void gap(const std::vector<std::size_t>& seq, std::size_t i, const FreeProductElement& word,
             const std::function<void(const FreeProductElement&)>& k) {
        if (i == seq.size()) {
            k(word);
            return;
        }
        const std::size_t c = seq[i];
        if (!comps[c].special) gap(seq, i + 1, multiply(word, component_label(c)), k);
        // A block through c needs a special member somewhere.
        bool reachable = comps[c].special;
        for (std::size_t j = i + 1; j < seq.size() && !reachable; ++j)
            if (comps[seq[j]].factor == comps[c].factor && comps[seq[j]].special)
                reachable = true;
        if (!reachable) return;
        plan.blocks.push_back(RegionBlock{comps[c].factor, {c}, {}});
        block_in_gap(plan.blocks.size() - 1, seq, i, i + 1, word, k);
        plan.blocks.pop_back();
    }

    // Grows block `bi` inside a linear stretch. The last selected member sits
    // at seq[last_i]; scanning resumes at `from`.
    void block_in_gap(std::size_t bi, const std::vector<std::size_t>& seq, std::size_t last_i,
                      std::size_t from, const FreeProductElement& word,
                      const std::function<void(const FreeProductElement&)>& k) {
        const int factor = plan.blocks[bi].factor;
        bool has_special = false;
        for (std::size_t m : plan.blocks[bi].members)
            has_special = has_special || comps[m].special;
        if (has_special) {
            // Close: the wrap side faces the enclosing stretch.
            for (const AbelianElement& lab : alphabet(factor)) {
                plan.blocks[bi].side_labels.push_back(lab);
                gap(seq, last_i + 1, multiply(word, label_inverse(factor, lab)), k);
                plan.blocks[bi].side_labels.pop_back();
            }
        }
        // Extend with a further member to the right.
        std::vector<std::size_t> between;
        for (std::size_t j = from; j < seq.size(); ++j) {
            const std::size_t p = seq[j];
            if (comps[p].factor == factor) {
                const std::size_t next_from = j + 1;
                gap(between, 0, FreeProductElement::identity(spec),
                    [&](const FreeProductElement& w) {
                        for (const AbelianElement& lab : alphabet(factor)) {
                            const FreeProductElement face =
                                multiply(label_inverse(factor, lab), w);
                            if (!face_ok(face)) continue;
                            plan.blocks[bi].side_labels.push_back(lab);
                            plan.blocks[bi].members.push_back(p);
                            faces.push_back(face);
                            block_in_gap(bi, seq, j, next_from, word, k);
                            faces.pop_back();
                            plan.blocks[bi].members.pop_back();
                            plan.blocks[bi].side_labels.pop_back();
                        }
                    });
            }
            between.push_back(p);
        }
    }

    // Canonical block form: members rotated to ascending positions, labels
    // rotated alongside (label j stays on the side members[j] -> members[j+1]).
    void emit_canonical() {
        RegionPlan canon = plan;
        for (RegionBlock& b : canon.blocks) {
            std::size_t k = 0;
            for (std::size_t i = 1; i < b.members.size(); ++i)
                if (b.members[i] < b.members[k]) k = i;
            std::rotate(b.members.begin(), b.members.begin() + static_cast<long>(k),
                        b.members.end());
            std::rotate(b.side_labels.begin(), b.side_labels.begin() + static_cast<long>(k),
                        b.side_labels.end());
        }
        emit(canon, faces);
    }
};

}  // namespace detail

/// Enumerates exactly the complete, admissible (pairwise non-crossing) region
/// plans of a decomposition, with internal-side labels drawn from the given
/// per-factor sets. Deterministic order; finite count.
inline void enumerate_region_plans(const ComponentDecomposition& dec,
                                   const SideLabelSets& side_labels,
                                   const std::function<void(const RegionPlan&)>& visit) {
    const std::function<void(const RegionPlan&, const std::vector<FreeProductElement>&)> emit =
        [&](const RegionPlan& plan, const std::vector<FreeProductElement>&) { visit(plan); };
    detail::PlanEnumerator en(dec, side_labels, /*prune=*/false, emit);
    en.run();
}

/// Materialized variant, mostly for tests.
inline std::vector<RegionPlan> region_plans(const ComponentDecomposition& dec,
                                            const SideLabelSets& side_labels) {
    std::vector<RegionPlan> out;
    enumerate_region_plans(dec, side_labels, [&](const RegionPlan& p) { out.push_back(p); });
    return out;
}

/// One branch of the disjunction: abelian peripheral equations (rows tagged
/// with their factor), variable-free trivial checks, and the per-branch
/// variable partition (variable -> index of the row it occurs in).
struct PeripheralEquation {
    int factor = -1;
    abelian::DiophantineRow row;
};

struct PhiBranch {
    std::vector<PeripheralEquation> peripheral;
    std::vector<FreeProductElement> trivial_checks;
    std::map<std::string, std::size_t> variable_map;
    RegionPlan plan;
};

struct DisjunctionPhi {
    GroupSpecPtr spec;
    std::vector<PhiBranch> branches;
    std::vector<std::string> freed_variables;
    std::size_t plans_enumerated = 0;
    std::size_t branches_pruned = 0;
};

/// Turns one region plan into a branch: per block, the abelian equation
/// sum(component labels) + sum(side labels) = 0 over the block's factor; per
/// complementary face, the variable-free boundary word as a trivial check.
inline PhiBranch plan_to_system(const RegionPlan& plan, const ComponentDecomposition& dec) {
    const std::vector<Component>& comps = dec.components;
    const std::size_t r = comps.size();
    const GroupSpecPtr& spec = dec.word.spec;
    const freeprod::GroupSpec& g = *spec;

    // Validate the plan: members in range, disjoint, single-factor blocks
    // that each contain a special, every special covered, pairwise
    // non-crossing, one label per member.
    std::vector<long> owner(r, -1);
    for (std::size_t bi = 0; bi < plan.blocks.size(); ++bi) {
        const RegionBlock& b = plan.blocks[bi];
        if (b.members.empty()) throw std::invalid_argument("plan: empty block");
        if (b.side_labels.size() != b.members.size())
            throw std::invalid_argument("plan: need one side label per member");
        bool has_special = false;
        for (std::size_t m : b.members) {
            if (m >= r) throw std::invalid_argument("plan: member out of range");
            if (owner[m] != -1) throw std::invalid_argument("plan: component in two blocks");
            owner[m] = static_cast<long>(bi);
            if (comps[m].factor != b.factor)
                throw std::invalid_argument("plan: block mixes factors");
            has_special = has_special || comps[m].special;
        }
        if (!has_special) throw std::invalid_argument("plan: block without a special component");
    }
    for (std::size_t i = 0; i < r; ++i)
        if (comps[i].special && owner[i] == -1)
            throw std::invalid_argument("plan: special component left uncovered");
    for (std::size_t i = 0; i < plan.blocks.size(); ++i)
        for (std::size_t j = i + 1; j < plan.blocks.size(); ++j)
            if (detail::blocks_cross(plan.blocks[i].members, plan.blocks[j].members, r))
                throw std::invalid_argument("plan: crossing blocks");

    PhiBranch out;
    out.plan = plan;

    for (const RegionBlock& b : plan.blocks) {
        PeripheralEquation pe;
        pe.factor = b.factor;
        AbelianElement constant = AbelianElement::identity(
            g.factors()[static_cast<std::size_t>(b.factor)].signature);
        for (std::size_t m : b.members) {
            constant = abelian::ab_add(constant, comps[m].constant_sum);
            for (const auto& [var, base] : comps[m].vars) {
                pe.row.terms.emplace_back(var, base);
                out.variable_map[var] = out.peripheral.size();
            }
        }
        for (const AbelianElement& lab : b.side_labels) constant = abelian::ab_add(constant, lab);
        pe.row.constant = std::move(constant);
        out.peripheral.push_back(std::move(pe));
    }

    auto component_label = [&](std::size_t i) {
        return freeprod::syllable_element(spec, comps[i].factor, comps[i].constant_sum);
    };
    auto side_label_inverse = [&](const RegionBlock& b, std::size_t chord_index) {
        return freeprod::syllable_element(spec, b.factor,
                                          abelian::ab_neg(b.side_labels[chord_index]));
    };

    if (plan.blocks.empty()) {
        FreeProductElement face = FreeProductElement::identity(spec);
        for (std::size_t i = 0; i < r; ++i) face = multiply(face, component_label(i));
        out.trivial_checks.push_back(std::move(face));
        return out;
    }

    // Faces. Walk the gaps of the block containing the smallest member; each
    // nested block inside a gap shows the gap its closing side and opens its
    // own inner gaps recursively.
    std::size_t p0 = r;
    long ref_block = -1;
    for (std::size_t bi = 0; bi < plan.blocks.size(); ++bi)
        for (std::size_t m : plan.blocks[bi].members)
            if (m < p0) {
                p0 = m;
                ref_block = static_cast<long>(bi);
            }
    const RegionBlock& b0 = plan.blocks[static_cast<std::size_t>(ref_block)];
    std::vector<bool> visited_block(plan.blocks.size(), false);
    visited_block[static_cast<std::size_t>(ref_block)] = true;

    std::function<FreeProductElement(const std::vector<std::size_t>&)> walk_gap =
        [&](const std::vector<std::size_t>& gap) -> FreeProductElement {
        FreeProductElement word = FreeProductElement::identity(spec);
        std::map<std::size_t, std::size_t> offset;
        for (std::size_t i = 0; i < gap.size(); ++i) offset[gap[i]] = i;
        std::size_t i = 0;
        while (i < gap.size()) {
            const std::size_t pos = gap[i];
            if (owner[pos] == -1) {
                word = multiply(word, component_label(pos));
                ++i;
                continue;
            }
            const std::size_t bi = static_cast<std::size_t>(owner[pos]);
            const RegionBlock& b = plan.blocks[bi];
            if (visited_block[bi]) throw std::logic_error("plan: block revisited in face walk");
            visited_block[bi] = true;
            // Encounter order: rotate the ascending member list so it starts
            // at `pos`; the closing side (from the last encountered member
            // back to `pos`) faces this gap.
            std::size_t f = 0;
            while (plan.blocks[bi].members[f] != pos) ++f;
            const std::size_t t = b.members.size();
            for (std::size_t k = 0; k + 1 < t; ++k) {
                const std::size_t from = b.members[(f + k) % t];
                const std::size_t to = b.members[(f + k + 1) % t];
                auto it_from = offset.find(from);
                auto it_to = offset.find(to);
                if (it_from == offset.end() || it_to == offset.end())
                    throw std::invalid_argument("plan: block escapes its enclosing gap");
                std::vector<std::size_t> inner(gap.begin() + static_cast<long>(it_from->second) + 1,
                                               gap.begin() + static_cast<long>(it_to->second));
                FreeProductElement inner_word = walk_gap(inner);
                out.trivial_checks.push_back(
                    multiply(side_label_inverse(b, (f + k) % t), inner_word));
            }
            word = multiply(word, side_label_inverse(b, (f + t - 1) % t));
            const std::size_t last = b.members[(f + t - 1) % t];
            i = offset.at(last) + 1;
        }
        return word;
    };

    const std::size_t t0 = b0.members.size();
    for (std::size_t j = 0; j < t0; ++j) {
        const std::size_t from = b0.members[j];
        const std::size_t to = b0.members[(j + 1) % t0];
        std::vector<std::size_t> gap;
        for (std::size_t p = (from + 1) % r; p != to; p = (p + 1) % r) gap.push_back(p);
        FreeProductElement gap_word = walk_gap(gap);
        out.trivial_checks.push_back(multiply(side_label_inverse(b0, j), gap_word));
    }
    for (bool v : visited_block)
        if (!v) throw std::invalid_argument("plan: dangling block never reached by a face walk");
    return out;
}

/// Full reduction. Branches whose trivial checks fail are removed (the
/// enumeration prunes a subtree as soon as one completed face fails, which is
/// what keeps the branch loop of the solver fast); the surviving disjunction
/// is equisolvable with the input equation, branch solutions extend to
/// solutions of the input (extend_phi_solution in the solver), and within
/// each branch distinct peripheral equations have disjoint variables.
inline DisjunctionPhi reduce(const ExponentialEquation& eq,
                             const std::optional<SideLabelSets>& side_labels = std::nullopt) {
    AnnotatedWord aw = parabolic_rewrite(eq);
    DisjunctionPhi phi;
    phi.spec = eq.spec;
    phi.freed_variables = aw.freed_variables;
    ComponentDecomposition dec = decompose(std::move(aw));
    const SideLabelSets labels =
        side_labels ? *side_labels : default_side_labels(*eq.spec);
    const std::function<void(const RegionPlan&, const std::vector<FreeProductElement>&)> emit =
        [&](const RegionPlan& plan, const std::vector<FreeProductElement>& faces) {
            PhiBranch branch;
            branch.plan = plan;
            branch.trivial_checks = faces;
            for (const RegionBlock& b : plan.blocks) {
                PeripheralEquation pe;
                pe.factor = b.factor;
                AbelianElement constant = AbelianElement::identity(
                    eq.spec->factors()[static_cast<std::size_t>(b.factor)].signature);
                for (std::size_t m : b.members) {
                    constant = abelian::ab_add(constant, dec.components[m].constant_sum);
                    for (const auto& [var, base] : dec.components[m].vars) {
                        pe.row.terms.emplace_back(var, base);
                        branch.variable_map[var] = branch.peripheral.size();
                    }
                }
                for (const AbelianElement& lab : b.side_labels)
                    constant = abelian::ab_add(constant, lab);
                pe.row.constant = std::move(constant);
                branch.peripheral.push_back(std::move(pe));
            }
            phi.branches.push_back(std::move(branch));
        };
    detail::PlanEnumerator en(dec, labels, /*prune=*/true, emit);
    en.run();
    phi.branches_pruned = en.pruned_events;
    phi.plans_enumerated = phi.branches.size() + en.pruned_events;
    return phi;
}

}  // namespace expeq::reduction
