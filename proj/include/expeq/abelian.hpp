#pragma once

// Exact arithmetic in finitely generated abelian groups
//   Z^r x Z/m_1 x ... x Z/m_t
// and an exact solver for linear systems over such groups.
//
// All values are immutable after construction and all operations are pure,
// so everything here is safe to call from concurrent workers.

#include <gmpxx.h>

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace expeq::abelian {

using Int = mpz_class;

/// Shape of a finitely generated abelian group: free rank plus a list of
/// torsion moduli (each >= 2). Coordinates are stored free part first.
struct AbelianSignature {
    int free_rank = 0;
    std::vector<Int> torsion_moduli;

    int coord_count() const { return free_rank + static_cast<int>(torsion_moduli.size()); }

    void validate() const {
        if (free_rank < 0) throw std::invalid_argument("free rank must be nonnegative");
        for (const Int& m : torsion_moduli)
            if (m < 2) throw std::invalid_argument("torsion modulus must be >= 2");
    }

    bool operator==(const AbelianSignature&) const = default;
};

/// Element of the group described by `signature`. Free coordinates are
/// unbounded integers; torsion coordinate j is kept reduced into [0, m_j).
struct AbelianElement {
    AbelianSignature signature;
    std::vector<Int> coords;

    static AbelianElement identity(const AbelianSignature& sig) {
        AbelianElement e;
        e.signature = sig;
        e.coords.assign(static_cast<std::size_t>(sig.coord_count()), Int(0));
        return e;
    }

    /// Builds an element, reducing torsion coordinates.
    static AbelianElement from_coords(const AbelianSignature& sig, std::vector<Int> cs) {
        sig.validate();
        if (cs.size() != static_cast<std::size_t>(sig.coord_count()))
            throw std::invalid_argument("coordinate count does not match signature");
        AbelianElement e;
        e.signature = sig;
        e.coords = std::move(cs);
        e.reduce();
        return e;
    }

    bool is_identity() const {
        for (const Int& c : coords)
            if (c != 0) return false;
        return true;
    }

    bool operator==(const AbelianElement&) const = default;

private:
    void reduce() {
        for (std::size_t j = 0; j < signature.torsion_moduli.size(); ++j) {
            Int& c = coords[static_cast<std::size_t>(signature.free_rank) + j];
            const Int& m = signature.torsion_moduli[j];
            mpz_fdiv_r(c.get_mpz_t(), c.get_mpz_t(), m.get_mpz_t());
        }
    }

    friend AbelianElement ab_add(const AbelianElement&, const AbelianElement&);
    friend AbelianElement ab_neg(const AbelianElement&);
    friend AbelianElement ab_scale(const Int&, const AbelianElement&);
};

inline AbelianElement ab_add(const AbelianElement& u, const AbelianElement& v) {
    if (u.signature != v.signature)
        throw std::invalid_argument("ab_add: signature mismatch");
    AbelianElement r = u;
    for (std::size_t i = 0; i < r.coords.size(); ++i) r.coords[i] += v.coords[i];
    r.reduce();
    return r;
}

inline AbelianElement ab_neg(const AbelianElement& v) {
    AbelianElement r = v;
    for (Int& c : r.coords) c = -c;
    r.reduce();
    return r;
}

inline AbelianElement ab_scale(const Int& k, const AbelianElement& v) {
    AbelianElement r = v;
    for (Int& c : r.coords) c *= k;
    r.reduce();
    return r;
}

/// Order of an element: 1 for the identity, lcm of torsion orders when every
/// free coordinate vanishes, nullopt (infinite) otherwise.
inline std::optional<Int> element_order(const AbelianElement& v) {
    for (int i = 0; i < v.signature.free_rank; ++i)
        if (v.coords[static_cast<std::size_t>(i)] != 0) return std::nullopt;
    Int ord = 1;
    for (std::size_t j = 0; j < v.signature.torsion_moduli.size(); ++j) {
        const Int& m = v.signature.torsion_moduli[j];
        const Int& c = v.coords[static_cast<std::size_t>(v.signature.free_rank) + j];
        if (c == 0) continue;
        Int g;
        mpz_gcd(g.get_mpz_t(), c.get_mpz_t(), m.get_mpz_t());
        Int o = m / g;
        mpz_lcm(ord.get_mpz_t(), ord.get_mpz_t(), o.get_mpz_t());
    }
    return ord;
}

// ---------------------------------------------------------------------------
// Linear systems   constant + sum_i x_i * term_i = 0   in an abelian group.
// ---------------------------------------------------------------------------

struct DiophantineRow {
    AbelianElement constant;
    std::vector<std::pair<std::string, AbelianElement>> terms;  // (variable, coefficient)
};

struct DiophantineSystem {
    AbelianSignature signature;
    std::vector<DiophantineRow> rows;
};

/// Result of solve_diophantine. On SAT, the full solution set is
/// { particular + sum_i t_i * lattice[i] : t integer }, projected to the
/// named variables (torsion congruences are lifted internally with auxiliary
/// multiplier variables that never appear here). `witness` is the max-norm
/// minimizer among an enumerated candidate set, ties broken lexicographically.
struct SolutionSet {
    bool sat = false;
    std::vector<std::string> variables;
    std::map<std::string, Int> particular;
    std::vector<std::map<std::string, Int>> lattice;
    std::map<std::string, Int> witness;
};

struct WitnessOptions {
    long box_radius = 64;          // parameter range [-W, W] per lattice direction
    unsigned long candidate_cap = 200000;  // shrink the box if the grid would exceed this
};

namespace detail {

using Vec = std::vector<Int>;
using Mat = std::vector<Vec>;

// Row-style Hermite reduction of B with a unimodular row transform U,
// returning the pivot columns. Afterwards U * B_input = B (echelon, positive
// pivots, entries above each pivot reduced).
inline std::vector<std::size_t> hermite_rows(Mat& B, Mat& U) {
    const std::size_t nrows = B.size();
    const std::size_t ncols = nrows ? B[0].size() : 0;
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < ncols && r < nrows; ++c) {
        std::size_t piv = r;
        while (piv < nrows && B[piv][c] == 0) ++piv;
        if (piv == nrows) continue;
        std::swap(B[piv], B[r]);
        std::swap(U[piv], U[r]);
        for (std::size_t i = r + 1; i < nrows; ++i) {
            if (B[i][c] == 0) continue;
            Int a = B[r][c], b = B[i][c], g, p, q;
            mpz_gcdext(g.get_mpz_t(), p.get_mpz_t(), q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
            Int ag = a / g, bg = b / g;
            for (std::size_t k = 0; k < ncols; ++k) {
                Int br = B[r][k], bi = B[i][k];
                B[r][k] = p * br + q * bi;
                B[i][k] = ag * bi - bg * br;
            }
            for (std::size_t k = 0; k < nrows; ++k) {
                Int ur = U[r][k], ui = U[i][k];
                U[r][k] = p * ur + q * ui;
                U[i][k] = ag * ui - bg * ur;
            }
        }
        if (B[r][c] < 0) {
            for (Int& x : B[r]) x = -x;
            for (Int& x : U[r]) x = -x;
        }
        for (std::size_t i = 0; i < r; ++i) {
            Int q;
            mpz_fdiv_q(q.get_mpz_t(), B[i][c].get_mpz_t(), B[r][c].get_mpz_t());
            if (q == 0) continue;
            for (std::size_t k = 0; k < ncols; ++k) B[i][k] -= q * B[r][k];
            for (std::size_t k = 0; k < nrows; ++k) U[i][k] -= q * U[r][k];
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

struct LinearSolution {
    Vec particular;          // one solution of A x = b
    std::vector<Vec> basis;  // lattice basis of A x = 0
};

// Solves A x = b over the integers. A is n_eq x n_var.
inline std::optional<LinearSolution> solve_linear(const Mat& A, const Vec& b) {
    const std::size_t n_eq = A.size();
    const std::size_t n_var = n_eq ? A[0].size() : 0;
    if (n_var == 0) {
        for (const Int& x : b)
            if (x != 0) return std::nullopt;
        return LinearSolution{};
    }
    // Work on B = A^T so that solutions are x = U^T y with y^T (U A^T) = b^T.
    Mat B(n_var, Vec(n_eq, Int(0)));
    for (std::size_t i = 0; i < n_eq; ++i)
        for (std::size_t j = 0; j < n_var; ++j) B[j][i] = A[i][j];
    Mat U(n_var, Vec(n_var, Int(0)));
    for (std::size_t j = 0; j < n_var; ++j) U[j][j] = 1;

    const std::vector<std::size_t> pivots = hermite_rows(B, U);
    const std::size_t rank = pivots.size();

    Vec residual = b;
    Vec y(rank, Int(0));
    for (std::size_t i = 0; i < rank; ++i) {
        const Int& den = B[i][pivots[i]];
        Int q, rem;
        mpz_fdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), residual[pivots[i]].get_mpz_t(),
                    den.get_mpz_t());
        if (rem != 0) return std::nullopt;
        y[i] = q;
        if (q != 0)
            for (std::size_t k = 0; k < n_eq; ++k) residual[k] -= q * B[i][k];
    }
    for (const Int& x : residual)
        if (x != 0) return std::nullopt;

    LinearSolution sol;
    sol.particular.assign(n_var, Int(0));
    for (std::size_t i = 0; i < rank; ++i)
        for (std::size_t j = 0; j < n_var; ++j) sol.particular[j] += y[i] * U[i][j];
    for (std::size_t i = rank; i < n_var; ++i) sol.basis.push_back(U[i]);
    return sol;
}

}  // namespace detail

/// Exact solver. Torsion coordinates are lifted to plain integer equations by
/// adding one fresh multiplier variable per (row, torsion coordinate); the
/// combined system is solved by integer row reduction.
inline SolutionSet solve_diophantine(const DiophantineSystem& sys,
                                     const WitnessOptions& opts = {}) {
    sys.signature.validate();
    const int n_free = sys.signature.free_rank;
    const int n_tor = static_cast<int>(sys.signature.torsion_moduli.size());
    const int n_coord = n_free + n_tor;

    std::vector<std::string> vars;
    std::map<std::string, std::size_t> var_index;
    for (const DiophantineRow& row : sys.rows) {
        if (row.constant.signature != sys.signature)
            throw std::invalid_argument("solve_diophantine: row constant signature mismatch");
        for (const auto& [v, coeff] : row.terms) {
            if (coeff.signature != sys.signature)
                throw std::invalid_argument("solve_diophantine: term signature mismatch");
            if (!var_index.count(v)) {
                var_index[v] = vars.size();
                vars.push_back(v);
            }
        }
    }
    const std::size_t n_named = vars.size();
    const std::size_t n_aux = sys.rows.size() * static_cast<std::size_t>(n_tor);
    const std::size_t n_var = n_named + n_aux;

    detail::Mat A;
    detail::Vec b;
    for (std::size_t r = 0; r < sys.rows.size(); ++r) {
        const DiophantineRow& row = sys.rows[r];
        for (int c = 0; c < n_coord; ++c) {
            detail::Vec eq(n_var, Int(0));
            for (const auto& [v, coeff] : row.terms)
                eq[var_index[v]] += coeff.coords[static_cast<std::size_t>(c)];
            if (c >= n_free) {
                const std::size_t aux = n_named + r * static_cast<std::size_t>(n_tor) +
                                        static_cast<std::size_t>(c - n_free);
                eq[aux] = sys.signature.torsion_moduli[static_cast<std::size_t>(c - n_free)];
            }
            A.push_back(std::move(eq));
            b.push_back(-row.constant.coords[static_cast<std::size_t>(c)]);
        }
    }

    SolutionSet out;
    out.variables = vars;
    auto lin = detail::solve_linear(A, b);
    if (!lin) return out;
    out.sat = true;

    for (std::size_t j = 0; j < n_named; ++j) out.particular[vars[j]] = lin->particular[j];
    for (const detail::Vec& g : lin->basis) {
        std::map<std::string, Int> proj;
        bool nonzero = false;
        for (std::size_t j = 0; j < n_named; ++j) {
            proj[vars[j]] = g[j];
            if (g[j] != 0) nonzero = true;
        }
        if (nonzero) out.lattice.push_back(std::move(proj));
    }

    // Witness: scan the parameter grid [-W, W]^f, keep the assignment with the
    // smallest max-norm over the named variables, lexicographic tie-break.
    const std::size_t f = out.lattice.size();
    out.witness = out.particular;
    if (f > 0 && n_named > 0) {
        long W = opts.box_radius;
        while (W > 0) {
            double count = 1;
            for (std::size_t i = 0; i < f && count <= 2.0 * opts.candidate_cap; ++i)
                count *= 2.0 * W + 1.0;
            if (count <= opts.candidate_cap) break;
            --W;
        }
        std::vector<long> t(f, -W);
        std::vector<Int> best;
        Int best_norm(-1);
        auto consider = [&](const std::vector<long>& ts) {
            std::vector<Int> cand(n_named);
            for (std::size_t j = 0; j < n_named; ++j) cand[j] = lin->particular[j];
            // lattice[] is the projected basis; recompute from full vectors to
            // keep aux-only directions out of the norm.
            std::size_t bi = 0;
            for (const detail::Vec& g : lin->basis) {
                bool nonzero = false;
                for (std::size_t j = 0; j < n_named; ++j)
                    if (g[j] != 0) nonzero = true;
                if (!nonzero) continue;
                if (ts[bi] != 0)
                    for (std::size_t j = 0; j < n_named; ++j) cand[j] += ts[bi] * g[j];
                ++bi;
            }
            Int norm(0);
            for (const Int& x : cand) {
                Int a = abs(x);
                if (a > norm) norm = a;
            }
            if (best_norm < 0 || norm < best_norm || (norm == best_norm && cand < best)) {
                best_norm = norm;
                best = cand;
            }
        };
        if (W == 0) {
            consider(t);
        } else {
            while (true) {
                consider(t);
                std::size_t i = 0;
                while (i < f && t[i] == W) t[i++] = -W;
                if (i == f) break;
                ++t[i];
            }
        }
        for (std::size_t j = 0; j < n_named; ++j) out.witness[vars[j]] = best[j];
    }
    return out;
}

/// Substitutes an assignment into one row; exact group arithmetic.
inline AbelianElement substitute_row(const DiophantineRow& row,
                                     const std::map<std::string, Int>& assignment) {
    AbelianElement acc = row.constant;
    for (const auto& [v, coeff] : row.terms) {
        auto it = assignment.find(v);
        if (it == assignment.end())
            throw std::invalid_argument("substitute_row: missing variable " + v);
        acc = ab_add(acc, ab_scale(it->second, coeff));
    }
    return acc;
}

}  // namespace expeq::abelian
