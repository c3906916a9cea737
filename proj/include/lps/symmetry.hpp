#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lps/expr.hpp"
#include "lps/jet.hpp"

namespace lps {

enum class Potential { Arbitrary, Zero, Linear, PowerLaw, Exponential };

const char* potential_name(Potential p);

/// Potential V(u) for the tag; Arbitrary is the opaque function V(u).
Expr potential_expr(Potential p, const Expr& u, const Expr& V0, const Expr& P);

/// Equations in solved form. Rules are applied in order by restrict(); the
/// original H_a = 0 forms are kept for the symmetry condition.
struct PDESystem {
    JetSpace space;
    std::vector<std::pair<Expr, Expr>> rules;  // (leading jet, right-hand side)
    std::vector<Expr> equations;
    Potential potential = Potential::Arbitrary;
    Expr alpha, V0, P;
    std::size_t order = 2;
};

/// Ψ_t + Φ_xx + αΦ + V(Ψ) = 0, Φ − Ψ_xx = 0.
PDESystem schrodinger_poisson(Potential pot, const Expr& alpha, const Expr& V0, const Expr& P);
/// Ψ_t + Ψ_xxxx + αΨ_xx + V(Ψ) = 0.
PDESystem scalar_fourth_order(Potential pot, const Expr& alpha, const Expr& V0, const Expr& P);

struct NonTerminating : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Replaces every leading jet, and every derivative of one, by the matching
/// total derivative of its right-hand side until none remain.
Expr restrict(const Expr& e, const PDESystem& sys);

struct SymmetryReport {
    std::string label;
    std::string case_name;
    std::vector<Expr> residuals;  // one per equation, after restriction
    bool exact_zero = false;
    bool numeric = false;     // some residual was only tested numerically
    double max_numeric = 0.0;
    std::string str() const;
};

SymmetryReport is_symmetry(const VectorField& X, const PDESystem& sys, std::size_t order);

/// ξ^i and η^Ψ free of Φ: a point transformation of {t, x, Ψ}.
bool is_point_in_psi(const VectorField& X);

enum class Case { T1, I, II, III, IV, V };

std::optional<Case> parse_case(const std::string& s);
const char* case_name(Case c);

struct CaseParams {
    Expr alpha = param("alpha");
    Expr V0 = param("V0");
    Expr P = param("P");
};

/// Throws std::invalid_argument when the parameters violate the case.
void check_case(Case c, const CaseParams& p);
/// The system the case applies to (α forced to 0 for II–V).
PDESystem case_system(Case c, const CaseParams& p, bool scalar = false);
/// Basis generators of the case, without the superposition family.
std::vector<VectorField> catalog(Case c, const CaseParams& p);

/// Drops the Φ component and pushes Φ → Ψ_xx through the remaining ones.
VectorField to_scalar_field(const VectorField& X);

/// F ∂Ψ + F_xx ∂Φ.
VectorField superposition_field(const Expr& F);
SymmetryReport verify_superposition(const PDESystem& sys, const Expr& F);
/// Built-in solutions of the linear systems: polynomial, exponential, separable.
std::vector<Expr> superposition_witnesses(Case c, const CaseParams& p);

/// Coefficients of the restricted symmetry condition split by monomials in
/// the jet variables; not solved.
std::vector<Expr> determining_equations(const PDESystem& sys, const VectorField& ansatz);

}  // namespace lps
