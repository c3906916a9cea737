#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lps/expr.hpp"
#include "lps/jet.hpp"
#include "lps/symmetry.hpp"

namespace lps {

/// Change of variables (t, x, Ψ, Φ) → (t, v, ψ(v), φ(v)) with v = var_def(t, x).
/// Psi and Phi are written in t, v and the jets of psi, phi over v.
struct SimilarityTransform {
    std::string label;
    VectorField field;  // generator whose invariants define the transform
    std::string var;
    Expr var_def;  // v in terms of t, x
    Expr x_of;     // x in terms of t, v
    Expr Psi;
    Expr Phi;

    /// ∂v/∂t and ∂v/∂x rewritten in (t, v).
    Expr dvar_dt() const;
    Expr dvar_dx() const;
    /// Ψ_J or Φ_J by the chain rule D_x = v_x D_v, D_t = ∂_t + v_t D_v.
    Expr jet_image(const std::string& dep, const MultiIndex& J) const;
    /// η^A − ξ^i u^A_i evaluated on the transform, one per dependent variable.
    std::vector<Expr> invariant_surface() const;
    bool is_invariant() const;
};

/// Reduced ODE in one independent variable. pair holds the coupled
/// (φ″, φ = ψ″) form when there is one; scalar is the φ-free equation and rhs
/// its solved form ψ^(order) = rhs.
struct ReducedODE {
    std::string tag;
    std::string var;
    std::vector<Expr> pair;
    Expr scalar;
    Expr rhs;
    std::size_t order = 4;

    Expr top() const { return jet("psi", MultiIndex(order, var)); }
};

/// A printed form checked against the derived one.
struct PrintedCheck {
    std::string name;
    Expr printed;
    Expr derived;
    bool match = false;
    Expr factor;      // derived = factor · printed when they match
    Expr difference;  // derived − printed, expanded, when they do not
    std::string str() const;
};

struct NotReducible : std::runtime_error {
    NotReducible(const std::string& msg, Expr leftover) : std::runtime_error(msg), leftover(std::move(leftover)) {}
    Expr leftover;
};

struct Reduction {
    SimilarityTransform transform;
    ReducedODE ode;
    std::vector<Expr> factors;  // t-dependent factor pulled out of each PDE equation
    bool invariant = false;
    bool verified = false;      // every printed check matched and the PDE factors exactly
    std::vector<PrintedCheck> checks;
    std::string str() const;
};

SimilarityTransform travel_wave_transform(const Expr& c);
SimilarityTransform travel_wave_scaling_transform(const Expr& c, const Expr& beta);
SimilarityTransform powerlaw_transform(const Expr& P);
/// printed_sign selects Ψ = +ln t/P + ψ instead of the invariant −ln t/P + ψ.
SimilarityTransform exponential_transform(const Expr& P, bool printed_sign = false);

/// Substitutes the transform into every equation of sys and divides out the
/// t-dependent factor of each one, which is found from the expression itself.
/// Throws NotReducible when t survives the division.
std::vector<std::pair<Expr, Expr>> substitute_transform(const PDESystem& sys, const SimilarityTransform& T);

Reduction travel_wave_reduce(const PDESystem& sys, const Expr& c);
/// Linear potential only; throws std::invalid_argument for any other tag.
Reduction travel_wave_scaling_reduce(Potential pot, const Expr& alpha, const Expr& V0, const Expr& c, const Expr& beta);
/// Throws std::invalid_argument for P ∈ {0, −1}.
Reduction powerlaw_reduce(const Expr& P, const Expr& V0);
/// Throws std::invalid_argument for P = 0.
Reduction exponential_reduce(const Expr& P, const Expr& V0);
/// Runs the exponential reduction with the +ln t/P transform.
PrintedCheck exponential_printed_transform_check(const Expr& P, const Expr& V0);

/// Constant solution of the φ = 0 branch: (P V0)^(−1/P), or its logarithm for
/// the exponential potential.
Expr constant_solution(Potential pot, const Expr& P, const Expr& V0);
/// Reduced equation (eq. for φ″) evaluated on φ = 0, ψ = psi1·σ + psi0.
Expr phi_zero_residual(const Expr& P, const Expr& V0);

/// σ = e^τ with σ-jets replaced by (e^{−τ} D_τ)^k ψ̄.
ReducedODE log_transform(const ReducedODE& ode);
/// τ = ln σ with τ-jets replaced by (σ D_σ)^k ψ.
ReducedODE inverse_log_transform(const ReducedODE& ode);

/// Printed τ-forms, kept verbatim for the diagnostic.
Expr printed_tau_powerlaw(const Expr& P, const Expr& V0);
Expr printed_tau_exponential(const Expr& P, const Expr& V0);
/// Derived τ-equation of the power-law or exponential reduction with the printed
/// form compared against it.
PrintedCheck tau_form_check(Potential pot, const Expr& P, const Expr& V0);

/// Solution of the equation e = 0 for v when e is linear in v.
Expr solve_linear(const Expr& e, const Expr& v);
/// k with a = k·b and k free of jet variables, when one exists.
std::optional<Expr> proportional(const Expr& a, const Expr& b);
PrintedCheck compare_forms(const std::string& name, const Expr& printed, const Expr& derived);

/// ODE built from an equation given in the (psi, phi) jets over var.
ReducedODE make_ode(const std::string& tag, const std::string& var, std::vector<Expr> pair);
ReducedODE make_scalar_ode(const std::string& tag, const std::string& var, const Expr& scalar);

/// Coefficients a4…a0 of a linear constant-coefficient scalar ODE, highest first.
/// Throws std::invalid_argument when the equation is not of that type.
std::vector<Expr> characteristic_coefficients(const ReducedODE& ode);

}  // namespace lps
