#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lps/expr.hpp"
#include "lps/reduction.hpp"
#include "lps/symmetry.hpp"

namespace lps {

// ---- one-sided limits ------------------------------------------------------

struct LimitUndefined : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Limit {
    enum Kind { Finite, PlusInf, MinusInf } kind = Finite;
    Expr value;
    bool finite() const { return kind == Finite; }
    std::string str() const;
};

enum class Approach { MinusInf, PlusInf, ZeroPlus, OneMinus };

struct LimitOptions {
    /// Parameters assumed strictly positive when a sign is needed.
    std::set<std::string> positive{"P", "V0", "c1", "eps"};
};

/// Limit of e as var tends to the given end. The variable is rewritten through
/// w → 0⁺ (τ = ±ln w, s = w or 1 − w) and the limit is taken term by term;
/// bases that tend to zero are taken to approach from above.
/// Throws LimitUndefined on indeterminate forms or unknown signs.
Limit limit(const Expr& e, const std::string& var, Approach to, const LimitOptions& opt = {});

/// Sign of e from numeric values and the positivity assumptions, if decidable.
std::optional<int> sign_of(const Expr& e, const LimitOptions& opt = {});

// ---- τ-equations -----------------------------------------------------------

/// Derived equation of the similarity reduction in τ = ln σ.
ReducedODE tau_equation(Potential pot, const Expr& P, const Expr& V0);

/// τ → +∞ drops every e^{−4τ}-weighted term; τ → −∞ keeps only those and
/// divides the weight out.
ReducedODE asymptotic_equation(const ReducedODE& tau_ode, Approach end);

/// eq with ψ and its var-derivatives replaced by sol and its derivatives.
Expr substitute_solution(const Expr& eq, const std::string& dep, const std::string& var, const Expr& sol);

// ---- branches --------------------------------------------------------------

struct AsymptoticBranch {
    enum Side { Plus, Minus } side = Plus;
    Potential potential = Potential::PowerLaw;
    Expr P, V0;
    std::vector<Expr> constants;  // c1 for the plus branch, c2…c5 for the minus branch
    Expr expr;                    // closed form in tau
    Expr residual;                // in its asymptotic equation
    bool exact = false;           // residual vanished exactly
    bool conditional = false;     // only where the base P V0 + c1 e^{4τ} is positive
};

/// (P V0 + c1 e^{4τ})^{−1/P}, or ln((P V0 + e^{4τ + c1 P})^{−1/P}) for the
/// exponential potential. Throws DomainError when the base is non-positive
/// for every τ.
AsymptoticBranch plus_branch(Potential pot, const Expr& P, const Expr& V0, const Expr& c1);
/// c2 e^τ + c3 e^{2τ}/2 + c4 e^{3τ}/3 + c5.
AsymptoticBranch minus_branch(Potential pot, const Expr& P, const Expr& V0, const Expr& c2, const Expr& c3,
                              const Expr& c4, const Expr& c5);

/// c1 ψ̄₊^P/(1 − P V0 ψ̄₊^P) − e^{−4τ}; zero for the power-law branch.
Expr first_integral_residual(const AsymptoticBranch& plus);
/// The residual above vanishes, where the base is positive for a conditional branch.
bool first_integral_holds(const AsymptoticBranch& plus);
/// Exact zero test of r on the region where the plus-branch base is positive.
/// r depends on the parameter c1 through that base, with τ = tau_of.
bool zero_where_base_positive(const Expr& r, Potential pot, const Expr& P, const Expr& V0, const Expr& tau_of);
/// z₊ = ψ̄₊^P/(1 − P V0 ψ̄₊^P), simplified.
Expr z_plus(const AsymptoticBranch& plus);
/// Sign of dz₊/dτ when decidable.
std::optional<int> z_plus_slope_sign(const AsymptoticBranch& plus, const LimitOptions& opt = {});

/// Residual of the branch in the full derived τ-equation.
Expr full_residual(const AsymptoticBranch& b);

/// Limit of the full τ-equation evaluated on ψ̄₋ as τ → −∞, as an expression in
/// the parameter c5.
Expr compatibility_condition(Potential pot, const Expr& P, const Expr& V0);
/// Roots of the compatibility condition, each checked exactly.
std::vector<Expr> compatibility_roots(Potential pot, const Expr& P, const Expr& V0);

struct MatchResult {
    bool match = false;
    Limit plus;
    Limit minus;
    std::string note;
    std::string str() const;
};

/// τ → −∞ limits of both branches and whether they agree exactly.
MatchResult matching_check(const AsymptoticBranch& plus, const AsymptoticBranch& minus, const LimitOptions& opt = {});

// ---- s-map and layers ------------------------------------------------------

/// τ = −arctanh(1 − 2s), with e^{kτ} rewritten as (s/(1 − s))^{k/2}.
Expr s_reformulate(const Expr& in_tau);
/// Printed Φ₋(s) and Φ₊(s).
Expr printed_phi_minus(Potential pot, const Expr& P, const Expr& V0);
Expr printed_phi_plus(const Expr& P, const Expr& V0);

/// Equation in tau rewritten for Φ(v) with dv/dτ = rate(v); used for the
/// stretched variables.
Expr stretch(const Expr& eq_in_tau, const std::string& var, const Expr& rate, const Expr& tau_of);

/// The τ → −∞ equation in κ = (tanh τ + 1)/(2ε), derived by the chain rule.
Expr kappa_layer_equation();
Expr kappa_layer_printed();
/// The τ → +∞ equation in λ = (1 − tanh τ)/(2ε).
Expr lambda_layer_equation(Potential pot, const Expr& P, const Expr& V0);
Expr lambda_layer_printed(const Expr& P, const Expr& V0);

/// Φ₋ written in κ with s = κε.
Expr zeta0(Potential pot, const Expr& P, const Expr& V0);
/// ψ̄₊ written in λ with τ = arctanh(1 − 2λε).
Expr eta0(Potential pot, const Expr& P, const Expr& V0);

/// Coefficient of eps^order in a layer equation polynomial in eps. Throws
/// std::invalid_argument for orders above the degree.
Expr epsilon_split(const Expr& layer_eq, int order);

struct LayerExpansion {
    std::string side = "kappa";
    Expr order0;  // Φ₀
    Expr order1;  // Φ₁
    Expr eps = param("eps");
};

LayerExpansion inner_expansion();
/// O(1) residual L0 Φ₀ and O(ε) residual L0 Φ₁ + L1 Φ₀ of the κ-layer equation.
std::pair<Expr, Expr> expansion_residuals(const LayerExpansion& ex);
/// The printed O(ε) equation 60 d2 √κ + 6 d4 − 4κ²Φ₁⁗ − 12κΦ₁‴ − 3Φ₁″ evaluated on Φ₁.
Expr printed_order1_residual(const Expr& phi1);

}  // namespace lps
