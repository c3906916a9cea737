#pragma once

// Closed-form first and second prolongation coefficients, written out term by
// term from the textbook formulas with partial derivatives only. They serve
// as independent oracles for the recursive implementation.

#include <random>
#include <string>
#include <vector>

#include "lps/algebra.hpp"
#include "lps/jet.hpp"

namespace oracle {

using lps::Expr;

inline Expr u(const std::string& A, lps::MultiIndex J = {}) { return lps::jet(A, std::move(J)); }

inline Expr d(const Expr& e, const std::string& var) {
    if (var == "Psi" || var == "Phi") return lps::diff(e, lps::jet(var));
    return lps::diff(e, lps::indep(var));
}

inline const std::vector<std::string>& indeps() {
    static const std::vector<std::string> v{"t", "x"};
    return v;
}
inline const std::vector<std::string>& deps() {
    static const std::vector<std::string> v{"Psi", "Phi"};
    return v;
}

/// η_[i] = η_{,i} + u^B_{,i} η_{,B} − ξ^j_{,i} u_{,j} − u_{,j} u^B_{,i} ξ^j_{,B}.
/// With swapped = true the last term is taken as u_{,i} u^B_{,j} ξ^j_{,B}, the
/// alternative index placement; the two agree whenever ξ does not
/// depend on dependent variables other than u^A.
inline Expr first_order(const lps::VectorField& X, const std::string& A, const std::string& i, bool swapped = false) {
    Expr eta = X.eta_of(A);
    std::vector<Expr> t{d(eta, i)};
    for (const auto& B : deps()) t.push_back(u(B, {i}) * d(eta, B));
    for (const auto& j : indeps()) {
        Expr xi = X.xi_of(j);
        t.push_back(-d(xi, i) * u(A, {j}));
        for (const auto& B : deps()) {
            Expr cross = swapped ? u(A, {i}) * u(B, {j}) : u(A, {j}) * u(B, {i});
            t.push_back(-cross * d(xi, B));
        }
    }
    return lps::add(std::move(t));
}

/// Second-order closed form with round brackets read as symmetrisation of weight 1/2.
inline Expr second_order(const lps::VectorField& X, const std::string& A, const std::string& i, const std::string& j) {
    Expr eta = X.eta_of(A);
    std::vector<Expr> t{d(d(eta, i), j)};
    for (const auto& B : deps()) {
        t.push_back(d(d(eta, B), i) * u(B, {j}) + d(d(eta, B), j) * u(B, {i}));
        for (const auto& C : deps()) t.push_back(d(d(eta, B), C) * u(B, {i}) * u(C, {j}));
        t.push_back(d(eta, B) * u(B, {i, j}));
    }
    for (const auto& k : indeps()) {
        Expr xi = X.xi_of(k);
        Expr uk = u(A, {k});
        t.push_back(-d(d(xi, i), j) * uk);
        for (const auto& B : deps()) {
            t.push_back(-(d(d(xi, i), B) * u(B, {j}) + d(d(xi, j), B) * u(B, {i})) * uk);
            for (const auto& C : deps()) t.push_back(-d(d(xi, B), C) * u(B, {i}) * u(C, {j}) * uk);
            t.push_back(-d(xi, B) * (uk * u(B, {i, j}) + u(B, {j}) * u(A, {i, k}) + u(B, {i}) * u(A, {j, k})));
        }
        t.push_back(-(d(xi, j) * u(A, {i, k}) + d(xi, i) * u(A, {j, k})));
    }
    return lps::add(std::move(t));
}

/// Random polynomial of total degree ≤ 2 in (t, x, Ψ, Φ) with small integer coefficients.
inline Expr random_poly(std::mt19937_64& rng) {
    static const std::vector<Expr> vars{lps::indep("t"), lps::indep("x"), lps::jet("Psi"), lps::jet("Phi")};
    std::uniform_int_distribution<int> c(-3, 3), pick(0, 4);
    std::vector<Expr> terms{lps::num(c(rng))};
    for (int n = 0; n < 4; ++n) {
        Expr m = lps::num(c(rng));
        for (int k = 0; k < 2; ++k) {
            int v = pick(rng);
            if (v < 4) m = m * vars[static_cast<std::size_t>(v)];
        }
        terms.push_back(m);
    }
    return lps::add(std::move(terms));
}

inline lps::VectorField random_field(std::mt19937_64& rng) {
    lps::VectorField X;
    X.label = "random";
    X.xi["t"] = random_poly(rng);
    X.xi["x"] = random_poly(rng);
    X.eta["Psi"] = random_poly(rng);
    X.eta["Phi"] = random_poly(rng);
    return X;
}

}  // namespace oracle
