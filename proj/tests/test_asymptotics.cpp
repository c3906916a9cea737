#include <catch_amalgamated.hpp>

#include <cmath>

#include "lps/algebra.hpp"
#include "lps/asymptotics.hpp"
#include "lps/parse.hpp"

using namespace lps;

namespace {
Expr P(const char* s) { return parse(s); }
Expr p(const char* n) { return param(n); }
}  // namespace

TEST_CASE("limits through w") {
    CHECK(limit(P("exp(tau)"), "tau", Approach::MinusInf).value.is_zero());
    CHECK(limit(P("exp(tau)"), "tau", Approach::PlusInf).kind == Limit::PlusInf);
    CHECK(limit(P("(1 + exp(4*tau))^(-1)"), "tau", Approach::PlusInf).value.is_zero());
    CHECK(limit(P("(1 + exp(4*tau))^(-1)"), "tau", Approach::MinusInf).value.is_one());
    CHECK(limit(P("tau"), "tau", Approach::MinusInf).kind == Limit::MinusInf);
    CHECK(limit(P("s/(1 - s)"), "s", Approach::OneMinus).kind == Limit::PlusInf);
    CHECK(limit(P("s^(1/2)/s"), "s", Approach::ZeroPlus).kind == Limit::PlusInf);
    CHECK(limit(P("exp(tau) - exp(2*tau)"), "tau", Approach::PlusInf).kind == Limit::MinusInf);
    CHECK(limit(P("exp(tau) - exp(tau)*(1 + tau)"), "tau", Approach::PlusInf).kind == Limit::MinusInf);
    CHECK_THROWS_AS(limit(P("alpha*exp(tau)"), "tau", Approach::PlusInf), LimitUndefined);
    // oracle: e^{2τ}(1 + e^{-2τ}) − e^{2τ} = 1 once expanded
    CHECK(limit(P("exp(2*tau)*(1 + exp(-2*tau)) - exp(2*tau)"), "tau", Approach::PlusInf).value.is_one());
}

TEST_CASE("sign decisions") {
    CHECK(sign_of(P("-4*exp(-4*tau)/c1")) == -1);
    CHECK(sign_of(P("P*V0 + 2")) == 1);
    CHECK_FALSE(sign_of(P("alpha")).has_value());
    LimitOptions none;
    none.positive.clear();
    CHECK_FALSE(sign_of(P("c1"), none).has_value());
}

TEST_CASE("asymptotic equations of the tau-form") {
    auto tau_pl = tau_equation(Potential::PowerLaw, p("P"), p("V0"));
    auto plus = asymptotic_equation(tau_pl, Approach::PlusInf);
    CHECK(equal(plus.scalar, P("psi*(P*V0*psi^P - 1)/P - u[psi; tau]/4")));
    CHECK(plus.order == 1);
    auto minus = asymptotic_equation(tau_pl, Approach::MinusInf);
    Expr minus_eq = P("-6*u[psi; tau] + 11*u[psi; tau,tau] - 6*u[psi; tau,tau,tau] + u[psi; tau,tau,tau,tau]");
    CHECK(minus.scalar == expand(minus_eq));

    auto tau_ex = tau_equation(Potential::Exponential, p("P"), p("V0"));
    CHECK(equal(asymptotic_equation(tau_ex, Approach::PlusInf).scalar, P("V0*exp(P*psi) - 1/P - u[psi; tau]/4")));
    CHECK(asymptotic_equation(tau_ex, Approach::MinusInf).scalar == expand(minus_eq));
    CHECK(equal(minus.rhs, P("6*u[psi; tau] - 11*u[psi; tau,tau] + 6*u[psi; tau,tau,tau]")));
    CHECK_THROWS_AS(asymptotic_equation(tau_pl, Approach::ZeroPlus), std::invalid_argument);
}

TEST_CASE("plus branch") {
    auto b = plus_branch(Potential::PowerLaw, p("P"), p("V0"), p("c1"));
    CHECK(b.exact);
    CHECK(is_zero_exact(first_integral_residual(b)));
    CHECK(z_plus(b) == P("exp(-4*tau)/c1"));
    CHECK(z_plus_slope_sign(b) == -1);
    LimitOptions neg;
    CHECK(z_plus_slope_sign(plus_branch(Potential::PowerLaw, num(1), num(1), num(-1, 2)), neg) == 1);

    auto one = plus_branch(Potential::PowerLaw, num(1), num(1), num(1));
    CHECK(one.exact);
    CHECK(equal(one.expr, P("1/(1 + exp(4*tau))")));
    CHECK(limit(one.expr, "tau", Approach::MinusInf).value.is_one());
    CHECK(limit(one.expr, "tau", Approach::PlusInf).value.is_zero());

    // hand oracle: ψ′ = 4ψ(PV0ψ^P − 1)/P
    Expr d = diff(b.expr, indep("tau"));
    CHECK(equal(d, num(4) * b.expr * (p("P") * p("V0") * pow(b.expr, p("P")) - num(1)) / p("P")));

    for (int pp : {1, 2, 3})
        for (auto v : {Rational(1, 2), Rational(1)}) CHECK(plus_branch(Potential::PowerLaw, num(pp), num(v), num(1)).exact);

    auto ex = plus_branch(Potential::Exponential, p("P"), p("V0"), p("c1"));
    CHECK(ex.exact);
    auto ex0 = plus_branch(Potential::Exponential, num(1), num(1), num(0));
    CHECK(equal(ex0.expr, P("-ln(1 + exp(4*tau))")));
    CHECK(limit(ex0.expr, "tau", Approach::MinusInf).value.is_zero());

    CHECK_THROWS_AS(plus_branch(Potential::PowerLaw, num(1), num(-1), num(-1)), DomainError);
}

TEST_CASE("four limit statements") {
    auto b = plus_branch(Potential::PowerLaw, p("P"), p("V0"), p("c1"));
    Expr psi0 = constant_solution(Potential::PowerLaw, p("P"), p("V0"));
    CHECK(limit(b.expr, "tau", Approach::PlusInf).value.is_zero());
    CHECK(equal(limit(b.expr, "tau", Approach::MinusInf).value, psi0));
    for (int pp : {1, 2})
        for (auto v : {Rational(1, 2), Rational(1)}) {
            auto bn = plus_branch(Potential::PowerLaw, num(pp), num(v), num(1));
            CHECK(limit(bn.expr, "tau", Approach::PlusInf).value.is_zero());
            CHECK(equal(limit(bn.expr, "tau", Approach::MinusInf).value, constant_solution(Potential::PowerLaw, num(pp), num(v))));
        }
    // P < 0, V0 < 0: the base stays positive; the −∞ end still gives (P V0)^(−1/P)
    auto neg = plus_branch(Potential::PowerLaw, num(-1, 2), num(-2), num(1));
    CHECK(neg.exact);
    CHECK(limit(neg.expr, "tau", Approach::MinusInf).value.is_one());
    CHECK(limit(neg.expr, "tau", Approach::PlusInf).kind == Limit::PlusInf);
}

TEST_CASE("minus branch and compatibility") {
    auto m = minus_branch(Potential::PowerLaw, p("P"), p("V0"), p("c2"), p("c3"), p("c4"), p("c5"));
    CHECK(m.exact);
    CHECK(limit(m.expr, "tau", Approach::MinusInf).value == p("c5"));

    Expr cond = compatibility_condition(Potential::PowerLaw, p("P"), p("V0"));
    CHECK(equal(cond, P("c5*(P*V0*c5^P - 1)/P")));
    auto roots = compatibility_roots(Potential::PowerLaw, p("P"), p("V0"));
    REQUIRE(roots.size() == 2);
    CHECK(roots[0].is_zero());
    CHECK(equal(roots[1], P("(P*V0)^(-1/P)")));

    Expr ce = compatibility_condition(Potential::Exponential, p("P"), p("V0"));
    CHECK(equal(ce, P("V0*exp(c5*P) - 1/P")));
    auto re = compatibility_roots(Potential::Exponential, p("P"), p("V0"));
    REQUIRE(re.size() == 1);
    CHECK(equal(re[0], P("ln((P*V0)^(-1/P))")));

    auto rn = compatibility_roots(Potential::PowerLaw, num(2), num(1, 2));
    REQUIRE(rn.size() == 2);
    CHECK(rn[1] == num(1));
}

TEST_CASE("matching") {
    auto plus = plus_branch(Potential::PowerLaw, p("P"), p("V0"), p("c1"));
    Expr psi0 = constant_solution(Potential::PowerLaw, p("P"), p("V0"));
    auto good = minus_branch(Potential::PowerLaw, p("P"), p("V0"), p("c2"), p("c3"), p("c4"), psi0);
    auto mr = matching_check(plus, good);
    INFO(mr.str());
    CHECK(mr.match);
    CHECK(equal(mr.plus.value, psi0));

    auto bad = minus_branch(Potential::PowerLaw, p("P"), p("V0"), p("c2"), p("c3"), p("c4"), num(0));
    auto mb = matching_check(plus, bad);
    CHECK_FALSE(mb.match);
    CHECK(mb.minus.value.is_zero());

    auto eplus = plus_branch(Potential::Exponential, p("P"), p("V0"), p("c1"));
    Expr l0 = constant_solution(Potential::Exponential, p("P"), p("V0"));
    auto eminus = minus_branch(Potential::Exponential, p("P"), p("V0"), p("c2"), p("c3"), p("c4"), l0);
    CHECK(matching_check(eplus, eminus).match);
}

TEST_CASE("s-map") {
    Expr tau_of_s = P("-arctanh(1 - 2*s)");
    CHECK(equal(substitute(P("exp(2*tau)"), {{indep("tau"), tau_of_s}}), P("s/(1 - s)")));
    CHECK(s_reformulate(P("exp(2*tau)")) == expand(P("s/(1 - s)")));

    auto plus = plus_branch(Potential::PowerLaw, p("P"), p("V0"), p("c1"));
    Expr phip = s_reformulate(plus.expr);
    CHECK(is_zero_exact(phip - printed_phi_plus(p("P"), p("V0"))));
    // naive substitution agrees with the rewrite
    CHECK(equal(substitute(plus.expr, {{indep("tau"), tau_of_s}}), phip));
    CHECK(limit(phip, "s", Approach::OneMinus).value.is_zero());

    Expr psi0 = constant_solution(Potential::PowerLaw, p("P"), p("V0"));
    auto minus = minus_branch(Potential::PowerLaw, p("P"), p("V0"), p("c2"), p("c3"), p("c4"), psi0);
    Expr phim = s_reformulate(minus.expr);
    CHECK(is_zero_exact(phim - printed_phi_minus(Potential::PowerLaw, p("P"), p("V0"))));
    CHECK(equal(limit(phim, "s", Approach::ZeroPlus).value, psi0));
    CHECK(equal(limit(printed_phi_minus(Potential::PowerLaw, p("P"), p("V0")), "s", Approach::ZeroPlus).value, psi0));
    CHECK(equal(limit(phip, "s", Approach::ZeroPlus).value, psi0));

    auto eplus = plus_branch(Potential::Exponential, p("P"), p("V0"), p("c1"));
    // e^{Φ₊} in s with the constant renamed c1 → e^{c1 P}
    Expr renamed = substitute(printed_phi_plus(p("P"), p("V0")), {{p("c1"), P("exp(c1*P)")}});
    CHECK(equal(exp(s_reformulate(eplus.expr)), renamed));
}

TEST_CASE("kappa layer") {
    Expr derived = kappa_layer_equation();
    Expr printed = kappa_layer_printed();
    auto k = proportional(derived, printed);
    REQUIRE(k.has_value());
    CHECK(equal(*k, P("4*kappa^2*(eps*kappa - 1)")));

    Expr z = zeta0(Potential::PowerLaw, p("P"), p("V0"));
    CHECK(is_zero_exact(substitute_solution(printed, "Phi", "kappa", z)));
    CHECK(is_zero_exact(substitute_solution(derived, "Phi", "kappa", z)));
    CHECK(equal(z, P("(P*V0)^(-1/P) + c3*kappa*eps/(2 - 2*kappa*eps) + (c2*(1/(kappa*eps) - 1) + c4/3)*exp(-3*arctanh(1 - 2*kappa*eps))")));
    Limit l = limit(substitute(z, {{indep("kappa"), indep("s") / p("eps")}}), "s", Approach::ZeroPlus);
    CHECK(equal(l.value, P("(P*V0)^(-1/P)")));
}

TEST_CASE("lambda layer") {
    Expr derived = lambda_layer_equation(Potential::PowerLaw, p("P"), p("V0"));
    Expr printed = lambda_layer_printed(p("P"), p("V0"));
    auto k = proportional(derived, printed);
    REQUIRE(k.has_value());
    CHECK(*k == num(1, 2));
    Expr h = eta0(Potential::PowerLaw, p("P"), p("V0"));
    CHECK(is_zero_exact(substitute_solution(printed, "Phi", "lambda", h)));
    Limit l = limit(substitute(h, {{indep("lambda"), indep("s") / p("eps")}}), "s", Approach::ZeroPlus);
    CHECK(l.value.is_zero());

    Expr he = eta0(Potential::Exponential, p("P"), p("V0"));
    CHECK(is_zero_exact(substitute_solution(lambda_layer_equation(Potential::Exponential, p("P"), p("V0")), "Phi", "lambda", he)));
}

TEST_CASE("epsilon split and inner expansion") {
    Expr eq = kappa_layer_printed();
    CHECK(equal(epsilon_split(eq, 0), P("-3*u[Phi; kappa,kappa] - 4*kappa*(kappa*u[Phi; kappa,kappa,kappa,kappa] + 3*u[Phi; kappa,kappa,kappa])")));
    CHECK(equal(epsilon_split(eq, 1), P("6*u[Phi; kappa] + 3*kappa*(25*u[Phi; kappa,kappa] + 4*kappa*(kappa*u[Phi; kappa,kappa,kappa,kappa] + 6*u[Phi; kappa,kappa,kappa]))")));
    CHECK_THROWS_AS(epsilon_split(eq, 5), std::invalid_argument);
    CHECK_THROWS_AS(epsilon_split(P("u[Phi; kappa] + eps*Phi"), 2), std::invalid_argument);

    auto ex = inner_expansion();
    auto [r0, r1] = expansion_residuals(ex);
    CHECK(is_zero_exact(r0));
    CHECK(is_zero_exact(r1));
    CHECK(is_zero_exact(printed_order1_residual(ex.order1)));

    Expr L0 = epsilon_split(eq, 0);
    CHECK(substitute_solution(L0, "Phi", "kappa", num(1)).is_zero());
    CHECK(is_zero_exact(substitute_solution(L0, "Phi", "kappa", P("sqrt(kappa)"))));
    CHECK_FALSE(is_zero_exact(substitute_solution(L0, "Phi", "kappa", P("kappa^2"))));
}

TEST_CASE("plus branch residual in the full equation") {
    auto b = plus_branch(Potential::PowerLaw, num(1), num(1), num(1));
    Expr r = full_residual(b);
    // the dropped block is e^{−4τ}(ψ⁗ − 6ψ‴ + 11ψ″ − 6ψ′) evaluated on ψ̄₊
    Expr block = expand(P("exp(-4*tau)") *
                        substitute_solution(P("u[psi; tau,tau,tau,tau] - 6*u[psi; tau,tau,tau] + 11*u[psi; tau,tau] - 6*u[psi; tau]"),
                                            "psi", "tau", b.expr));
    CHECK(equal(r, block));
    double r3 = eval(r, {{indep("tau"), 3.0}}), r4 = eval(r, {{indep("tau"), 4.0}});
    CHECK(std::log(std::abs(r4 / r3)) == Catch::Approx(-8.0).margin(0.1));
}
