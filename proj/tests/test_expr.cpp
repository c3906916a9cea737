#include <catch_amalgamated.hpp>

#include <cmath>

#include "fuzz.hpp"
#include "lps/algebra.hpp"
#include "lps/parse.hpp"

using namespace lps;

namespace {
Expr P(const char* s) { return parse(s); }
}  // namespace

TEST_CASE("parser builds canonical expressions") {
    CHECK(P("0*x + Psi") == jet("Psi"));
    CHECK(P("u[Psi; x,t]") == P("u[Psi; t,x]"));
    CHECK(P("u[Psi]") == jet("Psi"));

    Expr e = P("V0*Psi^(P+1)");
    REQUIRE(e.is(Kind::Product));
    REQUIRE(e.ops().size() == 2);
    CHECK(e.op(0) == param("V0"));
    CHECK(e.op(1).is(Kind::Power));
    CHECK(e.op(1).base() == jet("Psi"));
    CHECK(e.op(1).exponent() == add({param("P"), num(1)}));

    CHECK(P("1/2") == num(1, 2));
    CHECK(P("2^-1") == num(1, 2));
    CHECK(P("-x^2") == -pow(indep("x"), num(2)));
    CHECK(P("f[1,1](t,x)") == func("f", {indep("t"), indep("x")}, {2, 0}));
    CHECK(P("1.5").is(Kind::Float));
}

TEST_CASE("parser reports offsets and unknown identifiers") {
    try {
        parse("x + * t");
        FAIL("expected a syntax error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
    }
    try {
        parse("x + foo");
        FAIL("expected an unknown identifier");
    } catch (const ParseError& e) {
        std::string msg = e.what();
        CHECK(msg.find("foo") != std::string::npos);
        CHECK(msg.find("V0") != std::string::npos);
        CHECK(e.offset() == 4);
    }
    CHECK_THROWS_AS(parse("(x"), ParseError);
    CHECK_THROWS_AS(parse("u[x; t]"), ParseError);
}

TEST_CASE("printing round-trips through the parser") {
    fuzz::Gen g(7);
    for (int i = 0; i < 300; ++i) {
        Expr e = g.expr(3);
        std::string s = e.str();
        Expr back = parse(s);
        INFO(s);
        CHECK(back == e);
        CHECK(parse(back.str()).str() == s);
    }
    for (const char* s : {"exp(-tau)*u[psi; tau]", "(P*V0 + c1*exp(4*tau))^(-1/P)", "-1/2*x + 3/4", "Psi^(1/2)",
                          "2^(1/2)*x", "ln(1 - s) - ln(s)", "x/(t*(1 + x))"}) {
        Expr e = P(s);
        CHECK(parse(e.str()) == e);
    }
}

TEST_CASE("smart constructor identities") {
    Expr x = indep("x"), tau = indep("tau");
    CHECK(pow(x, num(0)) == num(1));
    CHECK(pow(x, num(1)) == x);
    CHECK(num(0) * x == num(0));
    CHECK(num(1) * x == x);
    CHECK(num(0) + x == x);
    CHECK(exp(tau) * exp(-tau) == num(1));
    CHECK(pow(jet("Psi"), param("P")) * jet("Psi") == pow(jet("Psi"), param("P") + num(1)));
    CHECK(num(6, 4) == num(3, 2));
    CHECK(x + x == num(2) * x);
    CHECK(ln(exp(x)) == x);
    CHECK(exp(num(3) * ln(x)) == pow(x, num(3)));
    CHECK(tanh(-x) == -tanh(x));
}

TEST_CASE("partial derivatives") {
    Expr tau = indep("tau"), psi = jet("Psi");
    CHECK(equal(diff(tanh(tau), tau), num(1) - pow(tanh(tau), num(2))));
    CHECK(equal(diff(P("V0*Psi^(P+1)"), psi), P("V0*(P+1)*Psi^P")));
    CHECK(diff(jet("Psi", {"x", "x"}), psi).is_zero());
    CHECK(diff(P("x"), indep("t")).is_zero());
    CHECK(equal(diff(P("x^x"), indep("x")), P("x^x*(ln(x) + 1)")));
    CHECK(diff(P("V(Psi)"), psi) == P("V[1](Psi)"));
    CHECK(equal(diff(P("arctanh(x)"), indep("x")), P("1/(1 - x^2)")));
}

TEST_CASE("substitution is simultaneous") {
    Expr sigma = indep("sigma"), tau = indep("tau");
    Expr e = sigma * jet("psi", {"sigma"});
    CHECK(substitute(e, {{sigma, exp(tau)}}) == exp(tau) * jet("psi", {"sigma"}));
    CHECK(substitute(jet("Phi"), {{jet("Phi"), jet("Psi", {"x", "x"})}}) == jet("Psi", {"x", "x"}));
    CHECK(substitute(P("x + 1"), {}) == P("x + 1"));
    CHECK(substitute(P("x - t"), {{indep("x"), indep("t")}, {indep("t"), indep("x")}}) == P("t - x"));
}

TEST_CASE("simplify reaches canonical zero") {
    CHECK(simplify(P("exp(tau)*exp(-tau)")) == num(1));
    CHECK(simplify(P("(Psi + Phi)^2 - Psi^2 - 2*Psi*Phi - Phi^2")).is_zero());
    CHECK(simplify(P("(x+1)*(x-1) - x^2 + 1")).is_zero());
    CHECK_THROWS_AS(expand(P("(x + t + tau + alpha + V0 + 1)^12"), 500), ExpansionLimit);
}

TEST_CASE("simplify is idempotent") {
    fuzz::Gen g(11);
    for (int i = 0; i < 200; ++i) {
        Expr e = g.expr(3);
        Expr s = simplify(e);
        INFO(e.str());
        CHECK(simplify(s) == s);
    }
}

TEST_CASE("numeric evaluation") {
    Point p{{param("P"), 1.0}, {param("V0"), 1.0}, {param("c1"), 1.0}, {indep("tau"), 0.0}};
    CHECK(eval(P("(P*V0)^(-1/P)"), p) == Catch::Approx(1.0));
    CHECK(eval(P("(P*V0 + c1*exp(4*tau))^(-1/P)"), p) == Catch::Approx(0.5));
    CHECK(eval(P("arctanh(1 - 2*s)"), {{indep("s"), 0.5}}) == 0.0);
    CHECK_THROWS_AS(eval(P("ln(x)"), {{indep("x"), -1.0}}), DomainError);
    CHECK_THROWS_AS(eval(P("arctanh(x)"), {{indep("x"), 1.0}}), DomainError);
    CHECK_THROWS_AS(eval(P("x^(1/2)"), {{indep("x"), -1.0}}), DomainError);
    CHECK_THROWS_AS(eval(P("x + t"), {{indep("x"), 1.0}}), UnboundSymbol);
}

TEST_CASE("equality") {
    CHECK(equal(P("tanh(tau)"), P("(exp(2*tau) - 1)/(exp(2*tau) + 1)")));
    CHECK(equal(P("u[Psi; t,x]"), P("u[Psi; x,t]")));
    Expr lhs = substitute(P("exp(2*tau)"), {{indep("tau"), P("-arctanh(1 - 2*s)")}});
    auto r = equal(lhs, P("s/(1 - s)"));
    CHECK(r.equal);
    CHECK_FALSE(r.probabilistic);
    CHECK_FALSE(equal(P("x"), P("x + 1/1000000")));

    EqualOptions tiny;
    tiny.limit = 10;
    auto fb = equal(P("(x + t + 1)^6"), expand(P("(x + t + 1)^6")), tiny);
    CHECK(fb.equal);
    CHECK(fb.probabilistic);
}

TEST_CASE("compiled closures agree with the tree evaluator") {
    fuzz::Gen g(3);
    int checked = 0;
    for (int i = 0; i < 200; ++i) {
        Expr e = g.expr(3);
        auto vars = atoms(e);
        Point p = g.point(vars);
        double want;
        if (!fuzz::try_eval(e, p, want)) continue;
        std::vector<double> v;
        for (const auto& a : vars) v.push_back(p.at(a));
        Compiled c(e, vars);
        CHECK(c(v) == want);
        ++checked;
    }
    CHECK(checked > 150);
}

TEST_CASE("finite-difference oracle for diff") {
    fuzz::Gen g(2024);
    int n = 0;
    while (n < 200) {
        Expr e = g.expr(3);
        auto vars = atoms(e);
        if (vars.empty()) continue;
        Expr s = vars[static_cast<std::size_t>(g.pick(static_cast<int>(vars.size())))];
        Point p = g.point(vars);
        double d, fp, fm;
        if (!fuzz::try_eval(diff(e, s), p, d)) continue;
        const double h = 1e-6, s0 = p[s];
        Point q = p;
        q[s] = s0 + h;
        if (!fuzz::try_eval(e, q, fp)) continue;
        q[s] = s0 - h;
        if (!fuzz::try_eval(e, q, fm)) continue;
        double fd = (fp - fm) / (2 * h);
        INFO(e.str() << " d/d" << s.str());
        CHECK(std::abs(d - fd) <= 1e-5 * (1 + std::abs(d)));
        ++n;
    }
}

TEST_CASE("diff is linear and commutes with unrelated substitution") {
    fuzz::Gen g(99);
    Expr x = indep("x");
    for (int i = 0; i < 50; ++i) {
        Expr a = g.expr(2), b = g.expr(2);
        Expr lhs = diff(num(3) * a - num(2, 5) * b, x);
        Expr rhs = num(3) * diff(a, x) - num(2, 5) * diff(b, x);
        CHECK(equal(lhs, rhs));

        Bindings bind{{jet("Psi"), indep("t") * param("V0") + num(1)}};
        CHECK(equal(diff(substitute(a, bind), x), substitute(diff(a, x), bind)));
    }
}

TEST_CASE("equality is sound on random inequal pairs") {
    fuzz::Gen g(5);
    int n = 0;
    while (n < 300) {
        Expr a = g.expr(3);
        Expr b = n % 2 ? g.expr(3) : a + num(1, 1000) * g.leaf();
        auto vars = atoms(a - b);
        Point p = g.point(vars);
        double va, vb;
        if (!fuzz::try_eval(a, p, va) || !fuzz::try_eval(b, p, vb)) continue;
        if (std::abs(va - vb) < 1e-4) continue;
        INFO(a.str() << "  vs  " << b.str());
        CHECK_FALSE(equal(a, b).equal);
        ++n;
    }
}

TEST_CASE("equal pairs agree numerically") {
    fuzz::Gen g(17);
    int n = 0;
    for (int i = 0; i < 200; ++i) {
        Expr a = g.expr(2), b = g.expr(2);
        std::pair<Expr, Expr> pairs[] = {
            {a, simplify(a)},
            {pow(a + b, num(2)), a * a + num(2) * a * b + b * b},
            {exp(a) * exp(b), exp(a + b)},
        };
        for (const auto& [l, r] : pairs) {
            auto res = equal(l, r);
            if (!res.equal) continue;
            Point p = g.point(atoms(l + r));
            double vl, vr;
            if (!fuzz::try_eval(l, p, vl) || !fuzz::try_eval(r, p, vr)) continue;
            INFO(l.str() << "  vs  " << r.str());
            CHECK(std::abs(vl - vr) <= 1e-9 * (1 + std::abs(vl)));
            ++n;
        }
    }
    CHECK(n > 400);
}
