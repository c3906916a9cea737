#include <catch_amalgamated.hpp>

#include "fuzz.hpp"
#include "lps/algebra.hpp"
#include "lps/jet.hpp"
#include "lps/parse.hpp"
#include "lps/symmetry.hpp"
#include "oracles.hpp"

using namespace lps;

namespace {
Expr P(const char* s) { return parse(s); }
}  // namespace

TEST_CASE("total derivative") {
    CHECK(total_derivative(jet("Psi"), "x") == jet("Psi", {"x"}));
    CHECK(equal(total_derivative(P("x*u[Psi; x]"), "x"), P("u[Psi; x] + x*u[Psi; x,x]")));
    CHECK(equal(total_derivative(P("V(Psi)"), "t"), P("V[1](Psi)*u[Psi; t]")));
    CHECK(total_derivative(P("alpha"), "t").is_zero());

    JetSpace small;
    small.max_order = 2;
    CHECK_THROWS_AS(total_derivative(jet("Psi", {"x", "x"}), "t", small), MaxOrderExceeded);
}

TEST_CASE("total derivatives commute") {
    fuzz::Gen g(31);
    for (int i = 0; i < 60; ++i) {
        Expr e = g.expr(3);
        Expr a = total_derivative(total_derivative(e, "t"), "x");
        Expr b = total_derivative(total_derivative(e, "x"), "t");
        INFO(e.str());
        CHECK(equal(a, b));
    }
}

TEST_CASE("fourth sigma-derivative in the logarithmic variable") {
    JetSpace s{{"tau"}, {"psi"}, 8};
    Expr f = jet("psi");
    for (int k = 0; k < 4; ++k) f = expand(exp(-indep("tau")) * total_derivative(f, "tau", s));
    Expr want = P("exp(-4*tau)*(u[psi; tau,tau,tau,tau] - 6*u[psi; tau,tau,tau] + 11*u[psi; tau,tau] - 6*u[psi; tau])");
    CHECK(equal(f, want));

    Expr first = expand(exp(-indep("tau")) * total_derivative(jet("psi"), "tau", s));
    CHECK(first == P("exp(-tau)*u[psi; tau]"));
    Expr second = expand(exp(-indep("tau")) * total_derivative(first, "tau", s));
    CHECK(equal(second, P("exp(-2*tau)*(u[psi; tau,tau] - u[psi; tau])")));
}

TEST_CASE("prolongation of simple fields") {
    VectorField dt{"dt", {{"t", num(1)}}, {}};
    auto pr = prolong(dt, 2);
    for (const auto& A : {"Psi", "Phi"})
        for (std::size_t n = 0; n <= 2; ++n)
            for (const auto& J : multi_indices({"t", "x"}, n)) CHECK(pr.coefficient(A, J).is_zero());

    VectorField trans{"dt + c dx", {{"t", num(1)}, {"x", param("c")}}, {}};
    auto pt = prolong(trans, 2);
    for (std::size_t n = 1; n <= 2; ++n)
        for (const auto& J : multi_indices({"t", "x"}, n)) CHECK(pt.coefficient("Psi", J).is_zero());

    VectorField xdx{"x dx", {{"x", indep("x")}}, {}};
    CHECK(prolong_coefficient(xdx, "Psi", {"x"}) == -jet("Psi", {"x"}));

    VectorField lin{"lin", {}, {{"Psi", jet("Psi")}, {"Phi", jet("Phi")}}};
    auto pl = prolong(lin, 2);
    CHECK(pl.coefficient("Psi", {"x"}) == jet("Psi", {"x"}));
    CHECK(pl.coefficient("Phi", {"x", "x"}) == jet("Phi", {"x", "x"}));
    CHECK_THROWS_AS(pl.coefficient("Psi", {"x", "x", "x"}), MaxOrderExceeded);
}

TEST_CASE("recursion matches the closed forms for random polynomial fields") {
    std::mt19937_64 rng(12345);
    for (int n = 0; n < 50; ++n) {
        VectorField X = oracle::random_field(rng);
        auto pr = prolong(X, 2);
        for (const auto& A : oracle::deps()) {
            for (const auto& i : oracle::indeps()) {
                INFO("first order " << A << " " << i);
                CHECK(is_zero_exact(pr.coefficient(A, {i}) - oracle::first_order(X, A, i)));
            }
            for (const auto& J : multi_indices(oracle::indeps(), 2)) {
                INFO("second order " << A << " " << J[0] << J[1]);
                CHECK(is_zero_exact(pr.coefficient(A, J) - oracle::second_order(X, A, J[0], J[1])));
            }
        }
    }
}

TEST_CASE("swapped first-order index placement") {
    std::mt19937_64 rng(99);
    int differ = 0;
    for (int n = 0; n < 20; ++n) {
        VectorField X = oracle::random_field(rng);
        for (const auto& A : oracle::deps())
            for (const auto& i : oracle::indeps())
                if (!is_zero_exact(oracle::first_order(X, A, i, true) - prolong_coefficient(X, A, {i}))) ++differ;
        // ξ free of the dependent variables: both placements coincide
        X.xi["t"] = substitute(X.xi["t"], {{jet("Psi"), num(0)}, {jet("Phi"), num(0)}});
        X.xi["x"] = substitute(X.xi["x"], {{jet("Psi"), num(0)}, {jet("Phi"), num(0)}});
        for (const auto& A : oracle::deps())
            for (const auto& i : oracle::indeps())
                CHECK(is_zero_exact(oracle::first_order(X, A, i, true) - prolong_coefficient(X, A, {i})));
    }
    CHECK(differ > 0);
}

TEST_CASE("case III field prolongation at random jet points") {
    CaseParams p;
    auto X = catalog(Case::III, p).back();
    auto pr = prolong(X, 2);
    fuzz::Gen g(8);
    for (int k = 0; k < 20; ++k) {
        for (const auto& A : oracle::deps())
            for (const auto& J : multi_indices(oracle::indeps(), 2)) {
                Expr mine = pr.coefficient(A, J);
                Expr hand = oracle::second_order(X, A, J[0], J[1]);
                Point pt = g.point(atoms(mine + hand));
                CHECK(eval(mine, pt) == Catch::Approx(eval(hand, pt)).margin(1e-12));
            }
    }
}

TEST_CASE("prolongation is linear in the field") {
    std::mt19937_64 rng(77);
    for (int n = 0; n < 10; ++n) {
        VectorField X = oracle::random_field(rng), Y = oracle::random_field(rng);
        Expr a = num(3), b = param("beta");
        VectorField Z = a * X + b * Y;
        auto px = prolong(X, 2), py = prolong(Y, 2), pz = prolong(Z, 2);
        for (const auto& J : multi_indices(oracle::indeps(), 2))
            CHECK(is_zero_exact(pz.coefficient("Psi", J) - a * px.coefficient("Psi", J) - b * py.coefficient("Psi", J)));
    }
}

TEST_CASE("commutator of translation and scaling") {
    CaseParams p;
    auto fields = catalog(Case::IV, p);
    VectorField c = commutator(fields[0], fields[2]);
    VectorField four_dt{"4 dt", {{"t", num(4)}}, {}};
    CHECK(same_field(c, four_dt));
    CHECK(same_field(commutator(fields[1], fields[2]), VectorField{"dx", {{"x", num(1)}}, {}}));
}
