#include "lps/asymptotics.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "lps/algebra.hpp"
#include "lps/parse.hpp"

namespace lps {

namespace {

const Expr& TAU() {
    static const Expr t = indep("tau");
    return t;
}
const Expr& W() {
    static const Expr w = indep("w");
    return w;
}

std::vector<Expr> terms_of(const Expr& e) {
    if (e.is(Kind::Sum)) return {e.ops().begin(), e.ops().end()};
    if (e.is_zero()) return {};
    return {e};
}

std::vector<Expr> factors_of(const Expr& e) {
    if (e.is(Kind::Product)) return {e.ops().begin(), e.ops().end()};
    return {e};
}

Expr c(int i) { return param("c" + std::to_string(i)); }

Expr p_of(const std::string& text, const Expr& P, const Expr& V0) {
    return substitute(parse(text), {{param("P"), P}, {param("V0"), V0}});
}

// ---- limits ----

Limit finite(Expr v) { return Limit{Limit::Finite, std::move(v)}; }
Limit inf(int sign) { return Limit{sign > 0 ? Limit::PlusInf : Limit::MinusInf, Expr()}; }
int inf_sign(const Limit& l) { return l.kind == Limit::PlusInf ? 1 : -1; }

int need_sign(const Expr& e, const LimitOptions& opt) {
    auto s = sign_of(e, opt);
    if (!s || *s == 0) throw LimitUndefined("sign of " + e.str() + " is not determined");
    return *s;
}

bool is_int_number(const Expr& e) { return e.is_rational() && e.rational().is_integer(); }

Limit lim0(const Expr& e, const LimitOptions& opt);

/// Term as c·w^k with c tending to a finite nonzero value.
std::optional<std::pair<Rational, Expr>> w_order(const Expr& term, const LimitOptions& opt) {
    Rational k(0);
    std::vector<Expr> rest;
    for (const auto& f : factors_of(term)) {
        if (f == W()) {
            k = k + Rational(1);
        } else if (f.is(Kind::Power) && f.base() == W() && f.exponent().is_rational()) {
            k = k + f.exponent().rational();
        } else {
            Limit l = lim0(f, opt);
            if (!l.finite() || l.value.is_zero()) return std::nullopt;
            rest.push_back(l.value);
        }
    }
    return std::pair{k, mul(std::move(rest))};
}

/// Competing unbounded terms: keep the most singular power of w.
Limit leading_order(const Expr& sum, const LimitOptions& opt) {
    std::vector<std::pair<Rational, Expr>> parts;
    for (const auto& t : sum.ops()) {
        auto p = w_order(t, opt);
        if (!p) throw LimitUndefined("inf - inf in " + sum.str());
        parts.push_back(*p);
    }
    Rational lead = parts.front().first;
    for (const auto& p : parts)
        if (p.first < lead) lead = p.first;
    std::vector<Expr> cs;
    for (const auto& p : parts)
        if (p.first == lead) cs.push_back(p.second);
    Expr c = simplify(add(std::move(cs)));
    if (c.is_zero()) throw LimitUndefined("leading terms cancel in " + sum.str());
    return inf(need_sign(c, opt));
}

Limit lim0(const Expr& e, const LimitOptions& opt) {
    if (e == W()) return finite(num(0));
    switch (e.kind()) {
        case Kind::Rational:
        case Kind::Float:
        case Kind::Param:
        case Kind::Indep:
        case Kind::Jet:
            return finite(e);
        case Kind::Func: {
            std::vector<Expr> args;
            for (const auto& a : e.ops()) {
                Limit l = lim0(a, opt);
                if (!l.finite()) throw LimitUndefined("unbounded argument of " + e.str());
                args.push_back(l.value);
            }
            return finite(rebuild(e, args));
        }
        case Kind::Sum: {
            std::vector<Expr> fin;
            int s = 0;
            bool clash = false;
            for (const auto& t : e.ops()) {
                Limit l = lim0(t, opt);
                if (l.finite()) {
                    fin.push_back(l.value);
                } else {
                    clash = clash || (s != 0 && s != inf_sign(l));
                    s = inf_sign(l);
                }
            }
            if (clash) return leading_order(e, opt);
            return s ? inf(s) : finite(add(std::move(fin)));
        }
        case Kind::Product: {
            std::vector<Expr> fin;
            int s = 1;
            bool unbounded = false;
            for (const auto& f : e.ops()) {
                Limit l = lim0(f, opt);
                if (l.finite()) {
                    fin.push_back(l.value);
                } else {
                    unbounded = true;
                    s *= inf_sign(l);
                }
            }
            Expr v = mul(std::move(fin));
            if (!unbounded) return finite(v);
            if (v.is_zero()) throw LimitUndefined("0 * inf in " + e.str());
            return inf(s * need_sign(v, opt));
        }
        case Kind::Power: {
            const Expr ex = e.exponent();
            if (contains(ex, W())) throw LimitUndefined("variable exponent in " + e.str());
            Limit b = lim0(e.base(), opt);
            if (b.finite()) {
                if (!b.value.is_zero()) return finite(pow(b.value, ex));
                return need_sign(ex, opt) > 0 ? finite(num(0)) : inf(1);
            }
            if (b.kind == Limit::PlusInf) return need_sign(ex, opt) > 0 ? inf(1) : finite(num(0));
            if (!is_int_number(ex)) throw LimitUndefined("fractional power of a negative unbounded base in " + e.str());
            if (ex.rational().sign() < 0) return finite(num(0));
            return inf(ex.rational().num() % 2 == 0 ? 1 : -1);
        }
        case Kind::Kernel: {
            Limit a = lim0(e.op(0), opt);
            switch (e.fn()) {
                case Fn::Exp:
                    if (a.finite()) return finite(exp(a.value));
                    return a.kind == Limit::PlusInf ? inf(1) : finite(num(0));
                case Fn::Ln:
                    if (a.finite()) return a.value.is_zero() ? inf(-1) : finite(ln(a.value));
                    if (a.kind == Limit::PlusInf) return inf(1);
                    throw LimitUndefined("ln of a negative unbounded argument");
                default:
                    if (a.finite()) return finite(kernel(e.fn(), a.value));
                    throw LimitUndefined("unbounded argument of " + e.str());
            }
        }
    }
    throw LimitUndefined("unsupported expression " + e.str());
}

}  // namespace

std::optional<int> sign_of(const Expr& e, const LimitOptions& opt) {
    switch (e.kind()) {
        case Kind::Rational:
        case Kind::Float: {
            double v = e.real();
            return v > 0 ? 1 : (v < 0 ? -1 : 0);
        }
        case Kind::Param:
            if (opt.positive.count(e.name())) return 1;
            return std::nullopt;
        case Kind::Kernel:
            if (e.fn() == Fn::Exp) return 1;
            return std::nullopt;
        case Kind::Power: {
            auto b = sign_of(e.base(), opt);
            if (!b) return std::nullopt;
            if (*b > 0) return 1;
            const Expr ex = e.exponent();
            if (*b < 0 && is_int_number(ex)) return ex.rational().num() % 2 == 0 ? 1 : -1;
            return std::nullopt;
        }
        case Kind::Product: {
            int s = 1;
            for (const auto& f : e.ops()) {
                auto fs = sign_of(f, opt);
                if (!fs) return std::nullopt;
                s *= *fs;
            }
            return s;
        }
        case Kind::Sum: {
            std::optional<int> s;
            for (const auto& t : e.ops()) {
                auto ts = sign_of(t, opt);
                if (!ts) return std::nullopt;
                if (*ts == 0) continue;
                if (s && *s != *ts) return std::nullopt;
                s = *ts;
            }
            return s ? s : std::optional<int>(0);
        }
        default:
            return std::nullopt;
    }
}

Limit limit(const Expr& e, const std::string& var, Approach to, const LimitOptions& opt) {
    Expr v = indep(var);
    Expr image;
    switch (to) {
        case Approach::MinusInf: image = ln(W()); break;
        case Approach::PlusInf: image = -ln(W()); break;
        case Approach::ZeroPlus: image = W(); break;
        case Approach::OneMinus: image = num(1) - W(); break;
    }
    Expr r = expand(to_exp_log(substitute(to_exp_log(e), {{v, image}})));
    Limit l = lim0(r, opt);
    if (l.finite()) l.value = simplify(l.value);
    return l;
}

std::string Limit::str() const {
    switch (kind) {
        case Finite: return value.str();
        case PlusInf: return "+inf";
        case MinusInf: return "-inf";
    }
    return "?";
}

// ---- τ-equations ----

ReducedODE tau_equation(Potential pot, const Expr& P, const Expr& V0) {
    if (pot == Potential::PowerLaw) return log_transform(powerlaw_reduce(P, V0).ode);
    if (pot == Potential::Exponential) return log_transform(exponential_reduce(P, V0).ode);
    throw std::invalid_argument("tau-equation defined for power-law and exponential potentials");
}

ReducedODE asymptotic_equation(const ReducedODE& tau_ode, Approach end) {
    if (end != Approach::PlusInf && end != Approach::MinusInf)
        throw std::invalid_argument("asymptotic equations are taken at tau -> +inf or -inf");
    auto weighted = [](const Expr& term) {
        for (const auto& f : factors_of(term))
            if (f.is_fn(Fn::Exp) && contains(f.op(0), TAU())) return true;
        return false;
    };
    std::vector<Expr> keep;
    for (const auto& t : terms_of(expand(tau_ode.scalar)))
        if (weighted(t) == (end == Approach::MinusInf)) keep.push_back(t);
    Expr eq = add(std::move(keep));
    if (end == Approach::MinusInf) eq = expand(exp(num(4) * TAU()) * eq);
    return make_scalar_ode(tau_ode.tag + (end == Approach::PlusInf ? " (tau -> +inf)" : " (tau -> -inf)"), "tau", eq);
}

Expr substitute_solution(const Expr& eq, const std::string& dep, const std::string& var, const Expr& sol) {
    Bindings b;
    for (const auto& a : atoms(eq))
        if (a.is(Kind::Jet) && a.name() == dep) b[a] = diff(sol, indep(var), static_cast<int>(a.index().size()));
    return expand(substitute(eq, b));
}

// ---- branches ----

namespace {

Expr plus_expr(Potential pot, const Expr& P, const Expr& V0, const Expr& c1, const Expr& tau_of) {
    Expr inv = -pow(P, num(-1));
    if (pot == Potential::PowerLaw) return pow(P * V0 + c1 * exp(num(4) * tau_of), inv);
    if (pot == Potential::Exponential) return ln(pow(P * V0 + exp(num(4) * tau_of + c1 * P), inv));
    throw std::invalid_argument("branches defined for power-law and exponential potentials");
}

}  // namespace

bool zero_where_base_positive(const Expr& r, Potential pot, const Expr& P, const Expr& V0, const Expr& tau_of) {
    // (τ, c1) ↦ (τ, β) with base = e^β maps the region base > 0 onto all of (τ, β)
    Expr beta = param("beta_");
    Expr rest = exp(beta) - P * V0;
    Expr c1_of = pot == Potential::PowerLaw ? rest * exp(num(-4) * tau_of)
                                            : (ln(rest) - num(4) * tau_of) * pow(P, num(-1));
    return is_zero_exact(substitute(r, {{c(1), c1_of}}));
}

AsymptoticBranch plus_branch(Potential pot, const Expr& P, const Expr& V0, const Expr& c1) {
    AsymptoticBranch b;
    b.side = AsymptoticBranch::Plus;
    b.potential = pot;
    b.P = P;
    b.V0 = V0;
    b.constants = {c1};
    if (pot == Potential::PowerLaw && P.is_number() && V0.is_number() && c1.is_number() && (P * V0).real() <= 0 &&
        c1.real() <= 0)
        throw DomainError("P*V0 + c1*exp(4*tau) is non-positive for every tau");
    b.expr = plus_expr(pot, P, V0, c1, TAU());
    auto eq = asymptotic_equation(tau_equation(pot, P, V0), Approach::PlusInf);
    b.residual = substitute_solution(eq.scalar, "psi", "tau", b.expr);
    b.exact = is_zero_exact(b.residual);
    if (!b.exact) {
        Expr r = substitute_solution(eq.scalar, "psi", "tau", plus_expr(pot, P, V0, c(1), TAU()));
        b.exact = b.conditional = zero_where_base_positive(r, pot, P, V0, TAU());
    }
    return b;
}

AsymptoticBranch minus_branch(Potential pot, const Expr& P, const Expr& V0, const Expr& c2, const Expr& c3,
                              const Expr& c4, const Expr& c5) {
    AsymptoticBranch b;
    b.side = AsymptoticBranch::Minus;
    b.potential = pot;
    b.P = P;
    b.V0 = V0;
    b.constants = {c2, c3, c4, c5};
    Expr t = TAU();
    b.expr = c2 * exp(t) + c3 * exp(num(2) * t) / num(2) + c4 * exp(num(3) * t) / num(3) + c5;
    auto eq = asymptotic_equation(tau_equation(pot, P, V0), Approach::MinusInf);
    b.residual = substitute_solution(eq.scalar, "psi", "tau", b.expr);
    b.exact = is_zero_exact(b.residual);
    return b;
}

Expr first_integral_residual(const AsymptoticBranch& plus) {
    Expr q = pow(plus.expr, plus.P);
    return expand(plus.constants[0] * q * pow(num(1) - plus.P * plus.V0 * q, num(-1)) - exp(num(-4) * TAU()));
}

bool first_integral_holds(const AsymptoticBranch& plus) {
    if (is_zero_exact(first_integral_residual(plus))) return true;
    if (!plus.conditional) return false;
    AsymptoticBranch sym = plus;
    sym.constants = {c(1)};
    sym.expr = plus_expr(plus.potential, plus.P, plus.V0, c(1), TAU());
    return zero_where_base_positive(first_integral_residual(sym), plus.potential, plus.P, plus.V0, TAU());
}

Expr z_plus(const AsymptoticBranch& plus) {
    Expr q = pow(plus.expr, plus.P);
    Expr z = q * pow(num(1) - plus.P * plus.V0 * q, num(-1));
    Expr closed = exp(num(-4) * TAU()) * pow(plus.constants[0], num(-1));
    return is_zero_exact(z - closed) ? closed : z;
}

std::optional<int> z_plus_slope_sign(const AsymptoticBranch& plus, const LimitOptions& opt) {
    return sign_of(expand(diff(z_plus(plus), TAU())), opt);
}

Expr full_residual(const AsymptoticBranch& b) {
    return substitute_solution(tau_equation(b.potential, b.P, b.V0).scalar, "psi", "tau", b.expr);
}

Expr compatibility_condition(Potential pot, const Expr& P, const Expr& V0) {
    auto m = minus_branch(pot, P, V0, c(2), c(3), c(4), c(5));
    Limit l = limit(full_residual(m), "tau", Approach::MinusInf);
    if (!l.finite()) throw LimitUndefined("compatibility condition diverges");
    return l.value;
}

std::vector<Expr> compatibility_roots(Potential pot, const Expr& P, const Expr& V0) {
    Expr cond = compatibility_condition(pot, P, V0);
    Expr psi0 = constant_solution(pot, P, V0);
    std::vector<Expr> roots;
    if (pot == Potential::PowerLaw) {
        Expr g = expand(cond * pow(c(5), num(-1)));
        if (is_zero_exact(cond - c(5) * g)) roots.push_back(num(0));
        if (is_zero_exact(substitute(g, {{c(5), psi0}}))) roots.push_back(psi0);
    } else if (is_zero_exact(substitute(cond, {{c(5), psi0}}))) {
        roots.push_back(psi0);
    }
    return roots;
}

MatchResult matching_check(const AsymptoticBranch& plus, const AsymptoticBranch& minus, const LimitOptions& opt) {
    MatchResult m;
    m.plus = limit(plus.expr, "tau", Approach::MinusInf, opt);
    m.minus = limit(minus.expr, "tau", Approach::MinusInf, opt);
    m.match = m.plus.finite() && m.minus.finite() && is_zero_exact(m.plus.value - m.minus.value);
    if (sign_of(plus.P * plus.V0, opt) != 1) {
        m.match = false;
        m.note = "P*V0 <= 0: the base of the plus branch is not positive as tau -> -inf";
    }
    return m;
}

std::string MatchResult::str() const {
    std::ostringstream os;
    os << "tau -> -inf: plus branch " << plus.str() << ", minus branch " << minus.str() << ": "
       << (match ? "match" : "NO MATCH");
    if (!note.empty()) os << " (" << note << ")";
    return os.str();
}

// ---- s-map and layers ----

Expr s_reformulate(const Expr& in_tau) {
    Expr s = indep("s");
    Expr r = expand(substitute(to_exp_log(in_tau), {{TAU(), ln(W())}}));
    std::function<Expr(const Expr&)> go = [&](const Expr& e) -> Expr {
        if (e == W()) return pow(s, num(1, 2)) * pow(num(1) - s, num(-1, 2));
        if (e.is(Kind::Power) && e.base() == W()) {
            Expr k = e.exponent();
            return pow(s, k / num(2)) * pow(num(1) - s, -k / num(2));
        }
        if (e.ops().empty()) return e;
        std::vector<Expr> ops;
        for (const auto& o : e.ops()) ops.push_back(go(o));
        return rebuild(e, ops);
    };
    Expr out = go(r);
    if (contains(out, W())) throw std::invalid_argument("tau occurs outside exponentials: " + in_tau.str());
    return out;
}

Expr printed_phi_minus(Potential pot, const Expr& P, const Expr& V0) {
    return constant_solution(pot, P, V0) + parse("c3*s/(2 - 2*s) + (c2*(1/s - 1) + c4/3)*exp(-3*arctanh(1 - 2*s))");
}

Expr printed_phi_plus(const Expr& P, const Expr& V0) { return p_of("(P*V0 + c1*s^2/(1 - s)^2)^(-1/P)", P, V0); }

Expr stretch(const Expr& eq_in_tau, const std::string& var, const Expr& rate, const Expr& tau_of) {
    JetSpace space{{var}, {"Phi"}, 12};
    Bindings b{{TAU(), tau_of}};
    for (const auto& a : atoms(eq_in_tau)) {
        if (!a.is(Kind::Jet) || a.name() != "psi") continue;
        Expr f = jet("Phi");
        for (std::size_t k = 0; k < a.index().size(); ++k) f = expand(rate * total_derivative(f, var, space));
        b[a] = f;
    }
    return expand(substitute(eq_in_tau, b));
}

Expr kappa_layer_equation() {
    auto eq = asymptotic_equation(tau_equation(Potential::PowerLaw, param("P"), param("V0")), Approach::MinusInf);
    Expr k = indep("kappa"), e = param("eps");
    return stretch(eq.scalar, "kappa", num(2) * k * (num(1) - e * k), arctanh(num(2) * e * k - num(1)));
}

Expr kappa_layer_printed() {
    return parse(
        "6*eps*(4*kappa*eps*(4*kappa*eps - 3) + 1)*u[Phi; kappa]"
        " + (kappa*eps - 1)*(3*(24*kappa*eps*(2*kappa*eps - 1) + 1)*u[Phi; kappa,kappa]"
        " + 4*kappa*(kappa*eps - 1)*(kappa*u[Phi; kappa,kappa,kappa,kappa]*(kappa*eps - 1)"
        " + 3*u[Phi; kappa,kappa,kappa]*(4*kappa*eps - 1)))");
}

Expr lambda_layer_equation(Potential pot, const Expr& P, const Expr& V0) {
    auto eq = asymptotic_equation(tau_equation(pot, P, V0), Approach::PlusInf);
    Expr l = indep("lambda"), e = param("eps");
    return stretch(eq.scalar, "lambda", num(-2) * l * (num(1) - e * l), arctanh(num(1) - num(2) * e * l));
}

Expr lambda_layer_printed(const Expr& P, const Expr& V0) {
    return p_of("2*V0*Phi^(P+1) + lambda*(1 - lambda*eps)*u[Phi; lambda] - 2*Phi/P", P, V0);
}

Expr zeta0(Potential pot, const Expr& P, const Expr& V0) {
    return substitute(printed_phi_minus(pot, P, V0), {{indep("s"), indep("kappa") * param("eps")}});
}

Expr eta0(Potential pot, const Expr& P, const Expr& V0) {
    return plus_expr(pot, P, V0, c(1), arctanh(num(1) - num(2) * indep("lambda") * param("eps")));
}

Expr epsilon_split(const Expr& layer_eq, int order) {
    Expr eps = param("eps");
    int degree = 0;
    Expr out = num(0);
    for (const auto& [m, coeff] : collect(layer_eq, {eps})) {
        int d = m.is_one() ? 0 : static_cast<int>(m.exponent().rational().num());
        degree = std::max(degree, d);
        if (d == order) out = coeff;
    }
    if (order < 0 || order > degree)
        throw std::invalid_argument("order " + std::to_string(order) + " exceeds the degree " + std::to_string(degree) +
                                    " in eps");
    return out;
}

LayerExpansion inner_expansion() {
    LayerExpansion ex;
    ex.order0 = parse("4/3*sqrt(kappa)*(d2*kappa - 3*d1) + d4*kappa + d3");
    ex.order1 = parse("2*d2*kappa^(5/2) + 4/3*d6*kappa^(3/2) + d4*kappa^2 + d8*kappa - 4*d5*sqrt(kappa) + d7");
    return ex;
}

std::pair<Expr, Expr> expansion_residuals(const LayerExpansion& ex) {
    Expr eq = kappa_layer_printed();
    Expr L0 = epsilon_split(eq, 0), L1 = epsilon_split(eq, 1);
    Expr r0 = substitute_solution(L0, "Phi", "kappa", ex.order0);
    Expr r1 = substitute_solution(L0, "Phi", "kappa", ex.order1) + substitute_solution(L1, "Phi", "kappa", ex.order0);
    return {r0, expand(r1)};
}

Expr printed_order1_residual(const Expr& phi1) {
    Expr eq = parse(
        "60*d2*sqrt(kappa) + 6*d4 - 4*kappa^2*u[Phi; kappa,kappa,kappa,kappa] - 12*kappa*u[Phi; kappa,kappa,kappa]"
        " - 3*u[Phi; kappa,kappa]");
    return substitute_solution(eq, "Phi", "kappa", phi1);
}

}  // namespace lps
