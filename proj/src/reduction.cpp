#include "lps/reduction.hpp"

#include <algorithm>
#include <sstream>

#include "lps/algebra.hpp"
#include "lps/parse.hpp"

namespace lps {

namespace {

const Expr& T() {
    static const Expr t = indep("t");
    return t;
}
const Expr& X() {
    static const Expr x = indep("x");
    return x;
}

JetSpace reduced_space(const std::string& var) { return JetSpace{{var}, {"psi", "phi"}, 12}; }

bool has_jet(const Expr& e) {
    bool found = false;
    visit(e, [&](const Expr& s) { found = found || s.is(Kind::Jet); });
    return found;
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

/// Powers of t and the t-dependent part of exponentials in one term.
Expr t_factor(const Expr& term) {
    std::vector<Expr> out;
    for (const auto& f : factors_of(term)) {
        if (f == T() || (f.is(Kind::Power) && f.base() == T())) {
            out.push_back(f);
        } else if (f.is_fn(Fn::Exp)) {
            std::vector<Expr> dep;
            for (const auto& a : terms_of(expand(f.op(0))))
                if (contains(a, T())) dep.push_back(a);
            if (!dep.empty()) out.push_back(exp(add(std::move(dep))));
        }
    }
    return mul(std::move(out));
}

/// (t^k·r)^e → t^(k·e)·r^e, valid on the half-line t > 0 where the
/// transforms live.
Expr split_t_powers(const Expr& e) {
    std::vector<Expr> ops;
    for (const auto& o : e.ops()) ops.push_back(split_t_powers(o));
    Expr r = ops.empty() ? e : rebuild(e, ops);
    if (!r.is(Kind::Power) || !r.base().is(Kind::Product)) return r;
    std::vector<Expr> tpart, rest;
    for (const auto& f : r.base().ops()) (f == T() || (f.is(Kind::Power) && f.base() == T()) ? tpart : rest).push_back(f);
    if (tpart.empty()) return r;
    Expr k = expand(r.exponent());
    std::vector<Expr> out{pow(mul(std::move(rest)), k)};
    for (const auto& f : tpart) out.push_back(pow(T(), expand(f.exponent() * k)));
    return mul(std::move(out));
}

Expr inverse(const Expr& f) {
    if (f.is_fn(Fn::Exp)) return exp(-f.op(0));
    return pow(f, num(-1));
}

std::vector<Expr> jets_in(const Expr& e) {
    std::vector<Expr> out;
    for (const auto& a : atoms(e))
        if (a.is(Kind::Jet)) out.push_back(a);
    return out;
}

Expr with_params(const std::string& text, const Expr& P, const Expr& V0) {
    return substitute(parse(text), {{param("P"), P}, {param("V0"), V0}});
}

void require_nonzero(const Expr& P) {
    if (P.is_number() && P.real() == 0.0) throw std::invalid_argument("P = 0 is excluded (P != 0 required)");
}

void check_all(Reduction& r) {
    r.invariant = r.transform.is_invariant();
    r.verified = r.invariant;
    for (const auto& c : r.checks) r.verified = r.verified && c.match;
}

/// Power-law and exponential reductions share everything but the transform,
/// potential and printed strings.
Reduction scaling_reduce(Potential pot, const SimilarityTransform& tr, const Expr& P, const Expr& V0,
                         const std::string& eq1, const std::string& scalar) {
    Reduction r;
    r.transform = tr;
    auto sys = schrodinger_poisson(pot, num(0), V0, P);
    auto parts = substitute_transform(sys, tr);
    for (const auto& [f, q] : parts) r.factors.push_back(f);
    r.ode = make_ode(std::string(potential_name(pot)) + " similarity reduction", "sigma", {parts[0].second, parts[1].second});
    r.checks.push_back(compare_forms("reduced pair, first equation", with_params(eq1, P, V0), r.ode.pair[0]));
    r.checks.push_back(compare_forms("reduced pair, second equation", parse("phi - u[psi; sigma,sigma]"), r.ode.pair[1]));
    r.checks.push_back(compare_forms("fourth-order equation", with_params(scalar, P, V0), r.ode.scalar));
    auto direct = substitute_transform(scalar_fourth_order(pot, num(0), V0, P), tr);
    r.checks.push_back(compare_forms("scalar PDE reduced directly", r.ode.scalar, direct[0].second));
    check_all(r);
    return r;
}

}  // namespace

// ---- SimilarityTransform ---------------------------------------------------

Expr SimilarityTransform::dvar_dt() const { return expand(substitute(diff(var_def, T()), {{X(), x_of}})); }

Expr SimilarityTransform::dvar_dx() const { return expand(substitute(diff(var_def, X()), {{X(), x_of}})); }

Expr SimilarityTransform::jet_image(const std::string& dep, const MultiIndex& J) const {
    Expr f = dep == "Psi" ? Psi : Phi;
    JetSpace space = reduced_space(var);
    Expr vt = dvar_dt(), vx = dvar_dx();
    for (const auto& i : J) {
        Expr dv = total_derivative(f, var, space);
        if (i == "x")
            f = expand(vx * dv);
        else if (i == "t")
            f = expand(diff(f, T()) + vt * dv);
        else
            throw std::invalid_argument("unknown independent variable " + i);
    }
    return f;
}

std::vector<Expr> SimilarityTransform::invariant_surface() const {
    Bindings on{{X(), x_of}, {jet("Psi"), Psi}, {jet("Phi"), Phi}};
    Expr xt = substitute(field.xi_of("t"), on), xx = substitute(field.xi_of("x"), on);
    std::vector<Expr> out;
    for (const char* A : {"Psi", "Phi"}) {
        Expr q = substitute(field.eta_of(A), on) - xt * jet_image(A, {"t"}) - xx * jet_image(A, {"x"});
        out.push_back(expand(q));
    }
    return out;
}

bool SimilarityTransform::is_invariant() const {
    if (!is_zero_exact(expand(substitute(var_def, {{X(), x_of}}) - indep(var)))) return false;
    for (const auto& q : invariant_surface())
        if (!is_zero_exact(q)) return false;
    return true;
}

SimilarityTransform travel_wave_transform(const Expr& c) {
    SimilarityTransform s;
    s.label = "travel wave xi = x - c t";
    s.field = VectorField{"d/dt + c d/dx", {{"t", num(1)}, {"x", c}}, {}};
    s.var = "xi";
    s.var_def = X() - c * T();
    s.x_of = indep("xi") + c * T();
    s.Psi = jet("psi");
    s.Phi = jet("phi");
    return s;
}

SimilarityTransform travel_wave_scaling_transform(const Expr& c, const Expr& beta) {
    SimilarityTransform s = travel_wave_transform(c);
    s.label = "scaled travel wave Psi = exp(beta t) psi(xi)";
    s.field.label = "d/dt + c d/dx + beta (Psi d/dPsi + Phi d/dPhi)";
    s.field.eta = {{"Psi", beta * jet("Psi")}, {"Phi", beta * jet("Phi")}};
    s.Psi = exp(beta * T()) * jet("psi");
    s.Phi = exp(beta * T()) * jet("phi");
    return s;
}

SimilarityTransform powerlaw_transform(const Expr& P) {
    SimilarityTransform s;
    s.label = "power-law Psi = psi(sigma) t^(-1/P), sigma = x t^(-1/4)";
    CaseParams p;
    p.P = P;
    p.alpha = num(0);
    s.field = catalog(Case::IV, p)[2];
    s.var = "sigma";
    s.var_def = X() * pow(T(), num(-1, 4));
    s.x_of = indep("sigma") * pow(T(), num(1, 4));
    s.Psi = jet("psi") * pow(T(), -pow(P, num(-1)));
    s.Phi = jet("phi") * pow(T(), -(num(2) + P) / (num(2) * P));
    return s;
}

SimilarityTransform exponential_transform(const Expr& P, bool printed_sign) {
    SimilarityTransform s;
    s.label = printed_sign ? "exponential Psi = ln(t)/P + psi(sigma) (printed sign)"
                           : "exponential Psi = -ln(t)/P + psi(sigma)";
    CaseParams p;
    p.P = P;
    p.alpha = num(0);
    s.field = catalog(Case::V, p)[2];
    s.var = "sigma";
    s.var_def = X() * pow(T(), num(-1, 4));
    s.x_of = indep("sigma") * pow(T(), num(1, 4));
    Expr lt = ln(T()) / P;
    s.Psi = (printed_sign ? lt : -lt) + jet("psi");
    s.Phi = pow(T(), num(-1, 2)) * jet("phi");
    return s;
}

std::vector<std::pair<Expr, Expr>> substitute_transform(const PDESystem& sys, const SimilarityTransform& tr) {
    std::vector<std::pair<Expr, Expr>> out;
    for (const auto& H : sys.equations) {
        Bindings b{{X(), tr.x_of}};
        for (const auto& j : jets_in(H)) b[j] = tr.jet_image(j.name(), j.index());
        Expr e = expand(split_t_powers(expand(substitute(H, b))));
        auto terms = terms_of(e);
        if (terms.empty()) {
            out.emplace_back(num(1), e);
            continue;
        }
        Expr f = t_factor(terms.front());
        Expr q = expand(e * inverse(f));
        if (contains(q, T())) throw NotReducible("transform " + tr.label + " leaves t in the reduced equation", q);
        out.emplace_back(f, q);
    }
    return out;
}

// ---- reductions ------------------------------------------------------------

Reduction travel_wave_reduce(const PDESystem& sys, const Expr& c) {
    Reduction r;
    r.transform = travel_wave_transform(c);
    auto parts = substitute_transform(sys, r.transform);
    for (const auto& [f, q] : parts) r.factors.push_back(f);
    Expr psi = jet("psi"), V = potential_expr(sys.potential, psi, sys.V0, sys.P);
    Expr transport = -c * jet("psi", {"xi"});
    if (parts.size() == 2) {
        r.ode = make_ode("travel wave", "xi", {parts[0].second, parts[1].second});
        Expr first = transport + jet("phi", {"xi", "xi"}) + sys.alpha * jet("phi") + V;
        r.checks.push_back(compare_forms("reduced pair, first equation", first, r.ode.pair[0]));
        r.checks.push_back(compare_forms("reduced pair, second equation", parse("phi - u[psi; xi,xi]"), r.ode.pair[1]));
    } else {
        r.ode = make_scalar_ode("travel wave", "xi", parts[0].second);
    }
    Expr scalar = jet("psi", {"xi", "xi", "xi", "xi"}) + sys.alpha * jet("psi", {"xi", "xi"}) + transport + V;
    r.checks.push_back(compare_forms("fourth-order equation", scalar, r.ode.scalar));
    check_all(r);
    return r;
}

Reduction travel_wave_scaling_reduce(Potential pot, const Expr& alpha, const Expr& V0, const Expr& c, const Expr& beta) {
    if (pot != Potential::Linear)
        throw std::invalid_argument(std::string("scaled travel wave needs the linear potential, got ") + potential_name(pot));
    Reduction r;
    r.transform = travel_wave_scaling_transform(c, beta);
    auto parts = substitute_transform(schrodinger_poisson(pot, alpha, V0, num(0)), r.transform);
    for (const auto& [f, q] : parts) r.factors.push_back(f);
    r.ode = make_ode("scaled travel wave", "xi", {parts[0].second, parts[1].second});
    Expr psi = jet("psi");
    Expr first = -c * jet("psi", {"xi"}) + jet("phi", {"xi", "xi"}) + alpha * jet("phi") + beta * psi + V0 * psi;
    r.checks.push_back(compare_forms("reduced pair, first equation", first, r.ode.pair[0]));
    r.checks.push_back(compare_forms("reduced pair, second equation", parse("phi - u[psi; xi,xi]"), r.ode.pair[1]));
    check_all(r);
    return r;
}

Reduction powerlaw_reduce(const Expr& P, const Expr& V0) {
    require_nonzero(P);
    if (P.is_number() && P.real() == -1.0) throw std::invalid_argument("P = -1 is excluded (P != -1 required)");
    return scaling_reduce(Potential::PowerLaw, powerlaw_transform(P), P, V0,
                          "u[phi; sigma,sigma] + V0*psi^(P+1) - sigma*u[psi; sigma]/4 - psi/P",
                          "u[psi; sigma,sigma,sigma,sigma] + V0*psi^(P+1) - sigma*u[psi; sigma]/4 - psi/P");
}

Reduction exponential_reduce(const Expr& P, const Expr& V0) {
    require_nonzero(P);
    return scaling_reduce(Potential::Exponential, exponential_transform(P), P, V0,
                          "u[phi; sigma,sigma] + V0*exp(P*psi) - 1/P - sigma*u[psi; sigma]/4",
                          "u[psi; sigma,sigma,sigma,sigma] + V0*exp(P*psi) - 1/P - sigma*u[psi; sigma]/4");
}

PrintedCheck exponential_printed_transform_check(const Expr& P, const Expr& V0) {
    require_nonzero(P);
    PrintedCheck c;
    c.name = "exponential transform with Psi = ln(t)/P + psi";
    c.printed = with_params("u[phi; sigma,sigma] + V0*exp(P*psi) - 1/P - sigma*u[psi; sigma]/4", P, V0);
    try {
        auto parts = substitute_transform(schrodinger_poisson(Potential::Exponential, num(0), V0, P),
                                          exponential_transform(P, true));
        c.derived = parts[0].second;
        if (auto k = proportional(c.derived, c.printed)) {
            c.match = true;
            c.factor = *k;
        } else {
            c.difference = expand(c.derived - c.printed);
        }
    } catch (const NotReducible& e) {
        c.derived = e.leftover;
        c.difference = e.leftover;
    }
    return c;
}

Expr constant_solution(Potential pot, const Expr& P, const Expr& V0) {
    Expr c = pow(P * V0, -pow(P, num(-1)));
    if (pot == Potential::Exponential) return ln(c);
    if (pot != Potential::PowerLaw) throw std::invalid_argument("constant solution defined for power-law and exponential potentials");
    return c;
}

Expr phi_zero_residual(const Expr& P, const Expr& V0) {
    auto r = powerlaw_reduce(P, V0);
    Expr line = param("psi1") * indep("sigma") + param("psi0");
    Bindings b{{jet("psi"), line}, {jet("psi", {"sigma"}), param("psi1")}};
    for (const auto& j : jets_in(r.ode.pair[0]))
        if (!b.count(j)) b[j] = num(0);
    return expand(substitute(r.ode.pair[0], b));
}

// ---- ODE helpers -----------------------------------------------------------

Expr solve_linear(const Expr& e, const Expr& v) {
    Expr ex = expand(e);
    Expr a = expand(diff(ex, v));
    if (a.is_zero() || contains(a, v)) throw std::invalid_argument("equation is not linear in " + v.str());
    Expr b = expand(substitute(ex, {{v, num(0)}}));
    return expand(-b * inverse(a));
}

std::optional<Expr> proportional(const Expr& a, const Expr& b) {
    Expr ea = expand(a), eb = expand(b);
    if (eb.is_zero()) return ea.is_zero() ? std::optional<Expr>(num(1)) : std::nullopt;
    auto split = [](const Expr& term) {
        std::vector<Expr> j, c;
        for (const auto& f : factors_of(term)) (has_jet(f) ? j : c).push_back(f);
        return std::pair{mul(std::move(j)), mul(std::move(c))};
    };
    auto tb = terms_of(eb);
    Expr key = split(tb.front()).first;
    std::vector<Expr> cb, ca;
    for (const auto& t : tb)
        if (auto [j, c] = split(t); j == key) cb.push_back(c);
    for (const auto& t : terms_of(ea))
        if (auto [j, c] = split(t); j == key) ca.push_back(c);
    if (ca.empty()) return std::nullopt;
    Expr k = simplify(add(std::move(ca)) * inverse(add(std::move(cb))));
    if (has_jet(k)) return std::nullopt;
    if (!is_zero_exact(ea - k * eb)) return std::nullopt;
    return k;
}

PrintedCheck compare_forms(const std::string& name, const Expr& printed, const Expr& derived) {
    PrintedCheck c;
    c.name = name;
    c.printed = printed;
    c.derived = derived;
    if (auto k = proportional(derived, printed)) {
        c.match = true;
        c.factor = *k;
    } else {
        c.difference = expand(derived - printed);
    }
    return c;
}

std::string PrintedCheck::str() const {
    std::ostringstream os;
    os << name << ": " << (match ? "match" : "MISMATCH") << "\n";
    os << "  printed: " << printed.str() << " = 0\n";
    os << "  derived: " << derived.str() << " = 0\n";
    if (match && !factor.is_one()) os << "  derived = (" << factor.str() << ") * printed\n";
    if (!match) os << "  derived - printed: " << difference.str() << "\n";
    return os.str();
}

std::string Reduction::str() const {
    std::ostringstream os;
    os << "transform: " << transform.label << "\n";
    os << "  generator: " << transform.field.label << "\n";
    os << "  " << transform.var << " = " << transform.var_def.str() << "\n";
    os << "  Psi = " << transform.Psi.str() << "\n";
    os << "  Phi = " << transform.Phi.str() << "\n";
    os << "invariant-surface conditions: " << (invariant ? "vanish" : "DO NOT vanish") << "\n";
    for (std::size_t i = 0; i < factors.size(); ++i)
        os << "equation " << i + 1 << " factor: " << factors[i].str() << "\n";
    for (std::size_t i = 0; i < ode.pair.size(); ++i) os << "reduced " << i + 1 << ": " << ode.pair[i].str() << " = 0\n";
    os << "scalar: " << ode.scalar.str() << " = 0\n";
    os << "solved: " << ode.top().str() << " = " << ode.rhs.str() << "\n";
    for (const auto& c : checks) os << c.str();
    os << (verified ? "transform verified" : "transform NOT verified") << "\n";
    return os.str();
}

ReducedODE make_scalar_ode(const std::string& tag, const std::string& var, const Expr& scalar) {
    ReducedODE o;
    o.tag = tag;
    o.var = var;
    o.scalar = expand(scalar);
    o.order = 0;
    for (const auto& j : jets_in(o.scalar))
        if (j.name() == "psi") o.order = std::max(o.order, j.index().size());
    o.rhs = solve_linear(o.scalar, o.top());
    if (contains(o.rhs, o.top())) throw std::invalid_argument("equation is not in solvable form");
    return o;
}

ReducedODE make_ode(const std::string& tag, const std::string& var, std::vector<Expr> pair) {
    if (pair.size() != 2) throw std::invalid_argument("a reduced pair has two equations");
    Expr phi = solve_linear(pair[1], jet("phi"));
    JetSpace space = reduced_space(var);
    Bindings b;
    for (const auto& j : jets_in(pair[0]))
        if (j.name() == "phi") b[j] = total_derivative(phi, j.index(), space);
    ReducedODE o = make_scalar_ode(tag, var, substitute(pair[0], b));
    o.pair = std::move(pair);
    return o;
}

namespace {

ReducedODE change_variable(const ReducedODE& ode, const std::string& to, const Expr& old_of_new,
                           const Expr& weight) {
    JetSpace space = reduced_space(to);
    auto map_all = [&](const Expr& e) {
        Bindings b{{indep(ode.var), old_of_new}};
        for (const auto& j : jets_in(e)) {
            if (j.index().empty()) continue;
            Expr f = jet(j.name());
            for (std::size_t k = 0; k < j.index().size(); ++k) f = expand(weight * total_derivative(f, to, space));
            b[j] = f;
        }
        return expand(substitute(e, b));
    };
    std::vector<Expr> pair;
    for (const auto& e : ode.pair) pair.push_back(map_all(e));
    ReducedODE o = make_scalar_ode(ode.tag, to, map_all(ode.scalar));
    o.pair = std::move(pair);
    return o;
}

}  // namespace

ReducedODE log_transform(const ReducedODE& ode) {
    if (ode.var != "sigma") throw std::invalid_argument("log transform expects an equation in sigma");
    Expr tau = indep("tau");
    return change_variable(ode, "tau", exp(tau), exp(-tau));
}

ReducedODE inverse_log_transform(const ReducedODE& ode) {
    if (ode.var != "tau") throw std::invalid_argument("inverse log transform expects an equation in tau");
    Expr sigma = indep("sigma");
    return change_variable(ode, "sigma", ln(sigma), sigma);
}

Expr printed_tau_powerlaw(const Expr& P, const Expr& V0) {
    return with_params(
        "psi*(P*V0*psi^P - 1)/P + (-6*exp(-4*tau) - 1/4)*u[psi; tau] + exp(-4*tau)*u[psi; tau,tau]"
        " + exp(-4*tau)*u[psi; tau,tau,tau] + exp(-4*tau)*u[psi; tau,tau,tau,tau]",
        P, V0);
}

Expr printed_tau_exponential(const Expr& P, const Expr& V0) {
    return with_params(
        "V0*exp(P*psi) + (-6*exp(-4*tau) - 1/4)*u[psi; tau] + exp(-4*tau)*u[psi; tau,tau]"
        " + exp(-4*tau)*u[psi; tau,tau,tau] + exp(-4*tau)*u[psi; tau,tau,tau,tau] - 1/P",
        P, V0);
}

PrintedCheck tau_form_check(Potential pot, const Expr& P, const Expr& V0) {
    if (pot == Potential::PowerLaw)
        return compare_forms("printed tau-form, power-law", printed_tau_powerlaw(P, V0),
                             log_transform(powerlaw_reduce(P, V0).ode).scalar);
    if (pot == Potential::Exponential)
        return compare_forms("printed tau-form, exponential", printed_tau_exponential(P, V0),
                             log_transform(exponential_reduce(P, V0).ode).scalar);
    throw std::invalid_argument("tau-form defined for power-law and exponential potentials");
}

std::vector<Expr> characteristic_coefficients(const ReducedODE& ode) {
    std::vector<Expr> vars;
    for (int k = 0; k <= 4; ++k) vars.push_back(jet("psi", MultiIndex(static_cast<std::size_t>(k), ode.var)));
    std::vector<Expr> a(5, num(0));
    for (const auto& [mono, coeff] : collect(ode.scalar, vars)) {
        auto it = std::find(vars.begin(), vars.end(), mono);
        if (it == vars.end()) throw std::invalid_argument("not a homogeneous linear equation: term " + (mono * coeff).str());
        if (contains(coeff, indep(ode.var)) || has_jet(coeff))
            throw std::invalid_argument("coefficient depends on " + ode.var + ": " + coeff.str());
        a[static_cast<std::size_t>(4 - (it - vars.begin()))] = coeff;
    }
    return a;
}

}  // namespace lps
