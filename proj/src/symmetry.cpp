#include "lps/symmetry.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "lps/algebra.hpp"

namespace lps {

const char* potential_name(Potential p) {
    switch (p) {
        case Potential::Arbitrary: return "arbitrary";
        case Potential::Zero: return "zero";
        case Potential::Linear: return "linear";
        case Potential::PowerLaw: return "power-law";
        case Potential::Exponential: return "exponential";
    }
    return "?";
}

Expr potential_expr(Potential p, const Expr& u, const Expr& V0, const Expr& P) {
    switch (p) {
        case Potential::Arbitrary: return func("V", {u});
        case Potential::Zero: return num(0);
        case Potential::Linear: return V0 * u;
        case Potential::PowerLaw: return V0 * pow(u, P + num(1));
        case Potential::Exponential: return V0 * exp(P * u);
    }
    return num(0);
}

PDESystem schrodinger_poisson(Potential pot, const Expr& alpha, const Expr& V0, const Expr& P) {
    PDESystem s;
    s.potential = pot;
    s.alpha = alpha;
    s.V0 = V0;
    s.P = P;
    s.order = 2;
    Expr psi = jet("Psi"), phi = jet("Phi");
    Expr psi_xx = jet("Psi", {"x", "x"});
    Expr V = potential_expr(pot, psi, V0, P);
    s.equations = {jet("Psi", {"t"}) + jet("Phi", {"x", "x"}) + alpha * phi + V, phi - psi_xx};
    s.rules = {{phi, psi_xx}, {jet("Psi", {"t"}), -(jet("Psi", {"x", "x", "x", "x"}) + alpha * psi_xx + V)}};
    return s;
}

PDESystem scalar_fourth_order(Potential pot, const Expr& alpha, const Expr& V0, const Expr& P) {
    PDESystem s;
    s.potential = pot;
    s.alpha = alpha;
    s.V0 = V0;
    s.P = P;
    s.order = 4;
    s.space.dep = {"Psi"};
    Expr psi = jet("Psi");
    Expr V = potential_expr(pot, psi, V0, P);
    Expr rhs = -(jet("Psi", {"x", "x", "x", "x"}) + alpha * jet("Psi", {"x", "x"}) + V);
    s.equations = {jet("Psi", {"t"}) - rhs};
    s.rules = {{jet("Psi", {"t"}), rhs}};
    return s;
}

// ---- restriction -----------------------------------------------------------

namespace {

bool derives_from(const Expr& u, const Expr& lead) {
    return u.is(Kind::Jet) && u.name() == lead.name() &&
           std::includes(u.index().begin(), u.index().end(), lead.index().begin(), lead.index().end());
}

bool has_leading(const Expr& e, const PDESystem& sys) {
    for (const auto& a : atoms(e))
        for (const auto& [lead, rhs] : sys.rules)
            if (derives_from(a, lead)) return true;
    return false;
}

}  // namespace

Expr restrict(const Expr& e, const PDESystem& sys) {
    constexpr int kMaxRounds = 64;
    Expr r = expand(e);
    for (int pass = 0; pass < 4; ++pass) {
        for (const auto& [lead, rhs] : sys.rules) {
            std::map<MultiIndex, Expr> cache;
            int round = 0;
            for (;; ++round) {
                if (round == kMaxRounds)
                    throw NonTerminating("restriction by " + lead.str() + " did not terminate");
                Bindings b;
                for (const auto& a : atoms(r)) {
                    if (!derives_from(a, lead)) continue;
                    MultiIndex L;
                    std::set_difference(a.index().begin(), a.index().end(), lead.index().begin(), lead.index().end(),
                                        std::back_inserter(L));
                    auto it = cache.find(L);
                    if (it == cache.end()) {
                        try {
                            it = cache.emplace(L, total_derivative(rhs, L, sys.space)).first;
                        } catch (const MaxOrderExceeded& e) {
                            throw NonTerminating("restriction by " + lead.str() + " left the jet space: " + e.what());
                        }
                    }
                    b[a] = it->second;
                }
                if (b.empty()) break;
                r = expand(substitute(r, b));
            }
        }
        if (!has_leading(r, sys)) return r;
    }
    throw NonTerminating("restriction did not eliminate the leading derivatives");
}

// ---- symmetry condition ----------------------------------------------------

std::string SymmetryReport::str() const {
    std::ostringstream os;
    os << "label: " << label << "\n";
    if (!case_name.empty()) os << "case: " << case_name << "\n";
    os << "exact_zero: " << (exact_zero ? "true" : "false") << "\n";
    if (numeric) os << "max_numeric_residual: " << max_numeric << "\n";
    for (std::size_t i = 0; i < residuals.size(); ++i) os << "residual[" << i << "]: " << residuals[i].str() << "\n";
    return os.str();
}

namespace {

void judge(SymmetryReport& rep) {
    rep.exact_zero = true;
    for (auto& r : rep.residuals) {
        try {
            if (is_zero_exact(r)) {
                r = num(0);
                continue;
            }
            rep.exact_zero = false;
        } catch (const ExpansionLimit&) {
            rep.exact_zero = false;
            rep.numeric = true;
            rep.max_numeric = std::max(rep.max_numeric, max_abs_random(r, 1, 64));
        }
    }
}

}  // namespace

SymmetryReport is_symmetry(const VectorField& X, const PDESystem& sys, std::size_t order) {
    if (order < sys.order) throw std::invalid_argument("prolongation order below the order of the system");
    ProlongedVectorField pr(X, order, sys.space);
    SymmetryReport rep;
    rep.label = X.label;
    for (const auto& H : sys.equations) rep.residuals.push_back(restrict(pr.apply(H), sys));
    judge(rep);
    return rep;
}

bool is_point_in_psi(const VectorField& X) {
    Expr phi = jet("Phi");
    for (const auto& [k, v] : X.xi)
        if (!diff(v, phi).is_zero()) return false;
    return diff(X.eta_of("Psi"), phi).is_zero();
}

// ---- catalog ---------------------------------------------------------------

std::optional<Case> parse_case(const std::string& s) {
    static const std::map<std::string, Case> names{{"T1", Case::T1}, {"I", Case::I},   {"II", Case::II},
                                                   {"III", Case::III}, {"IV", Case::IV}, {"V", Case::V}};
    auto it = names.find(s);
    if (it == names.end()) return std::nullopt;
    return it->second;
}

const char* case_name(Case c) {
    switch (c) {
        case Case::T1: return "T1";
        case Case::I: return "I";
        case Case::II: return "II";
        case Case::III: return "III";
        case Case::IV: return "IV";
        case Case::V: return "V";
    }
    return "?";
}

void check_case(Case c, const CaseParams& p) {
    auto is_value = [](const Expr& e, const Rational& q) { return e.is_rational() && e.rational() == q; };
    switch (c) {
        case Case::I:
            if (is_value(p.alpha, 0)) throw std::invalid_argument("case I requires alpha != 0");
            break;
        case Case::IV:
            if (is_value(p.P, 0) || is_value(p.P, -1)) throw std::invalid_argument("case IV requires P != -1, 0");
            break;
        case Case::V:
            if (is_value(p.P, 0)) throw std::invalid_argument("case V requires P != 0");
            break;
        default:
            break;
    }
}

PDESystem case_system(Case c, const CaseParams& p, bool scalar) {
    check_case(c, p);
    auto make = scalar ? scalar_fourth_order : schrodinger_poisson;
    switch (c) {
        case Case::T1: return make(Potential::Arbitrary, p.alpha, p.V0, p.P);
        case Case::I: return make(Potential::Linear, p.alpha, p.V0, p.P);
        case Case::II: return make(Potential::Zero, num(0), p.V0, p.P);
        case Case::III: return make(Potential::Linear, num(0), p.V0, p.P);
        case Case::IV: return make(Potential::PowerLaw, num(0), p.V0, p.P);
        case Case::V: return make(Potential::Exponential, num(0), p.V0, p.P);
    }
    throw std::invalid_argument("unknown case");
}

std::vector<VectorField> catalog(Case c, const CaseParams& p) {
    check_case(c, p);
    Expr t = indep("t"), x = indep("x"), psi = jet("Psi"), phi = jet("Phi");
    VectorField dt{"d/dt", {{"t", num(1)}}, {}};
    VectorField dx{"d/dx", {{"x", num(1)}}, {}};
    VectorField lin{"Psi*d/dPsi + Phi*d/dPhi", {}, {{"Psi", psi}, {"Phi", phi}}};
    VectorField scale{"4*t*d/dt + x*d/dx - 2*Phi*d/dPhi", {{"t", num(4) * t}, {"x", x}}, {{"Phi", num(-2) * phi}}};
    std::vector<VectorField> out{dt, dx};
    switch (c) {
        case Case::T1:
            break;
        case Case::I:
            out.push_back(lin);
            break;
        case Case::II:
            out.push_back(lin);
            out.push_back(scale);
            break;
        case Case::III: {
            Expr k = num(-4) * p.V0 * t;
            VectorField f = scale;
            f.label += " - 4*V0*t*(Psi*d/dPsi + Phi*d/dPhi)";
            f.eta["Psi"] = simplify(k * psi);
            f.eta["Phi"] = simplify(num(-2) * phi + k * phi);
            out.push_back(lin);
            out.push_back(f);
            break;
        }
        case Case::IV: {
            Expr k = num(-4) / p.P;
            VectorField f = scale;
            f.label += " - (4/P)*(Psi*d/dPsi + Phi*d/dPhi)";
            f.eta["Psi"] = simplify(k * psi);
            f.eta["Phi"] = simplify(num(-2) * phi + k * phi);
            out.push_back(f);
            break;
        }
        case Case::V: {
            VectorField f = scale;
            f.label += " - (4/P)*d/dPsi";
            f.eta["Psi"] = simplify(num(-4) / p.P);
            out.push_back(f);
            break;
        }
    }
    return out;
}

VectorField to_scalar_field(const VectorField& X) {
    Bindings b{{jet("Phi"), jet("Psi", {"x", "x"})}};
    VectorField r;
    r.label = X.label;
    for (const auto& [k, v] : X.xi) r.xi[k] = simplify(substitute(v, b));
    r.eta["Psi"] = simplify(substitute(X.eta_of("Psi"), b));
    return r;
}

// ---- superposition ---------------------------------------------------------

VectorField superposition_field(const Expr& F) {
    VectorField X;
    X.label = "F*d/dPsi + F_xx*d/dPhi, F = " + F.str();
    X.eta["Psi"] = F;
    X.eta["Phi"] = simplify(diff(F, indep("x"), 2));
    return X;
}

SymmetryReport verify_superposition(const PDESystem& sys, const Expr& F) {
    if (sys.potential != Potential::Linear && sys.potential != Potential::Zero)
        throw std::invalid_argument("superposition requires a linear potential");
    auto rep = is_symmetry(superposition_field(F), sys, sys.order);
    return rep;
}

std::vector<Expr> superposition_witnesses(Case c, const CaseParams& p) {
    Expr alpha = c == Case::I ? p.alpha : num(0);
    Expr V0 = c == Case::II ? num(0) : p.V0;
    Expr t = indep("t"), x = indep("x"), k = param("k");
    Expr omega = -(pow(k, num(4)) + alpha * pow(k, num(2)) + V0);
    return {
        simplify(exp(-V0 * t) * (pow(x, num(3)) - num(6) * alpha * t * x)),
        exp(k * x + omega * t),
        simplify(exp(omega * t) * (exp(k * x) + exp(-k * x))),
    };
}

// ---- determining equations -------------------------------------------------

std::vector<Expr> determining_equations(const PDESystem& sys, const VectorField& ansatz) {
    ProlongedVectorField pr(ansatz, sys.order, sys.space);
    std::vector<Expr> out;
    for (const auto& H : sys.equations) {
        Expr r = restrict(pr.apply(H), sys);
        std::vector<Expr> all, derivs;
        for (const auto& a : atoms(r)) {
            if (!a.is(Kind::Jet)) continue;
            all.push_back(a);
            if (!a.index().empty()) derivs.push_back(a);
        }
        std::vector<std::pair<Expr, Expr>> parts;
        try {
            parts = collect(r, all);
        } catch (const std::invalid_argument&) {
            parts = collect(r, derivs);
        }
        for (const auto& [m, c] : parts) {
            Expr s = simplify(c);
            if (!is_zero_exact(s)) out.push_back(s);
        }
    }
    return out;
}

}  // namespace lps
