#include "lps/expr.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <utility>

namespace lps {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

Expr finish(Node n) {
    std::size_t h = std::hash<int>{}(static_cast<int>(n.kind));
    switch (n.kind) {
        case Kind::Rational:
            h = mix(h, std::hash<std::int64_t>{}(n.q.num()));
            h = mix(h, std::hash<std::int64_t>{}(n.q.den()));
            break;
        case Kind::Float:
            h = mix(h, std::hash<std::uint64_t>{}(std::bit_cast<std::uint64_t>(n.f)));
            break;
        case Kind::Param:
        case Kind::Indep:
            h = mix(h, std::hash<std::string>{}(n.name));
            break;
        case Kind::Jet:
            h = mix(h, std::hash<std::string>{}(n.name));
            for (const auto& i : n.index) h = mix(h, std::hash<std::string>{}(i));
            break;
        case Kind::Func:
            h = mix(h, std::hash<std::string>{}(n.name));
            for (int d : n.derivs) h = mix(h, static_cast<std::size_t>(d));
            break;
        case Kind::Kernel:
            h = mix(h, static_cast<std::size_t>(n.fn));
            break;
        default:
            break;
    }
    for (const auto& o : n.ops) h = mix(h, o.hash());
    n.hash = h;
    return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr raw(Kind k, std::vector<Expr> ops) {
    Node n;
    n.kind = k;
    n.ops = std::move(ops);
    return finish(std::move(n));
}

Expr raw_kernel(Fn f, const Expr& a) {
    Node n;
    n.kind = Kind::Kernel;
    n.fn = f;
    n.ops = {a};
    return finish(std::move(n));
}

Expr raw_power(const Expr& b, const Expr& e) { return raw(Kind::Power, {b, e}); }

const Expr& zero_expr() {
    static const Expr z = [] {
        Node n;
        n.kind = Kind::Rational;
        n.q = Rational(0);
        return finish(std::move(n));
    }();
    return z;
}

const Expr& one_expr() {
    static const Expr o = num(Rational(1));
    return o;
}

// Numeric arithmetic on Rational/Float leaves.
Expr num_add(const Expr& a, const Expr& b) {
    if (a.is_rational() && b.is_rational()) return num(a.rational() + b.rational());
    return flt(a.real() + b.real());
}

Expr num_mul(const Expr& a, const Expr& b) {
    if (a.is_rational() && b.is_rational()) return num(a.rational() * b.rational());
    return flt(a.real() * b.real());
}

bool is_int(const Expr& e) { return e.is_rational() && e.rational().is_integer(); }

/// Known non-negative wherever it is defined in the reals.
bool known_positive(const Expr& f) {
    if (f.is_number()) return f.real() > 0;
    if (f.is_fn(Fn::Exp)) return true;
    if (f.is(Kind::Power)) return !is_int(f.exponent()) || known_positive(f.base());
    if (f.is(Kind::Sum) || f.is(Kind::Product))
        return std::all_of(f.ops().begin(), f.ops().end(), [](const Expr& t) { return known_positive(t); });
    return false;
}

std::vector<std::pair<std::int64_t, int>> factorize(std::int64_t n) {
    std::vector<std::pair<std::int64_t, int>> out;
    for (std::int64_t p = 2; p <= 1000000 && p * p <= n; ++p) {
        int k = 0;
        while (n % p == 0) { n /= p; ++k; }
        if (k > 0) out.emplace_back(p, k);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

/// Positive rational raised to a non-integer rational power, normalised as a
/// product of prime bases with exponents in (0,1) times a rational coefficient.
Expr rational_root(const Rational& b, const Rational& e) {
    std::vector<Expr> factors;
    Rational coeff(1);
    auto add_part = [&](std::int64_t n, int sign) {
        for (auto [p, k] : factorize(n)) {
            Rational ex = e * Rational(k * sign);
            std::int64_t whole = ex.floor();
            Rational frac = ex - Rational(whole);
            coeff *= Rational(p).pow(whole);
            if (!frac.is_zero()) factors.push_back(raw_power(num(Rational(p)), num(frac)));
        }
    };
    add_part(b.num(), 1);
    add_part(b.den(), -1);
    factors.push_back(num(coeff));
    return mul(std::move(factors));
}

/// Rational content of a sum with exact coefficients: positive gcd of
/// numerators over lcm of denominators. Returns 0 when not applicable.
Rational sum_content(const Expr& s) {
    std::int64_t g = 0, l = 1;
    for (const auto& t : s.ops()) {
        auto [c, m] = split_coeff(t);
        (void)m;
        if (!c.is_rational()) return Rational(0);
        const Rational& q = c.rational();
        g = std::gcd(g, q.num() < 0 ? -q.num() : q.num());
        l = std::lcm(l, q.den());
    }
    if (g == 0) return Rational(0);
    return Rational(g, l);
}

Expr scale_sum(const Expr& s, const Rational& k) {
    std::vector<Expr> terms;
    for (const auto& t : s.ops()) terms.push_back(mul({num(k), t}));
    return add(std::move(terms));
}

}  // namespace

Expr negate(const Expr& a) { return a.is(Kind::Sum) ? scale_sum(a, Rational(-1)) : mul({num(-1), a}); }

const char* fn_name(Fn f) {
    switch (f) {
        case Fn::Exp: return "exp";
        case Fn::Ln: return "ln";
        case Fn::Tanh: return "tanh";
        case Fn::Arctanh: return "arctanh";
    }
    return "?";
}

// ---- Expr accessors ------------------------------------------------------

Expr::Expr() : n_(zero_expr().n_) {}
Expr::Expr(Rational q) : Expr(num(q)) {}

Kind Expr::kind() const { return n_->kind; }
std::size_t Expr::hash() const { return n_->hash; }
bool Expr::is_zero() const {
    return (is(Kind::Rational) && n_->q.is_zero()) || (is(Kind::Float) && n_->f == 0.0);
}
bool Expr::is_one() const {
    return (is(Kind::Rational) && n_->q.is_one()) || (is(Kind::Float) && n_->f == 1.0);
}
bool Expr::is_fn(Fn f) const { return is(Kind::Kernel) && n_->fn == f; }
const Rational& Expr::rational() const { return n_->q; }
double Expr::real() const { return is(Kind::Rational) ? n_->q.to_double() : n_->f; }
const std::string& Expr::name() const { return n_->name; }
const std::vector<std::string>& Expr::index() const { return n_->index; }
Fn Expr::fn() const { return n_->fn; }
std::span<const Expr> Expr::ops() const { return n_->ops; }
const Expr& Expr::op(std::size_t i) const { return n_->ops.at(i); }
const std::vector<int>& Expr::derivs() const { return n_->derivs; }
const Expr& Expr::base() const { return is(Kind::Power) ? n_->ops[0] : *this; }
Expr Expr::exponent() const { return is(Kind::Power) ? n_->ops[1] : one_expr(); }

// ---- ordering --------------------------------------------------------------

std::strong_ordering compare(const Expr& a, const Expr& b) {
    if (&a.node() == &b.node()) return std::strong_ordering::equal;
    if (auto c = a.kind() <=> b.kind(); c != 0) return c;
    const Node& x = a.node();
    const Node& y = b.node();
    auto cmp_ops = [&]() -> std::strong_ordering {
        std::size_t n = std::min(x.ops.size(), y.ops.size());
        for (std::size_t i = 0; i < n; ++i)
            if (auto c = compare(x.ops[i], y.ops[i]); c != 0) return c;
        return x.ops.size() <=> y.ops.size();
    };
    switch (x.kind) {
        case Kind::Rational:
            return x.q <=> y.q;
        case Kind::Float:
            if (x.f < y.f) return std::strong_ordering::less;
            if (y.f < x.f) return std::strong_ordering::greater;
            return std::bit_cast<std::uint64_t>(x.f) <=> std::bit_cast<std::uint64_t>(y.f);
        case Kind::Param:
        case Kind::Indep:
            return x.name <=> y.name;
        case Kind::Jet:
            if (auto c = x.name <=> y.name; c != 0) return c;
            if (auto c = x.index.size() <=> y.index.size(); c != 0) return c;
            return x.index <=> y.index;
        case Kind::Func:
            if (auto c = x.name <=> y.name; c != 0) return c;
            if (auto c = cmp_ops(); c != 0) return c;
            return x.derivs <=> y.derivs;
        case Kind::Kernel:
            if (auto c = x.fn <=> y.fn; c != 0) return c;
            return cmp_ops();
        default:
            return cmp_ops();
    }
}

bool operator==(const Expr& a, const Expr& b) {
    return a.hash() == b.hash() && compare(a, b) == 0;
}

// ---- leaves ----------------------------------------------------------------

Expr num(Rational q) {
    if (q.is_zero()) return zero_expr();
    Node n;
    n.kind = Kind::Rational;
    n.q = q;
    return finish(std::move(n));
}

Expr num(std::int64_t n, std::int64_t d) { return num(Rational(n, d)); }

Expr flt(double v) {
    Node n;
    n.kind = Kind::Float;
    n.f = v;
    return finish(std::move(n));
}

Expr param(const std::string& name) {
    Node n;
    n.kind = Kind::Param;
    n.name = name;
    return finish(std::move(n));
}

Expr indep(const std::string& name) {
    Node n;
    n.kind = Kind::Indep;
    n.name = name;
    return finish(std::move(n));
}

Expr jet(const std::string& dep, std::vector<std::string> index) {
    std::sort(index.begin(), index.end());
    Node n;
    n.kind = Kind::Jet;
    n.name = dep;
    n.index = std::move(index);
    return finish(std::move(n));
}

Expr func(const std::string& name, std::vector<Expr> args, std::vector<int> derivs) {
    if (derivs.empty()) derivs.assign(args.size(), 0);
    if (derivs.size() != args.size()) throw std::invalid_argument("func: derivative counts do not match arity");
    Node n;
    n.kind = Kind::Func;
    n.name = name;
    n.ops = std::move(args);
    n.derivs = std::move(derivs);
    return finish(std::move(n));
}

// ---- coefficient helpers ---------------------------------------------------

std::pair<Expr, Expr> split_coeff(const Expr& term) {
    if (term.is_number()) return {term, one_expr()};
    if (term.is(Kind::Product) && term.op(0).is_number()) {
        auto ops = term.ops();
        if (ops.size() == 2) return {ops[0], ops[1]};
        return {ops[0], raw(Kind::Product, std::vector<Expr>(ops.begin() + 1, ops.end()))};
    }
    return {one_expr(), term};
}

bool leading_negative(const Expr& e) {
    const Expr& lead = e.is(Kind::Sum) ? e.op(0) : e;
    auto [c, m] = split_coeff(lead);
    (void)m;
    return c.real() < 0;
}

// ---- kernels ---------------------------------------------------------------

Expr exp(const Expr& a) {
    if (a.is_zero()) return one_expr();
    if (a.is(Kind::Float)) return flt(std::exp(a.real()));
    if (a.is_fn(Fn::Ln)) return a.op(0);
    std::vector<Expr> terms;
    if (a.is(Kind::Sum))
        terms.assign(a.ops().begin(), a.ops().end());
    else
        terms.push_back(a);
    std::vector<Expr> factors, rest;
    for (const auto& t : terms) {
        if (t.is_fn(Fn::Ln)) {
            factors.push_back(t.op(0));
            continue;
        }
        if (t.is(Kind::Product)) {
            auto ops = t.ops();
            auto it = std::find_if(ops.begin(), ops.end(), [](const Expr& f) { return f.is_fn(Fn::Ln); });
            if (it != ops.end()) {
                std::vector<Expr> others;
                for (auto j = ops.begin(); j != ops.end(); ++j)
                    if (j != it) others.push_back(*j);
                factors.push_back(pow(it->op(0), mul(std::move(others))));
                continue;
            }
        }
        rest.push_back(t);
    }
    if (factors.empty()) return raw_kernel(Fn::Exp, a);
    Expr r = add(std::move(rest));
    if (!r.is_zero()) factors.push_back(raw_kernel(Fn::Exp, r));
    return mul(std::move(factors));
}

Expr ln(const Expr& a) {
    if (a.is_one()) return zero_expr();
    if (a.is(Kind::Float)) return a.real() > 0 ? flt(std::log(a.real())) : raw_kernel(Fn::Ln, a);
    if (a.is_rational()) {
        const Rational& q = a.rational();
        if (q.sign() <= 0) return raw_kernel(Fn::Ln, a);
        auto fn = factorize(q.num());
        auto fd = factorize(q.den());
        if (fn.size() + fd.size() == 1 && q.den() == 1 && fn[0].second == 1) return raw_kernel(Fn::Ln, a);
        std::vector<Expr> terms;
        for (auto [p, k] : fn) terms.push_back(mul({num(k), ln(num(p))}));
        for (auto [p, k] : fd) terms.push_back(mul({num(-k), ln(num(p))}));
        return add(std::move(terms));
    }
    if (a.is_fn(Fn::Exp)) return a.op(0);
    if (a.is(Kind::Power)) {
        const Expr e = a.exponent();
        bool odd = is_int(e) && (e.rational().num() % 2 != 0);
        if (!is_int(e) || odd) return mul({e, ln(a.base())});
    }
    if (a.is(Kind::Product)) {
        std::vector<Expr> pulled, rest;
        for (const auto& f : a.ops()) {
            if ((f.is_number() && f.real() > 0) || f.is_fn(Fn::Exp))
                pulled.push_back(ln(f));
            else
                rest.push_back(f);
        }
        if (!pulled.empty()) {
            pulled.push_back(ln(mul(std::move(rest))));
            return add(std::move(pulled));
        }
    }
    if (a.is(Kind::Sum)) {
        Rational g = sum_content(a);
        if (!g.is_zero() && !g.is_one()) return add({ln(num(g)), ln(scale_sum(a, g.inverse()))});
    }
    return raw_kernel(Fn::Ln, a);
}

Expr tanh(const Expr& a) {
    if (a.is_zero()) return zero_expr();
    if (a.is(Kind::Float)) return flt(std::tanh(a.real()));
    if (a.is_fn(Fn::Arctanh)) return a.op(0);
    if (leading_negative(a)) return -tanh(negate(a));
    return raw_kernel(Fn::Tanh, a);
}

Expr arctanh(const Expr& a) {
    if (a.is_zero()) return zero_expr();
    if (a.is(Kind::Float) && std::abs(a.real()) < 1) return flt(std::atanh(a.real()));
    if (a.is_fn(Fn::Tanh)) return a.op(0);
    if (leading_negative(a)) return -arctanh(negate(a));
    return raw_kernel(Fn::Arctanh, a);
}

Expr kernel(Fn f, const Expr& a) {
    switch (f) {
        case Fn::Exp: return exp(a);
        case Fn::Ln: return ln(a);
        case Fn::Tanh: return tanh(a);
        case Fn::Arctanh: return arctanh(a);
    }
    return raw_kernel(f, a);
}

// ---- power -----------------------------------------------------------------

Expr pow(const Expr& b, const Expr& e) {
    if (e.is_zero()) return one_expr();
    if (e.is_one()) return b;
    if (b.is_one()) return one_expr();
    if (b.is_zero()) return (e.is_number() && e.real() > 0) ? b : raw_power(b, e);

    if (b.is_number() && e.is_number()) {
        if (b.is(Kind::Float) || e.is(Kind::Float)) {
            if (b.real() < 0 && std::trunc(e.real()) != e.real()) return raw_power(b, e);
            return flt(std::pow(b.real(), e.real()));
        }
        const Rational& q = b.rational();
        const Rational& x = e.rational();
        if (x.is_integer()) {
            try {
                return num(q.pow(x.num()));
            } catch (const std::overflow_error&) {
                return raw_power(b, e);
            }
        }
        if (q.sign() < 0) return raw_power(b, e);
        return rational_root(q, x);
    }

    if (b.is_rational() && b.rational().sign() > 0 && !b.rational().is_integer() && !e.is_number()) {
        const Rational& q = b.rational();
        return mul({pow(num(q.num()), e), pow(num(q.den()), negate(e))});
    }

    if (b.is(Kind::Power)) {
        Expr e0 = b.exponent();
        if (is_int(e) || !is_int(e0) || known_positive(b.base())) return pow(b.base(), mul({e0, e}));
    }
    if (b.is_fn(Fn::Exp)) return exp(mul({b.op(0), e}));

    if (b.is(Kind::Product)) {
        if (is_int(e)) {
            std::vector<Expr> fs;
            for (const auto& f : b.ops()) fs.push_back(pow(f, e));
            return mul(std::move(fs));
        }
        std::vector<Expr> pulled, rest;
        for (const auto& f : b.ops()) (known_positive(f) ? pulled : rest).push_back(f);
        if (!pulled.empty()) {
            std::vector<Expr> fs;
            for (const auto& f : pulled) fs.push_back(pow(f, e));
            fs.push_back(pow(mul(std::move(rest)), e));
            return mul(std::move(fs));
        }
    }

    if (b.is(Kind::Sum)) {
        Rational g = sum_content(b);
        if (!g.is_zero()) {
            if (is_int(e) && leading_negative(b)) g = -g;
            if (!g.is_one()) return mul({pow(num(g), e), pow(scale_sum(b, g.inverse()), e)});
        }
    }
    return raw_power(b, e);
}

Expr sqrt(const Expr& a) { return pow(a, num(1, 2)); }

// ---- product ---------------------------------------------------------------

Expr mul(std::vector<Expr> factors) {
    std::vector<Expr> flat;
    flat.reserve(factors.size());
    for (auto& f : factors) {
        if (f.is(Kind::Product))
            flat.insert(flat.end(), f.ops().begin(), f.ops().end());
        else
            flat.push_back(std::move(f));
    }

    Expr coeff = one_expr();
    std::vector<std::pair<Expr, Expr>> powers;
    std::vector<Expr> exp_args;
    for (const auto& f : flat) {
        if (f.is_number())
            coeff = num_mul(coeff, f);
        else if (f.is_fn(Fn::Exp))
            exp_args.push_back(f.op(0));
        else if (f.is(Kind::Power))
            powers.emplace_back(f.base(), f.exponent());
        else
            powers.emplace_back(f, one_expr());
    }
    if (coeff.is_zero()) return coeff;

    std::stable_sort(powers.begin(), powers.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });

    std::vector<Expr> out, pending;
    auto place = [&](Expr p) {
        if (p.is_number())
            coeff = num_mul(coeff, p);
        else if (p.is(Kind::Product))
            pending.push_back(std::move(p));
        else
            out.push_back(std::move(p));
    };

    for (std::size_t i = 0; i < powers.size();) {
        std::size_t j = i + 1;
        while (j < powers.size() && powers[j].first == powers[i].first) ++j;
        if (j == i + 1) {
            const auto& [b, e] = powers[i];
            place(e.is_one() ? b : raw_power(b, e));
        } else {
            std::vector<Expr> es;
            for (std::size_t k = i; k < j; ++k) es.push_back(powers[k].second);
            place(pow(powers[i].first, add(std::move(es))));
        }
        i = j;
    }
    if (!exp_args.empty()) place(exp(add(std::move(exp_args))));
    if (coeff.is_zero()) return coeff;

    if (!pending.empty()) {
        pending.insert(pending.end(), out.begin(), out.end());
        pending.push_back(coeff);
        return mul(std::move(pending));
    }

    std::sort(out.begin(), out.end());
    if (out.empty()) return coeff;
    if (out.size() == 1 && coeff.is_one()) return out[0];
    if (!coeff.is_one()) out.insert(out.begin(), coeff);
    return raw(Kind::Product, std::move(out));
}

// ---- sum -------------------------------------------------------------------

Expr add(std::vector<Expr> terms) {
    Expr constant = zero_expr();
    std::vector<std::pair<Expr, Expr>> items;  // (monomial, coefficient)
    auto take = [&](const Expr& t) {
        if (t.is_number()) {
            constant = num_add(constant, t);
        } else {
            auto [c, m] = split_coeff(t);
            items.emplace_back(m, c);
        }
    };
    for (const auto& t : terms) {
        if (t.is(Kind::Sum))
            for (const auto& s : t.ops()) take(s);
        else
            take(t);
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });

    std::vector<Expr> out;
    if (!constant.is_zero()) out.push_back(constant);
    for (std::size_t i = 0; i < items.size();) {
        Expr c = items[i].second;
        std::size_t j = i + 1;
        for (; j < items.size() && items[j].first == items[i].first; ++j) c = num_add(c, items[j].second);
        const Expr& m = items[i].first;
        if (!c.is_zero()) {
            if (c.is_one()) {
                out.push_back(m);
            } else {
                std::vector<Expr> ops{c};
                if (m.is(Kind::Product))
                    ops.insert(ops.end(), m.ops().begin(), m.ops().end());
                else
                    ops.push_back(m);
                out.push_back(raw(Kind::Product, std::move(ops)));
            }
        }
        i = j;
    }
    if (out.empty()) return constant;
    if (out.size() == 1) return out[0];
    return raw(Kind::Sum, std::move(out));
}

// ---- operators -------------------------------------------------------------

Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return add({a, mul({num(-1), b})}); }
Expr operator-(const Expr& a) { return mul({num(-1), a}); }
Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return mul({a, pow(b, num(-1))}); }
Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

}  // namespace lps
