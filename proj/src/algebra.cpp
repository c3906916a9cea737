#include "lps/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace lps {

namespace {

bool is_pos_int(const Expr& e) { return e.is_rational() && e.rational().is_integer() && e.rational().sign() > 0; }

bool expandable_power(const Expr& e) { return e.is(Kind::Power) && e.base().is(Kind::Sum) && is_pos_int(e.exponent()); }

bool needs_distribution(const Expr& e) {
    if (expandable_power(e)) return true;
    if (!e.is(Kind::Product)) return false;
    return std::any_of(e.ops().begin(), e.ops().end(),
                       [](const Expr& f) { return f.is(Kind::Sum) || expandable_power(f); });
}

std::vector<Expr> terms_of(const Expr& e) {
    if (e.is(Kind::Sum)) return {e.ops().begin(), e.ops().end()};
    return {e};
}

class Expander {
public:
    explicit Expander(std::size_t limit) : limit_(limit) {}

    Expr run(const Expr& e) {
        if (e.is_number() || e.is_atom()) return e;
        if (auto it = memo_.find(&e.node()); it != memo_.end()) return it->second;
        Expr r;
        std::vector<Expr> ops;
        for (const auto& o : e.ops()) ops.push_back(run(o));
        switch (e.kind()) {
            case Kind::Sum:
                r = add(std::move(ops));
                check(r);
                break;
            default:
                r = distribute(rebuild(e, std::move(ops)));
                break;
        }
        memo_.emplace(&e.node(), r);
        return r;
    }

private:
    void check(const Expr& e) const {
        if (e.is(Kind::Sum) && e.ops().size() > limit_) throw ExpansionLimit(limit_);
    }

    Expr distribute(const Expr& m) {
        if (!needs_distribution(m)) return m;
        std::vector<Expr> factors;
        if (expandable_power(m)) {
            factors.assign(static_cast<std::size_t>(m.exponent().rational().num()), m.base());
        } else {
            for (const auto& f : m.ops()) {
                if (expandable_power(f))
                    for (std::int64_t k = 0; k < f.exponent().rational().num(); ++k) factors.push_back(f.base());
                else
                    factors.push_back(f);
            }
        }
        std::vector<Expr> acc{num(1)};
        for (const auto& f : factors) {
            std::vector<Expr> tf = terms_of(f);
            if (acc.size() * tf.size() > limit_) throw ExpansionLimit(limit_);
            std::vector<Expr> next;
            next.reserve(acc.size() * tf.size());
            for (const auto& a : acc)
                for (const auto& b : tf) {
                    Expr t = mul({a, b});
                    if (needs_distribution(t))
                        for (const auto& s : terms_of(distribute(t))) next.push_back(s);
                    else
                        next.push_back(std::move(t));
                }
            Expr s = add(std::move(next));
            check(s);
            acc = terms_of(s);
        }
        return add(std::move(acc));
    }

    std::size_t limit_;
    std::unordered_map<const Node*, Expr> memo_;
};

}  // namespace

// ---- traversal -------------------------------------------------------------

Expr rebuild(const Expr& e, std::vector<Expr> ops) {
    switch (e.kind()) {
        case Kind::Func: return func(e.name(), std::move(ops), e.derivs());
        case Kind::Kernel: return kernel(e.fn(), ops.at(0));
        case Kind::Power: return pow(ops.at(0), ops.at(1));
        case Kind::Product: return mul(std::move(ops));
        case Kind::Sum: return add(std::move(ops));
        default: return e;
    }
}

void visit(const Expr& e, const std::function<void(const Expr&)>& f) {
    f(e);
    for (const auto& o : e.ops()) visit(o, f);
}

bool contains(const Expr& e, const Expr& atom) {
    if (e == atom) return true;
    return std::any_of(e.ops().begin(), e.ops().end(), [&](const Expr& o) { return contains(o, atom); });
}

std::vector<Expr> atoms(const Expr& e) {
    std::set<Expr> out;
    visit(e, [&](const Expr& x) {
        if (x.is_atom() || x.is(Kind::Func)) out.insert(x);
    });
    return {out.begin(), out.end()};
}

// ---- differentiation -------------------------------------------------------

namespace {

class Differ {
public:
    explicit Differ(const Expr& s) : s_(s) {}

    Expr run(const Expr& e) {
        if (e.is_number()) return num(0);
        if (e.is_atom()) return e == s_ ? num(1) : num(0);
        if (auto it = memo_.find(&e.node()); it != memo_.end()) return it->second;
        Expr r = compute(e);
        memo_.emplace(&e.node(), r);
        return r;
    }

private:
    Expr compute(const Expr& e) {
        switch (e.kind()) {
            case Kind::Func: {
                std::vector<Expr> terms;
                for (std::size_t i = 0; i < e.ops().size(); ++i) {
                    Expr da = run(e.op(i));
                    if (da.is_zero()) continue;
                    std::vector<int> d = e.derivs();
                    ++d[i];
                    terms.push_back(func(e.name(), {e.ops().begin(), e.ops().end()}, std::move(d)) * da);
                }
                return add(std::move(terms));
            }
            case Kind::Kernel: {
                const Expr& a = e.op(0);
                Expr da = run(a);
                if (da.is_zero()) return num(0);
                switch (e.fn()) {
                    case Fn::Exp: return e * da;
                    case Fn::Ln: return da / a;
                    case Fn::Tanh: return (num(1) - pow(e, num(2))) * da;
                    case Fn::Arctanh: return da / (num(1) - pow(a, num(2)));
                }
                return num(0);
            }
            case Kind::Power: {
                const Expr& b = e.base();
                const Expr x = e.exponent();
                Expr db = run(b);
                Expr dx = run(x);
                if (dx.is_zero()) return mul({x, pow(b, x - num(1)), db});
                return e * (dx * ln(b) + x * db / b);
            }
            case Kind::Product: {
                std::vector<Expr> terms;
                auto ops = e.ops();
                for (std::size_t i = 0; i < ops.size(); ++i) {
                    Expr d = run(ops[i]);
                    if (d.is_zero()) continue;
                    std::vector<Expr> fs(ops.begin(), ops.end());
                    fs[i] = d;
                    terms.push_back(mul(std::move(fs)));
                }
                return add(std::move(terms));
            }
            case Kind::Sum: {
                std::vector<Expr> terms;
                for (const auto& t : e.ops()) terms.push_back(run(t));
                return add(std::move(terms));
            }
            default:
                return num(0);
        }
    }

    Expr s_;
    std::unordered_map<const Node*, Expr> memo_;
};

}  // namespace

Expr diff(const Expr& e, const Expr& s) { return Differ(s).run(e); }

Expr diff(const Expr& e, const Expr& s, int times) {
    Expr r = e;
    for (int i = 0; i < times; ++i) r = diff(r, s);
    return r;
}

// ---- substitution ----------------------------------------------------------

namespace {

class Substituter {
public:
    explicit Substituter(const Bindings& b) : b_(b) {}

    Expr run(const Expr& e) {
        if (e.is_number()) return e;
        if (e.is_atom() || e.is(Kind::Func)) {
            if (auto it = b_.find(e); it != b_.end()) return it->second;
            if (e.is_atom()) return e;
        }
        if (auto it = memo_.find(&e.node()); it != memo_.end()) return it->second;
        std::vector<Expr> ops;
        bool changed = false;
        for (const auto& o : e.ops()) {
            ops.push_back(run(o));
            changed = changed || !(&ops.back().node() == &o.node());
        }
        Expr r = changed ? rebuild(e, std::move(ops)) : e;
        memo_.emplace(&e.node(), r);
        return r;
    }

private:
    const Bindings& b_;
    std::unordered_map<const Node*, Expr> memo_;
};

}  // namespace

Expr substitute(const Expr& e, const Bindings& b) {
    if (b.empty()) return e;
    return Substituter(b).run(e);
}

// ---- expansion and zero testing -------------------------------------------

Expr expand(const Expr& e, std::size_t limit) { return Expander(limit).run(e); }

Expr simplify(const Expr& e, std::size_t limit) {
    Expr r = expand(e, limit);
    for (int i = 0; i < 4; ++i) {
        Expr next = expand(r, limit);
        if (next == r) break;
        r = next;
    }
    return r;
}

Expr to_exp_log(const Expr& e) {
    if (e.is_number() || e.is_atom()) return e;
    std::vector<Expr> ops;
    for (const auto& o : e.ops()) ops.push_back(to_exp_log(o));
    if (e.is_fn(Fn::Tanh)) {
        Expr w = exp(num(2) * ops[0]);
        return (w - num(1)) / (w + num(1));
    }
    if (e.is_fn(Fn::Arctanh)) return num(1, 2) * ln(num(1) + ops[0]) - num(1, 2) * ln(num(1) - ops[0]);
    return rebuild(e, std::move(ops));
}

namespace {

std::vector<Expr> factors_of(const Expr& t) {
    if (t.is(Kind::Product)) return {t.ops().begin(), t.ops().end()};
    return {t};
}

/// Product of base powers that clears negative or mismatched exponents shared across terms.
Expr common_multiplier(const Expr& s, std::size_t limit) {
    auto terms = s.ops();
    std::map<Expr, std::vector<Expr>> by_base;
    for (const auto& t : terms)
        for (const auto& f : factors_of(t)) {
            if (f.is_number() || f.is_fn(Fn::Exp)) continue;
            by_base[f.base()].push_back(f.exponent());
        }
    std::vector<Expr> out;
    for (const auto& [b, es] : by_base) {
        bool all_rational = std::all_of(es.begin(), es.end(), [](const Expr& x) { return x.is_rational(); });
        if (b.is_number() && all_rational) continue;
        bool all_terms = es.size() == terms.size();
        const Expr& ref = es.front();
        Rational lo(0);
        bool ok = true;
        for (const auto& x : es) {
            Expr d = expand(x - ref, limit);
            if (!d.is_rational()) {
                ok = false;
                break;
            }
            lo = std::min(lo, d.rational());
        }
        if (!ok) continue;
        Expr m;
        if (all_terms) {
            m = ref + num(lo);
            if (m.is_zero()) continue;
        } else {
            if (!all_rational) continue;
            Rational r(0);
            for (const auto& x : es) r = std::min(r, x.rational());
            if (r.sign() >= 0) continue;
            m = num(r);
        }
        out.push_back(pow(b, -m));
    }
    return mul(std::move(out));
}

}  // namespace

bool is_zero_exact(const Expr& e, std::size_t limit) {
    Expr r = expand(to_exp_log(e), limit);
    for (int round = 0; round < 8; ++round) {
        if (r.is_zero()) return true;
        if (!r.is(Kind::Sum)) return false;
        Expr m = common_multiplier(r, limit);
        if (m.is_one()) return false;
        std::vector<Expr> terms;
        for (const auto& t : r.ops()) terms.push_back(expand(t * m, limit));
        r = expand(add(std::move(terms)), limit);
    }
    return r.is_zero();
}

// ---- numeric evaluation ----------------------------------------------------

namespace {

double pow_checked(double b, double x) {
    bool integral = std::trunc(x) == x;
    if (b < 0 && !integral) throw DomainError("fractional power of negative base");
    if (b == 0 && x < 0) throw DomainError("division by zero");
    return std::pow(b, x);
}

double apply_fn(Fn f, double a) {
    switch (f) {
        case Fn::Exp: return std::exp(a);
        case Fn::Ln:
            if (!(a > 0)) throw DomainError("ln of non-positive value");
            return std::log(a);
        case Fn::Tanh: return std::tanh(a);
        case Fn::Arctanh:
            if (!(std::abs(a) < 1)) throw DomainError("arctanh outside (-1,1)");
            return std::atanh(a);
    }
    return 0.0;
}

}  // namespace

double eval(const Expr& e, const Point& p) {
    switch (e.kind()) {
        case Kind::Rational:
        case Kind::Float:
            return e.real();
        case Kind::Param:
        case Kind::Indep:
        case Kind::Jet:
        case Kind::Func: {
            auto it = p.find(e);
            if (it == p.end()) throw UnboundSymbol("unbound symbol " + e.str());
            return it->second;
        }
        case Kind::Kernel:
            return apply_fn(e.fn(), eval(e.op(0), p));
        case Kind::Power:
            return pow_checked(eval(e.base(), p), eval(e.exponent(), p));
        case Kind::Product: {
            double r = 1.0;
            for (const auto& f : e.ops()) r *= eval(f, p);
            return r;
        }
        case Kind::Sum: {
            double r = 0.0;
            for (const auto& t : e.ops()) r += eval(t, p);
            return r;
        }
    }
    return 0.0;
}

namespace {

bool random_point(const std::vector<Expr>& vars, const SymbolTable& table, std::mt19937_64& rng, Point& p) {
    p.clear();
    for (const auto& v : vars) {
        auto [lo, hi] = v.is(Kind::Func) ? std::pair{-2.0, 2.0} : table.range(v);
        p[v] = std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    return true;
}

template <class F>
void sample(const Expr& probe, std::uint64_t seed, int points, const SymbolTable& table, F&& on_point) {
    std::vector<Expr> vars = atoms(probe);
    std::mt19937_64 rng(seed);
    Point p;
    int done = 0;
    for (int attempt = 0; done < points && attempt < points * 50; ++attempt) {
        random_point(vars, table, rng, p);
        try {
            if (on_point(p)) ++done;
        } catch (const DomainError&) {
        }
    }
    if (done < points) throw DomainError("could not find enough in-domain sample points");
}

}  // namespace

double max_abs_random(const Expr& e, std::uint64_t seed, int points, const SymbolTable* table) {
    double worst = 0.0;
    sample(e, seed, points, table ? *table : SymbolTable::defaults(), [&](const Point& p) {
        double v = eval(e, p);
        if (!std::isfinite(v)) return false;
        worst = std::max(worst, std::abs(v));
        return true;
    });
    return worst;
}

EqualResult equal(const Expr& a, const Expr& b, const EqualOptions& opt) {
    Expr d = a - b;
    try {
        return {is_zero_exact(d, opt.limit), false, 0.0};
    } catch (const ExpansionLimit&) {
    } catch (const std::overflow_error&) {
    }
    EqualResult r{true, true, 0.0};
    sample(d + a, opt.seed, opt.points, opt.table ? *opt.table : SymbolTable::defaults(), [&](const Point& p) {
        double va = eval(a, p);
        double vd = eval(d, p);
        if (!std::isfinite(va) || !std::isfinite(vd)) return false;
        double dev = std::abs(vd) / (1.0 + std::abs(va));
        r.max_dev = std::max(r.max_dev, dev);
        if (dev >= opt.tol) r.equal = false;
        return true;
    });
    return r;
}

// ---- compiled closures -----------------------------------------------------

Compiled::Compiled(const Expr& e, const std::vector<Expr>& slots) : source_(e.str()) {
    emit(e, slots);
    stack_.reserve(64);
}

void Compiled::emit(const Expr& e, const std::vector<Expr>& slots) {
    switch (e.kind()) {
        case Kind::Rational:
        case Kind::Float:
            code_.push_back({Op::Const, 0, e.real()});
            return;
        case Kind::Param:
        case Kind::Indep:
        case Kind::Jet:
        case Kind::Func: {
            auto it = std::find(slots.begin(), slots.end(), e);
            if (it == slots.end()) throw UnboundSymbol("unbound symbol " + e.str() + " in compiled expression");
            code_.push_back({Op::Var, static_cast<std::int32_t>(it - slots.begin()), 0.0});
            return;
        }
        case Kind::Kernel: {
            emit(e.op(0), slots);
            static constexpr Op ops[] = {Op::Exp, Op::Ln, Op::Tanh, Op::Atanh};
            code_.push_back({ops[static_cast<int>(e.fn())], 0, 0.0});
            return;
        }
        case Kind::Power: {
            emit(e.base(), slots);
            Expr x = e.exponent();
            if (x.is_rational() && x.rational().is_integer()) {
                code_.push_back({Op::PowInt, static_cast<std::int32_t>(x.rational().num()), 0.0});
            } else {
                emit(x, slots);
                code_.push_back({Op::Pow, 0, 0.0});
            }
            return;
        }
        case Kind::Product:
        case Kind::Sum:
            for (const auto& o : e.ops()) emit(o, slots);
            code_.push_back({e.is(Kind::Sum) ? Op::Add : Op::Mul, static_cast<std::int32_t>(e.ops().size()), 0.0});
            return;
    }
}

double Compiled::operator()(std::span<const double> v) const {
    auto& s = stack_;
    s.clear();
    for (const auto& in : code_) {
        switch (in.op) {
            case Op::Const: s.push_back(in.value); break;
            case Op::Var: s.push_back(v[static_cast<std::size_t>(in.arg)]); break;
            case Op::Add:
            case Op::Mul: {
                std::size_t n = static_cast<std::size_t>(in.arg);
                std::size_t base = s.size() - n;
                double r = s[base];
                for (std::size_t i = 1; i < n; ++i) r = in.op == Op::Add ? r + s[base + i] : r * s[base + i];
                s.resize(base);
                s.push_back(r);
                break;
            }
            case Op::PowInt: {
                double b = s.back();
                if (b == 0 && in.arg < 0) throw DomainError("division by zero in " + source_);
                s.back() = std::pow(b, static_cast<double>(in.arg));
                break;
            }
            case Op::Pow: {
                double x = s.back();
                s.pop_back();
                try {
                    s.back() = pow_checked(s.back(), x);
                } catch (const DomainError& err) {
                    throw DomainError(std::string(err.what()) + " in " + source_);
                }
                break;
            }
            default:
                try {
                    static constexpr Fn fns[] = {Fn::Exp, Fn::Ln, Fn::Tanh, Fn::Arctanh};
                    s.back() = apply_fn(fns[static_cast<int>(in.op) - static_cast<int>(Op::Exp)], s.back());
                } catch (const DomainError& err) {
                    throw DomainError(std::string(err.what()) + " in " + source_);
                }
                break;
        }
    }
    return s.back();
}

// ---- polynomial coefficients ----------------------------------------------

std::vector<std::pair<Expr, Expr>> collect(const Expr& e, const std::vector<Expr>& vars, std::size_t limit) {
    std::map<Expr, std::vector<Expr>> groups;
    for (const auto& t : terms_of(expand(e, limit))) {
        std::vector<Expr> mono, coeff;
        for (const auto& f : factors_of(t)) {
            bool is_var = std::find(vars.begin(), vars.end(), f.base()) != vars.end();
            if (is_var && is_pos_int(f.exponent())) {
                mono.push_back(f);
                continue;
            }
            for (const auto& v : vars)
                if (contains(f, v)) throw std::invalid_argument("collect: " + v.str() + " occurs non-polynomially in " + f.str());
            coeff.push_back(f);
        }
        groups[mul(std::move(mono))].push_back(mul(std::move(coeff)));
    }
    std::vector<std::pair<Expr, Expr>> out;
    for (auto& [m, cs] : groups) {
        Expr c = add(std::move(cs));
        if (!c.is_zero()) out.emplace_back(m, c);
    }
    return out;
}

}  // namespace lps
