#include "lps/parse.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace lps {

// ---- symbol table ----------------------------------------------------------

const SymbolTable& SymbolTable::defaults() {
    static const SymbolTable table = [] {
        SymbolTable t;
        t.declare("alpha", SymbolKind::Param, -1.0, 1.0);
        t.declare("V0", SymbolKind::Param, 0.5, 2.0);
        t.declare("P", SymbolKind::Param, 0.5, 3.0);
        t.declare("c", SymbolKind::Param, -2.0, 2.0);
        t.declare("beta", SymbolKind::Param, -1.0, 1.0);
        t.declare("k", SymbolKind::Param, 0.5, 1.5);
        t.declare("eps", SymbolKind::Param, 0.01, 0.2);
        t.declare("psi0", SymbolKind::Param, 0.5, 2.0);
        t.declare("psi1", SymbolKind::Param, -2.0, 2.0);
        for (int i = 1; i <= 5; ++i) t.declare("c" + std::to_string(i), SymbolKind::Param, 0.5, 2.0);
        for (int i = 1; i <= 8; ++i) t.declare("d" + std::to_string(i), SymbolKind::Param, -2.0, 2.0);
        t.declare("t", SymbolKind::Indep, 0.5, 2.0);
        t.declare("x", SymbolKind::Indep, 0.5, 2.0);
        t.declare("xi", SymbolKind::Indep, -2.0, 2.0);
        t.declare("sigma", SymbolKind::Indep, 0.5, 2.0);
        t.declare("tau", SymbolKind::Indep, -2.0, 2.0);
        t.declare("s", SymbolKind::Indep, 0.05, 0.95);
        t.declare("kappa", SymbolKind::Indep, 0.5, 4.0);
        t.declare("lambda", SymbolKind::Indep, 0.5, 4.0);
        for (const char* d : {"Psi", "Phi", "psi", "phi", "u", "Phi0", "Phi1"})
            t.declare(d, SymbolKind::Dependent, -2.0, 2.0);
        for (const char* f : {"V", "f", "g", "h"}) t.declare(f, SymbolKind::Function);
        return t;
    }();
    return table;
}

void SymbolTable::declare(const std::string& name, SymbolKind kind, double lo, double hi) {
    entries_[name] = SymbolInfo{kind, lo, hi};
}

const SymbolInfo* SymbolTable::find(const std::string& name) const {
    auto it = entries_.find(name);
    return it == entries_.end() ? nullptr : &it->second;
}

std::pair<double, double> SymbolTable::range(const Expr& atom) const {
    if (const SymbolInfo* s = find(atom.name())) return {s->lo, s->hi};
    return {-2.0, 2.0};
}

std::vector<std::string> SymbolTable::names() const {
    std::vector<std::string> out;
    for (const auto& [n, info] : entries_) out.push_back(n);
    return out;
}

// ---- parser ----------------------------------------------------------------

namespace {

class Parser {
public:
    Parser(const std::string& text, const SymbolTable& table) : s_(text), table_(table) {}

    Expr run() {
        Expr e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(pos_, "syntax error: " + msg); }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }
    bool peek(char c) {
        skip();
        return pos_ < s_.size() && s_[pos_] == c;
    }

    Expr expr() {
        std::vector<Expr> terms{term()};
        for (;;) {
            if (accept('+'))
                terms.push_back(term());
            else if (accept('-'))
                terms.push_back(-term());
            else
                break;
        }
        return add(std::move(terms));
    }

    Expr term() {
        std::vector<Expr> fs{unary()};
        for (;;) {
            if (accept('*'))
                fs.push_back(unary());
            else if (accept('/'))
                fs.push_back(pow(unary(), num(-1)));
            else
                break;
        }
        return mul(std::move(fs));
    }

    Expr unary() {
        if (accept('-')) return -unary();
        if (accept('+')) return unary();
        return power();
    }

    Expr power() {
        Expr b = atom();
        if (accept('^')) return pow(b, unary());
        return b;
    }

    std::string ident() {
        skip();
        std::size_t start = pos_;
        if (pos_ >= s_.size() || !(std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            fail("expected identifier");
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        return s_.substr(start, pos_ - start);
    }

    Expr number() {
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        bool is_float = false;
        if (pos_ < s_.size() && s_[pos_] == '.') {
            is_float = true;
            ++pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                is_float = true;
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            } else {
                pos_ = save;
            }
        }
        std::string lit = s_.substr(start, pos_ - start);
        if (is_float) return flt(std::strtod(lit.c_str(), nullptr));
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(lit.data(), lit.data() + lit.size(), v);
        if (ec != std::errc()) {
            pos_ = start;
            fail("integer literal out of range");
        }
        return num(Rational(v));
    }

    Expr jetvar() {
        expect('[');
        std::size_t at = pos_;
        std::string dep = ident();
        const SymbolInfo* info = table_.find(dep);
        if (!info || info->kind != SymbolKind::Dependent) {
            pos_ = at;
            unknown(dep, "dependent variable");
        }
        std::vector<std::string> idx;
        if (accept(';') && !peek(']')) {
            do {
                std::size_t iat = pos_;
                std::string v = ident();
                const SymbolInfo* vi = table_.find(v);
                if (!vi || vi->kind != SymbolKind::Indep) {
                    pos_ = iat;
                    unknown(v, "independent variable");
                }
                idx.push_back(v);
            } while (accept(','));
        }
        expect(']');
        return jet(dep, std::move(idx));
    }

    [[noreturn]] void unknown(const std::string& name, const char* what) {
        std::string msg = "unknown identifier '" + name + "' (expected " + what + "); declared symbols:";
        for (const auto& n : table_.names()) msg += " " + n;
        throw ParseError(pos_, msg);
    }

    Expr atom() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char ch = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return number();
        if (accept('(')) {
            Expr e = expr();
            expect(')');
            return e;
        }
        std::size_t at = pos_;
        std::string id = ident();
        if (id == "u" && peek('[')) return jetvar();
        static const std::map<std::string, Fn> builtins{
            {"exp", Fn::Exp}, {"ln", Fn::Ln}, {"tanh", Fn::Tanh}, {"arctanh", Fn::Arctanh}};
        if (auto it = builtins.find(id); it != builtins.end() && peek('(')) {
            expect('(');
            Expr a = expr();
            expect(')');
            return kernel(it->second, a);
        }
        if (id == "sqrt" && peek('(')) {
            expect('(');
            Expr a = expr();
            expect(')');
            return sqrt(a);
        }
        const SymbolInfo* info = table_.find(id);
        if (!info) {
            pos_ = at;
            unknown(id, "symbol");
        }
        switch (info->kind) {
            case SymbolKind::Param: return param(id);
            case SymbolKind::Indep: return indep(id);
            case SymbolKind::Dependent: return jet(id);
            case SymbolKind::Function: return call(id);
        }
        fail("unreachable");
    }

    Expr call(const std::string& name) {
        std::vector<int> positions;
        if (accept('[')) {
            do {
                skip();
                std::size_t start = pos_;
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
                if (start == pos_) fail("expected argument position");
                positions.push_back(std::stoi(s_.substr(start, pos_ - start)));
            } while (accept(','));
            expect(']');
        }
        expect('(');
        std::vector<Expr> args{expr()};
        while (accept(',')) args.push_back(expr());
        expect(')');
        std::vector<int> derivs(args.size(), 0);
        for (int p : positions) {
            if (p < 1 || static_cast<std::size_t>(p) > args.size()) fail("derivative position out of range");
            ++derivs[static_cast<std::size_t>(p - 1)];
        }
        return func(name, std::move(args), std::move(derivs));
    }

    const std::string& s_;
    const SymbolTable& table_;
    std::size_t pos_ = 0;
};

// ---- printer ---------------------------------------------------------------

enum Prec { kSum = 0, kProduct = 1, kPowerBase = 3 };

std::string print(const Expr& e, int prec);

std::string print_float(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s = buf;
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string print_number(const Expr& e, int prec) {
    std::string s = e.is_rational() ? e.rational().str() : print_float(e.real());
    bool compound = e.real() < 0 || (e.is_rational() && !e.rational().is_integer());
    if (compound && prec >= kPowerBase) return "(" + s + ")";
    if (e.is_rational() && !e.rational().is_integer() && prec > kProduct) return "(" + s + ")";
    return s;
}

std::string print_exponent(const Expr& x) {
    if ((x.is_rational() && x.rational().is_integer() && x.rational().sign() >= 0) || x.is_atom())
        return print(x, kPowerBase);
    return "(" + print(x, kSum) + ")";
}

std::string print_product(const Expr& e, int prec) {
    Expr coeff = num(1);
    std::vector<Expr> numer, denom;
    auto take = [&](const Expr& f) {
        if (f.is_number()) {
            coeff = f;
            return;
        }
        if (f.is(Kind::Power) && leading_negative(f.exponent()))
            denom.push_back(pow(f.base(), negate(f.exponent())));
        else
            numer.push_back(f);
    };
    if (e.is(Kind::Product))
        for (const auto& f : e.ops()) take(f);
    else
        take(e);

    bool negative = coeff.real() < 0;
    if (negative) coeff = -coeff;
    std::vector<std::string> top, bottom;
    if (coeff.is_rational()) {
        if (coeff.rational().num() != 1) top.push_back(std::to_string(coeff.rational().num()));
        if (coeff.rational().den() != 1) bottom.push_back(std::to_string(coeff.rational().den()));
    } else {
        top.push_back(print_float(coeff.real()));
    }
    for (const auto& f : numer) top.push_back(print(f, kProduct + 1));
    for (const auto& f : denom) bottom.push_back(print(f, kProduct + 1));

    std::string s;
    for (std::size_t i = 0; i < top.size(); ++i) s += (i ? "*" : "") + top[i];
    if (top.empty()) s = "1";
    if (!bottom.empty()) {
        std::string b;
        for (std::size_t i = 0; i < bottom.size(); ++i) b += (i ? "*" : "") + bottom[i];
        bool single = bottom.size() == 1 && b.find_first_of("*/") == std::string::npos;
        s += single ? "/" + b : "/(" + b + ")";
    }
    if (negative) s = "-" + s;
    if (prec > kProduct && (negative || !bottom.empty() || top.size() > 1)) return "(" + s + ")";
    return s;
}

std::string print(const Expr& e, int prec) {
    switch (e.kind()) {
        case Kind::Rational:
        case Kind::Float:
            return print_number(e, prec);
        case Kind::Param:
        case Kind::Indep:
            return e.name();
        case Kind::Jet: {
            if (e.index().empty()) return e.name();
            std::string s = "u[" + e.name() + ";";
            for (std::size_t i = 0; i < e.index().size(); ++i) s += (i ? "," : " ") + e.index()[i];
            return s + "]";
        }
        case Kind::Func: {
            std::string s = e.name();
            std::string pos;
            for (std::size_t i = 0; i < e.derivs().size(); ++i)
                for (int k = 0; k < e.derivs()[i]; ++k) pos += (pos.empty() ? "" : ",") + std::to_string(i + 1);
            if (!pos.empty()) s += "[" + pos + "]";
            s += "(";
            for (std::size_t i = 0; i < e.ops().size(); ++i) s += (i ? "," : "") + print(e.op(i), kSum);
            return s + ")";
        }
        case Kind::Kernel:
            return std::string(fn_name(e.fn())) + "(" + print(e.op(0), kSum) + ")";
        case Kind::Power: {
            if (leading_negative(e.exponent())) return print_product(e, prec);
            const Expr& b = e.base();
            bool bare = b.is_atom() || b.is(Kind::Func) || b.is(Kind::Kernel) ||
                        (b.is_rational() && b.rational().is_integer() && b.rational().sign() > 0);
            std::string s = (bare ? print(b, kPowerBase) : "(" + print(b, kSum) + ")") + "^" + print_exponent(e.exponent());
            return s;
        }
        case Kind::Product:
            return print_product(e, prec);
        case Kind::Sum: {
            std::string s;
            for (std::size_t i = 0; i < e.ops().size(); ++i) {
                const Expr& t = e.op(i);
                if (i == 0)
                    s = print(t, kSum + 1);
                else if (leading_negative(t))
                    s += " - " + print(-t, kSum + 1);
                else
                    s += " + " + print(t, kSum + 1);
            }
            return prec > kSum ? "(" + s + ")" : s;
        }
    }
    return "?";
}

}  // namespace

Expr parse(const std::string& text, const SymbolTable& table) { return Parser(text, table).run(); }

std::string to_string(const Expr& e) { return print(e, kSum); }

std::string Expr::str() const { return to_string(*this); }

}  // namespace lps
