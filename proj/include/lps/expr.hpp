#pragma once

#include <compare>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lps/rational.hpp"

namespace lps {

/// Node kinds, declared in canonical order: every node of an earlier kind
/// sorts before every node of a later one.
enum class Kind : std::uint8_t {
    Rational,
    Float,
    Param,
    Indep,
    Jet,
    Func,
    Kernel,
    Power,
    Product,
    Sum,
};

enum class Fn : std::uint8_t { Exp, Ln, Tanh, Arctanh };

const char* fn_name(Fn f);

class Expr;
struct Node;

class Expr {
public:
    Expr();  // the rational zero
    template <std::integral T>
    Expr(T v) : Expr(Rational(static_cast<std::int64_t>(v))) {}  // NOLINT
    Expr(Rational q);  // NOLINT
    explicit Expr(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

    const Node& node() const { return *n_; }
    Kind kind() const;
    std::size_t hash() const;

    bool is(Kind k) const { return kind() == k; }
    bool is_rational() const { return is(Kind::Rational); }
    bool is_number() const { return is(Kind::Rational) || is(Kind::Float); }
    bool is_symbol() const { return is(Kind::Param) || is(Kind::Indep); }
    bool is_atom() const { return is_symbol() || is(Kind::Jet); }
    bool is_zero() const;
    bool is_one() const;
    bool is_fn(Fn f) const;

    const Rational& rational() const;
    double real() const;  // value of a Rational or Float node
    const std::string& name() const;
    const std::vector<std::string>& index() const;  // jet multi-index, sorted
    Fn fn() const;
    std::span<const Expr> ops() const;
    const Expr& op(std::size_t i) const;
    const std::vector<int>& derivs() const;  // per-argument derivative counts of a Func

    // Power accessors; other nodes report themselves with exponent 1.
    const Expr& base() const;
    Expr exponent() const;

    std::string str() const;

private:
    std::shared_ptr<const Node> n_;
};

struct Node {
    Kind kind = Kind::Rational;
    std::size_t hash = 0;
    Rational q;
    double f = 0.0;
    std::string name;
    std::vector<std::string> index;
    Fn fn = Fn::Exp;
    std::vector<Expr> ops;
    std::vector<int> derivs;
};

/// Total order used for canonical sorting.
std::strong_ordering compare(const Expr& a, const Expr& b);
bool operator==(const Expr& a, const Expr& b);
inline bool operator<(const Expr& a, const Expr& b) { return compare(a, b) < 0; }

struct ExprHash {
    std::size_t operator()(const Expr& e) const { return e.hash(); }
};

// ---- smart constructors -------------------------------------------------

Expr num(Rational q);
Expr num(std::int64_t n, std::int64_t d);
Expr flt(double v);
Expr param(const std::string& name);
Expr indep(const std::string& name);
Expr jet(const std::string& dep, std::vector<std::string> index = {});
/// Opaque function of the given arguments, differentiated derivs[i] times in argument i.
Expr func(const std::string& name, std::vector<Expr> args, std::vector<int> derivs = {});

Expr exp(const Expr& a);
Expr ln(const Expr& a);
Expr tanh(const Expr& a);
Expr arctanh(const Expr& a);
Expr kernel(Fn f, const Expr& a);

Expr pow(const Expr& b, const Expr& e);
Expr mul(std::vector<Expr> factors);
Expr add(std::vector<Expr> terms);
Expr sqrt(const Expr& a);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
/// −a with the sign distributed over the terms of a sum.
Expr negate(const Expr& a);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr& operator+=(Expr& a, const Expr& b);
Expr& operator-=(Expr& a, const Expr& b);
Expr& operator*=(Expr& a, const Expr& b);

/// Splits a term into numeric coefficient and the remaining monomial.
std::pair<Expr, Expr> split_coeff(const Expr& term);

/// Numeric coefficient of a sum's leading term (or of the term itself) is negative.
bool leading_negative(const Expr& e);

/// Jet multi-index order |J|; 0 for non-jets.
inline std::size_t jet_order(const Expr& e) { return e.is(Kind::Jet) ? e.index().size() : 0; }

}  // namespace lps
