#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "lps/expr.hpp"
#include "lps/parse.hpp"

namespace lps {

inline constexpr std::size_t kDefaultExpansionLimit = 20000;

/// Thrown by expand() when an intermediate sum would exceed the term limit.
struct ExpansionLimit : std::runtime_error {
    explicit ExpansionLimit(std::size_t n) : std::runtime_error("expansion exceeded " + std::to_string(n) + " terms") {}
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnboundSymbol : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Keys are atoms (parameters, independent variables, jet variables) or
/// opaque function nodes.
using Bindings = std::map<Expr, Expr>;
using Point = std::unordered_map<Expr, double, ExprHash>;

/// Rebuilds a node of the same kind around new operands via the smart constructors.
Expr rebuild(const Expr& e, std::vector<Expr> ops);

/// Calls f on every subexpression, parents before children.
void visit(const Expr& e, const std::function<void(const Expr&)>& f);
bool contains(const Expr& e, const Expr& atom);
/// Parameters, independent variables, jet variables and function nodes occurring in e, sorted.
std::vector<Expr> atoms(const Expr& e);

/// Partial derivative with every other symbol held fixed.
Expr diff(const Expr& e, const Expr& s);
Expr diff(const Expr& e, const Expr& s, int times);

/// Simultaneous substitution.
Expr substitute(const Expr& e, const Bindings& b);

/// Distributes products over sums and expands positive integer powers of sums,
/// recursively inside kernel arguments, exponents and function arguments.
Expr expand(const Expr& e, std::size_t limit = kDefaultExpansionLimit);

/// Canonical expanded form; simplify(simplify(e)) == simplify(e).
Expr simplify(const Expr& e, std::size_t limit = kDefaultExpansionLimit);

/// Rewrites tanh and arctanh through exp and ln.
Expr to_exp_log(const Expr& e);

/// Exact zero test: exp/log rewrite, expansion and clearing of common
/// denominators. Throws ExpansionLimit.
bool is_zero_exact(const Expr& e, std::size_t limit = kDefaultExpansionLimit);

struct EqualOptions {
    std::uint64_t seed = 20240601;
    int points = 64;
    double tol = 1e-9;
    std::size_t limit = kDefaultExpansionLimit;
    const SymbolTable* table = nullptr;  // defaults() when null
};

struct EqualResult {
    bool equal = false;
    bool probabilistic = false;  // decided by random evaluation
    double max_dev = 0.0;        // largest scaled deviation seen when probabilistic
    explicit operator bool() const { return equal; }
};

EqualResult equal(const Expr& a, const Expr& b, const EqualOptions& opt = {});

/// Evaluation at random points drawn from the symbol table's safe ranges.
/// Returns the largest |e| seen; points outside the domain are redrawn.
double max_abs_random(const Expr& e, std::uint64_t seed, int points, const SymbolTable* table = nullptr);

double eval(const Expr& e, const Point& p);

/// Postfix program over a fixed slot layout; evaluation is allocation-free
/// apart from the stack, which is reused.
class Compiled {
public:
    Compiled() = default;
    Compiled(const Expr& e, const std::vector<Expr>& slots);
    double operator()(std::span<const double> slot_values) const;
    const std::string& source() const { return source_; }

private:
    enum class Op : std::uint8_t { Const, Var, Add, Mul, PowInt, Pow, Exp, Ln, Tanh, Atanh };
    struct Instr {
        Op op;
        std::int32_t arg = 0;
        double value = 0.0;
    };
    void emit(const Expr& e, const std::vector<Expr>& slots);
    std::vector<Instr> code_;
    std::string source_;
    mutable std::vector<double> stack_;
};

/// Coefficients of e viewed as a polynomial in the given atoms, after expansion.
/// Each entry is (monomial in vars, coefficient free of vars). Throws
/// std::invalid_argument when a var occurs non-polynomially.
std::vector<std::pair<Expr, Expr>> collect(const Expr& e, const std::vector<Expr>& vars,
                                           std::size_t limit = kDefaultExpansionLimit);

}  // namespace lps
