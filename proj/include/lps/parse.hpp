#pragma once

// Expression grammar accepted by parse() and emitted by Expr::str():
//
//   expr    ::= term { ('+' | '-') term }
//   term    ::= unary { ('*' | '/') unary }
//   unary   ::= '-' unary | power
//   power   ::= atom [ '^' unary ]                      (right associative)
//   atom    ::= number | '(' expr ')' | jetvar | call | ident
//   number  ::= digits [ '.' digits ] [ ('e'|'E') ['+'|'-'] digits ]
//   jetvar  ::= 'u' '[' ident [ ';' [ ident { ',' ident } ] ] ']'
//   call    ::= ('exp'|'ln'|'tanh'|'arctanh'|'sqrt') '(' expr ')'
//             | fname [ '[' int { ',' int } ']' ] '(' expr { ',' expr } ')'
//
// Integers and integer ratios are exact; a literal with '.' or an exponent is
// a float. A bare dependent-variable name is the jet variable with an empty
// multi-index, so `Psi` and `u[Psi]` are the same node. In a call to an
// unknown function the optional bracket lists 1-based argument positions
// that have been differentiated, e.g. `f[1,1](t,x)` is f_tt.

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lps/expr.hpp"

namespace lps {

enum class SymbolKind { Param, Indep, Dependent, Function };

struct SymbolInfo {
    SymbolKind kind = SymbolKind::Param;
    double lo = -2.0;  // safe sampling interval for randomized equality
    double hi = 2.0;
};

class SymbolTable {
public:
    /// Parameters, independent and dependent variables used across the project.
    static const SymbolTable& defaults();

    void declare(const std::string& name, SymbolKind kind, double lo = -2.0, double hi = 2.0);
    const SymbolInfo* find(const std::string& name) const;
    /// Sampling interval for an atom; jets use their dependent variable's entry.
    std::pair<double, double> range(const Expr& atom) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, SymbolInfo> entries_;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, const std::string& msg)
        : std::runtime_error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

Expr parse(const std::string& text, const SymbolTable& table = SymbolTable::defaults());

std::string to_string(const Expr& e);

}  // namespace lps
