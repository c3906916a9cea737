#pragma once

// Random expression generator shared by the property tests and the acceptance
// binary. Expressions stay small and well scaled on the default sampling
// ranges so that finite differences and numeric comparison are meaningful.

#include <random>
#include <vector>

#include "lps/algebra.hpp"

namespace fuzz {

using lps::Expr;

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    std::mt19937_64& rng() { return rng_; }

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

    Expr leaf() {
        static const std::vector<Expr> syms = {lps::indep("x"),     lps::indep("t"),   lps::param("alpha"),
                                               lps::param("V0"),    lps::jet("Psi"),   lps::jet("Psi", {"x"}),
                                               lps::jet("Phi"),     lps::indep("tau")};
        if (pick(3) == 0) {
            int n = pick(7) - 3;
            int d = 1 + pick(3);
            return lps::num(n == 0 ? 1 : n, d);
        }
        return syms[static_cast<std::size_t>(pick(static_cast<int>(syms.size())))];
    }

    Expr expr(int depth) {
        if (depth <= 0) return leaf();
        switch (pick(9)) {
            case 0:
            case 1:
                return expr(depth - 1) + expr(depth - 1);
            case 2:
            case 3:
                return expr(depth - 1) * expr(depth - 1);
            case 4:
                return expr(depth - 1) - expr(depth - 1);
            case 5:
                return lps::pow(expr(depth - 1), lps::num(pick(3) + 2));
            case 6: {
                // positive base for reciprocal and fractional powers
                Expr base = lps::num(2) + lps::pow(expr(depth - 1), lps::num(2));
                static const lps::Rational ex[] = {lps::Rational(-1), lps::Rational(1, 2), lps::Rational(-1, 2),
                                                   lps::Rational(3, 2)};
                return lps::pow(base, lps::num(ex[pick(4)]));
            }
            case 7: {
                Expr small = lps::num(1, 4) * expr(depth - 1);
                switch (pick(3)) {
                    case 0: return lps::exp(small);
                    case 1: return lps::tanh(small);
                    default: return lps::ln(lps::num(1) + lps::pow(small, lps::num(2)));
                }
            }
            default:
                return leaf();
        }
    }

    lps::Point point(const std::vector<Expr>& vars) {
        lps::Point p;
        for (const auto& v : vars) {
            auto [lo, hi] = lps::SymbolTable::defaults().range(v);
            p[v] = std::uniform_real_distribution<double>(lo, hi)(rng_);
        }
        return p;
    }

private:
    std::mt19937_64 rng_;
};

/// Evaluates e at p, reporting failure instead of throwing.
inline bool try_eval(const Expr& e, const lps::Point& p, double& out) {
    try {
        out = lps::eval(e, p);
        return std::isfinite(out);
    } catch (const lps::DomainError&) {
        return false;
    }
}

}  // namespace fuzz
