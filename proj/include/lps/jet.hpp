#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lps/expr.hpp"

namespace lps {

using MultiIndex = std::vector<std::string>;

struct JetSpace {
    std::vector<std::string> indep{"t", "x"};
    std::vector<std::string> dep{"Psi", "Phi"};
    std::size_t max_order = 8;
};

struct MaxOrderExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// D_i = ∂_i + Σ u_{J∪i} ∂_{u_J}, summed over the jet variables present in e.
Expr total_derivative(const Expr& e, const std::string& i, const JetSpace& space = {});
/// Applies D_j for each entry of J in turn.
Expr total_derivative(const Expr& e, const MultiIndex& J, const JetSpace& space = {});

/// Point vector field ξ^i ∂_i + η^A ∂_{u^A}; absent components are zero.
struct VectorField {
    std::string label;
    std::map<std::string, Expr> xi;
    std::map<std::string, Expr> eta;

    Expr xi_of(const std::string& i) const;
    Expr eta_of(const std::string& a) const;
    /// Action on a function of the base coordinates.
    Expr apply(const Expr& f) const;
};

VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator*(const Expr& k, const VectorField& a);
/// Lie bracket [X, Y], components simplified.
VectorField commutator(const VectorField& X, const VectorField& Y);
bool same_field(const VectorField& a, const VectorField& b);

/// η^A_{[J]} by the recursion η_{[J∪j]} = D_j η_{[J]} − Σ_k u^A_{J∪k} D_j ξ^k.
Expr prolong_coefficient(const VectorField& X, const std::string& A, const MultiIndex& J, const JetSpace& space = {});

/// Prolongation up to a fixed order with every coefficient computed up front,
/// so a constructed object is immutable and safe to share between threads.
class ProlongedVectorField {
public:
    ProlongedVectorField(VectorField X, std::size_t order, JetSpace space = {});

    const VectorField& base() const { return X_; }
    std::size_t order() const { return order_; }
    const Expr& coefficient(const std::string& A, const MultiIndex& J) const;
    /// X^{[n]}(H).
    Expr apply(const Expr& H) const;

private:
    VectorField X_;
    std::size_t order_;
    JetSpace space_;
    std::map<std::pair<std::string, MultiIndex>, Expr> coeff_;
};

ProlongedVectorField prolong(const VectorField& X, std::size_t order, const JetSpace& space = {});

/// All sorted multi-indices over vars with length exactly n.
std::vector<MultiIndex> multi_indices(const std::vector<std::string>& vars, std::size_t n);

}  // namespace lps
