#include "lps/jet.hpp"

#include <algorithm>

#include "lps/algebra.hpp"

namespace lps {

namespace {

MultiIndex with(MultiIndex J, const std::string& i) {
    J.push_back(i);
    std::sort(J.begin(), J.end());
    return J;
}

std::vector<Expr> jets_in(const Expr& e) {
    std::vector<Expr> out;
    for (const auto& a : atoms(e))
        if (a.is(Kind::Jet)) out.push_back(a);
    return out;
}

}  // namespace

Expr total_derivative(const Expr& e, const std::string& i, const JetSpace& space) {
    std::vector<Expr> terms{diff(e, indep(i))};
    for (const auto& u : jets_in(e)) {
        if (u.index().size() + 1 > space.max_order)
            throw MaxOrderExceeded("total derivative of " + u.str() + " exceeds jet order " +
                                   std::to_string(space.max_order));
        Expr d = diff(e, u);
        if (!d.is_zero()) terms.push_back(jet(u.name(), with(u.index(), i)) * d);
    }
    return add(std::move(terms));
}

Expr total_derivative(const Expr& e, const MultiIndex& J, const JetSpace& space) {
    Expr r = e;
    for (const auto& j : J) r = expand(total_derivative(r, j, space));
    return r;
}

// ---- vector fields ---------------------------------------------------------

Expr VectorField::xi_of(const std::string& i) const {
    auto it = xi.find(i);
    return it == xi.end() ? num(0) : it->second;
}

Expr VectorField::eta_of(const std::string& a) const {
    auto it = eta.find(a);
    return it == eta.end() ? num(0) : it->second;
}

Expr VectorField::apply(const Expr& f) const {
    std::vector<Expr> terms;
    for (const auto& [i, c] : xi) terms.push_back(c * diff(f, indep(i)));
    for (const auto& [a, c] : eta) terms.push_back(c * diff(f, jet(a)));
    return add(std::move(terms));
}

namespace {

VectorField combine(const VectorField& a, const VectorField& b, const Expr& ka, const Expr& kb) {
    VectorField r;
    auto merge = [&](const std::map<std::string, Expr>& x, const std::map<std::string, Expr>& y,
                     std::map<std::string, Expr>& out) {
        for (const auto& [k, v] : x) out[k] = ka * v;
        for (const auto& [k, v] : y) out[k] = out.count(k) ? out[k] + kb * v : kb * v;
        for (auto it = out.begin(); it != out.end();) {
            it->second = simplify(it->second);
            it = it->second.is_zero() ? out.erase(it) : std::next(it);
        }
    };
    merge(a.xi, b.xi, r.xi);
    merge(a.eta, b.eta, r.eta);
    return r;
}

}  // namespace

VectorField operator+(const VectorField& a, const VectorField& b) {
    VectorField r = combine(a, b, num(1), num(1));
    r.label = a.label + " + " + b.label;
    return r;
}

VectorField operator*(const Expr& k, const VectorField& a) {
    VectorField r = combine(a, {}, k, num(0));
    r.label = "(" + k.str() + ")*(" + a.label + ")";
    return r;
}

VectorField commutator(const VectorField& X, const VectorField& Y) {
    VectorField r;
    r.label = "[" + X.label + ", " + Y.label + "]";
    std::vector<std::string> xs, us;
    for (const auto* f : {&X, &Y}) {
        for (const auto& [k, v] : f->xi) xs.push_back(k);
        for (const auto& [k, v] : f->eta) us.push_back(k);
    }
    for (const auto& i : xs) {
        Expr c = simplify(X.apply(Y.xi_of(i)) - Y.apply(X.xi_of(i)));
        if (!c.is_zero()) r.xi[i] = c;
    }
    for (const auto& a : us) {
        Expr c = simplify(X.apply(Y.eta_of(a)) - Y.apply(X.eta_of(a)));
        if (!c.is_zero()) r.eta[a] = c;
    }
    return r;
}

bool same_field(const VectorField& a, const VectorField& b) {
    VectorField d = combine(a, b, num(1), num(-1));
    for (const auto* m : {&d.xi, &d.eta})
        for (const auto& [k, v] : *m)
            if (!equal(v, num(0))) return false;
    return true;
}

// ---- prolongation ----------------------------------------------------------

std::vector<MultiIndex> multi_indices(const std::vector<std::string>& vars, std::size_t n) {
    std::vector<MultiIndex> out;
    MultiIndex cur;
    std::vector<std::string> sorted = vars;
    std::sort(sorted.begin(), sorted.end());
    auto rec = [&](auto& self, std::size_t start) -> void {
        if (cur.size() == n) {
            out.push_back(cur);
            return;
        }
        for (std::size_t k = start; k < sorted.size(); ++k) {
            cur.push_back(sorted[k]);
            self(self, k);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

namespace {

Expr next_coefficient(const VectorField& X, const std::string& A, const MultiIndex& J, const Expr& eta_J,
                      const std::string& j, const JetSpace& space) {
    std::vector<Expr> terms{total_derivative(eta_J, j, space)};
    for (const auto& k : space.indep) {
        Expr dxi = total_derivative(X.xi_of(k), j, space);
        if (!dxi.is_zero()) terms.push_back(-jet(A, with(J, k)) * dxi);
    }
    return expand(add(std::move(terms)));
}

}  // namespace

Expr prolong_coefficient(const VectorField& X, const std::string& A, const MultiIndex& J, const JetSpace& space) {
    if (J.size() > space.max_order) throw MaxOrderExceeded("prolongation order exceeds jet order");
    MultiIndex sorted = J;
    std::sort(sorted.begin(), sorted.end());
    Expr c = X.eta_of(A);
    MultiIndex cur;
    for (const auto& j : sorted) {
        c = next_coefficient(X, A, cur, c, j, space);
        cur = with(cur, j);
    }
    return c;
}

ProlongedVectorField::ProlongedVectorField(VectorField X, std::size_t order, JetSpace space)
    : X_(std::move(X)), order_(order), space_(std::move(space)) {
    if (order_ > space_.max_order) throw MaxOrderExceeded("prolongation order exceeds jet order");
    for (const auto& A : space_.dep) {
        coeff_[{A, {}}] = X_.eta_of(A);
        for (std::size_t n = 1; n <= order_; ++n)
            for (const auto& J : multi_indices(space_.indep, n)) {
                // J = J' ∪ {last}; J' is already present because J is sorted
                MultiIndex parent(J.begin(), J.end() - 1);
                coeff_[{A, J}] = next_coefficient(X_, A, parent, coeff_.at({A, parent}), J.back(), space_);
            }
    }
}

const Expr& ProlongedVectorField::coefficient(const std::string& A, const MultiIndex& J) const {
    MultiIndex sorted = J;
    std::sort(sorted.begin(), sorted.end());
    auto it = coeff_.find({A, sorted});
    if (it == coeff_.end())
        throw MaxOrderExceeded("no prolongation coefficient for " + A + " of order " + std::to_string(J.size()) +
                               " (prolonged to order " + std::to_string(order_) + ")");
    return it->second;
}

Expr ProlongedVectorField::apply(const Expr& H) const {
    std::vector<Expr> terms;
    for (const auto& i : space_.indep) {
        Expr xi = X_.xi_of(i);
        if (!xi.is_zero()) terms.push_back(xi * diff(H, indep(i)));
    }
    for (const auto& u : jets_in(H)) {
        if (std::find(space_.dep.begin(), space_.dep.end(), u.name()) == space_.dep.end()) continue;
        Expr d = diff(H, u);
        if (!d.is_zero()) terms.push_back(coefficient(u.name(), u.index()) * d);
    }
    return add(std::move(terms));
}

ProlongedVectorField prolong(const VectorField& X, std::size_t order, const JetSpace& space) {
    return ProlongedVectorField(X, order, space);
}

}  // namespace lps
