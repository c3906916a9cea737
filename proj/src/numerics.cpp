#include "lps/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace lps {

// ---- first-order systems ---------------------------------------------------

Expr FirstOrderSystem::state(std::size_t i) { return param("y" + std::to_string(i)); }

FirstOrderSystem::FirstOrderSystem(std::string v, std::vector<Expr> f, Bindings p)
    : var(std::move(v)), rhs(std::move(f)), params(std::move(p)) {
    if (rhs.empty()) throw std::invalid_argument("empty first-order system");
    for (const auto& e : rhs)
        for (const auto& a : atoms(e)) {
            if (a == indep(var)) continue;
            bool is_state = false;
            for (std::size_t i = 0; i < rhs.size(); ++i) is_state = is_state || a == state(i);
            if (!is_state) throw std::invalid_argument("unbound symbol " + a.str() + " in right-hand side " + e.str());
        }
}

FirstOrderSystem to_first_order(const ReducedODE& ode, const Bindings& params) {
    if (contains(ode.rhs, ode.top()))
        throw std::invalid_argument("equation " + ode.tag + " is not in solved form");
    Bindings states;
    for (std::size_t k = 0; k < ode.order; ++k) states[jet("psi", MultiIndex(k, ode.var))] = FirstOrderSystem::state(k);
    Expr f = substitute(substitute(ode.rhs, params), states);
    for (const auto& a : atoms(f))
        if (a.is(Kind::Jet)) throw std::invalid_argument("equation " + ode.tag + " is not in solved form: " + a.str());
    std::vector<Expr> rhs;
    for (std::size_t k = 1; k < ode.order; ++k) rhs.push_back(FirstOrderSystem::state(k));
    rhs.push_back(f);
    return FirstOrderSystem(ode.var, std::move(rhs), params);
}

// ---- Dormand–Prince 5(4) ---------------------------------------------------

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

using Vec = std::vector<double>;

class Rhs {
public:
    explicit Rhs(const FirstOrderSystem& sys) : n_(sys.dimension()), slots_(n_ + 1) {
        std::vector<Expr> names{indep(sys.var)};
        for (std::size_t i = 0; i < n_; ++i) names.push_back(FirstOrderSystem::state(i));
        for (const auto& e : sys.rhs) f_.emplace_back(e, names);
    }
    std::size_t size() const { return n_; }
    void operator()(double t, const Vec& y, Vec& out) {
        slots_[0] = t;
        std::copy(y.begin(), y.end(), slots_.begin() + 1);
        for (std::size_t i = 0; i < n_; ++i) out[i] = f_[i](slots_);
    }

private:
    std::size_t n_;
    std::vector<Compiled> f_;
    Vec slots_;
};

struct Step {
    Vec y1, k2, k3, k4, k5, k6, k7;
    explicit Step(std::size_t n) : y1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n) {}
};

/// One step from (t, y) with k1 = f(t, y); fills y1 and k7 = f(t + h, y1).
void dopri_step(Rhs& f, double t, const Vec& y, const Vec& k1, double h, Step& s) {
    const std::size_t n = y.size();
    Vec tmp(n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    f(t + c2 * h, tmp, s.k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * s.k2[i]);
    f(t + c3 * h, tmp, s.k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a41 * k1[i] + a42 * s.k2[i] + a43 * s.k3[i]);
    f(t + c4 * h, tmp, s.k4);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a51 * k1[i] + a52 * s.k2[i] + a53 * s.k3[i] + a54 * s.k4[i]);
    f(t + c5 * h, tmp, s.k5);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a61 * k1[i] + a62 * s.k2[i] + a63 * s.k3[i] + a64 * s.k4[i] + a65 * s.k5[i]);
    f(t + h, tmp, s.k6);
    for (std::size_t i = 0; i < n; ++i)
        s.y1[i] = y[i] + h * (a71 * k1[i] + a73 * s.k3[i] + a74 * s.k4[i] + a75 * s.k5[i] + a76 * s.k6[i]);
    f(t + h, s.y1, s.k7);
}

bool finite(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double initial_step(Rhs& f, double t, const Vec& y, const Vec& k1, double dir, double span, const IntegrateOptions& o) {
    const std::size_t n = y.size();
    double dy = 0, df = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double sc = o.atol + o.rtol * std::abs(y[i]);
        dy = std::max(dy, std::abs(y[i]) / sc);
        df = std::max(df, std::abs(k1[i]) / sc);
    }
    double h = (dy < 1e-5 || df < 1e-5) ? 1e-6 : 0.01 * dy / df;
    h = std::min(h, span);
    Vec y1(n), k2(n);
    for (std::size_t i = 0; i < n; ++i) y1[i] = y[i] + dir * h * k1[i];
    try {
        f(t + dir * h, y1, k2);
    } catch (const DomainError&) {
        return h;
    }
    double d2 = 0;
    for (std::size_t i = 0; i < n; ++i) d2 = std::max(d2, std::abs(k2[i] - k1[i]) / (o.atol + o.rtol * std::abs(y[i])));
    d2 /= h;
    double m = std::max(df, d2);
    double h1 = m <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / m, 1.0 / kDopriOrder);
    return std::min({100 * h, h1, span});
}

std::string at_point(const std::string& var, double t) {
    std::ostringstream os;
    os.precision(17);
    os << " at " << var << " = " << t;
    return os.str();
}

}  // namespace

std::string to_string(Trajectory::End e) {
    switch (e) {
        case Trajectory::End::Reached: return "reached end";
        case Trajectory::End::StepUnderflow: return "step underflow";
        case Trajectory::End::StateOverflow: return "state overflow";
        case Trajectory::End::DomainError: return "domain error";
    }
    return "?";
}

bool Trajectory::covers(double t) const {
    if (grid.empty()) return false;
    double lo = std::min(grid.front(), grid.back()), hi = std::max(grid.front(), grid.back());
    return t >= lo && t <= hi;
}

std::vector<double> Trajectory::at(double t) const {
    if (!covers(t)) throw std::out_of_range("point outside the integrated range");
    if (grid.size() == 1) return states.front();
    const bool fwd = grid.back() > grid.front();
    auto it = fwd ? std::upper_bound(grid.begin(), grid.end(), t)
                  : std::upper_bound(grid.begin(), grid.end(), t, std::greater<double>());
    std::size_t i = static_cast<std::size_t>(it - grid.begin());
    i = std::clamp<std::size_t>(i, 1, grid.size() - 1) - 1;
    const auto& r = dense[i];
    double h = grid[i + 1] - grid[i];
    double th = (t - grid[i]) / h, th1 = 1 - th;
    std::vector<double> y(r[0].size());
    for (std::size_t k = 0; k < y.size(); ++k)
        y[k] = r[0][k] + th * (r[1][k] + th1 * (r[2][k] + th * (r[3][k] + th1 * r[4][k])));
    return y;
}

Trajectory integrate(const FirstOrderSystem& sys, const std::vector<double>& y0, std::array<double, 2> span,
                     const IntegrateOptions& opt) {
    const std::size_t n = sys.dimension();
    if (y0.size() != n) throw std::invalid_argument("initial state has the wrong dimension");
    if (!std::isfinite(span[0]) || !std::isfinite(span[1]) || span[0] == span[1])
        throw std::invalid_argument("integration span must be finite and non-empty");
    if (!(opt.rtol > 0) || !(opt.atol > 0)) throw std::invalid_argument("tolerances must be positive");
    if (!finite(y0)) throw std::invalid_argument("initial state is not finite");

    const double a = span[0], b = span[1], dir = b > a ? 1.0 : -1.0;
    std::vector<double> samples = opt.samples;
    for (double s : samples)
        if ((s - a) * dir < 0 || (s - b) * dir > 0) throw std::invalid_argument("sample point outside the span");
    std::sort(samples.begin(), samples.end(), [dir](double x, double y) { return x * dir < y * dir; });

    Trajectory tr;
    tr.grid.push_back(a);
    tr.states.push_back(y0);
    tr.error.push_back(0.0);
    std::size_t next = 0;
    while (next < samples.size() && samples[next] == a) {
        tr.sample_grid.push_back(a);
        tr.samples.push_back(y0);
        ++next;
    }

    Rhs f(sys);
    Vec y = y0, k1(n);
    double t = a;
    try {
        f(t, y, k1);
    } catch (const DomainError& e) {
        tr.end = Trajectory::End::DomainError;
        tr.message = e.what() + at_point(sys.var, t);
        return tr;
    }
    double h = opt.h0 > 0 ? opt.h0 : initial_step(f, t, y, k1, dir, std::abs(b - a), opt);
    double facmax = 10.0;
    Step s(n);

    for (std::size_t steps = 0; (b - t) * dir > 0; ++steps) {
        if (steps >= opt.max_steps) {
            tr.end = Trajectory::End::StepUnderflow;
            tr.message = "step budget exhausted" + at_point(sys.var, t);
            return tr;
        }
        if (h < 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
            tr.end = Trajectory::End::StepUnderflow;
            tr.message = "step size underflow" + at_point(sys.var, t);
            return tr;
        }
        bool last = (t + dir * h - b) * dir >= 0;
        double hs = last ? (b - t) : dir * h;

        double err;
        try {
            dopri_step(f, t, y, k1, hs, s);
            err = 0;
            for (std::size_t i = 0; i < n; ++i) {
                double e = hs * (e1 * k1[i] + e3 * s.k3[i] + e4 * s.k4[i] + e5 * s.k5[i] + e6 * s.k6[i] + e7 * s.k7[i]);
                double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(s.y1[i]));
                err = std::max(err, std::abs(e) / sc);
            }
            if (!std::isfinite(err) || !finite(s.y1) || !finite(s.k7)) err = std::numeric_limits<double>::infinity();
        } catch (const DomainError& e) {
            h *= 0.25;
            facmax = 1.0;
            if (h < 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
                tr.end = Trajectory::End::DomainError;
                tr.message = e.what() + at_point(sys.var, t);
                return tr;
            }
            continue;
        }

        if (err > 1.0) {
            h *= std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -1.0 / kDopriOrder)) : 0.1;
            facmax = 1.0;
            continue;
        }

        std::array<std::vector<double>, 5> rc;
        rc[0] = y;
        rc[1].resize(n);
        rc[2].resize(n);
        rc[3].resize(n);
        rc[4].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double ydiff = s.y1[i] - y[i], bspl = hs * k1[i] - ydiff;
            rc[1][i] = ydiff;
            rc[2][i] = bspl;
            rc[3][i] = ydiff - hs * s.k7[i] - bspl;
            rc[4][i] = hs * (d1 * k1[i] + d3 * s.k3[i] + d4 * s.k4[i] + d5 * s.k5[i] + d6 * s.k6[i] + d7 * s.k7[i]);
        }
        double t1 = last ? b : t + hs;
        while (next < samples.size() && (samples[next] - t1) * dir <= 0) {
            double th = (samples[next] - t) / hs, th1 = 1 - th;
            Vec ys(n);
            for (std::size_t i = 0; i < n; ++i)
                ys[i] = rc[0][i] + th * (rc[1][i] + th1 * (rc[2][i] + th * (rc[3][i] + th1 * rc[4][i])));
            tr.sample_grid.push_back(samples[next]);
            tr.samples.push_back(std::move(ys));
            ++next;
        }
        tr.dense.push_back(std::move(rc));
        t = t1;
        y = s.y1;
        k1 = s.k7;
        tr.grid.push_back(t);
        tr.states.push_back(y);
        tr.error.push_back(err);

        for (double v : y)
            if (std::abs(v) > opt.overflow) {
                tr.end = Trajectory::End::StateOverflow;
                tr.message = "state exceeded " + std::to_string(opt.overflow) + at_point(sys.var, t);
                return tr;
            }

        double fac = err == 0 ? facmax : std::min(facmax, std::max(0.2, 0.9 * std::pow(err, -1.0 / kDopriOrder)));
        h = std::abs(hs) * fac;
        facmax = 10.0;
    }
    tr.end = Trajectory::End::Reached;
    return tr;
}

std::vector<double> integrate_fixed(const FirstOrderSystem& sys, const std::vector<double>& y0,
                                    std::array<double, 2> span, std::size_t n) {
    if (n == 0) throw std::invalid_argument("need at least one step");
    if (y0.size() != sys.dimension()) throw std::invalid_argument("initial state has the wrong dimension");
    Rhs f(sys);
    Vec y = y0, k1(y.size());
    Step s(y.size());
    double h = (span[1] - span[0]) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        double t = span[0] + static_cast<double>(i) * h;
        f(t, y, k1);
        dopri_step(f, t, y, k1, h, s);
        y = s.y1;
    }
    return y;
}

// ---- polynomial roots ------------------------------------------------------

std::complex<double> poly_eval(const std::vector<double>& c, std::complex<double> z) {
    std::complex<double> r = 0;
    for (double a : c) r = r * z + a;
    return r;
}

namespace {

using cplx = std::complex<double>;

std::vector<double> derivative(const std::vector<double>& c) {
    std::vector<double> d;
    const std::size_t n = c.size() - 1;
    for (std::size_t i = 0; i < n; ++i) d.push_back(c[i] * static_cast<double>(n - i));
    return d;
}

/// Σ|aᵢ||z|^(n−i): the scale against which |p(z)| is judged.
double magnitude(const std::vector<double>& c, cplx z) {
    double r = 0, az = std::abs(z);
    for (double a : c) r = r * az + std::abs(a);
    return r;
}

cplx newton(const std::vector<double>& p, cplx z, int iters = 8) {
    auto dp = derivative(p);
    for (int k = 0; k < iters; ++k) {
        cplx d = poly_eval(dp, z);
        if (d == 0.0) break;
        cplx z1 = z - poly_eval(p, z) / d;
        if (!std::isfinite(z1.real()) || !std::isfinite(z1.imag())) break;
        if (std::abs(poly_eval(p, z1)) > std::abs(poly_eval(p, z))) break;
        z = z1;
    }
    return z;
}

bool close(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace

PolyRoots polyroots(const std::vector<double>& coeffs) {
    if (coeffs.size() < 2) throw std::invalid_argument("polynomial of degree zero");
    if (coeffs.size() > 5) throw std::invalid_argument("polyroots handles degree at most 4");
    for (double a : coeffs)
        if (!std::isfinite(a)) throw std::invalid_argument("non-finite coefficient");
    double cmax = 0;
    for (double a : coeffs) cmax = std::max(cmax, std::abs(a));
    if (coeffs[0] == 0.0 || std::abs(coeffs[0]) <= 1e-14 * cmax)
        throw std::invalid_argument("degenerate leading coefficient");

    const std::size_t n = coeffs.size() - 1;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) C(0, static_cast<Eigen::Index>(j)) = -coeffs[j + 1] / coeffs[0];
    for (std::size_t i = 1; i < n; ++i) C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
    std::vector<cplx> eig;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) eig.push_back(es.eigenvalues()[i]);

    // groups of eigenvalues that may be one multiple root
    std::vector<int> group(n, -1);
    int groups = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (group[i] >= 0) continue;
        group[i] = groups;
        for (bool grew = true; grew;) {
            grew = false;
            for (std::size_t j = 0; j < n; ++j)
                if (group[j] < 0)
                    for (std::size_t k = 0; k < n; ++k)
                        if (group[k] == groups && close(eig[j], eig[k], 1e-3)) {
                            group[j] = groups;
                            grew = true;
                            break;
                        }
        }
        ++groups;
    }

    std::vector<cplx> roots;
    for (int g = 0; g < groups; ++g) {
        std::vector<cplx> members;
        for (std::size_t i = 0; i < n; ++i)
            if (group[i] == g) members.push_back(eig[i]);
        const std::size_t m = members.size();
        bool merged = false;
        if (m > 1) {
            cplx c = std::accumulate(members.begin(), members.end(), cplx(0)) / static_cast<double>(m);
            std::vector<std::vector<double>> ds{coeffs};
            for (std::size_t k = 1; k < m; ++k) ds.push_back(derivative(ds.back()));
            c = newton(ds[m - 1], c, 20);
            merged = true;
            for (std::size_t k = 0; k < m && merged; ++k)
                merged = std::abs(poly_eval(ds[k], c)) <= 1e-11 * magnitude(ds[k], c);
            if (merged) {
                if (std::abs(c.imag()) <= 1e-12 * std::max(1.0, std::abs(c.real()))) c = c.real();
                roots.insert(roots.end(), m, c);
            }
        }
        if (!merged)
            for (cplx z : members) {
                z = newton(coeffs, z);
                cplx zr(z.real(), 0.0);
                if (z.imag() != 0.0 && std::abs(z.imag()) <= 1e-12 * std::max(1.0, std::abs(z.real())) &&
                    std::abs(poly_eval(coeffs, zr)) <= std::abs(poly_eval(coeffs, z)))
                    z = zr;
                roots.push_back(z);
            }
    }
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });

    PolyRoots out;
    out.roots = roots;
    for (cplx z : roots) {
        auto it = std::find_if(out.clusters.begin(), out.clusters.end(),
                               [&](const RootCluster& c) { return close(c.value, z, 1e-8); });
        if (it == out.clusters.end())
            out.clusters.push_back({z, 1});
        else
            ++it->multiplicity;
    }
    return out;
}

std::vector<std::complex<double>> poly_from_roots(const std::vector<std::complex<double>>& roots) {
    std::vector<cplx> c{1.0};
    for (cplx r : roots) {
        c.push_back(0.0);
        for (std::size_t i = c.size() - 1; i > 0; --i) c[i] -= r * c[i - 1];
    }
    return c;
}

// ---- branch comparison -----------------------------------------------------

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs at least two points");
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0) throw std::invalid_argument("slope fit needs distinct abscissae");
    return sxy / sxx;
}

std::vector<double> initial_state(const Expr& sol, const std::string& var, double at, std::size_t dimension) {
    std::vector<double> y;
    Expr d = sol;
    Point p{{indep(var), at}};
    for (std::size_t k = 0; k < dimension; ++k) {
        y.push_back(eval(d, p));
        d = diff(d, indep(var));
    }
    return y;
}

namespace {

std::vector<double> uniform(std::array<double, 2> w, std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = n == 1 ? w[0] : w[0] + (w[1] - w[0]) * static_cast<double>(i) / static_cast<double>(n - 1);
    return x;
}

}  // namespace

std::pair<double, double> residual_slopes(const AsymptoticBranch& b, std::array<double, 2> window, std::size_t n) {
    if (!(window[1] > window[0])) throw std::invalid_argument("empty window");
    std::vector<Expr> slot{indep("tau")};
    Compiled R(full_residual(b), slot), B(b.expr, slot);
    std::vector<double> x, la, lr;
    for (double t : uniform(window, n)) {
        double r = std::abs(R(std::span<const double>(&t, 1)));
        double v = std::abs(B(std::span<const double>(&t, 1)));
        if (!(r > 0) || !std::isfinite(r) || !(v > 0)) continue;
        x.push_back(t);
        la.push_back(std::log(r));
        lr.push_back(std::log(r / v));
    }
    return {fit_slope(x, la), fit_slope(x, lr)};
}

CompareReport compare(const AsymptoticBranch& b, const Trajectory& traj, std::array<double, 2> window, std::size_t n) {
    if (!(window[1] > window[0])) throw std::invalid_argument("empty window");
    if (!traj.covers(window[0])) throw std::invalid_argument("window starts outside the trajectory");
    CompareReport rep;
    rep.from = window[0];
    rep.to = window[1];
    rep.complete = traj.covers(window[1]);
    rep.reached = window[0];
    std::vector<Expr> slot{indep("tau")};
    Compiled R(full_residual(b), slot), B(b.expr, slot);
    for (double t : uniform(window, n)) {
        if (!traj.covers(t)) break;
        double bv = B(std::span<const double>(&t, 1));
        double rv = R(std::span<const double>(&t, 1));
        double yv = traj.at(t)[0];
        double d = std::abs(yv - bv);
        rep.max_abs = std::max(rep.max_abs, d);
        rep.max_rel = std::max(rep.max_rel, bv != 0 ? d / std::abs(bv) : d);
        rep.rows.push_back({t, bv, yv, rv});
        rep.reached = t;
        ++rep.points;
    }
    rep.reached = rep.complete ? window[1] : std::max(traj.grid.front(), traj.grid.back());
    std::tie(rep.slope, rep.rel_slope) = residual_slopes(b, window, n);
    return rep;
}

}  // namespace lps
