#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "lps/algebra.hpp"
#include "lps/asymptotics.hpp"
#include "lps/reduction.hpp"

namespace lps {

// ---- first-order systems ---------------------------------------------------

/// y′ᵢ = rhs[i](var, y₀…yₙ₋₁), with the state symbols y0, y1, … as parameters.
struct FirstOrderSystem {
    std::string var;
    std::vector<Expr> rhs;
    Bindings params;  // already substituted into rhs; kept for reports

    FirstOrderSystem() = default;
    /// Throws std::invalid_argument if rhs uses anything but var and the states.
    FirstOrderSystem(std::string var, std::vector<Expr> rhs, Bindings params = {});

    std::size_t dimension() const { return rhs.size(); }
    static Expr state(std::size_t i);
};

/// ψ, ψ′, … mapped to y0, y1, …; the solved rhs becomes the last component.
/// Parameters not listed in params are an error.
FirstOrderSystem to_first_order(const ReducedODE& ode, const Bindings& params = {});

// ---- integration -----------------------------------------------------------

struct IntegrateOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h0 = 0.0;  // initial step; 0 picks one from the rhs
    std::size_t max_steps = 1000000;
    double overflow = 1e100;
    std::vector<double> samples;  // dense output points inside the span
};

struct Trajectory {
    enum class End { Reached, StepUnderflow, StateOverflow, DomainError };

    std::vector<double> grid;                // accepted step ends, starting at span[0]
    std::vector<std::vector<double>> states;
    std::vector<double> error;               // scaled local error of the step ending there
    End end = End::Reached;
    std::string message;

    std::vector<double> sample_grid;
    std::vector<std::vector<double>> samples;

    bool reached() const { return end == End::Reached; }
    double last() const { return grid.back(); }
    /// Whether t lies in the integrated part.
    bool covers(double t) const;
    /// Fourth-order continuous extension inside the integrated part.
    std::vector<double> at(double t) const;

    // 5 coefficient vectors per step for the continuous extension
    std::vector<std::array<std::vector<double>, 5>> dense;
};

std::string to_string(Trajectory::End e);

/// Dormand–Prince 5(4) with PI step control; integrates backwards when
/// span[1] < span[0]. Failures end the trajectory with the reason set.
Trajectory integrate(const FirstOrderSystem& sys, const std::vector<double>& y0, std::array<double, 2> span,
                     const IntegrateOptions& opt = {});

/// The same tableau with n equal steps and no error control.
std::vector<double> integrate_fixed(const FirstOrderSystem& sys, const std::vector<double>& y0,
                                    std::array<double, 2> span, std::size_t n);

/// Order of the propagated solution.
inline constexpr int kDopriOrder = 5;

// ---- polynomial roots ------------------------------------------------------

struct RootCluster {
    std::complex<double> value;
    int multiplicity = 1;
};

struct PolyRoots {
    std::vector<std::complex<double>> roots;  // with repetition, sorted by (real, imag)
    std::vector<RootCluster> clusters;
};

/// Roots of c[0] r^n + … + c[n], n ≤ 4, from the companion matrix with Newton
/// polishing; nearby eigenvalues are merged when they form a multiple root.
PolyRoots polyroots(const std::vector<double>& coeffs);
/// Coefficients, leading first, of the monic polynomial with these roots.
std::vector<std::complex<double>> poly_from_roots(const std::vector<std::complex<double>>& roots);
std::complex<double> poly_eval(const std::vector<double>& coeffs, std::complex<double> z);

// ---- branch comparison -----------------------------------------------------

struct CompareReport {
    double from = 0.0, to = 0.0;
    double reached = 0.0;      // end of the part of the window the trajectory covers
    bool complete = false;     // the whole window was covered
    std::size_t points = 0;
    double max_abs = 0.0;
    double max_rel = 0.0;
    double slope = 0.0;        // log-linear fit of |R| over the window
    double rel_slope = 0.0;    // same for |R|/|branch|
    std::vector<std::array<double, 4>> rows;  // τ, branch, trajectory, residual
};

/// Full-equation residual of the branch, fitted as ln|R| ≈ a + slope·τ on
/// n uniform points; the second slope is for |R|/|branch|.
std::pair<double, double> residual_slopes(const AsymptoticBranch& b, std::array<double, 2> window, std::size_t n = 201);

/// Branch against the trajectory's y0 on n uniform points of the window.
/// Throws std::invalid_argument for an empty window or one starting outside
/// the trajectory.
CompareReport compare(const AsymptoticBranch& b, const Trajectory& traj, std::array<double, 2> window,
                      std::size_t n = 201);

/// ψ, ψ′, ψ″, ψ‴ of a closed form in var at a point.
std::vector<double> initial_state(const Expr& sol, const std::string& var, double at, std::size_t dimension = 4);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lps
