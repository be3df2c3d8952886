#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "saddlefractal/dimension.hpp"

namespace saddlefractal {

struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Resonant-saddle polynomial normal form on the delta-box:
//
//   x' = x
//   y' = -r y + (1/q) sum_{i=1..N} a_{i+1} (x^p y^q)^i y,   r = p/q
//
// coeffs holds a_2 .. a_{N+1}; an empty vector is the linear field.
struct NormalFormField {
    int p = 1;
    int q = 1;
    std::vector<double> coeffs;
    double delta = 1.0;

    NormalFormField(int p, int q, std::vector<double> coeffs = {}, double delta = 1.0);
    static NormalFormField linear(int p, int q, double delta = 1.0) {
        return NormalFormField(p, q, {}, delta);
    }

    double r() const { return static_cast<double>(p) / q; }
    // a_{i+1} (1-based resonant index); 0 beyond the stored coefficients
    double coeff(std::size_t i) const { return i >= 1 && i <= coeffs.size() ? coeffs[i - 1] : 0.0; }
};

void field_eval(const NormalFormField& field, double x, double y, double& dx, double& dy);

enum class Section { VerticalDelta, HorizontalDelta, Diagonal }; // {x=delta}, {y=delta}, {y=x}

struct SectionCrossing {
    double x = 0.0;
    double y = 0.0;
    double time = 0.0;
    Section section = Section::VerticalDelta;
};

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-14;
    double max_time = 500.0;
    double section_tol = 1e-12; // |section residual| at the reported crossing
    int max_bisect = 100;
};

// Adaptive Dormand-Prince 5(4) flow of the field from (x0, y0) until the
// target section is crossed; the crossing is localized by bisection inside
// the bracketing step. Throws IntegrationError when no crossing occurs
// within max_time or the step size underflows (stiffness).
SectionCrossing integrate_to_section(const NormalFormField& field, double x0, double y0,
                                     Section target, const IntegratorOptions& options = {});

// Same, with the section placed at an explicit value ({x=v} or {y=v})
// instead of the field's delta.
SectionCrossing integrate_to_section(const NormalFormField& field, double x0, double y0,
                                     Section target, double section_value,
                                     const IntegratorOptions& options);

// Saddle transition {y=delta} -> {x=delta}, parametrized by the entry
// abscissa s; returns the exit ordinate.
double dulac_map(const NormalFormField& field, double s, const IntegratorOptions& options = {});

// {y=delta} -> diagonal {y=x}; returns the Euclidean distance of the
// crossing from the origin.
double transition_D1(const NormalFormField& field, double s, const IntegratorOptions& options = {});

// diagonal -> {x=delta}; s is the Euclidean distance of the start point from
// the origin, i.e. the trajectory starts at (s/sqrt2, s/sqrt2).
double transition_D2(const NormalFormField& field, double s, const IntegratorOptions& options = {});

// Regular loop transition R(s) = a1 s + sum c_k s^(l_k), l_k >= 2, a1 > 0.
struct RegularTransitionModel {
    double a1 = 1.0;
    std::vector<std::pair<double, double>> terms; // (coefficient, exponent)

    double operator()(double s) const;
    static RegularTransitionModel identity() { return {}; }
};

// First-return map on {y=delta}: R after the saddle transition.
double poincare_off_saddle(const NormalFormField& field, const RegularTransitionModel& R, double s,
                           const IntegratorOptions& options = {});

// First-return map on the diagonal: D1 ∘ R ∘ D2.
double poincare_through_saddle(const NormalFormField& field, const RegularTransitionModel& R,
                               double s, const IntegratorOptions& options = {});

// n log-spaced values from lo up to hi (inclusive), increasing.
std::vector<double> log_spaced(double lo, double hi, int n);

// Leading asymptotics of the displacement s - P(s) fitted on s_grid against
// s^a and s^a(-log s). When the displacement is asymptotically s itself with
// unit coefficient (P superlinear, the hyperbolic-ratio case), the map value
// P(s) is refitted instead, which carries the meaningful exponent.
AsymptoticModel fit_displacement(const std::function<double(double)>& map,
                                 std::span<const double> s_grid, const FitOptions& options = {});

} // namespace saddlefractal
