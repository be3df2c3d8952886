#pragma once

#include <span>
#include <vector>

#include "saddlefractal/saddlefield.hpp"

namespace saddlefractal {

// Dense real polynomial in t, ascending coefficients, trailing zeros trimmed.
class Poly {
public:
    Poly() = default;
    explicit Poly(std::vector<double> coeffs);

    double eval(double t) const;
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; } // -1 for zero poly
    bool is_zero() const { return coeffs_.empty(); }
    double coeff(std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : 0.0; }
    const std::vector<double>& coeffs() const { return coeffs_; }

    Poly operator+(const Poly& other) const;
    Poly operator*(const Poly& other) const;
    Poly scaled(double factor) const;
    Poly integral() const; // antiderivative vanishing at 0
    Poly derivative() const;

private:
    void trim();
    std::vector<double> coeffs_;
};

// Truncated flow of u' = sum a_i u^i expanded in the initial condition:
// u(t, u0) = u0 + sum_{i=2..N} g_i(t) u0^i, with g_i(0) = 0, deg g_i <= i-1.
struct SeriesFlow {
    std::vector<double> coeffs; // a_2 ..
    std::vector<Poly> g;        // g[k] = g_{k+2}

    int truncation() const { return static_cast<int>(g.size()) + 1; }
    const Poly& g_poly(int i) const { return g.at(i - 2); } // i in [2, N]
};

// Power matching order by order; integration constants fixed by u(0,u0) = u0.
SeriesFlow compute_g_polynomials(std::span<const double> a_coeffs, int truncation);

// Flow of the field's induced u-equation (u = x^p y^q).
SeriesFlow series_flow_for_field(const NormalFormField& field, int truncation);

double u_series(const SeriesFlow& flow, double t, double u0);

// Quadrant-wise phase-portrait straightening map
//   F(x,y) = (x, y (1 + sum g_i(log|y|^{-1/r}) x^{p(i-1)} y^{q(i-1)})^{1/q}),
// extended by F(x,0) = (x,0), F(0,y) = (0,y). Positive real branch of the
// root; throws std::domain_error when the bracket is not positive.
std::pair<double, double> F_map(int p, int q, const SeriesFlow& flow, double x, double y);

// Boundary derivative limit of dF2/dx on {x=0}: (1/q) y^{q+1} g_2(log|y|^{-q})
// when p = 1, identically 0 for p > 1.
double G_function(int p, int q, double a2, double y);

struct Mat2 {
    double m00 = 1.0, m01 = 0.0, m10 = 0.0, m11 = 1.0;
};

// Jacobian of F: analytic partials off the axes, the explicit boundary
// matrices on them (identity on {y=0}, lower-triangular G on {x=0}).
Mat2 jacobian_F(int p, int q, const SeriesFlow& flow, double x, double y);

// Maximum |F_2(x, s^r/x^r) - y_numeric(x)| over sample_count log-spaced x in
// [s, 1]; the numeric curve is the integrated trajectory of the field through
// (s, 1). Requires delta == 1 and flow coefficients matching the field.
double verify_curve_mapping(const NormalFormField& field, const SeriesFlow& flow, double s,
                            int sample_count, const IntegratorOptions& options = {});

} // namespace saddlefractal
