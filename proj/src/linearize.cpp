#include "saddlefractal/linearize.hpp"

#include <cmath>
#include <stdexcept>

namespace saddlefractal {

Poly::Poly(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

void Poly::trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

double Poly::eval(double t) const {
    double out = 0.0;
    for (std::size_t k = coeffs_.size(); k-- > 0;) out = out * t + coeffs_[k];
    return out;
}

Poly Poly::operator+(const Poly& other) const {
    std::vector<double> out(std::max(coeffs_.size(), other.coeffs_.size()), 0.0);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) out[k] += coeffs_[k];
    for (std::size_t k = 0; k < other.coeffs_.size(); ++k) out[k] += other.coeffs_[k];
    return Poly(std::move(out));
}

Poly Poly::operator*(const Poly& other) const {
    if (is_zero() || other.is_zero()) return Poly();
    std::vector<double> out(coeffs_.size() + other.coeffs_.size() - 1, 0.0);
    for (std::size_t a = 0; a < coeffs_.size(); ++a)
        for (std::size_t b = 0; b < other.coeffs_.size(); ++b)
            out[a + b] += coeffs_[a] * other.coeffs_[b];
    return Poly(std::move(out));
}

Poly Poly::scaled(double factor) const {
    std::vector<double> out = coeffs_;
    for (double& c : out) c *= factor;
    return Poly(std::move(out));
}

Poly Poly::integral() const {
    if (is_zero()) return Poly();
    std::vector<double> out(coeffs_.size() + 1, 0.0);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) out[k + 1] = coeffs_[k] / (k + 1);
    return Poly(std::move(out));
}

Poly Poly::derivative() const {
    if (coeffs_.size() < 2) return Poly();
    std::vector<double> out(coeffs_.size() - 1, 0.0);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) out[k - 1] = coeffs_[k] * k;
    return Poly(std::move(out));
}

namespace {

// coefficient polynomials of the truncated series sum_i S[i] u0^i (index >= 1)
using Series = std::vector<Poly>;

Series series_mul(const Series& a, const Series& b, int trunc) {
    Series out(trunc + 1);
    for (int i = 1; i <= trunc; ++i) {
        Poly acc;
        for (int m = 1; m < i; ++m)
            if (!a[m].is_zero() && !b[i - m].is_zero()) acc = acc + a[m] * b[i - m];
        out[i] = acc;
    }
    return out;
}

} // namespace

SeriesFlow compute_g_polynomials(std::span<const double> a_coeffs, int truncation) {
    if (truncation < 2) throw std::domain_error("compute_g_polynomials: truncation must be >= 2");
    SeriesFlow flow;
    flow.coeffs.assign(a_coeffs.begin(), a_coeffs.end());
    flow.g.resize(truncation - 1);

    Series u(truncation + 1);
    u[1] = Poly({1.0});
    const int max_j = static_cast<int>(a_coeffs.size()) + 1; // a_2 .. a_{max_j}

    for (int order = 2; order <= truncation; ++order) {
        // u0^order coefficient of sum_j a_j u^j, using g_k for k < order only
        Poly rhs;
        Series power = u; // u^1
        for (int j = 2; j <= std::min(max_j, order); ++j) {
            power = series_mul(power, u, truncation);
            const double a_j = a_coeffs[j - 2];
            if (a_j != 0.0 && !power[order].is_zero()) rhs = rhs + power[order].scaled(a_j);
        }
        Poly g = rhs.integral();
        if (g.degree() > order - 1)
            throw std::logic_error("compute_g_polynomials: degree bound violated");
        if (g.coeff(0) != 0.0)
            throw std::logic_error("compute_g_polynomials: g_i(0) != 0");
        flow.g[order - 2] = g;
        u[order] = flow.g[order - 2];
    }
    return flow;
}

SeriesFlow series_flow_for_field(const NormalFormField& field, int truncation) {
    return compute_g_polynomials(field.coeffs, truncation);
}

double u_series(const SeriesFlow& flow, double t, double u0) {
    // Horner in u0 over the g_i(t) values
    double acc = 0.0;
    for (std::size_t k = flow.g.size(); k-- > 0;) acc = (acc + flow.g[k].eval(t)) * u0;
    return u0 + acc * u0;
}

namespace {

double powi(double x, int n) {
    double out = 1.0;
    for (int k = 0; k < n; ++k) out *= x;
    return out;
}

double bracket_value(int p, int q, const SeriesFlow& flow, double x, double y, double L) {
    double bracket = 1.0;
    const double xp = powi(x, p);
    const double yq = powi(y, q);
    double factor = 1.0; // (x^p y^q)^(i-1)
    for (std::size_t k = 0; k < flow.g.size(); ++k) {
        factor *= xp * yq;
        bracket += flow.g[k].eval(L) * factor;
    }
    return bracket;
}

double qth_root(double b, int q) {
    if (q == 1) return b;
    if (q == 2) return std::sqrt(b);
    return std::pow(b, 1.0 / q);
}

} // namespace

std::pair<double, double> F_map(int p, int q, const SeriesFlow& flow, double x, double y) {
    if (x == 0.0 || y == 0.0) return {x, y}; // axes are fixed pointwise
    const double L = -(static_cast<double>(q) / p) * std::log(std::fabs(y));
    const double bracket = bracket_value(p, q, flow, x, y, L);
    if (!(bracket > 0.0)) throw std::domain_error("F_map: bracket not positive on this domain");
    return {x, y * qth_root(bracket, q)};
}

double G_function(int p, int q, double a2, double y) {
    if (p > 1 || y == 0.0) return 0.0;
    // g_2(t) = a2 t, evaluated at t = log|y|^{-q}
    return (1.0 / q) * powi(y, q + 1) * a2 * (-static_cast<double>(q) * std::log(std::fabs(y)));
}

Mat2 jacobian_F(int p, int q, const SeriesFlow& flow, double x, double y) {
    Mat2 J;
    const double a2 = flow.coeffs.empty() ? 0.0 : flow.coeffs[0];
    if (y == 0.0) return J; // identity
    if (x == 0.0) {
        J.m10 = G_function(p, q, a2, y);
        return J;
    }

    const double L = -(static_cast<double>(q) / p) * std::log(std::fabs(y));
    const double Lprime = -(static_cast<double>(q) / p) / y;
    const double xp = powi(x, p);
    const double yq = powi(y, q);

    double B = 1.0, dBdx = 0.0, dBdy = 0.0;
    double factor = 1.0; // (x^p y^q)^(i-1)
    for (std::size_t k = 0; k < flow.g.size(); ++k) {
        const int i = static_cast<int>(k) + 2;
        factor *= xp * yq;
        const double gi = flow.g[k].eval(L);
        const double gi_prime = flow.g[k].derivative().eval(L);
        B += gi * factor;
        dBdx += gi * p * (i - 1) * factor / x;
        dBdy += gi_prime * Lprime * factor + gi * q * (i - 1) * factor / y;
    }
    if (!(B > 0.0)) throw std::domain_error("jacobian_F: bracket not positive on this domain");

    const double root = qth_root(B, q);
    const double chain = root / B / q; // (1/q) B^(1/q - 1)
    J.m10 = y * chain * dBdx;
    J.m11 = root + y * chain * dBdy;
    return J;
}

double verify_curve_mapping(const NormalFormField& field, const SeriesFlow& flow, double s,
                            int sample_count, const IntegratorOptions& options) {
    if (field.delta != 1.0)
        throw std::domain_error("verify_curve_mapping: defined on the unit box (delta = 1)");
    if (!(s > 0.0 && s < 1.0)) throw std::domain_error("verify_curve_mapping: need 0 < s < 1");
    if (sample_count < 2) throw std::domain_error("verify_curve_mapping: need >= 2 samples");
    for (std::size_t k = 0; k < field.coeffs.size() || k < flow.coeffs.size(); ++k) {
        const double a_field = k < field.coeffs.size() ? field.coeffs[k] : 0.0;
        const double a_flow = k < flow.coeffs.size() ? flow.coeffs[k] : 0.0;
        if (a_field != a_flow)
            throw std::domain_error("verify_curve_mapping: flow coefficients do not match field");
    }

    const double r = field.r();
    const double s_r = std::pow(s, r);
    double max_dev = 0.0;
    double cx = s, cy = 1.0;
    for (int k = 1; k < sample_count; ++k) {
        const double x_t = s * std::exp(std::log(1.0 / s) * k / (sample_count - 1));
        const SectionCrossing cross =
            integrate_to_section(field, cx, cy, Section::VerticalDelta, x_t, options);
        cx = cross.x;
        cy = cross.y;
        const double y_lin = s_r / std::pow(cross.x, r);
        const auto [fx, fy] = F_map(field.p, field.q, flow, cross.x, y_lin);
        (void)fx;
        max_dev = std::max(max_dev, std::fabs(fy - cross.y));
    }
    return max_dev;
}

} // namespace saddlefractal
