#include "saddlefractal/saddlefield.hpp"

#include <cmath>
#include <numeric>

#include "saddlefractal/log.hpp"

namespace saddlefractal {

NormalFormField::NormalFormField(int p_, int q_, std::vector<double> coeffs_, double delta_)
    : p(p_), q(q_), coeffs(std::move(coeffs_)), delta(delta_) {
    if (p < 1 || q < 1) throw std::domain_error("field: p, q must be positive integers");
    if (std::gcd(p, q) != 1) throw std::domain_error("field: p, q must be coprime");
    if (!(delta > 0.0 && delta <= 1.0)) throw std::domain_error("field: delta must be in (0,1]");
}

namespace {

double powi(double x, int n) {
    double out = 1.0;
    for (int k = 0; k < n; ++k) out *= x;
    return out;
}

} // namespace

void field_eval(const NormalFormField& field, double x, double y, double& dx, double& dy) {
    dx = x;
    double resonant = 0.0;
    if (!field.coeffs.empty()) {
        const double u = powi(x, field.p) * powi(y, field.q);
        double ui = 1.0;
        for (std::size_t i = 1; i <= field.coeffs.size(); ++i) {
            ui *= u;
            resonant += field.coeffs[i - 1] * ui;
        }
        resonant /= field.q;
    }
    dy = -field.r() * y + resonant * y;
}

// --- Dormand-Prince 5(4) with section events --------------------------------

namespace {

struct State {
    double x, y;
};

struct Derivs {
    double kx[7], ky[7];
};

// classic DP5(4) tableau
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784,
                 B6 = 11.0 / 84;
constexpr double E1 = B1 - 5179.0 / 57600, E3 = B3 - 7571.0 / 16695, E4 = B4 - 393.0 / 640,
                 E5 = B5 + 92097.0 / 339200, E6 = B6 - 187.0 / 2100, E7 = -1.0 / 40;

// one 5th-order step of size h; fills the error estimate when requested
State dp5_step(const NormalFormField& field, const State& s, double h, double* err_x = nullptr,
               double* err_y = nullptr) {
    Derivs d;
    field_eval(field, s.x, s.y, d.kx[0], d.ky[0]);
    State t{s.x + h * A21 * d.kx[0], s.y + h * A21 * d.ky[0]};
    field_eval(field, t.x, t.y, d.kx[1], d.ky[1]);
    t = {s.x + h * (A31 * d.kx[0] + A32 * d.kx[1]), s.y + h * (A31 * d.ky[0] + A32 * d.ky[1])};
    field_eval(field, t.x, t.y, d.kx[2], d.ky[2]);
    t = {s.x + h * (A41 * d.kx[0] + A42 * d.kx[1] + A43 * d.kx[2]),
         s.y + h * (A41 * d.ky[0] + A42 * d.ky[1] + A43 * d.ky[2])};
    field_eval(field, t.x, t.y, d.kx[3], d.ky[3]);
    t = {s.x + h * (A51 * d.kx[0] + A52 * d.kx[1] + A53 * d.kx[2] + A54 * d.kx[3]),
         s.y + h * (A51 * d.ky[0] + A52 * d.ky[1] + A53 * d.ky[2] + A54 * d.ky[3])};
    field_eval(field, t.x, t.y, d.kx[4], d.ky[4]);
    t = {s.x + h * (A61 * d.kx[0] + A62 * d.kx[1] + A63 * d.kx[2] + A64 * d.kx[3] + A65 * d.kx[4]),
         s.y + h * (A61 * d.ky[0] + A62 * d.ky[1] + A63 * d.ky[2] + A64 * d.ky[3] + A65 * d.ky[4])};
    field_eval(field, t.x, t.y, d.kx[5], d.ky[5]);
    State out{s.x + h * (B1 * d.kx[0] + B3 * d.kx[2] + B4 * d.kx[3] + B5 * d.kx[4] + B6 * d.kx[5]),
              s.y + h * (B1 * d.ky[0] + B3 * d.ky[2] + B4 * d.ky[3] + B5 * d.ky[4] + B6 * d.ky[5])};
    if (err_x != nullptr) {
        field_eval(field, out.x, out.y, d.kx[6], d.ky[6]);
        *err_x = h * (E1 * d.kx[0] + E3 * d.kx[2] + E4 * d.kx[3] + E5 * d.kx[4] + E6 * d.kx[5] +
                      E7 * d.kx[6]);
        *err_y = h * (E1 * d.ky[0] + E3 * d.ky[2] + E4 * d.ky[3] + E5 * d.ky[4] + E6 * d.ky[5] +
                      E7 * d.ky[6]);
    }
    return out;
}

double section_residual(Section s, const State& st, double value) {
    switch (s) {
        case Section::VerticalDelta: return st.x - value;
        case Section::HorizontalDelta: return st.y - value;
        case Section::Diagonal: return st.y - st.x;
    }
    return 0.0;
}

} // namespace

SectionCrossing integrate_to_section(const NormalFormField& field, double x0, double y0,
                                     Section target, const IntegratorOptions& options) {
    return integrate_to_section(field, x0, y0, target, field.delta, options);
}

SectionCrossing integrate_to_section(const NormalFormField& field, double x0, double y0,
                                     Section target, double section_value,
                                     const IntegratorOptions& opt) {
    State s{x0, y0};
    double t = 0.0;
    double phi = section_residual(target, s, section_value);
    if (std::fabs(phi) <= opt.section_tol) return {s.x, s.y, 0.0, target};

    double h = 0.01;
    constexpr double kMaxStep = 5.0;
    while (t < opt.max_time) {
        h = std::min(h, opt.max_time - t + 1e-9);
        double ex, ey;
        const State next = dp5_step(field, s, h, &ex, &ey);
        const double sx = opt.atol + opt.rtol * std::max(std::fabs(s.x), std::fabs(next.x));
        const double sy = opt.atol + opt.rtol * std::max(std::fabs(s.y), std::fabs(next.y));
        const double err = std::sqrt(0.5 * ((ex / sx) * (ex / sx) + (ey / sy) * (ey / sy)));
        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            if (h < 1e-14) throw IntegrationError("integrate_to_section: step underflow");
            continue;
        }
        const double phi_next = section_residual(target, next, section_value);
        if (phi * phi_next <= 0.0) {
            // crossing inside this step: bisect on the sub-step size
            double lo = 0.0, hi = h;
            State best = next;
            double best_t = h, best_phi = phi_next;
            for (int it = 0; it < opt.max_bisect && std::fabs(best_phi) > opt.section_tol; ++it) {
                const double mid = 0.5 * (lo + hi);
                const State sm = dp5_step(field, s, mid);
                const double pm = section_residual(target, sm, section_value);
                if (std::fabs(pm) <= std::fabs(best_phi)) {
                    best = sm;
                    best_t = mid;
                    best_phi = pm;
                }
                if (phi * pm <= 0.0)
                    hi = mid;
                else
                    lo = mid;
            }
            if (std::fabs(best_phi) > opt.section_tol)
                throw IntegrationError("integrate_to_section: event localization failed");
            return {best.x, best.y, t + best_t, target};
        }
        t += h;
        s = next;
        phi = phi_next;
        h = std::min({h * std::min(5.0, 0.9 * std::pow(std::max(err, 1e-10), -0.2)), kMaxStep});
    }
    throw IntegrationError("integrate_to_section: no crossing within max_time");
}

double dulac_map(const NormalFormField& field, double s, const IntegratorOptions& options) {
    if (!(s > 0.0 && s < field.delta)) throw std::domain_error("dulac_map: need 0 < s < delta");
    return integrate_to_section(field, s, field.delta, Section::VerticalDelta, options).y;
}

double transition_D1(const NormalFormField& field, double s, const IntegratorOptions& options) {
    if (!(s > 0.0 && s < field.delta)) throw std::domain_error("transition_D1: need 0 < s < delta");
    const SectionCrossing c =
        integrate_to_section(field, s, field.delta, Section::Diagonal, options);
    return std::hypot(c.x, c.y);
}

double transition_D2(const NormalFormField& field, double s, const IntegratorOptions& options) {
    const double sq2 = std::sqrt(2.0);
    if (!(s > 0.0 && s < sq2 * field.delta))
        throw std::domain_error("transition_D2: need 0 < s < sqrt(2) delta");
    return integrate_to_section(field, s / sq2, s / sq2, Section::VerticalDelta, options).y;
}

double RegularTransitionModel::operator()(double s) const {
    double out = a1 * s;
    for (const auto& [coef, exponent] : terms) out += coef * std::pow(s, exponent);
    return out;
}

double poincare_off_saddle(const NormalFormField& field, const RegularTransitionModel& R, double s,
                           const IntegratorOptions& options) {
    return R(dulac_map(field, s, options));
}

double poincare_through_saddle(const NormalFormField& field, const RegularTransitionModel& R,
                               double s, const IntegratorOptions& options) {
    return transition_D1(field, R(transition_D2(field, s, options)), options);
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw std::domain_error("log_spaced: bad range");
    std::vector<double> out;
    out.reserve(n);
    const double ratio = std::log(hi / lo);
    for (int k = 0; k < n; ++k) out.push_back(lo * std::exp(ratio * k / (n - 1)));
    return out;
}

AsymptoticModel fit_displacement(const std::function<double(double)>& map,
                                 std::span<const double> s_grid, const FitOptions& options) {
    std::vector<MeasurePoint> disp;
    std::vector<MeasurePoint> value;
    disp.reserve(s_grid.size());
    value.reserve(s_grid.size());
    for (double s : s_grid) {
        const double p = map(s);
        const double d = s - p;
        if (!(d > 0.0)) throw std::domain_error("fit_displacement: map not strictly below identity");
        disp.push_back({s, d});
        value.push_back({s, p});
    }

    // P superlinear leaves s - P(s) ~ 1 * s; the exponent then lives in P itself
    FitOptions power_only = options;
    power_only.powerlog_factor = 1e300;
    const LogLogFit plain = fit_loglog(disp, power_only);
    if (std::fabs(plain.slope - 1.0) < 0.02 && std::fabs(std::exp(plain.intercept) - 1.0) < 0.05) {
        log_debug("fit_displacement: hyperbolic branch (displacement ~ s), refitting map values");
        const LogLogFit hyper = fit_loglog(value, options);
        return {hyper.slope, hyper.model == ScalingModel::PowerLog};
    }

    const LogLogFit fit = fit_loglog(disp, options);
    return {fit.slope, fit.model == ScalingModel::PowerLog};
}

} // namespace saddlefractal
