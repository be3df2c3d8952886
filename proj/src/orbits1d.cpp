#include "saddlefractal/orbits1d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "saddlefractal/log.hpp"

namespace saddlefractal {

namespace {

constexpr int kValidationSamples = 512;

} // namespace

MapModel MapModel::parabolic(double alpha, double coef, double s_max) {
    if (!(alpha > 1.0)) throw std::domain_error("parabolic: alpha must be > 1");
    if (!(coef > 0.0)) throw std::domain_error("parabolic: C must be > 0");
    MapModel m;
    m.variant_ = MapVariant::Parabolic;
    m.alpha_ = alpha;
    m.coef_ = coef;
    if (s_max <= 0.0) {
        // largest interval on which g' = 1 - alpha C s^(alpha-1) stays >= 0
        s_max = std::min(1.0, std::pow(1.0 / (alpha * coef), 1.0 / (alpha - 1.0)));
    }
    m.s_max_ = s_max;
    m.validate();
    return m;
}

MapModel MapModel::parabolic_log(double alpha, double coef, double s_max) {
    if (!(alpha > 1.0)) throw std::domain_error("parabolic-log: alpha must be > 1");
    if (!(coef > 0.0)) throw std::domain_error("parabolic-log: C must be > 0");
    if (!(s_max > 0.0 && s_max < 1.0))
        throw std::domain_error("parabolic-log: requires 0 < s_max < 1 so that -log s > 0");
    MapModel m;
    m.variant_ = MapVariant::ParabolicLog;
    m.alpha_ = alpha;
    m.coef_ = coef;
    m.s_max_ = s_max;
    m.validate();
    return m;
}

MapModel MapModel::linear_hyperbolic(double kappa, double s_max) {
    if (!(kappa > 0.0 && kappa < 1.0)) throw std::domain_error("linear: kappa must be in (0,1)");
    if (!(s_max > 0.0)) throw std::domain_error("linear: s_max must be > 0");
    MapModel m;
    m.variant_ = MapVariant::LinearHyperbolic;
    m.kappa_ = kappa;
    m.s_max_ = s_max;
    return m;
}

MapModel MapModel::power_hyperbolic(double beta, double coef, double s_max) {
    if (!(beta > 1.0)) throw std::domain_error("power: beta must be > 1");
    if (!(coef > 0.0)) throw std::domain_error("power: C must be > 0");
    MapModel m;
    m.variant_ = MapVariant::PowerHyperbolic;
    m.beta_ = beta;
    m.coef_ = coef;
    if (s_max <= 0.0) {
        // g(s) < s requires C s^(beta-1) < 1
        s_max = std::min(1.0, 0.95 * std::pow(1.0 / coef, 1.0 / (beta - 1.0)));
    }
    m.s_max_ = s_max;
    m.validate();
    return m;
}

double MapModel::eval_unchecked(double s) const {
    switch (variant_) {
        case MapVariant::Parabolic:
            return s - coef_ * std::pow(s, alpha_);
        case MapVariant::ParabolicLog:
            return s - coef_ * std::pow(s, alpha_) * (-std::log(s));
        case MapVariant::LinearHyperbolic:
            return kappa_ * s;
        case MapVariant::PowerHyperbolic:
            return coef_ * std::pow(s, beta_);
    }
    return 0.0;
}

void MapModel::validate() const {
    // log-spaced samples spanning the declared interval
    const double lo = s_max_ * 1e-12;
    double prev_s = 0.0, prev_g = 0.0;
    for (int k = 0; k <= kValidationSamples; ++k) {
        const double t = static_cast<double>(k) / kValidationSamples;
        const double s = lo * std::pow(s_max_ / lo, t);
        const double g = eval_unchecked(s);
        if (!(g > 0.0) || !(g < s))
            throw std::domain_error("map model: g(s) not in (0, s) on the declared interval");
        if (k > 0 && !(g > prev_g))
            throw std::domain_error("map model: g not strictly increasing on the declared interval");
        prev_s = s;
        prev_g = g;
    }
    (void)prev_s;
}

double MapModel::operator()(double s) const {
    if (!(s > 0.0) || !(s <= s_max_))
        throw std::domain_error("evaluate_map: s outside validity interval");
    return eval_unchecked(s);
}

double evaluate_map(const MapModel& model, double s) { return model(s); }

double theoretical_orbit_dim(const MapModel& model) {
    switch (model.variant()) {
        case MapVariant::Parabolic:
        case MapVariant::ParabolicLog:
            return 1.0 - 1.0 / model.alpha();
        case MapVariant::LinearHyperbolic:
        case MapVariant::PowerHyperbolic:
            return 0.0;
    }
    return 0.0;
}

Orbit1D Orbit1D::from_points(std::vector<double> pts, double floor) {
    if (pts.empty()) throw std::domain_error("orbit: empty point list");
    for (std::size_t n = 0; n < pts.size(); ++n) {
        if (!(pts[n] > 0.0)) throw std::domain_error("orbit: points must be positive");
        if (n > 0 && !(pts[n] < pts[n - 1]))
            throw std::domain_error("orbit: points must be strictly decreasing");
    }
    Orbit1D o;
    o.points = std::move(pts);
    o.floor = floor;
    return o;
}

Orbit1D generate_orbit(const MapModel& model, double s0, const OrbitStop& stop) {
    if (!(s0 > 0.0) || !(s0 <= model.s_max()))
        throw std::domain_error("generate_orbit: s0 outside validity interval");
    if (stop.max_points < 1) throw std::domain_error("generate_orbit: max_points must be >= 1");
    if (!(stop.floor > 0.0)) throw std::domain_error("generate_orbit: floor must be > 0");

    Orbit1D orbit;
    orbit.floor = stop.floor;
    orbit.source = model;
    orbit.points.reserve(std::min<std::size_t>(stop.max_points, 1 << 20));

    double s = s0;
    orbit.points.push_back(s);
    while (orbit.points.size() < stop.max_points) {
        const double next = model(s);
        if (next < stop.floor) break;
        if (!(next < s)) {
            // double-precision stall; the tail below this scale is unresolvable
            log_debug("generate_orbit: iteration stalled at s=%.17g", s);
            break;
        }
        orbit.points.push_back(next);
        s = next;
    }

    if (!gaps_eventually_decreasing(orbit))
        throw std::domain_error("generate_orbit: gaps not eventually decreasing");
    return orbit;
}

bool gaps_eventually_decreasing(const Orbit1D& orbit, std::size_t burn_in) {
    const auto& p = orbit.points;
    if (p.size() < 3) return true;
    // tiny relative slack for roundoff in long parabolic tails
    for (std::size_t n = std::max<std::size_t>(burn_in, 1); n + 1 < p.size(); ++n) {
        const double prev_gap = p[n - 1] - p[n];
        const double gap = p[n] - p[n + 1];
        if (gap > prev_gap * (1.0 + 1e-12)) return false;
    }
    return true;
}

namespace {

// Sum of the merged interval lengths for points[first..last] (inclusive,
// ascending traversal), each interval [p - eps, p + eps] clipped at 0.
double merged_length(const std::vector<double>& pts, std::size_t first, std::size_t last,
                     double eps) {
    double total = 0.0;
    double lo = std::max(pts[last] - eps, 0.0);
    double hi = pts[last] + eps;
    for (std::size_t idx = last; idx-- > first;) {
        const double a = pts[idx] - eps;
        const double b = pts[idx] + eps;
        if (a <= hi) {
            hi = b;
        } else {
            total += hi - lo;
            lo = a;
            hi = b;
        }
    }
    return total + (hi - lo);
}

} // namespace

double eps_neighborhood_length(const Orbit1D& orbit, double epsilon) {
    if (orbit.empty()) throw std::domain_error("eps_neighborhood_length: empty orbit");
    if (!(epsilon > 0.0)) throw std::domain_error("eps_neighborhood_length: epsilon must be > 0");
    return merged_length(orbit.points, 0, orbit.points.size() - 1, epsilon);
}

TailNucleusSplit tail_nucleus_split(const Orbit1D& orbit, double epsilon) {
    if (orbit.size() < 2) throw std::domain_error("tail_nucleus_split: need at least 2 points");
    if (!(epsilon > 0.0)) throw std::domain_error("tail_nucleus_split: epsilon must be > 0");

    const auto& p = orbit.points;
    std::size_t critical = p.size();
    for (std::size_t n = 0; n + 1 < p.size(); ++n) {
        if (p[n] - p[n + 1] <= 2.0 * epsilon) {
            critical = n;
            break;
        }
    }

    TailNucleusSplit split;
    split.epsilon = epsilon;
    split.critical_index = critical;
    // tail intervals are pairwise disjoint by minimality of the critical index
    if (critical > 0) split.tail_length = merged_length(p, 0, critical - 1, epsilon);
    if (critical < p.size())
        split.nucleus_length = merged_length(p, critical, p.size() - 1, epsilon);
    return split;
}

Orbit1D power_transform(const Orbit1D& orbit, double exponent) {
    if (!(exponent > 0.0)) throw std::domain_error("power_transform: exponent must be > 0");
    Orbit1D out;
    out.points.reserve(orbit.size());
    for (double s : orbit.points) out.points.push_back(std::pow(s, exponent));
    out.floor = std::pow(orbit.floor, exponent);
    return out;
}

} // namespace saddlefractal
