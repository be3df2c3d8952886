#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace saddlefractal {

enum class MapVariant { Parabolic, ParabolicLog, LinearHyperbolic, PowerHyperbolic };

// One-dimensional return-map model g on a validity interval (0, s_max].
//
//   Parabolic          g(s) = s - C s^alpha           (alpha > 1, C > 0)
//   ParabolicLog       g(s) = s - C s^alpha (-log s)  (alpha > 1, C > 0, s_max < 1)
//   LinearHyperbolic   g(s) = kappa s                 (kappa in (0,1))
//   PowerHyperbolic    g(s) = C s^beta                (beta > 1, C > 0)
//
// Construction samples (0, s_max] and rejects models that are not strictly
// increasing with 0 < g(s) < s there.
class MapModel {
public:
    static MapModel parabolic(double alpha, double coef, double s_max = 0.0);
    static MapModel parabolic_log(double alpha, double coef, double s_max = 0.5);
    static MapModel linear_hyperbolic(double kappa, double s_max = 1.0);
    static MapModel power_hyperbolic(double beta, double coef, double s_max = 0.0);

    // g(s); throws std::domain_error outside (0, s_max].
    double operator()(double s) const;

    MapVariant variant() const { return variant_; }
    double alpha() const { return alpha_; }
    double coef() const { return coef_; }
    double kappa() const { return kappa_; }
    double beta() const { return beta_; }
    double s_max() const { return s_max_; }

private:
    MapModel() = default;
    double eval_unchecked(double s) const;
    void validate() const;

    MapVariant variant_ = MapVariant::Parabolic;
    double alpha_ = 2.0;
    double coef_ = 1.0;
    double kappa_ = 0.5;
    double beta_ = 2.0;
    double s_max_ = 0.5;
};

double evaluate_map(const MapModel& model, double s);

// Exact box dimension of orbits of the model: 1 - 1/alpha for the parabolic
// variants, 0 for the hyperbolic ones.
double theoretical_orbit_dim(const MapModel& model);

// Strictly decreasing positive sequence accumulating at 0.
struct Orbit1D {
    std::vector<double> points;
    double floor = 1e-9;
    std::optional<MapModel> source;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    double front() const { return points.front(); }
    double back() const { return points.back(); }

    // Wraps an explicit point list; checks strict decrease and positivity.
    static Orbit1D from_points(std::vector<double> pts, double floor = 1e-9);
};

struct OrbitStop {
    std::size_t max_points = 100000;
    double floor = 1e-9;
};

// Iterates the model from s0 until the next point would drop below
// stop.floor, stop.max_points is reached, or the iteration stalls in double
// precision. Gap monotonicity (after the burn-in prefix) is verified.
Orbit1D generate_orbit(const MapModel& model, double s0, const OrbitStop& stop = {});

// Gaps s_n - s_{n+1} nonincreasing for all n >= burn_in.
bool gaps_eventually_decreasing(const Orbit1D& orbit, std::size_t burn_in = 10);

// Exact Lebesgue measure of the union of [s_n - eps, s_n + eps] intersected
// with [0, inf), by a single merge pass over the sorted points.
double eps_neighborhood_length(const Orbit1D& orbit, double epsilon);

// Decomposition of the eps-neighborhood at the first index whose following
// gap is <= 2 eps. Indices are 0-based; critical_index == orbit.size() when
// every gap exceeds 2 eps.
struct TailNucleusSplit {
    double epsilon = 0.0;
    std::size_t critical_index = 0;
    double tail_length = 0.0;
    double nucleus_length = 0.0;
};

TailNucleusSplit tail_nucleus_split(const Orbit1D& orbit, double epsilon);

// Pointwise s_n -> s_n^exponent (exponent > 0 keeps the ordering).
Orbit1D power_transform(const Orbit1D& orbit, double exponent);

} // namespace saddlefractal
