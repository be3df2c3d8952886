#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "saddlefractal/orbits1d.hpp"
#include "saddlefractal/polyline.hpp"

namespace saddlefractal {

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Decreasing epsilon values in (0,1) used to discretize the eps -> 0 limit.
struct EpsGrid {
    std::vector<double> values;

    // eps_max * 2^-j for j = 0..count-1
    static EpsGrid dyadic(double eps_max, int count);
    static EpsGrid default_1d() { return dyadic(1.0 / 16.0, 24); } // 2^-4 .. 2^-27
    static EpsGrid default_2d() { return dyadic(0.25, 11); }       // 2^-2 .. 2^-12
};

enum class ScalingModel { Power, PowerLog };

struct DimensionEstimate {
    double d = 0.0;            // fitted box dimension, clamped to [0, ambient]
    double log_exponent = 0.0; // fitted exponent of (-log eps); 0 for Power
    ScalingModel model = ScalingModel::Power;
    double residual = 0.0;     // rms residual of the selected model (log space)
    double stderr_d = 0.0;     // standard error of the fitted slope
    int ambient = 1;
};

struct FitOptions {
    int drop_largest = 2;          // discard this many largest-eps pairs (transient regime)
    double powerlog_factor = 1.25; // select PowerLog only if it beats Power by this ratio
};

struct MeasurePoint {
    double epsilon = 0.0;
    double measure = 0.0;
};

// Least-squares fit of log m = slope * log eps + lambda * log(-log eps) + c.
// Both the Power (lambda = 0) and PowerLog models are fitted; PowerLog is
// selected only when it reduces the rms residual by more than
// options.powerlog_factor. Used by fit_scaling and the displacement fits.
struct LogLogFit {
    double slope = 0.0;
    double log_exponent = 0.0;
    double intercept = 0.0;
    ScalingModel model = ScalingModel::Power;
    double residual = 0.0;
    double stderr_slope = 0.0;
};

LogLogFit fit_loglog(std::span<const MeasurePoint> pairs, const FitOptions& options = {});

// Box-dimension fit: log m = (ambient - d) log eps + lambda log(-log eps) + c.
DimensionEstimate fit_scaling(std::span<const MeasurePoint> pairs, int ambient,
                              const FitOptions& options = {});

// --- 1-D measure tables ------------------------------------------------

// (eps, exact eps-neighborhood length) for every grid value. Grid values
// below 10 * orbit.floor are dropped (unresolvable in double precision).
std::vector<MeasurePoint> orbit_measure_table_serial(const Orbit1D& orbit, const EpsGrid& grid);
// Same result, OpenMP-parallel over grid values. jobs: 1 = serial reference,
// 0 = library default thread count, n = n threads.
std::vector<MeasurePoint> orbit_measure_table(const Orbit1D& orbit, const EpsGrid& grid,
                                              int jobs = 1);

DimensionEstimate box_dim_sequence(const Orbit1D& orbit, const EpsGrid& grid,
                                   const FitOptions& options = {}, int jobs = 1);

// --- 2-D box counting ---------------------------------------------------

struct CellIndex {
    std::int64_t i = 0;
    std::int64_t j = 0;
    friend bool operator==(const CellIndex&, const CellIndex&) = default;
    friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

// Deduplicated half-open grid cells [i eps, (i+1) eps) x [j eps, (j+1) eps).
struct CellGrid {
    double epsilon = 0.0;
    std::vector<CellIndex> cells; // sorted, unique
    std::size_t count() const { return cells.size(); }
};

// Accumulates the exact set of cells intersected by points and segments.
// Backed by a bitmap when a bounding box is declared and small enough,
// otherwise by a hash set.
class CellAccumulator {
public:
    explicit CellAccumulator(double epsilon);
    // Bounding box hint in cell indices (inclusive); enables the bitmap path.
    CellAccumulator(double epsilon, CellIndex lo, CellIndex hi);
    CellAccumulator(CellAccumulator&&) noexcept;
    CellAccumulator& operator=(CellAccumulator&&) noexcept;
    ~CellAccumulator();

    void add_point(double x, double y);
    // Inserts every cell crossed by the closed segment (exact traversal).
    void add_segment(double x0, double y0, double x1, double y1);
    void merge(const CellAccumulator& other);

    std::size_t count() const;
    CellGrid extract() const; // sorted unique indices

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Cells touched by at least one vertex or segment crossing. Exact in the
// sense of continuous segments: refining eps -> eps/2 never loses cells.
CellGrid box_count(std::span<const Polyline> polylines, double epsilon);
// Same cells, OpenMP-parallel over polylines with per-thread accumulators.
CellGrid box_count_parallel(std::span<const Polyline> polylines, double epsilon, int jobs = 0);

// (eps, count * eps^2) per grid value; jobs parallelizes over grid values.
std::vector<MeasurePoint> planar_measure_table(std::span<const Polyline> polylines,
                                               const EpsGrid& grid, int jobs = 1);

DimensionEstimate box_dim_planar(std::span<const Polyline> polylines, const EpsGrid& grid,
                                 const FitOptions& options = {}, int jobs = 1);

// --- closed-form dimension / asymptotics -------------------------------

struct CorollaryDims {
    double away = 0.0;    // transversal away from the saddle vertex
    double through = 0.0; // transversal through the vertex
};

// Box dimensions of Poincare-map orbits by loop codimension (codim >= 2).
CorollaryDims corollary_dims(int codim);

// Box dimension of the spiral trajectory, codim >= 1.
double spiral_dim_formula(int codim);

struct AsymptoticModel {
    double exponent = 0.0;
    bool has_log = false;
    friend bool operator==(const AsymptoticModel&, const AsymptoticModel&) = default;
};

// Leading displacement asymptotics s - P(s) ~ s^e or s^e(-log s) by
// codimension; codim == 1 requires r > 1, codim >= 2 requires r == 1.
AsymptoticModel displacement_asymptotics_formula(int codim, double r, bool through_saddle);

struct CyclicityValidationError : std::domain_error {
    CyclicityValidationError(const std::string& msg, double nearest)
        : std::domain_error(msg), nearest_valid_d(nearest) {}
    double nearest_valid_d;
};

// {2/(2-d) - 1, 2/(2-d)} for d in [1,2) with 2/(2-d) integral (tol 1e-6);
// otherwise throws CyclicityValidationError carrying the nearest valid d.
std::pair<int, int> cyclicity_candidates(double d);

} // namespace saddlefractal
