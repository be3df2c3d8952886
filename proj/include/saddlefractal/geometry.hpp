#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "saddlefractal/dimension.hpp"
#include "saddlefractal/orbits1d.hpp"
#include "saddlefractal/polyline.hpp"

namespace saddlefractal {

// Level-curve family x^r y = c for c in `levels`, clipped to the box
// (0, delta]^2. Levels must lie in (0, delta^(r+1)].
struct HyperbolaFamily {
    double r = 1.0;
    Orbit1D levels;
    double delta = 1.0;
};

// Family whose arc through level c meets the vertical transversal {x=delta}
// at y = s_n, i.e. c = delta^r s_n (levels == S when delta == 1).
HyperbolaFamily family_from_orbit(double r, const Orbit1D& S, double delta = 1.0);

// Samples y = c / x^r for x in [(c/delta)^(1/r), delta] with vertex spacing
// bounded by max_step; all vertices satisfy |x^r y - c| < 1e-12.
Polyline hyperbola_arc(double r, double c, double delta, double max_step);

enum class Transversal { Vertical, Horizontal }; // {x=delta} / {y=delta}

Orbit1D transversal_trace(const HyperbolaFamily& family, Transversal which);

// Change u = x^r on the unit box: same levels, hyperbolicity ratio 1.
HyperbolaFamily symmetrize(const HyperbolaFamily& family);
Vec2 symmetrize_point(double r, Vec2 p);

// Glued spiral model: hyperbola family near the saddle plus one horizontal
// flow-box strip of length strip_length per level, attached at {x=delta}.
struct SpiralModel {
    HyperbolaFamily family;
    Orbit1D strip_trace; // vertical-transversal trace of the family
    double strip_length = 0.5;
};

SpiralModel make_spiral(const Orbit1D& S, double r, double delta, double ell);

// Materialized polylines (one per level; spiral adds one strip per level so
// the total count is 2 |S|). Throws std::length_error past 10^7 vertices.
std::vector<Polyline> family_polylines(const HyperbolaFamily& family, double max_step);
std::vector<Polyline> assemble_spiral(const Orbit1D& S, double r, double delta, double ell,
                                      double max_step);

// Streaming box counts: arcs are generated on the fly at vertex spacing
// eps/2 and fed straight into the cell accumulator, so the whole family is
// counted in constant memory. Results match box_count on the materialized
// polylines sampled at the same spacing.
std::size_t count_family_cells(const HyperbolaFamily& family, double epsilon);
std::size_t count_family_cells_parallel(const HyperbolaFamily& family, double epsilon,
                                        int jobs = 0); // OpenMP over arcs
std::size_t count_spiral_cells(const SpiralModel& spiral, double epsilon);
std::size_t count_spiral_cells_parallel(const SpiralModel& spiral, double epsilon, int jobs = 0);

std::vector<MeasurePoint> family_measure_table_serial(const HyperbolaFamily& family,
                                                      const EpsGrid& grid);
// OpenMP over grid values; each count is built by a single worker.
std::vector<MeasurePoint> family_measure_table(const HyperbolaFamily& family, const EpsGrid& grid,
                                               int jobs = 1);
std::vector<MeasurePoint> spiral_measure_table_serial(const SpiralModel& spiral,
                                                      const EpsGrid& grid);
std::vector<MeasurePoint> spiral_measure_table(const SpiralModel& spiral, const EpsGrid& grid,
                                               int jobs = 1);

DimensionEstimate family_box_dim(const HyperbolaFamily& family, const EpsGrid& grid,
                                 const FitOptions& options = {}, int jobs = 1);
DimensionEstimate spiral_box_dim(const SpiralModel& spiral, const EpsGrid& grid,
                                 const FitOptions& options = {}, int jobs = 1);

// 1 + dimension of the dominating transversal trace for a family built from
// an orbit of the model (max(r,1)(alpha-1)/(max(r,1)(alpha-1)+1) for the
// parabolic variants, 0 for the hyperbolic ones).
double theoretical_family_dim(const MapModel& model, double r);

// columns: curve_id,x,y
void write_polylines_csv(std::ostream& os, std::span<const Polyline> polylines);

} // namespace saddlefractal
