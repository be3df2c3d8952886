#include "saddlefractal/geometry.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "saddlefractal/detail/parallel.hpp"

namespace saddlefractal {

using detail::resolve_jobs;

namespace {

constexpr std::size_t kFamilyVertexCap = 10'000'000;

// x^r and x^(1/r) with fast paths for the common ratios
struct RatioPow {
    double r;
    double pow_r(double x) const {
        if (r == 1.0) return x;
        if (r == 2.0) return x * x;
        if (r == 0.5) return std::sqrt(x);
        return std::pow(x, r);
    }
    double pow_inv_r(double v) const {
        if (r == 1.0) return v;
        if (r == 2.0) return std::sqrt(v);
        if (r == 0.5) return v * v;
        return std::pow(v, 1.0 / r);
    }
};

void check_level(double r, double c, double delta) {
    if (!(c > 0.0) || !(c <= std::pow(delta, r + 1.0)))
        throw std::domain_error("hyperbola level must lie in (0, delta^(r+1)]");
}

// Emits the arc vertices in order of increasing x. The arc is split at the
// slope-1 point; the steep part is stepped uniformly in y, the shallow part
// uniformly in x, with per-axis step max_step/sqrt(2) so that chords never
// exceed max_step.
template <typename Emit>
void stream_arc(double r, double c, double delta, double max_step, Emit&& emit) {
    check_level(r, c, delta);
    if (!(max_step > 0.0)) throw std::domain_error("hyperbola_arc: max_step must be > 0");
    const RatioPow rp{r};
    const double step = max_step / std::sqrt(2.0);
    const double x_min = rp.pow_inv_r(c / delta);
    double x_knee = std::pow(r * c, 1.0 / (r + 1.0));
    x_knee = std::clamp(x_knee, x_min, delta);

    emit(x_min, delta);
    double x_last = x_min;
    // steep half: |dy/dx| >= 1, step in y from delta down to y(x_knee)
    const double y_knee = c / rp.pow_r(x_knee);
    if (y_knee < delta) {
        const long n = std::max(1L, static_cast<long>(std::ceil((delta - y_knee) / step)));
        for (long t = 1; t <= n; ++t) {
            const double y = delta + (y_knee - delta) * (static_cast<double>(t) / n);
            const double x = rp.pow_inv_r(c / y);
            emit(x, y);
            x_last = x;
        }
    }
    // shallow half: step in x up to the box edge
    if (x_last < delta) {
        const long n = std::max(1L, static_cast<long>(std::ceil((delta - x_last) / step)));
        for (long t = 1; t <= n; ++t) {
            const double x = t == n ? delta : x_last + (delta - x_last) * (static_cast<double>(t) / n);
            emit(x, c / rp.pow_r(x));
        }
    }
}

} // namespace

HyperbolaFamily family_from_orbit(double r, const Orbit1D& S, double delta) {
    if (!(r > 0.0)) throw std::domain_error("family_from_orbit: r must be > 0");
    if (!(delta > 0.0 && delta <= 1.0)) throw std::domain_error("family_from_orbit: delta in (0,1]");
    HyperbolaFamily family;
    family.r = r;
    family.delta = delta;
    const double scale = std::pow(delta, r);
    std::vector<double> levels;
    levels.reserve(S.size());
    for (double s : S.points) {
        if (!(s <= delta)) throw std::domain_error("family_from_orbit: orbit values must be <= delta");
        levels.push_back(scale == 1.0 ? s : scale * s);
    }
    family.levels = Orbit1D::from_points(std::move(levels), S.floor * scale);
    return family;
}

Polyline hyperbola_arc(double r, double c, double delta, double max_step) {
    Polyline pl;
    pl.max_step = max_step;
    stream_arc(r, c, delta, max_step, [&](double x, double y) { pl.pts.push_back({x, y}); });
    return pl;
}

Orbit1D transversal_trace(const HyperbolaFamily& family, Transversal which) {
    const double scale = std::pow(family.delta, family.r);
    std::vector<double> vertical;
    vertical.reserve(family.levels.size());
    for (double c : family.levels.points) vertical.push_back(c / scale);
    Orbit1D trace = Orbit1D::from_points(std::move(vertical), family.levels.floor / scale);
    if (which == Transversal::Vertical) return trace;
    Orbit1D horizontal = power_transform(trace, 1.0 / family.r);
    if (family.delta != 1.0) {
        const double shift = std::pow(family.delta, 1.0 - 1.0 / family.r);
        for (double& x : horizontal.points) x *= shift;
    }
    return horizontal;
}

Vec2 symmetrize_point(double r, Vec2 p) { return {std::pow(p.x, r), p.y}; }

HyperbolaFamily symmetrize(const HyperbolaFamily& family) {
    if (family.delta != 1.0)
        throw std::domain_error("symmetrize: only defined on the unit box");
    HyperbolaFamily out = family;
    out.r = 1.0;
    return out;
}

SpiralModel make_spiral(const Orbit1D& S, double r, double delta, double ell) {
    if (!(ell > 0.0)) throw std::domain_error("make_spiral: strip length must be > 0");
    SpiralModel spiral;
    spiral.family = family_from_orbit(r, S, delta);
    spiral.strip_trace = transversal_trace(spiral.family, Transversal::Vertical);
    spiral.strip_length = ell;
    return spiral;
}

std::vector<Polyline> family_polylines(const HyperbolaFamily& family, double max_step) {
    std::vector<Polyline> arcs;
    arcs.reserve(family.levels.size());
    std::size_t vertices = 0;
    for (double c : family.levels.points) {
        arcs.push_back(hyperbola_arc(family.r, c, family.delta, max_step));
        vertices += arcs.back().pts.size();
        if (vertices > kFamilyVertexCap)
            throw std::length_error("family_polylines: vertex cap (1e7) exceeded");
    }
    return arcs;
}

std::vector<Polyline> assemble_spiral(const Orbit1D& S, double r, double delta, double ell,
                                      double max_step) {
    const SpiralModel spiral = make_spiral(S, r, delta, ell);
    std::vector<Polyline> parts = family_polylines(spiral.family, max_step);
    parts.reserve(2 * S.size());
    const long n = std::max(1L, static_cast<long>(std::ceil(ell / max_step)));
    for (double y : spiral.strip_trace.points) {
        Polyline strip;
        strip.max_step = max_step;
        strip.pts.reserve(n + 1);
        for (long t = 0; t <= n; ++t)
            strip.pts.push_back({delta + ell * (static_cast<double>(t) / n), y});
        parts.push_back(std::move(strip));
    }
    return parts;
}

// --- streaming counters -----------------------------------------------------

namespace {

CellAccumulator box_accumulator(double eps, double x_hi, double y_hi) {
    const auto hi_cell = [&](double v) { return static_cast<std::int64_t>(std::floor(v / eps)); };
    return CellAccumulator(eps, {0, 0}, {hi_cell(x_hi), hi_cell(y_hi)});
}

void accumulate_arc(CellAccumulator& acc, double r, double c, double delta, double eps) {
    bool first = true;
    double px = 0.0, py = 0.0;
    stream_arc(r, c, delta, eps / 2.0, [&](double x, double y) {
        if (first) {
            acc.add_point(x, y);
            first = false;
        } else {
            acc.add_segment(px, py, x, y);
        }
        px = x;
        py = y;
    });
}

} // namespace

std::size_t count_family_cells(const HyperbolaFamily& family, double epsilon) {
    if (!(epsilon > 0.0)) throw std::domain_error("count_family_cells: epsilon must be > 0");
    CellAccumulator acc = box_accumulator(epsilon, family.delta, family.delta);
    for (double c : family.levels.points) accumulate_arc(acc, family.r, c, family.delta, epsilon);
    return acc.count();
}

std::size_t count_family_cells_parallel(const HyperbolaFamily& family, double epsilon, int jobs) {
    const int threads = resolve_jobs(jobs);
    if (threads == 1) return count_family_cells(family, epsilon);
#ifdef _OPENMP
    std::vector<CellAccumulator> partials;
    partials.reserve(threads);
    for (int t = 0; t < threads; ++t)
        partials.push_back(box_accumulator(epsilon, family.delta, family.delta));
#pragma omp parallel for schedule(dynamic, 64) num_threads(threads)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(family.levels.size()); ++k)
        accumulate_arc(partials[omp_get_thread_num()], family.r, family.levels.points[k],
                       family.delta, epsilon);
    for (int t = 1; t < threads; ++t) partials[0].merge(partials[t]);
    return partials[0].count();
#else
    return count_family_cells(family, epsilon);
#endif
}

namespace {

void accumulate_spiral_level(CellAccumulator& acc, const SpiralModel& spiral, std::size_t k,
                             double eps) {
    const HyperbolaFamily& f = spiral.family;
    accumulate_arc(acc, f.r, f.levels.points[k], f.delta, eps);
    const double y = spiral.strip_trace.points[k];
    acc.add_segment(f.delta, y, f.delta + spiral.strip_length, y);
}

} // namespace

std::size_t count_spiral_cells(const SpiralModel& spiral, double epsilon) {
    if (!(epsilon > 0.0)) throw std::domain_error("count_spiral_cells: epsilon must be > 0");
    CellAccumulator acc =
        box_accumulator(epsilon, spiral.family.delta + spiral.strip_length, spiral.family.delta);
    for (std::size_t k = 0; k < spiral.family.levels.size(); ++k)
        accumulate_spiral_level(acc, spiral, k, epsilon);
    return acc.count();
}

std::size_t count_spiral_cells_parallel(const SpiralModel& spiral, double epsilon, int jobs) {
    const int threads = resolve_jobs(jobs);
    if (threads == 1) return count_spiral_cells(spiral, epsilon);
#ifdef _OPENMP
    std::vector<CellAccumulator> partials;
    partials.reserve(threads);
    for (int t = 0; t < threads; ++t)
        partials.push_back(box_accumulator(epsilon, spiral.family.delta + spiral.strip_length,
                                           spiral.family.delta));
#pragma omp parallel for schedule(dynamic, 64) num_threads(threads)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(spiral.family.levels.size()); ++k)
        accumulate_spiral_level(partials[omp_get_thread_num()], spiral, k, epsilon);
    for (int t = 1; t < threads; ++t) partials[0].merge(partials[t]);
    return partials[0].count();
#else
    return count_spiral_cells(spiral, epsilon);
#endif
}

// --- measure tables ----------------------------------------------------------

namespace {

template <typename Count>
std::vector<MeasurePoint> measure_table(const EpsGrid& grid, int jobs, Count&& count) {
    std::vector<MeasurePoint> table(grid.values.size());
    const int threads = resolve_jobs(jobs);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (threads > 1)
#endif
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(grid.values.size()); ++k) {
        const double eps = grid.values[k];
        table[k] = {eps, static_cast<double>(count(eps)) * eps * eps};
    }
    return table;
}

} // namespace

std::vector<MeasurePoint> family_measure_table_serial(const HyperbolaFamily& family,
                                                      const EpsGrid& grid) {
    return measure_table(grid, 1, [&](double eps) { return count_family_cells(family, eps); });
}

std::vector<MeasurePoint> family_measure_table(const HyperbolaFamily& family, const EpsGrid& grid,
                                               int jobs) {
    return measure_table(grid, jobs, [&](double eps) { return count_family_cells(family, eps); });
}

std::vector<MeasurePoint> spiral_measure_table_serial(const SpiralModel& spiral,
                                                      const EpsGrid& grid) {
    return measure_table(grid, 1, [&](double eps) { return count_spiral_cells(spiral, eps); });
}

std::vector<MeasurePoint> spiral_measure_table(const SpiralModel& spiral, const EpsGrid& grid,
                                               int jobs) {
    return measure_table(grid, jobs, [&](double eps) { return count_spiral_cells(spiral, eps); });
}

DimensionEstimate family_box_dim(const HyperbolaFamily& family, const EpsGrid& grid,
                                 const FitOptions& options, int jobs) {
    return fit_scaling(family_measure_table(family, grid, jobs), 2, options);
}

DimensionEstimate spiral_box_dim(const SpiralModel& spiral, const EpsGrid& grid,
                                 const FitOptions& options, int jobs) {
    return fit_scaling(spiral_measure_table(spiral, grid, jobs), 2, options);
}

double theoretical_family_dim(const MapModel& model, double r) {
    if (!(r > 0.0)) throw std::domain_error("theoretical_family_dim: r must be > 0");
    switch (model.variant()) {
        case MapVariant::Parabolic:
        case MapVariant::ParabolicLog: {
            const double rho = std::max(r, 1.0);
            const double t = rho * (model.alpha() - 1.0);
            return 1.0 + t / (t + 1.0);
        }
        case MapVariant::LinearHyperbolic:
        case MapVariant::PowerHyperbolic:
            return 1.0;
    }
    return 1.0;
}

void write_polylines_csv(std::ostream& os, std::span<const Polyline> polylines) {
    os << "curve_id,x,y\n";
    char buf[64];
    for (std::size_t id = 0; id < polylines.size(); ++id) {
        for (const Vec2& v : polylines[id].pts) {
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", id, v.x, v.y);
            os << buf;
        }
    }
}

} // namespace saddlefractal
