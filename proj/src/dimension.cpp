#include "saddlefractal/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "saddlefractal/detail/parallel.hpp"
#include "saddlefractal/log.hpp"

namespace saddlefractal {

using detail::resolve_jobs;

EpsGrid EpsGrid::dyadic(double eps_max, int count) {
    if (!(eps_max > 0.0 && eps_max < 1.0))
        throw std::domain_error("EpsGrid: eps_max must be in (0,1)");
    if (count < 1) throw std::domain_error("EpsGrid: count must be >= 1");
    EpsGrid grid;
    grid.values.reserve(count);
    for (int j = 0; j < count; ++j) grid.values.push_back(std::ldexp(eps_max, -j));
    return grid;
}

// --- log-log regression --------------------------------------------------

namespace {

struct Design {
    std::vector<double> x; // log eps
    std::vector<double> w; // log(-log eps)
    std::vector<double> y; // log m
};

Design make_design(std::span<const MeasurePoint> pairs, const FitOptions& options) {
    if (pairs.size() < 5) throw FitError("fit: need at least 5 (eps, m) pairs");
    std::vector<MeasurePoint> sorted(pairs.begin(), pairs.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const MeasurePoint& a, const MeasurePoint& b) { return a.epsilon > b.epsilon; });
    for (std::size_t k = 0; k + 1 < sorted.size(); ++k)
        if (sorted[k].epsilon == sorted[k + 1].epsilon)
            throw FitError("fit: degenerate design, repeated eps");

    const std::size_t drop = std::min<std::size_t>(std::max(options.drop_largest, 0), sorted.size());
    if (sorted.size() - drop < 3) throw FitError("fit: too few pairs after transient drop");

    Design d;
    for (std::size_t k = drop; k < sorted.size(); ++k) {
        const double eps = sorted[k].epsilon;
        const double m = sorted[k].measure;
        if (!(eps > 0.0 && eps < 1.0)) throw FitError("fit: eps must be in (0,1)");
        if (!(m > 0.0)) throw FitError("fit: measures must be positive");
        d.x.push_back(std::log(eps));
        d.w.push_back(std::log(-std::log(eps)));
        d.y.push_back(std::log(m));
    }
    return d;
}

struct Ols2 {
    double slope, intercept, rms, stderr_slope;
};

Ols2 ols_power(const Design& d) {
    const std::size_t n = d.x.size();
    long double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < n; ++k) {
        sx += d.x[k];
        sy += d.y[k];
        sxx += static_cast<long double>(d.x[k]) * d.x[k];
        sxy += static_cast<long double>(d.x[k]) * d.y[k];
    }
    const long double denom = n * sxx - sx * sx;
    if (denom == 0) throw FitError("fit: degenerate design");
    const long double slope = (n * sxy - sx * sy) / denom;
    const long double intercept = (sy - slope * sx) / n;
    long double ssr = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const long double r = d.y[k] - slope * d.x[k] - intercept;
        ssr += r * r;
    }
    Ols2 out;
    out.slope = static_cast<double>(slope);
    out.intercept = static_cast<double>(intercept);
    out.rms = static_cast<double>(std::sqrt(ssr / n));
    const long double sxx_c = sxx - sx * sx / n;
    out.stderr_slope =
        n > 2 ? static_cast<double>(std::sqrt(ssr / (n - 2) / sxx_c)) : 0.0;
    return out;
}

struct Ols3 {
    bool ok = false;
    double slope, log_coef, intercept, rms, stderr_slope;
};

// least squares for y = a x + b w + c via normal equations in long double
Ols3 ols_powerlog(const Design& d) {
    Ols3 out;
    const std::size_t n = d.x.size();
    if (n < 5) return out;
    long double A[3][3] = {};
    long double b[3] = {};
    for (std::size_t k = 0; k < n; ++k) {
        const long double v[3] = {d.x[k], d.w[k], 1.0L};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) A[r][c] += v[r] * v[c];
            b[r] += v[r] * d.y[k];
        }
    }
    long double M[3][4];
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) M[r][c] = A[r][c];
        M[r][3] = b[r];
    }
    // Gaussian elimination with partial pivoting
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::fabs(static_cast<double>(M[r][col])) >
                std::fabs(static_cast<double>(M[piv][col])))
                piv = r;
        if (M[piv][col] == 0) return out; // collinear regressors
        if (piv != col)
            for (int c = 0; c < 4; ++c) std::swap(M[piv][c], M[col][c]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const long double f = M[r][col] / M[col][col];
            for (int c = col; c < 4; ++c) M[r][c] -= f * M[col][c];
        }
    }
    const long double theta[3] = {M[0][3] / M[0][0], M[1][3] / M[1][1], M[2][3] / M[2][2]};
    long double ssr = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const long double r = d.y[k] - theta[0] * d.x[k] - theta[1] * d.w[k] - theta[2];
        ssr += r * r;
    }
    // slope variance from (X^T X)^{-1}[0][0]
    long double inv00;
    {
        const long double det = A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) -
                                A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
                                A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
        if (det == 0) return out;
        inv00 = (A[1][1] * A[2][2] - A[1][2] * A[2][1]) / det;
    }
    out.ok = true;
    out.slope = static_cast<double>(theta[0]);
    out.log_coef = static_cast<double>(theta[1]);
    out.intercept = static_cast<double>(theta[2]);
    out.rms = static_cast<double>(std::sqrt(ssr / n));
    out.stderr_slope =
        n > 3 ? static_cast<double>(std::sqrt(ssr / (n - 3) * inv00)) : 0.0;
    return out;
}

} // namespace

LogLogFit fit_loglog(std::span<const MeasurePoint> pairs, const FitOptions& options) {
    const Design d = make_design(pairs, options);
    const Ols2 power = ols_power(d);
    const Ols3 plog = ols_powerlog(d);

    LogLogFit fit;
    // an exact power law leaves nothing for the log term to explain
    const bool select_log = plog.ok && power.rms > options.powerlog_factor * plog.rms &&
                            power.rms > 1e-13;
    if (select_log) {
        fit.slope = plog.slope;
        fit.log_exponent = plog.log_coef;
        fit.intercept = plog.intercept;
        fit.model = ScalingModel::PowerLog;
        fit.residual = plog.rms;
        fit.stderr_slope = plog.stderr_slope;
    } else {
        fit.slope = power.slope;
        fit.log_exponent = 0.0;
        fit.intercept = power.intercept;
        fit.model = ScalingModel::Power;
        fit.residual = power.rms;
        fit.stderr_slope = power.stderr_slope;
    }
    return fit;
}

DimensionEstimate fit_scaling(std::span<const MeasurePoint> pairs, int ambient,
                              const FitOptions& options) {
    if (ambient != 1 && ambient != 2) throw std::domain_error("fit_scaling: ambient must be 1 or 2");
    const LogLogFit fit = fit_loglog(pairs, options);
    DimensionEstimate est;
    est.d = std::clamp(ambient - fit.slope, 0.0, static_cast<double>(ambient));
    est.log_exponent = fit.log_exponent;
    est.model = fit.model;
    est.residual = fit.residual;
    est.stderr_d = fit.stderr_slope;
    est.ambient = ambient;
    return est;
}

// --- 1-D measure tables ---------------------------------------------------

namespace {

std::vector<double> usable_grid(const Orbit1D& orbit, const EpsGrid& grid) {
    std::vector<double> eps;
    const double cutoff = 10.0 * orbit.floor;
    for (double e : grid.values) {
        if (e >= cutoff) {
            eps.push_back(e);
        } else {
            log_debug("measure table: dropping eps=%.3g below 10*floor=%.3g", e, cutoff);
        }
    }
    return eps;
}

} // namespace

std::vector<MeasurePoint> orbit_measure_table_serial(const Orbit1D& orbit, const EpsGrid& grid) {
    const std::vector<double> eps = usable_grid(orbit, grid);
    std::vector<MeasurePoint> table(eps.size());
    for (std::size_t k = 0; k < eps.size(); ++k)
        table[k] = {eps[k], eps_neighborhood_length(orbit, eps[k])};
    return table;
}

std::vector<MeasurePoint> orbit_measure_table(const Orbit1D& orbit, const EpsGrid& grid, int jobs) {
    if (resolve_jobs(jobs) == 1) return orbit_measure_table_serial(orbit, grid);
    const std::vector<double> eps = usable_grid(orbit, grid);
    std::vector<MeasurePoint> table(eps.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(resolve_jobs(jobs))
#endif
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(eps.size()); ++k)
        table[k] = {eps[k], eps_neighborhood_length(orbit, eps[k])};
    return table;
}

DimensionEstimate box_dim_sequence(const Orbit1D& orbit, const EpsGrid& grid,
                                   const FitOptions& options, int jobs) {
    const auto table = orbit_measure_table(orbit, grid, jobs);
    return fit_scaling(table, 1, options);
}

// --- cell accumulation ----------------------------------------------------

struct CellAccumulator::Impl {
    double eps;
    bool bitmap_mode = false;

    // bitmap path
    std::int64_t i0 = 0, j0 = 0, ni = 0, nj = 0;
    std::vector<std::uint64_t> bits;
    std::size_t bit_count = 0;

    // hash path
    std::unordered_set<std::uint64_t> set;

    std::int64_t cell_of(double v) const { return static_cast<std::int64_t>(std::floor(v / eps)); }

    static std::uint64_t pack(std::int64_t i, std::int64_t j) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(static_cast<std::int32_t>(i)))
                << 32) |
               static_cast<std::uint32_t>(static_cast<std::int32_t>(j));
    }

    void insert(std::int64_t i, std::int64_t j) {
        if (bitmap_mode) {
            const std::int64_t di = i - i0, dj = j - j0;
            if (di < 0 || di >= ni || dj < 0 || dj >= nj)
                throw std::logic_error("CellAccumulator: cell outside declared bounding box");
            const std::uint64_t idx =
                static_cast<std::uint64_t>(di) * static_cast<std::uint64_t>(nj) +
                static_cast<std::uint64_t>(dj);
            std::uint64_t& word = bits[idx >> 6];
            const std::uint64_t mask = 1ull << (idx & 63);
            if ((word & mask) == 0) {
                word |= mask;
                ++bit_count;
            }
        } else {
            if (i <= INT32_MIN || i >= INT32_MAX || j <= INT32_MIN || j >= INT32_MAX)
                throw std::domain_error("CellAccumulator: cell index out of range");
            set.insert(pack(i, j));
        }
    }
};

CellAccumulator::CellAccumulator(double epsilon) : impl_(std::make_unique<Impl>()) {
    if (!(epsilon > 0.0)) throw std::domain_error("CellAccumulator: epsilon must be > 0");
    impl_->eps = epsilon;
}

CellAccumulator::CellAccumulator(double epsilon, CellIndex lo, CellIndex hi)
    : CellAccumulator(epsilon) {
    if (hi.i < lo.i || hi.j < lo.j) throw std::domain_error("CellAccumulator: empty bounding box");
    const std::int64_t ni = hi.i - lo.i + 1;
    const std::int64_t nj = hi.j - lo.j + 1;
    constexpr std::int64_t kMaxBitmapCells = std::int64_t{1} << 28; // 32 MiB of bits
    if (ni > 0 && nj > 0 && ni <= kMaxBitmapCells / nj) {
        impl_->bitmap_mode = true;
        impl_->i0 = lo.i;
        impl_->j0 = lo.j;
        impl_->ni = ni;
        impl_->nj = nj;
        impl_->bits.assign(static_cast<std::size_t>((ni * nj + 63) / 64), 0);
    }
}

CellAccumulator::CellAccumulator(CellAccumulator&&) noexcept = default;
CellAccumulator& CellAccumulator::operator=(CellAccumulator&&) noexcept = default;
CellAccumulator::~CellAccumulator() = default;

void CellAccumulator::add_point(double x, double y) {
    impl_->insert(impl_->cell_of(x), impl_->cell_of(y));
}

void CellAccumulator::add_segment(double x0, double y0, double x1, double y1) {
    Impl& im = *impl_;
    const double eps = im.eps;
    std::int64_t i = im.cell_of(x0), j = im.cell_of(y0);
    const std::int64_t ie = im.cell_of(x1), je = im.cell_of(y1);
    im.insert(i, j);
    if (i == ie && j == je) return;

    // axis-aligned fast paths
    if (j == je && y0 == y1) {
        const std::int64_t lo = std::min(i, ie), hi = std::max(i, ie);
        for (std::int64_t k = lo; k <= hi; ++k) im.insert(k, j);
        return;
    }
    if (i == ie && x0 == x1) {
        const std::int64_t lo = std::min(j, je), hi = std::max(j, je);
        for (std::int64_t k = lo; k <= hi; ++k) im.insert(i, k);
        return;
    }

    // grid traversal; boundary ownership is half-open ([i eps, (i+1) eps))
    const double dx = x1 - x0, dy = y1 - y0;
    const int sx = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
    const int sy = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
    const double inf = std::numeric_limits<double>::infinity();
    // parameter of the next boundary crossing in each axis
    auto tx_next = [&](std::int64_t ci) {
        if (sx == 0) return inf;
        const double xb = eps * static_cast<double>(sx > 0 ? ci + 1 : ci);
        return (xb - x0) / dx;
    };
    auto ty_next = [&](std::int64_t cj) {
        if (sy == 0) return inf;
        const double yb = eps * static_cast<double>(sy > 0 ? cj + 1 : cj);
        return (yb - y0) / dy;
    };
    double tx = tx_next(i), ty = ty_next(j);
    std::int64_t guard = std::llabs(ie - i) + std::llabs(je - j) + 4;
    while ((i != ie || j != je) && guard-- > 0) {
        if (tx < ty) {
            i += sx;
            tx = tx_next(i);
        } else if (ty < tx) {
            j += sy;
            ty = ty_next(j);
        } else {
            // simultaneous crossing: ownership of the corner decides the order
            if (sx > 0 && sy < 0) {
                i += sx; // corner belongs to the new column, old row
                tx = tx_next(i);
            } else if (sx < 0 && sy > 0) {
                j += sy; // corner belongs to the old column, new row
                ty = ty_next(j);
            } else {
                i += sx;
                j += sy;
                tx = tx_next(i);
                ty = ty_next(j);
            }
        }
        // past the end cell: stop without inserting (guards roundoff drift)
        if (sx > 0 && i > ie) break;
        if (sx < 0 && i < ie) break;
        if (sy > 0 && j > je) break;
        if (sy < 0 && j < je) break;
        im.insert(i, j);
    }
    im.insert(ie, je);
}

void CellAccumulator::merge(const CellAccumulator& other) {
    Impl& a = *impl_;
    const Impl& b = *other.impl_;
    if (a.bitmap_mode != b.bitmap_mode)
        throw std::logic_error("CellAccumulator: cannot merge different storage modes");
    if (a.bitmap_mode) {
        if (a.i0 != b.i0 || a.j0 != b.j0 || a.ni != b.ni || a.nj != b.nj)
            throw std::logic_error("CellAccumulator: cannot merge different bounding boxes");
        std::size_t count = 0;
        for (std::size_t w = 0; w < a.bits.size(); ++w) {
            a.bits[w] |= b.bits[w];
            count += static_cast<std::size_t>(__builtin_popcountll(a.bits[w]));
        }
        a.bit_count = count;
    } else {
        a.set.insert(b.set.begin(), b.set.end());
    }
}

std::size_t CellAccumulator::count() const {
    return impl_->bitmap_mode ? impl_->bit_count : impl_->set.size();
}

CellGrid CellAccumulator::extract() const {
    const Impl& im = *impl_;
    CellGrid grid;
    grid.epsilon = im.eps;
    grid.cells.reserve(count());
    if (im.bitmap_mode) {
        for (std::size_t w = 0; w < im.bits.size(); ++w) {
            std::uint64_t word = im.bits[w];
            while (word != 0) {
                const int bit = __builtin_ctzll(word);
                word &= word - 1;
                const std::uint64_t idx = (static_cast<std::uint64_t>(w) << 6) + bit;
                grid.cells.push_back({im.i0 + static_cast<std::int64_t>(idx / im.nj),
                                      im.j0 + static_cast<std::int64_t>(idx % im.nj)});
            }
        }
        // i-major bit layout is already (i, j)-lexicographic
    } else {
        for (std::uint64_t key : im.set)
            grid.cells.push_back({static_cast<std::int32_t>(key >> 32),
                                  static_cast<std::int32_t>(key & 0xffffffffu)});
        std::sort(grid.cells.begin(), grid.cells.end());
    }
    return grid;
}

// --- box counting ----------------------------------------------------------

namespace {

bool vertex_cell_bbox(std::span<const Polyline> polylines, double eps, CellIndex& lo,
                      CellIndex& hi) {
    bool any = false;
    for (const Polyline& pl : polylines) {
        for (const Vec2& v : pl.pts) {
            const CellIndex c = {static_cast<std::int64_t>(std::floor(v.x / eps)),
                                 static_cast<std::int64_t>(std::floor(v.y / eps))};
            if (!any) {
                lo = hi = c;
                any = true;
            } else {
                lo.i = std::min(lo.i, c.i);
                lo.j = std::min(lo.j, c.j);
                hi.i = std::max(hi.i, c.i);
                hi.j = std::max(hi.j, c.j);
            }
        }
    }
    return any;
}

CellAccumulator make_accumulator(std::span<const Polyline> polylines, double eps) {
    CellIndex lo, hi;
    if (vertex_cell_bbox(polylines, eps, lo, hi)) return CellAccumulator(eps, lo, hi);
    return CellAccumulator(eps);
}

void accumulate_polyline(CellAccumulator& acc, const Polyline& pl) {
    if (pl.pts.empty()) return;
    acc.add_point(pl.pts[0].x, pl.pts[0].y);
    for (std::size_t k = 1; k < pl.pts.size(); ++k)
        acc.add_segment(pl.pts[k - 1].x, pl.pts[k - 1].y, pl.pts[k].x, pl.pts[k].y);
}

} // namespace

CellGrid box_count(std::span<const Polyline> polylines, double epsilon) {
    if (!(epsilon > 0.0)) throw std::domain_error("box_count: epsilon must be > 0");
    CellAccumulator acc = make_accumulator(polylines, epsilon);
    for (const Polyline& pl : polylines) accumulate_polyline(acc, pl);
    return acc.extract();
}

CellGrid box_count_parallel(std::span<const Polyline> polylines, double epsilon, int jobs) {
    if (!(epsilon > 0.0)) throw std::domain_error("box_count: epsilon must be > 0");
    const int threads = resolve_jobs(jobs);
    if (threads == 1) return box_count(polylines, epsilon);
#ifdef _OPENMP
    CellIndex lo, hi;
    const bool bounded = vertex_cell_bbox(polylines, epsilon, lo, hi);
    std::vector<CellAccumulator> partials;
    partials.reserve(threads);
    for (int t = 0; t < threads; ++t)
        partials.push_back(bounded ? CellAccumulator(epsilon, lo, hi) : CellAccumulator(epsilon));
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(polylines.size()); ++k)
        accumulate_polyline(partials[omp_get_thread_num()], polylines[k]);
    for (int t = 1; t < threads; ++t) partials[0].merge(partials[t]);
    return partials[0].extract();
#else
    return box_count(polylines, epsilon);
#endif
}

std::vector<MeasurePoint> planar_measure_table(std::span<const Polyline> polylines,
                                               const EpsGrid& grid, int jobs) {
    std::vector<MeasurePoint> table(grid.values.size());
    const int threads = resolve_jobs(jobs);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (threads > 1)
#endif
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(grid.values.size()); ++k) {
        const double eps = grid.values[k];
        const CellGrid cells = box_count(polylines, eps);
        table[k] = {eps, static_cast<double>(cells.count()) * eps * eps};
    }
    return table;
}

DimensionEstimate box_dim_planar(std::span<const Polyline> polylines, const EpsGrid& grid,
                                 const FitOptions& options, int jobs) {
    const auto table = planar_measure_table(polylines, grid, jobs);
    return fit_scaling(table, 2, options);
}

// --- closed-form layer ------------------------------------------------------

CorollaryDims corollary_dims(int codim) {
    if (codim < 2) throw std::domain_error("corollary_dims: codimension must be >= 2");
    CorollaryDims out;
    if (codim % 2 == 0) {
        out.away = 1.0 - 2.0 / codim;
        out.through = 1.0 - 1.0 / (codim - 1);
    } else {
        out.away = 1.0 - 2.0 / (codim + 1);
        out.through = 1.0 - 1.0 / codim;
    }
    return out;
}

double spiral_dim_formula(int codim) {
    if (codim < 1) throw std::domain_error("spiral_dim_formula: codimension must be >= 1");
    if (codim % 2 == 0) return 2.0 - 2.0 / codim;
    return 2.0 - 2.0 / (codim + 1);
}

AsymptoticModel displacement_asymptotics_formula(int codim, double r, bool through_saddle) {
    if (codim < 1) throw std::domain_error("displacement_asymptotics: codimension must be >= 1");
    if (codim == 1) {
        if (!(r > 1.0))
            throw std::domain_error("displacement_asymptotics: codimension 1 requires r > 1");
        return {r, false};
    }
    if (r != 1.0)
        throw std::domain_error("displacement_asymptotics: codimension >= 2 requires r = 1");
    const int m = codim / 2;
    if (codim % 2 == 0) {
        return through_saddle ? AsymptoticModel{static_cast<double>(2 * m - 1), false}
                              : AsymptoticModel{static_cast<double>(m), false};
    }
    return through_saddle ? AsymptoticModel{static_cast<double>(2 * m + 1), true}
                          : AsymptoticModel{static_cast<double>(m + 1), true};
}

std::pair<int, int> cyclicity_candidates(double d) {
    if (!(d >= 1.0 && d < 2.0)) throw std::domain_error("cyclicity_candidates: d must be in [1,2)");
    const double v = 2.0 / (2.0 - d);
    const double rounded = std::round(v);
    if (std::fabs(v - rounded) > 1e-6) {
        const int n = std::max(2, static_cast<int>(rounded));
        throw CyclicityValidationError("cyclicity_candidates: 2/(2-d) is not integral",
                                       2.0 - 2.0 / n);
    }
    const int k = static_cast<int>(rounded);
    return {k - 1, k};
}

} // namespace saddlefractal
