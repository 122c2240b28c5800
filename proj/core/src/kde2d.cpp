#include "recp/kde2d.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "recp/error.hpp"

namespace recp {

namespace {

double sample_sd(std::span<const Point2> pts, double Point2::*coord) {
    const auto n = static_cast<double>(pts.size());
    double mean = 0.0;
    for (const auto& p : pts) mean += p.*coord;
    mean /= n;
    double ss = 0.0;
    for (const auto& p : pts) ss += (p.*coord - mean) * (p.*coord - mean);
    return std::sqrt(ss / (n - 1.0));
}

// Per-point 1-D kernel factors phi((g - c) / s) / s on a set of abscissae.
std::vector<double> kernel_factors(std::span<const Point2> pts, double Point2::*coord, double s,
                                   std::span<const double> abscissae) {
    const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * s);
    std::vector<double> out(pts.size() * abscissae.size());
    for (std::size_t p = 0; p < pts.size(); ++p) {
        const double c = pts[p].*coord;
        for (std::size_t i = 0; i < abscissae.size(); ++i) {
            const double z = (abscissae[i] - c) / s;
            out[p * abscissae.size() + i] = norm * std::exp(-0.5 * z * z);
        }
    }
    return out;
}

} // namespace

Bandwidth scott_bandwidth(std::span<const Point2> points) {
    detail::require(points.size() >= 4, "select_bandwidth: needs at least 4 points");
    const double sx = sample_sd(points, &Point2::x);
    const double sy = sample_sd(points, &Point2::y);
    if (!(sx > 0.0) || !(sy > 0.0)) throw DegenerateError("select_bandwidth: zero variance in a coordinate");
    const double shrink = std::pow(static_cast<double>(points.size()), -1.0 / 6.0);
    const double hx = sx * shrink;
    const double hy = sy * shrink;
    return {hx * hx, 0.0, hy * hy};
}

Kde2d::Kde2d(std::vector<Point2> points, Bandwidth bandwidth) : points_(std::move(points)), bw_(bandwidth) {
    detail::require(points_.size() >= 2, "Kde2d: needs at least two points");
    const bool distinct = std::any_of(points_.begin(), points_.end(), [&](const Point2& p) {
        return p.x != points_.front().x || p.y != points_.front().y;
    });
    if (!distinct) throw DegenerateError("Kde2d: all points coincide");
    if (!bw_.is_spd()) throw DegenerateError("Kde2d: bandwidth is not symmetric positive definite");
    const double det = bw_.determinant();
    inv_xx_ = bw_.yy / det;
    inv_xy_ = -bw_.xy / det;
    inv_yy_ = bw_.xx / det;
    norm_ = 1.0 / (2.0 * std::numbers::pi * std::sqrt(det) * static_cast<double>(points_.size()));
}

Kde2d Kde2d::fit(std::vector<Point2> points, const BandwidthSelector& selector) {
    const Bandwidth bw = selector(points);
    return Kde2d(std::move(points), bw);
}

double Kde2d::sd_x() const noexcept { return std::sqrt(bw_.xx); }
double Kde2d::sd_y() const noexcept { return std::sqrt(bw_.yy); }

double Kde2d::density_at(Point2 q) const noexcept {
    double sum = 0.0;
    for (const auto& p : points_) {
        const double dx = q.x - p.x;
        const double dy = q.y - p.y;
        const double quad = inv_xx_ * dx * dx + 2.0 * inv_xy_ * dx * dy + inv_yy_ * dy * dy;
        sum += std::exp(-0.5 * quad);
    }
    return norm_ * sum;
}

double DensityGrid::total_mass() const noexcept {
    double s = 0.0;
    for (double v : values) s += v;
    return s * cell_area();
}

double DensityGrid::mass_above(double level) const noexcept {
    double s = 0.0;
    for (double v : values) {
        if (v >= level) s += v;
    }
    return s * cell_area();
}

DensityGrid evaluate_grid(const Kde2d& kde, const GridSpec& spec) {
    detail::require(spec.resolution >= 2, "evaluate_grid: resolution must be >= 2");
    const auto pts = kde.points();
    const auto [xmin_it, xmax_it] =
        std::minmax_element(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) { return a.x < b.x; });
    const auto [ymin_it, ymax_it] =
        std::minmax_element(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) { return a.y < b.y; });
    const double sx = kde.sd_x();
    const double sy = kde.sd_y();
    const double x_lo = xmin_it->x - spec.pad_sd * sx;
    const double x_hi = xmax_it->x + spec.pad_sd * sx;
    const double y_lo = ymin_it->y - spec.pad_sd * sy;
    const double y_hi = ymax_it->y + spec.pad_sd * sy;

    DensityGrid g;
    g.nx = spec.resolution;
    g.ny = spec.resolution;
    g.dx = (x_hi - x_lo) / static_cast<double>(g.nx);
    g.dy = (y_hi - y_lo) / static_cast<double>(g.ny);
    g.x0 = x_lo + 0.5 * g.dx;
    g.y0 = y_lo + 0.5 * g.dy;
    g.values.assign(g.nx * g.ny, 0.0);

    std::vector<double> xs(g.nx);
    std::vector<double> ys(g.ny);
    for (std::size_t i = 0; i < g.nx; ++i) xs[i] = g.x0 + static_cast<double>(i) * g.dx;
    for (std::size_t j = 0; j < g.ny; ++j) ys[j] = g.y0 + static_cast<double>(j) * g.dy;

    if (kde.bandwidth().is_diagonal()) {
        // Product kernel: the grid is (1/k) A^T B with A, B per-axis factors.
        const auto a = kernel_factors(pts, &Point2::x, sx, xs);
        const auto b = kernel_factors(pts, &Point2::y, sy, ys);
        const double inv_k = 1.0 / static_cast<double>(pts.size());
        for (std::size_t p = 0; p < pts.size(); ++p) {
            const double* bp = &b[p * g.ny];
            for (std::size_t i = 0; i < g.nx; ++i) {
                const double ai = a[p * g.nx + i] * inv_k;
                if (ai == 0.0) continue;
                double* row = &g.values[i * g.ny];
                for (std::size_t j = 0; j < g.ny; ++j) row[j] += ai * bp[j];
            }
        }
    } else {
        for (std::size_t i = 0; i < g.nx; ++i) {
            for (std::size_t j = 0; j < g.ny; ++j) g.values[i * g.ny + j] = kde.density_at({xs[i], ys[j]});
        }
    }
    return g;
}

MassLevel mass_level(const Kde2d& kde, double eps, const GridSpec& spec) {
    detail::require(eps > 0.0 && eps < 1.0, "mass_level: eps must lie in (0,1)");
    const DensityGrid g = evaluate_grid(kde, spec);
    std::vector<double> sorted = g.values;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());

    const double area = g.cell_area();
    const double target = 1.0 - eps;
    double mass = 0.0;
    double level = sorted.front();
    for (double v : sorted) {
        mass += v * area;
        level = v;
        if (mass >= target) break;
    }

    MassLevel out;
    out.b_eps = level;
    out.grid = spec;
    out.x_lo = g.x0 - 0.5 * g.dx;
    out.x_hi = out.x_lo + g.dx * static_cast<double>(g.nx);
    out.y_lo = g.y0 - 0.5 * g.dy;
    out.y_hi = out.y_lo + g.dy * static_cast<double>(g.ny);
    out.captured_mass = g.mass_above(level);
    return out;
}

std::vector<ThetaProfilePoint> region_theta_scan(const Kde2d& kde, double b_eps, std::span<const double> t_grid,
                                                 double theta_step) {
    detail::require(theta_step > 0.0, "region_theta_scan: theta_step must be positive");
    std::vector<double> ts(t_grid.begin(), t_grid.end());
    std::sort(ts.begin(), ts.end());

    const auto pts = kde.points();
    const auto [lo_it, hi_it] =
        std::minmax_element(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) { return a.x < b.x; });
    // Beyond 5 kernel sds of every point the density is below any level a
    // mass_level call can return.
    const double sx = kde.sd_x();
    const double from = std::floor((lo_it->x - 5.0 * sx) / theta_step);
    const double to = std::ceil((hi_it->x + 5.0 * sx) / theta_step);

    std::vector<ThetaProfilePoint> out;
    if (ts.empty()) return out;

    const bool separable = kde.bandwidth().is_diagonal();
    // t factors stored t-major so each dot product runs over contiguous memory.
    std::vector<double> bt;
    if (separable) {
        const auto b = kernel_factors(pts, &Point2::y, kde.sd_y(), ts);
        bt.resize(b.size());
        for (std::size_t p = 0; p < pts.size(); ++p) {
            for (std::size_t j = 0; j < ts.size(); ++j) bt[j * pts.size() + p] = b[p * ts.size() + j];
        }
    }
    const double inv_k = 1.0 / static_cast<double>(pts.size());
    const double norm_x = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sx);

    std::vector<double> a(pts.size());
    for (double step = from; step <= to; step += 1.0) {
        const double theta = step * theta_step;
        if (separable) {
            for (std::size_t p = 0; p < pts.size(); ++p) {
                const double z = (theta - pts[p].x) / sx;
                a[p] = norm_x * std::exp(-0.5 * z * z) * inv_k;
            }
        }
        for (std::size_t j = 0; j < ts.size(); ++j) {
            double k_val = 0.0;
            if (separable) {
                const double* col = &bt[j * pts.size()];
                for (std::size_t p = 0; p < pts.size(); ++p) k_val += a[p] * col[p];
            } else {
                k_val = kde.density_at({theta, ts[j]});
            }
            if (k_val >= b_eps) {
                out.push_back({theta, ts[j]});
                break;
            }
        }
    }
    return out;
}

} // namespace recp
