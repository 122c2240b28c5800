#pragma once

// Bivariate Gaussian kernel density estimation over (theta_hat, t) pairs and
// extraction of the highest-density region holding a given mass.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace recp {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

// Symmetric 2x2 kernel covariance [[xx, xy], [xy, yy]].
struct Bandwidth {
    double xx = 1.0;
    double xy = 0.0;
    double yy = 1.0;

    [[nodiscard]] double determinant() const noexcept { return xx * yy - xy * xy; }
    [[nodiscard]] bool is_spd() const noexcept { return xx > 0.0 && yy > 0.0 && determinant() > 0.0; }
    [[nodiscard]] bool is_diagonal() const noexcept { return xy == 0.0; }
};

using BandwidthSelector = std::function<Bandwidth(std::span<const Point2>)>;

// Normal-reference (Scott) rule h_i = sd_i * k^(-1/6), returned as
// diag(h_1^2, h_2^2). Needs >= 4 points; DegenerateError on a coordinate
// with zero variance.
[[nodiscard]] Bandwidth scott_bandwidth(std::span<const Point2> points);

[[nodiscard]] inline Bandwidth select_bandwidth(std::span<const Point2> points) { return scott_bandwidth(points); }

class Kde2d {
public:
    Kde2d(std::vector<Point2> points, Bandwidth bandwidth);

    static Kde2d fit(std::vector<Point2> points, const BandwidthSelector& selector = scott_bandwidth);

    // (1/k) sum_j N(query; point_j, bandwidth). Underflows to 0 far away.
    [[nodiscard]] double density_at(Point2 query) const noexcept;

    [[nodiscard]] std::span<const Point2> points() const noexcept { return points_; }
    [[nodiscard]] const Bandwidth& bandwidth() const noexcept { return bw_; }
    [[nodiscard]] double sd_x() const noexcept;
    [[nodiscard]] double sd_y() const noexcept;

private:
    std::vector<Point2> points_;
    Bandwidth bw_;
    double inv_xx_ = 0.0;
    double inv_xy_ = 0.0;
    double inv_yy_ = 0.0;
    double norm_ = 0.0;
};

struct GridSpec {
    std::size_t resolution = 200;  // cells per axis
    double pad_sd = 4.0;           // padding beyond the point cloud, in kernel sds per axis
};

// Kernel density tabulated at cell centers.
struct DensityGrid {
    double x0 = 0.0;  // first cell center
    double dx = 0.0;
    double y0 = 0.0;
    double dy = 0.0;
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<double> values;  // row-major, index i * ny + j

    [[nodiscard]] double at(std::size_t i, std::size_t j) const { return values[i * ny + j]; }
    [[nodiscard]] double cell_area() const noexcept { return dx * dy; }
    [[nodiscard]] double total_mass() const noexcept;
    // Riemann mass of {cells with density >= level}.
    [[nodiscard]] double mass_above(double level) const noexcept;
};

[[nodiscard]] DensityGrid evaluate_grid(const Kde2d& kde, const GridSpec& spec = {});

struct MassLevel {
    double b_eps = 0.0;
    GridSpec grid;
    double x_lo = 0.0;
    double x_hi = 0.0;
    double y_lo = 0.0;
    double y_hi = 0.0;
    double captured_mass = 0.0;  // grid mass of {K >= b_eps}
};

// Level b_eps with (1 - eps) of the kernel mass above it: cells sorted by
// density, accumulated density * area until the mass reaches 1 - eps.
[[nodiscard]] MassLevel mass_level(const Kde2d& kde, double eps, const GridSpec& spec = {});

struct ThetaProfilePoint {
    double theta = 0.0;
    double t_min = 0.0;
};

// For theta on a `theta_step` lattice across the region {K >= b_eps}, the
// smallest t in `t_grid` with K(theta, t) >= b_eps. Thetas with no
// qualifying t are omitted.
[[nodiscard]] std::vector<ThetaProfilePoint> region_theta_scan(const Kde2d& kde, double b_eps,
                                                               std::span<const double> t_grid,
                                                               double theta_step = 0.01);

} // namespace recp
