#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace recp {

struct BoundarySearch {
    double initial_step = 1.0;
    double cap = 65536.0;      // stop doubling past this distance and report an infinite end
    double tolerance = 1e-6;   // absolute width of the final bisection bracket
};

// Walks from `center` (where `inside` holds) in `direction` (+1 / -1) with a
// doubling step until `inside` fails, then bisects the last bracket. Returns
// the outermost point known to satisfy `inside`, or +/-inf when the walk
// passes `cap` without leaving the set. Correct whenever the set is an
// interval around `center`.
template <class InsidePredicate>
double find_boundary(InsidePredicate&& inside, double center, int direction, const BoundarySearch& opts) {
    const double dir = direction < 0 ? -1.0 : 1.0;
    double step = opts.initial_step > 0.0 ? opts.initial_step : 1.0;
    double in = center;
    double out = center;
    for (;;) {
        const double probe = center + dir * step;
        if (!inside(probe)) {
            out = probe;
            break;
        }
        in = probe;
        if (step > opts.cap) return dir * std::numeric_limits<double>::infinity();
        step *= 2.0;
    }
    while (std::abs(out - in) > opts.tolerance) {
        const double mid = 0.5 * (in + out);
        if (mid == in || mid == out) break;
        if (inside(mid)) {
            in = mid;
        } else {
            out = mid;
        }
    }
    return in;
}

// Plain bisection for a continuous f with f(lo) and f(hi) of opposite sign.
template <class F>
double bisect_root(F&& f, double lo, double hi, double tolerance = 1e-12, int max_iter = 200) {
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0)) throw std::invalid_argument("bisect_root: no sign change on bracket");
    for (int i = 0; i < max_iter && std::abs(hi - lo) > tolerance; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace recp
