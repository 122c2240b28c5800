#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "recp/root_find.hpp"

using recp::BoundarySearch;
using recp::bisect_root;
using recp::find_boundary;

TEST(BisectRoot, SqrtTwo) {
    const double r = bisect_root([](double x) { return x * x - 2.0; }, 0.0, 2.0);
    EXPECT_NEAR(r, std::sqrt(2.0), 1e-11);
}

TEST(BisectRoot, EndpointRoot) {
    EXPECT_EQ(bisect_root([](double x) { return x - 1.0; }, 1.0, 3.0), 1.0);
}

TEST(BisectRoot, NoSignChangeThrows) {
    EXPECT_THROW((void)bisect_root([](double x) { return x * x + 1.0; }, -1.0, 1.0), std::invalid_argument);
}

TEST(FindBoundary, LocatesIntervalEnds) {
    const auto inside = [](double y) { return y >= -1.25 && y <= 3.5; };
    const BoundarySearch opts{0.5, 1e6, 1e-9};
    const double hi = find_boundary(inside, 0.0, +1, opts);
    const double lo = find_boundary(inside, 0.0, -1, opts);
    EXPECT_NEAR(hi, 3.5, 1e-9);
    EXPECT_NEAR(lo, -1.25, 1e-9);
    // the returned point is always inside
    EXPECT_TRUE(inside(hi));
    EXPECT_TRUE(inside(lo));
}

TEST(FindBoundary, UnboundedSideReportsInfinity) {
    const auto inside = [](double y) { return y > -2.0; };
    const BoundarySearch opts{1.0, 1024.0, 1e-6};
    EXPECT_EQ(find_boundary(inside, 0.0, +1, opts), std::numeric_limits<double>::infinity());
    EXPECT_NEAR(find_boundary(inside, 0.0, -1, opts), -2.0, 1e-6);
}

TEST(FindBoundary, ImmediateExit) {
    const auto inside = [](double y) { return y == 0.0; };
    EXPECT_EQ(find_boundary(inside, 0.0, +1, BoundarySearch{}), 0.0);
}
