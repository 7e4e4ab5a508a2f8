#include <gtest/gtest.h>

#include "cellscope/spatial/centroids.hpp"
#include "cellscope/spatial/lasso.hpp"
#include "cellscope/spatial/point_index.hpp"
#include "cellscope/spatial/selection.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

#include <cmath>
#include <limits>

using namespace cellscope;
using namespace cellscope::spatial;
using cellscope_test::throws_kind;

namespace {

std::vector<std::uint32_t> brute_sphere(const std::vector<Point3>& pts, const Point3& c, double r) {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d = std::sqrt((pts[i].x - c.x) * (pts[i].x - c.x) + (pts[i].y - c.y) * (pts[i].y - c.y) + (pts[i].z - c.z) * (pts[i].z - c.z));
        if (d <= r) {
            out.push_back(static_cast<std::uint32_t>(i));
        }
    }
    return out;
}

std::vector<Point3> random_cloud(cellscope_test::Rng& rng, std::size_t n, double sx, double sy, double sz) {
    std::vector<Point3> out(n);
    for (auto& p : out) {
        p = {rng.uniform(-sx, sx), rng.uniform(-sy, sy), rng.uniform(-sz, sz)};
    }
    return out;
}

/// Perspective camera at (0, 0, distance) looking down -z, as projection * view.
Mat4 perspective_camera(double distance, double fov_y, double near, double far) {
    const double f = 1 / std::tan(fov_y / 2);
    Mat4 m;
    m.m = {f, 0, 0, 0,
           0, f, 0, 0,
           0, 0, (far + near) / (near - far), 2 * far * near / (near - far) - distance * (far + near) / (near - far),
           0, 0, -1, distance};
    return m;
}

/// Convex polygon from sorted random angles around a center, counterclockwise.
std::vector<Point2> random_convex(cellscope_test::Rng& rng) {
    const std::size_t k = 3 + rng.below(8);
    std::vector<double> angles(k);
    for (auto& a : angles) {
        a = rng.uniform(0, 2 * M_PI);
    }
    std::sort(angles.begin(), angles.end());
    const double cx = rng.uniform(-0.5, 0.5), cy = rng.uniform(-0.5, 0.5), r = rng.uniform(0.2, 0.9);
    std::vector<Point2> out;
    for (auto a : angles) {
        out.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
    }
    return out;
}

/// Independent test for convex polygons: strictly left of every edge.
bool inside_convex(const std::vector<Point2>& poly, double x, double y) {
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        if ((b.x - a.x) * (y - a.y) - (b.y - a.y) * (x - a.x) <= 0) {
            return false;
        }
    }
    return true;
}

std::vector<std::uint32_t> brute_lasso(const std::vector<Point3>& pts, const Mat4& m, const std::vector<Point2>& poly) {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        const auto& a = m.m;
        const double cx = a[0] * p.x + a[1] * p.y + a[2] * p.z + a[3];
        const double cy = a[4] * p.x + a[5] * p.y + a[6] * p.z + a[7];
        const double cz = a[8] * p.x + a[9] * p.y + a[10] * p.z + a[11];
        const double cw = a[12] * p.x + a[13] * p.y + a[14] * p.z + a[15];
        if (cw <= 0 || cz / cw < -1 || cz / cw > 1) {
            continue;
        }
        if (inside_convex(poly, cx / cw, cy / cw)) {
            out.push_back(static_cast<std::uint32_t>(i));
        }
    }
    return out;
}

}

TEST(PointIndex, LineExample) {
    const std::vector<Point3> pts{{0, 0, 0}, {1, 0, 0}, {3, 0, 0}};
    const auto idx = build_index(pts);
    EXPECT_EQ(sphere_select(idx, {0, 0, 0}, 1.5), (std::vector<std::uint32_t>{0, 1}));
    EXPECT_EQ(sphere_select(idx, {0, 0, 0}, 10), (std::vector<std::uint32_t>{0, 1, 2}));
    for (double r : {0.5, 1.0, 2.0, 3.0, 3.5}) {
        for (const auto& c : pts) {
            EXPECT_EQ(sphere_select(idx, c, r), brute_sphere(pts, c, r));
        }
    }
}

TEST(PointIndex, SinglePointAndCoincidentCloud) {
    const auto one = build_index({{2, 3, 4}});
    EXPECT_EQ(one.bucket_count(), 1u);
    EXPECT_EQ(one.cell_size(), 1.0);
    EXPECT_EQ(sphere_select(one, {2, 3, 4.5}, 0.5), (std::vector<std::uint32_t>{0}));
    EXPECT_TRUE(sphere_select(one, {2, 3, 5}, 0.5).empty());

    const auto same = build_index(std::vector<Point3>(50, {1, 1, 1}));
    EXPECT_EQ(sphere_select(same, {1, 1, 1}, 1e-9).size(), 50u);
}

TEST(PointIndex, Errors) {
    EXPECT_TRUE(throws_kind(ErrorKind::EmptyPointSet, [] { build_index({}); }));
    EXPECT_TRUE(throws_kind(ErrorKind::NonFiniteCoordinate, [] { build_index({{0, 0, 0}, {std::nan(""), 0, 0}}); }));
    EXPECT_TRUE(throws_kind(ErrorKind::NonFiniteCoordinate, [] { build_index({{0, std::numeric_limits<double>::infinity(), 0}}); }));
    const auto idx = build_index({{0, 0, 0}});
    EXPECT_TRUE(throws_kind(ErrorKind::NonPositiveRadius, [&] { sphere_select(idx, {0, 0, 0}, 0); }));
    EXPECT_TRUE(throws_kind(ErrorKind::NonPositiveRadius, [&] { sphere_select(idx, {0, 0, 0}, -1); }));
}

TEST(PointIndex, ClosedBallBoundary) {
    const auto idx = build_index({{0, 0, 0}, {2, 0, 0}, {0, 2, 0}, {0, 0, -2}});
    EXPECT_EQ(sphere_select(idx, {0, 0, 0}, 2).size(), 4u);
    EXPECT_EQ(sphere_select(idx, {0, 0, 0}, std::nextafter(2.0, 0.0)).size(), 1u);
}

// Property: the grid answers exactly like a full scan, including for flat,
// elongated and clustered clouds, and results grow with the radius.
TEST(PointIndex, MatchesBruteForce) {
    cellscope_test::Rng rng(99);
    const std::vector<std::vector<Point3>> clouds = {
        random_cloud(rng, 5000, 10, 10, 10),
        random_cloud(rng, 3000, 100, 1, 0),
        random_cloud(rng, 2000, 1000, 0.01, 0.01),
        random_cloud(rng, 500, 0, 0, 5),
    };
    for (const auto& pts : clouds) {
        const auto idx = build_index(pts);
        std::size_t members = 0;
        for (std::size_t b = 0; b < idx.bucket_count(); ++b) {
            members += idx.bucket_size(b);
        }
        EXPECT_EQ(members, pts.size());
        EXPECT_LE(idx.bucket_count(), 4 * pts.size() + 64);
        for (int q = 0; q < 100; ++q) {
            const auto& anchor = pts[rng.below(pts.size())];
            const Point3 c{anchor.x + rng.normal(), anchor.y + rng.normal(), anchor.z + rng.normal()};
            const double r1 = rng.uniform(0.01, 5), r2 = r1 * rng.uniform(1, 3);
            const auto small = sphere_select(idx, c, r1), large = sphere_select(idx, c, r2);
            ASSERT_EQ(small, brute_sphere(pts, c, r1));
            ASSERT_EQ(large, brute_sphere(pts, c, r2));
            EXPECT_TRUE(std::includes(large.begin(), large.end(), small.begin(), small.end()));
        }
    }
}

TEST(PointIndex, OccupancyNearTarget) {
    cellscope_test::Rng rng(4);
    const auto pts = random_cloud(rng, 8000, 1, 1, 1);
    const auto idx = build_index(pts);
    const double mean = static_cast<double>(pts.size()) / static_cast<double>(idx.bucket_count());
    EXPECT_GT(mean, 3.0);
    EXPECT_LT(mean, 9.0);
}

TEST(Lasso, IdentitySquare) {
    LassoPolygon lasso{{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}, Mat4::identity()};
    const std::vector<Point3> pts{{0, 0, 0}, {2, 2, 0}, {0.5, -0.5, 0.9}, {0, 0, 1.5}};
    EXPECT_EQ(lasso_select(pts, lasso), (std::vector<std::uint32_t>{0, 2}));
}

TEST(Lasso, EvenOddOnSelfIntersectingPolygon) {
    // Pentagram: the central pentagon is crossed twice and lies outside.
    std::vector<Point2> star;
    for (int k = 0; k < 5; ++k) {
        const double a = M_PI / 2 + k * 4 * M_PI / 5;
        star.push_back({0.9 * std::cos(a), 0.9 * std::sin(a)});
    }
    LassoPolygon lasso{star, Mat4::identity()};
    EXPECT_TRUE(lasso_select(std::vector<Point3>{{0, 0, 0}}, lasso).empty());
    EXPECT_EQ(lasso_select(std::vector<Point3>{{0, 0.7, 0}}, lasso).size(), 1u);
}

TEST(Lasso, ExcludesPointsBehindCameraAndOutsideDepth) {
    const auto cam = perspective_camera(10, M_PI / 3, 0.1, 100);
    LassoPolygon lasso{{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}, cam};
    const std::vector<Point3> pts{{0, 0, 0}, {0, 0, 20}, {0, 0, 9.95}, {0, 0, -200}};
    EXPECT_EQ(lasso_select(pts, lasso), (std::vector<std::uint32_t>{0}));
}

TEST(Lasso, DegeneratePolygons) {
    const std::vector<Point3> pts{{0, 0, 0}};
    EXPECT_TRUE(throws_kind(ErrorKind::DegeneratePolygon, [&] { lasso_select(pts, {{{0, 0}, {1, 1}}, Mat4::identity()}); }));
    EXPECT_TRUE(throws_kind(ErrorKind::DegeneratePolygon, [&] { lasso_select(pts, {{{0, 0}, {1, 1}, {2, 2}}, Mat4::identity()}); }));
    EXPECT_TRUE(throws_kind(ErrorKind::DegeneratePolygon, [&] { lasso_select(pts, {{{0, 0}, {1, 0}, {0, std::nan("")}}, Mat4::identity()}); }));
}

TEST(Lasso, MatchesBruteForceUnderPerspective) {
    cellscope_test::Rng rng(17);
    const auto pts = random_cloud(rng, 5000, 5, 5, 5);
    std::size_t hits = 0;
    for (int q = 0; q < 100; ++q) {
        const auto poly = random_convex(rng);
        const auto cam = perspective_camera(rng.uniform(3, 20), rng.uniform(0.5, 1.5), 0.5, rng.uniform(8, 30));
        const auto got = lasso_select(pts, {poly, cam});
        hits += got.size();
        ASSERT_EQ(got, brute_lasso(pts, cam, poly)) << "query " << q;
        auto reversed = poly;
        std::reverse(reversed.begin(), reversed.end());
        ASSERT_EQ(lasso_select(pts, {reversed, cam}), brute_lasso(pts, cam, poly));
    }
    EXPECT_GT(hits, 10000u);
}

TEST(Centroids, Examples) {
    const std::vector<Point3> pts{{0, 0, 0}, {2, 0, 0}, {5, 6, 7}, {1, 1, 1}};
    const anndata::AnnotationColumn a{"c", {"pair", "single", "empty", "other"}, {0, 0, 1, 3}};
    const auto cs = category_centroids(pts, a);
    ASSERT_EQ(cs.size(), 3u);
    EXPECT_EQ(cs[0].label, "pair");
    EXPECT_EQ(cs[0].position, (Point3{1, 0, 0}));
    EXPECT_EQ(cs[0].count, 2u);
    EXPECT_EQ(cs[1].position, (Point3{5, 6, 7}));
    EXPECT_EQ(cs[2].category, 3u);

    const auto all = category_centroids(pts, {"one", {"x"}, {0, 0, 0, 0}});
    ASSERT_EQ(all.size(), 1u);
    EXPECT_EQ(all[0].position, (Point3{2, 1.75, 2}));
    EXPECT_TRUE(throws_kind(ErrorKind::DimensionMismatch, [&] { category_centroids(pts, {"bad", {"x"}, {0}}); }));
}

TEST(Centroids, TranslationEquivariant) {
    cellscope_test::Rng rng(23);
    auto pts = random_cloud(rng, 400, 3, 3, 3);
    anndata::AnnotationColumn a{"k", {"a", "b", "c"}, {}};
    for (std::size_t i = 0; i < pts.size(); ++i) {
        a.codes.push_back(static_cast<std::int32_t>(rng.below(3)));
    }
    const auto before = category_centroids(pts, a);
    const Point3 v{7.25, -3.5, 0.125};
    for (auto& p : pts) {
        p = {p.x + v.x, p.y + v.y, p.z + v.z};
    }
    const auto after = category_centroids(pts, a);
    for (std::size_t c = 0; c < before.size(); ++c) {
        EXPECT_NEAR(after[c].position.x, before[c].position.x + v.x, 1e-12);
        EXPECT_NEAR(after[c].position.y, before[c].position.y + v.y, 1e-12);
        EXPECT_NEAR(after[c].position.z, before[c].position.z + v.z, 1e-12);
    }
}

TEST(Selection, Combine) {
    using stats::SelectionMask;
    const SelectionMask cur({1, 2}, 10);
    const std::vector<std::uint32_t> add{2, 3};
    EXPECT_EQ(combine_selection(cur, add, CombineMode::Add).selected(), (std::vector<std::uint32_t>{1, 2, 3}));
    EXPECT_EQ(combine_selection(cur, add, CombineMode::Replace).selected(), (std::vector<std::uint32_t>{2, 3}));
    EXPECT_TRUE(combine_selection(cur, add, CombineMode::Reset).empty());
    const std::vector<std::uint32_t> five{5};
    EXPECT_EQ(combine_selection(SelectionMask({}, 10), five, CombineMode::Add).selected(), five);
    EXPECT_TRUE(throws_kind(ErrorKind::IndexOutOfRange, [&] { combine_selection(cur, std::vector<std::uint32_t>{10}, CombineMode::Add); }));
    EXPECT_EQ(parse_combine_mode("replace"), CombineMode::Replace);
    EXPECT_FALSE(parse_combine_mode("merge"));
}

// Property: add is idempotent and commutative.
TEST(Selection, AddIdempotentAndCommutative) {
    cellscope_test::Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::uint32_t> x, y, base;
        for (int i = 0; i < 20; ++i) {
            x.push_back(static_cast<std::uint32_t>(rng.below(50)));
            y.push_back(static_cast<std::uint32_t>(rng.below(50)));
            base.push_back(static_cast<std::uint32_t>(rng.below(50)));
        }
        const stats::SelectionMask m(base, 50);
        const auto once = combine_selection(m, x, CombineMode::Add);
        EXPECT_EQ(combine_selection(once, x, CombineMode::Add), once);
        EXPECT_EQ(combine_selection(once, y, CombineMode::Add), combine_selection(combine_selection(m, y, CombineMode::Add), x, CombineMode::Add));
    }
}
