#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "specflow/errors.hpp"
#include "specflow/hyperbolicity.hpp"
#include "specflow/manifolds.hpp"

using namespace specflow;

namespace {

GeometricLorenzParams model() {
    GeometricLorenzParams g;
    g.validate();
    return g;
}

PeriodicPoint base_orbit(const GeometricLorenzParams& g) {
    const auto pts = find_periodic(g, 2);
    REQUIRE(pts.size() == 2);
    return pts.back();  // positive-x representative
}

HolonomyChart base_chart(const GeometricLorenzParams& g) {
    return build_holonomy_chart(g, base_orbit(g), 0.2, 0.1);
}

}  // namespace

TEST_CASE("stable leaves: contraction product, equivariance, disjointness") {
    const auto g = model();
    const auto rm = ReturnMapParams::from(g);

    SUBCASE("two points on one leaf contract by the closed-form product") {
        CrossSectionPoint a{0.42, 0.3}, b{0.42, -0.1};
        double expected = std::abs(a.y - b.y);
        for (int i = 0; i < 6; ++i) {
            expected *= beta_dy(rm, a.x);
            a = apply_L(rm, a);
            b = apply_L(rm, b);
            CHECK(a.x == b.x);
            CHECK(std::abs(a.y - b.y) == doctest::Approx(expected).epsilon(1e-10));
        }
        CHECK(expected < 1e-4);
    }

    SUBCASE("leaf maps into the leaf of the image point") {
        const StableLeaf leaf = local_stable_leaf({0.3, 0.25}, 0.2);
        for (double y : {leaf.y_lo, leaf.y_center, leaf.y_hi}) {
            const auto img = apply_L(rm, {leaf.x0, y});
            CHECK(img.x == apply_L(rm, {leaf.x0, leaf.y_center}).x);
        }
    }

    SUBCASE("distinct leaves never merge") {
        const StableLeaf a = local_stable_leaf({0.3, 0.0}, 0.5);
        const StableLeaf b = local_stable_leaf({0.31, 0.0}, 0.5);
        CHECK(a.x0 != b.x0);
    }

    SUBCASE("leaves are clipped to the section") {
        const StableLeaf leaf = local_stable_leaf({0.5, 0.9}, 0.5);
        CHECK(leaf.y_hi == 1.0);
        CHECK(leaf.y_lo == doctest::Approx(0.4));
    }

    SUBCASE("graph transform validates the vertical foliation at 10 leaves") {
        // Verticals are exactly invariant; a tilted slope field contracts to
        // vertical under repeated pullback along any orbit.
        std::mt19937_64 leaf_rng(13);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < 10; ++i) {
            CrossSectionPoint z{u(leaf_rng), u(leaf_rng)};
            if (std::abs(z.x) < 1e-3) continue;
            CHECK(stable_leaf_slope_pullback(g, z, 0.0) == 0.0);
            double slope = 0.5;
            CrossSectionPoint w = z;
            std::vector<CrossSectionPoint> orbit{w};
            for (int k = 0; k < 12; ++k) orbit.push_back(apply_L(rm, orbit.back()));
            for (int k = 11; k >= 0; --k)
                slope = stable_leaf_slope_pullback(g, orbit[static_cast<std::size_t>(k)], slope);
            CHECK(std::abs(slope) < 1e-6);
        }
    }
}

TEST_CASE("separatrix: first crossing, symmetry, containment") {
    const auto g = model();

    SUBCASE("plus separatrix exits at (1,0,0) and lands at (-1, c)") {
        const auto crossings = separatrix_crossings(g, +1, 40.0);
        REQUIRE(!crossings.empty());
        CHECK(crossings.front().x == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(crossings.front().y == doctest::Approx(g.c).epsilon(1e-12));
        CHECK(crossings.front().t ==
              doctest::Approx(-std::log(1e-8) / g.lambda1 + g.tau_tube).epsilon(1e-9));
    }

    SUBCASE("crossings agree with the sampled-orbit event list") {
        const auto fast = separatrix_crossings(g, +1, 45.0);
        const auto sep = unstable_separatrix(g, +1, 45.0);
        REQUIRE(fast.size() == sep.crossings.size());
        for (std::size_t i = 0; i < fast.size(); ++i) {
            CHECK(std::abs(fast[i].x - sep.crossings[i].x) < 1e-9);
            CHECK(std::abs(fast[i].y - sep.crossings[i].y) < 1e-9);
            CHECK(std::abs(fast[i].t - sep.crossings[i].t) < 1e-8);
        }
    }

    SUBCASE("minus separatrix is the pointwise mirror of the plus one") {
        // The model symmetry is the rotation (x, y, z) -> (-x, -y, z).
        const auto plus = unstable_separatrix(g, +1, 30.0, 1e-8, 0.2);
        const auto minus = unstable_separatrix(g, -1, 30.0, 1e-8, 0.2);
        REQUIRE(plus.points.size() == minus.points.size());
        for (std::size_t i = 0; i < plus.points.size(); i += 7) {
            CHECK(std::abs(plus.points[i].pos.x() + minus.points[i].pos.x()) < 1e-9);
            CHECK(std::abs(plus.points[i].pos.y() + minus.points[i].pos.y()) < 1e-9);
            CHECK(std::abs(plus.points[i].pos.z() - minus.points[i].pos.z()) < 1e-9);
        }
    }

    SUBCASE("containment in the trapping region") {
        const auto sep = unstable_separatrix(g, +1, 60.0, 1e-8, 0.1);
        for (const auto& s : sep.points) {
            CHECK(std::abs(s.pos.x()) <= 1.0 + 1e-9);
            CHECK(std::abs(s.pos.y()) <= 1.0 + 1e-9);
            CHECK(s.pos.z() >= -1e-12);
            CHECK(s.pos.z() <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("unstable curve: fixed point, invariance, center cone") {
    const auto g = model();
    const auto p = base_orbit(g);
    const auto curve = build_unstable_curve(g, p, 0.125);
    const auto rm = ReturnMapParams::from(g);

    CHECK(curve.y_at(p.x_star) == doctest::Approx(p.y_star).epsilon(1e-12));

    // L^2-invariance: a curve point maps to a curve point.
    for (double dx : {-0.08, -0.03, 0.02, 0.07}) {
        const double x = p.x_star + dx;
        CrossSectionPoint q{x, curve.y_at(x)};
        q = apply_L(rm, apply_L(rm, q));
        if (q.x >= curve.xs.front() && q.x <= curve.xs.back()) {
            CHECK(std::abs(q.y - curve.y_at(q.x)) < 1e-10);
        }
    }

    CHECK(tangent_curve_in_center_cone(curve.xs, curve.ys, 0.5));
    CHECK(check_tangency_unstable_in_center(g, p));
    // Negative control: tilt the curve into the stable direction.
    std::vector<double> bad = curve.ys;
    for (std::size_t i = 0; i < bad.size(); ++i) bad[i] += (i % 2) ? 1e-3 : -1e-3;
    CHECK(!tangent_curve_in_center_cone(curve.xs, bad, 0.5));
}

TEST_CASE("holonomy chart: product structure and commutation") {
    const auto g = model();
    const auto chart = base_chart(g);

    SUBCASE("round-trip injectivity on a fine grid") {
        CHECK(chart_injectivity_error(chart, 200) < 1e-9);
    }

    SUBCASE("pi_s restricted to D0 is the identity") {
        for (double u : {-0.09, 0.0, 0.05}) {
            for (double t : {-0.1, 0.0, 0.12}) {
                const ChartPoint cp{u, 0.0, t};
                const auto back = chart.locate(chart.state_at(cp));
                REQUIRE(back.has_value());
                const ChartPoint proj = chart.pi_s(*back);
                CHECK((chart.position_at(proj) - chart.position_at(cp)).norm() < 1e-10);
            }
        }
    }

    SUBCASE("pi o pi_s is independent of leaf offset and time slide") {
        for (double u : {-0.07, 0.02, 0.08}) {
            const double ref = chart.pi(ChartPoint{u, 0.0, 0.0});
            for (double s : {-0.18, -0.05, 0.15}) {
                for (double t : {-0.12, 0.0, 0.15}) {
                    const auto loc = chart.locate(chart.state_at({u, s, t}));
                    REQUIRE(loc.has_value());
                    CHECK(chart.pi(chart.pi_s(*loc)) == doctest::Approx(ref).epsilon(1e-10));
                }
            }
        }
    }

    SUBCASE("holonomy commutes with the flow") {
        CHECK(holonomy_commutation_error(chart, 8) < 1e-8);
    }

    SUBCASE("holonomy distortion between leaves is bounded") {
        const double lip = holonomy_lipschitz(chart, 20);
        CHECK(lip >= 1.0 - 1e-9);
        CHECK(lip < 2.0);
    }

    SUBCASE("mu too large is rejected") {
        const auto p = base_orbit(g);
        CHECK_THROWS_AS((void)build_holonomy_chart(g, p, 2.0, 0.1), MuTooLargeError);
        CHECK_THROWS_AS((void)build_holonomy_chart(g, p, 0.5, 0.1), MuTooLargeError);
    }
}

TEST_CASE("projection of the separatrix collapses arcs to points") {
    const auto g = model();
    const auto chart = base_chart(g);

    SUBCASE("before the first entry the projection is empty") {
        const auto sp = unstable_separatrix(g, +1, 19.0, 1e-8, 0.5);
        const auto sm = unstable_separatrix(g, -1, 19.0, 1e-8, 0.5);
        const auto proj = project_separatrix(chart, sp, sm, 19.0);
        CHECK(proj.points.empty());  // the separatrix has not crossed yet
    }

    SUBCASE("arcs collapse and the point count is nondecreasing in T") {
        const auto sp = unstable_separatrix(g, +1, 80.0, 1e-8, 0.5);
        const auto sm = unstable_separatrix(g, -1, 80.0, 1e-8, 0.5);
        std::size_t prev = 0;
        for (double T : {30.0, 50.0, 80.0}) {
            const auto proj = project_separatrix(chart, sp, sm, T);
            CHECK(proj.points.size() >= prev);
            prev = proj.points.size();
            for (const auto& arc : proj.arcs) {
                CHECK(arc.diameter < 1e-6);
                CHECK(std::abs(arc.u) <= chart.mu_u + 1e-12);
            }
        }
        CHECK(prev > 0);
    }
}

TEST_CASE("gap interval selection") {
    SUBCASE("empty set: the full range with clearance mu_u") {
        const auto gap = find_gap_interval({}, 0.1);
        CHECK(gap.lo == -0.1);
        CHECK(gap.hi == 0.1);
        CHECK(gap.clearance == 0.1);
    }

    SUBCASE("largest gap wins, certified gap keeps positive clearance") {
        const std::vector<double> pts{-0.08, -0.02, 0.01, 0.07};
        const auto gap = find_gap_interval(pts, 0.1);
        // Largest open gap is (0.01, 0.07), width 0.06; middle half.
        CHECK(gap.lo == doctest::Approx(0.025));
        CHECK(gap.hi == doctest::Approx(0.055));
        CHECK(gap.clearance == doctest::Approx(0.015));
        for (double p : pts) {
            CHECK((p < gap.lo || p > gap.hi));
        }
    }

    SUBCASE("ties break toward zero") {
        const std::vector<double> pts{-0.05, 0.05};
        const auto gap = find_gap_interval(pts, 0.1);  // three gaps, middle one centered
        CHECK(gap.lo == doctest::Approx(-0.025));
        CHECK(gap.hi == doctest::Approx(0.025));
    }

    SUBCASE("dense points raise NoGap") {
        std::vector<double> pts;
        for (int i = -1000; i <= 1000; ++i) pts.push_back(i * 1e-4);
        CHECK_THROWS_AS((void)find_gap_interval(pts, 0.1), NoGapError);
    }
}

TEST_CASE("gap certificate pipeline at T = 50") {
    const auto g = model();
    const auto chart = base_chart(g);
    const auto cert = compute_gap_certificate(g, chart, 50.0, 1e-8, 1e-3);

    CHECK(cert.valid);
    CHECK(!cert.projected_points.empty());
    CHECK(cert.max_arc_diameter < 1e-6);
    CHECK(cert.clearance > 0.0);
    CHECK(cert.d_star > 0.0);
    CHECK(cert.eps > 0.0);
    CHECK(cert.eps < cert.eps_critical);
    CHECK(cert.d_star_stability < 0.10);
    // The gap avoids every projected point.
    for (double p : cert.projected_points) CHECK((p < cert.gap_lo || p > cert.gap_hi));
    // w sits over the gap on the strong stable set of the periodic point.
    CHECK(cert.w.x >= chart.curve.x_p + cert.gap_lo);
    CHECK(cert.w.x <= chart.curve.x_p + cert.gap_hi);
    const auto rm = ReturnMapParams::from(g);
    double x = cert.w.x;
    for (int i = 0; i < cert.w_depth; ++i) x = alpha(rm, x);
    const bool on_cycle = std::abs(x - chart.periodic.x_star) < 1e-9 ||
                          std::abs(x + chart.periodic.x_star) < 1e-9;
    CHECK(on_cycle);
}

TEST_CASE("tracked points lie in the stable set") {
    const auto g = model();
    const auto p = base_orbit(g);

    SUBCASE("point exactly on the leaf tracks forever") {
        const int esc = tracking_escape_returns(g, p, 0.0, 1e-2);
        CHECK(esc == 100);
    }

    SUBCASE("a point 10 eps0 off in x is already outside, a point eps0/10 off escapes fast") {
        const double eps0 = 1e-3;
        CHECK(tracking_escape_returns(g, p, 10.0 * eps0, eps0) == 0);
        const int esc = tracking_escape_returns(g, p, eps0 / 10.0, eps0);
        CHECK(esc >= 1);
        // Expansion is at least sqrt(2) per return, so the offset passes
        // eps0 within log(10)/log(sqrt 2) + slack returns.
        const int bound =
            static_cast<int>(std::ceil(std::log(10.0) / std::log(std::sqrt(2.0)))) + 2;
        CHECK(esc <= bound);
    }

    SUBCASE("random tracked sample feeds the measured constant") {
        const auto rep = bowen_ball_in_stable(g, p, 1e-2, 12, 77, 200);
        CHECK(rep.n_tracked > 150);
        CHECK(rep.all_within);
        CHECK(rep.measured_const >= 0.0);
        CHECK(rep.measured_const < 10.0);
    }
}

TEST_CASE("preimage density check reaches delta = 1e-2 by depth 30") {
    const auto g = model();
    const auto p = base_orbit(g);
    const auto rm = ReturnMapParams::from(g);
    const auto depth = preimage_density_depth(rm, p.x_star, 1e-2, 30);
    REQUIRE(depth.has_value());
    CHECK(*depth <= 30);
}
