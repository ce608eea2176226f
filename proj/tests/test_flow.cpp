#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "oracle_rk4.hpp"
#include "specflow/errors.hpp"
#include "specflow/flow.hpp"

using namespace specflow;

namespace {
GeometricLorenzParams defaults() {
    GeometricLorenzParams g;
    g.validate();
    return g;
}
}  // namespace

TEST_CASE("singularity is a fixed point, identity at time zero") {
    const auto g = defaults();
    const State3 origin = block_state(0.0, 0.0, 0.0);
    for (double t : {-3.0, 0.0, 0.7, 25.0}) {
        const State3 s = flow(g, origin, t);
        CHECK(position(g, s).norm() == 0.0);
    }
    const State3 s0 = sigma_state(0.37, -0.21);
    const State3 s = flow(g, s0, 0.0);
    CHECK((position(g, s) - position(g, s0)).norm() == 0.0);
}

TEST_CASE("linear block exit: closed form against an independent integrator") {
    const auto g = defaults();
    const State3 s0 = sigma_state(0.25, 0.5);
    const double t_exit = time_to_exit(g, s0);
    CHECK(t_exit == doctest::Approx(std::log(4.0)).epsilon(1e-14));

    const State3 s = flow(g, s0, t_exit);
    CHECK(s.region == Region::LinearBlock);
    CHECK(s.p.x() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.p.y() == doctest::Approx(0.03125).epsilon(1e-12));
    CHECK(s.p.z() == doctest::Approx(std::pow(0.25, 0.8)).epsilon(1e-12));

    const Eigen::Vector3d oracle = testing::rk4_block(g, Eigen::Vector3d(0.25, 0.5, 1.0), t_exit);
    CHECK((s.p - oracle).norm() < 1e-10);
}

TEST_CASE("time_to_exit edge cases") {
    const auto g = defaults();
    CHECK(time_to_exit(g, sigma_state(1.0, 0.3)) == 0.0);
    CHECK(time_to_exit(g, sigma_state(0.25, 0.0)) == doctest::Approx(std::log(4.0)));
    CHECK_THROWS_AS((void)time_to_exit(g, sigma_state(0.0, 0.5)), OnStableManifoldError);
}

TEST_CASE("monotone flight time, divergence near the cusp") {
    const auto g = defaults();
    double prev = time_to_exit(g, sigma_state(1.0, 0.0));
    for (int i = 1; i <= 12; ++i) {
        const double x = std::pow(10.0, -i);
        const double te = time_to_exit(g, sigma_state(x, 0.0));
        CHECK(te > prev);
        prev = te;
    }
    CHECK(prev > 25.0);
}

TEST_CASE("semigroup law across region transitions") {
    const auto g = defaults();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(-1.0, 1.0);
    std::uniform_real_distribution<double> ut(0.0, 4.0);
    for (int i = 0; i < 300; ++i) {
        const State3 s0 = sigma_state(ux(rng), ux(rng));
        const double t1 = ut(rng), t2 = ut(rng);
        const State3 a = flow(g, s0, t1 + t2);
        const State3 b = flow(g, flow(g, s0, t1), t2);
        CHECK((position(g, a) - position(g, b)).norm() < 1e-9);
    }
}

TEST_CASE("trapping: forward orbits stay in the block and tubes") {
    const auto g = defaults();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const State3 s0 = sigma_state(ux(rng), ux(rng));
        const Trajectory traj = sample_orbit(g, s0, 50.0, 0.1);
        for (const auto& smp : traj.samples) {
            CHECK(std::abs(smp.pos.x()) <= 1.0 + 1e-9);
            CHECK(std::abs(smp.pos.y()) <= 1.0 + 1e-9);
            CHECK(smp.pos.z() >= -1e-12);
            CHECK(smp.pos.z() <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("sample_orbit events and crossings") {
    const auto g = defaults();

    SUBCASE("origin: constant trajectory, no crossings") {
        const Trajectory traj = sample_orbit(g, block_state(0, 0, 0), 10.0, 0.5);
        CHECK(traj.crossings.empty());
        for (const auto& s : traj.samples) CHECK(s.pos.norm() == 0.0);
    }

    SUBCASE("start on Gamma: falls to the singularity, empty crossing list") {
        const Trajectory traj = sample_orbit(g, sigma_state(0.0, 0.4), 40.0, 0.5);
        CHECK(traj.crossings.empty());
        CHECK(traj.samples.back().pos.norm() < 1e-9);
    }

    SUBCASE("first crossing equals the first return map") {
        std::mt19937_64 rng(100);
        std::uniform_real_distribution<double> ux(-1.0, 1.0);
        for (int i = 0; i < 50; ++i) {
            const CrossSectionPoint q{ux(rng), ux(rng)};
            if (std::abs(q.x) < 1e-3) continue;
            const Trajectory traj = sample_orbit(g, sigma_state(q), 30.0, 0.25);
            REQUIRE(!traj.crossings.empty());
            const ReturnEvent ev = first_return_flow(g, q);
            CHECK(std::abs(traj.crossings.front().x - ev.point.x) < 1e-9);
            CHECK(std::abs(traj.crossings.front().y - ev.point.y) < 1e-9);
            CHECK(std::abs(traj.crossings.front().t - ev.flight_time) < 1e-9);
        }
    }

    SUBCASE("sample times strictly increasing, crossings on the section") {
        const Trajectory traj = sample_orbit(g, sigma_state(0.3, -0.7), 25.0, 0.01);
        for (std::size_t i = 1; i < traj.samples.size(); ++i)
            CHECK(traj.samples[i].t > traj.samples[i - 1].t - 1e-15);
        for (const auto& cr : traj.crossings) {
            CHECK(std::abs(cr.x) <= 1.0 + 1e-12);
            CHECK(std::abs(cr.y) <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("backward flow: within reach and beyond") {
    const auto g = defaults();
    // Forward into the block, then exactly back.
    const State3 s0 = sigma_state(0.3, 0.2);
    const State3 fwd = flow(g, s0, 0.9);
    const State3 back = flow(g, fwd, -0.9);
    CHECK((position(g, back) - position(g, s0)).norm() < 1e-12);
    // Mid-tube: backward through the tube entry into the block.
    const State3 tube = flow(g, s0, time_to_exit(g, s0) + 0.5 * g.tau_tube);
    CHECK(tube.region != Region::LinearBlock);
    const State3 again = flow(g, tube, -(0.5 * g.tau_tube + 0.4));
    CHECK(again.region == Region::LinearBlock);
    // Beyond the section: no backward history.
    CHECK_THROWS_AS((void)flow(g, s0, -0.01), BackwardThroughTubeError);
}

TEST_CASE("velocity matches finite differences of the flow") {
    const auto g = defaults();
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> ux(-0.9, 0.9);
    for (int i = 0; i < 40; ++i) {
        State3 s = flow(g, sigma_state(ux(rng), ux(rng)), std::abs(ux(rng)) * 2.0);
        const double h = 1e-7;
        const Eigen::Vector3d fd =
            (position(g, flow(g, s, h)) - position(g, s)) / h;
        CHECK((fd - velocity(g, s)).norm() < 1e-5);
    }
}

TEST_CASE("sample_orbit with dt larger than t_max still records endpoints and events") {
    const auto g = defaults();
    const Trajectory traj = sample_orbit(g, sigma_state(0.5, 0.2), 3.0, 10.0);
    REQUIRE(traj.samples.size() >= 2);
    CHECK(traj.samples.front().t == 0.0);
    CHECK(traj.samples.back().t == 3.0);
    CHECK(!traj.crossings.empty());  // first return happens before t = 3
}

TEST_CASE("csv export") {
    const auto g = defaults();
    const Trajectory traj = sample_orbit(g, sigma_state(0.4, 0.1), 8.0, 0.5);
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "specflow_test_csv";
    fs::create_directories(dir);
    write_trajectory_csv(traj, (dir / "traj.csv").string());
    write_crossings_csv(traj, (dir / "cross.csv").string());
    CHECK(fs::file_size(dir / "traj.csv") > 100);
    CHECK(fs::file_size(dir / "cross.csv") > 10);
    fs::remove_all(dir);
}

TEST_CASE("parameter invariants are enforced") {
    GeometricLorenzParams g;
    CHECK_NOTHROW(g.validate());
    GeometricLorenzParams bad = g;
    bad.k = 1.0;  // k*a < sqrt(2)
    CHECK_THROWS_AS(bad.validate(), InvalidParamsError);
    bad = g;
    bad.lambda3 = 1.5;  // violates lambda3 < lambda1
    CHECK_THROWS_AS(bad.validate(), InvalidParamsError);
    bad = g;
    bad.c = 0.2;  // tube landing strips overlap
    CHECK_THROWS_AS(bad.validate(), InvalidParamsError);
}
