// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria marked with their stated tolerances; every threshold is
// pinned here, none deferred.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "specflow/catmap.hpp"
#include "specflow/flow.hpp"
#include "specflow/hyperbolicity.hpp"
#include "specflow/io.hpp"
#include "specflow/manifolds.hpp"
#include "specflow/return_map.hpp"
#include "specflow/specification.hpp"
#include "specflow/tangent.hpp"

using namespace specflow;
namespace fs = std::filesystem;

namespace {

int failures = 0;

class Criterion {
  public:
    Criterion(int id, std::string name) : id_(id), name_(std::move(name)) {
        start_ = std::chrono::steady_clock::now();
    }
    void check(bool ok, const std::string& detail) {
        ok_ = ok_ && ok;
        if (!ok) detail_ += (detail_.empty() ? "" : "; ") + detail;
    }
    ~Criterion() {
        const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_);
        std::printf("%s  criterion %d: %s  [%.1f s]%s%s\n", ok_ ? "PASS" : "FAIL", id_,
                    name_.c_str(), dt.count(), detail_.empty() ? "" : "  -- ", detail_.c_str());
        std::fflush(stdout);
        if (!ok_) ++failures;
    }

  private:
    int id_;
    std::string name_;
    bool ok_ = true;
    std::string detail_;
    std::chrono::steady_clock::time_point start_;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

GeometricLorenzParams default_params() {
    GeometricLorenzParams g;
    g.validate();
    return g;
}

void criterion1_model_validity() {
    Criterion c(1, "model validity and limit probes");
    try {
        const auto g = default_params();
        const auto p = ReturnMapParams::from(g);
        c.check(std::abs(g.k * g.a() - 1.52) < 1e-14 && g.k * g.a() > std::sqrt(2.0),
                "k*a = 1.52 > sqrt(2)");
        c.check(std::abs(alpha(p, 1.0) - 0.9) < 1e-14 && alpha(p, 1.0) < 1.0, "alpha(1) = 0.9 < 1");
        c.check(std::abs(alpha(p, 1e-12) - (-1.0)) < 1e-6, "alpha(1e-12) within 1e-6 of -1");
        c.check(alpha_prime(p, 1e-6) > 20.0, "alpha'(1e-6) > 20");
    } catch (const std::exception& e) {
        c.check(false, e.what());
    }
}

void criterion2_flow_return_consistency() {
    Criterion c(2, "flow/return consistency and semigroup law");
    try {
        const auto g = default_params();
        const auto p = ReturnMapParams::from(g);
        std::mt19937_64 rng(1234);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double worst_ret = 0.0;
        for (int i = 0; i < 1000; ++i) {
            double x = u(rng);
            if (x == 0.0) continue;
            const double y = u(rng);
            const auto a = apply_L(p, {x, y});
            const auto b = first_return_flow(g, {x, y}).point;
            worst_ret = std::max({worst_ret, std::abs(a.x - b.x), std::abs(a.y - b.y)});
        }
        c.check(worst_ret < 1e-9, "first return vs L: " + fmt(worst_ret));

        std::uniform_real_distribution<double> ut(0.0, 5.0);
        double worst_semi = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const State3 s0 = sigma_state(u(rng), u(rng));
            const double t1 = ut(rng), t2 = ut(rng);
            const State3 a = flow(g, s0, t1 + t2);
            const State3 b = flow(g, flow(g, s0, t1), t2);
            worst_semi = std::max(worst_semi, (position(g, a) - position(g, b)).norm());
        }
        c.check(worst_semi < 1e-9, "semigroup law: " + fmt(worst_semi));
    } catch (const std::exception& e) {
        c.check(false, e.what());
    }
}

void criterion3_hyperbolicity() {
    Criterion c(3, "hyperbolicity suite on a 10^4-return orbit");
    try {
        const auto g = default_params();
        const CrossSectionPoint start{0.378462, 0.11911};
        const auto orbit = section_orbit(g, start, 10000);
        const auto est = estimate_splitting(g, orbit);
        c.check(est.lambda_prime < 1.0, "lambda_prime = " + fmt(est.lambda_prime));
        bool dom_ok = true;
        for (const auto& s : est.samples) dom_ok = dom_ok && s.domination < 1.0;
        c.check(dom_ok, "domination margin < 1 at every sample");

        SectionOrbit cone_orbit;
        cone_orbit.points.assign(orbit.points.begin(), orbit.points.begin() + 1001);
        cone_orbit.flight_times.assign(orbit.flight_times.begin(), orbit.flight_times.begin() + 1000);
        const auto cone = verify_cone_invariance(g, {1.0, ConeFlavor::Unstable}, cone_orbit);
        c.check(cone.invariant && cone.margin < 1.0, "unstable cone margin = " + fmt(cone.margin));

        const auto sec = sectional_expansion_check(g, start, 1000.0);
        c.check(sec.rate > 0.0, "sectional rate = " + fmt(sec.rate));
        c.check(sec.residual < 0.05, "sectional residual = " + fmt(sec.residual));

        // Tangent flow vs central differences at h = 1e-6, tolerance 1e-4.
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::uniform_real_distribution<double> ut(0.3, 2.5);
        const double h = 1e-6;
        double worst_fd = 0.0;
        int tested = 0;
        while (tested < 100) {
            const State3 s0 = sigma_state(u(rng), u(rng));
            if (std::abs(s0.p.x()) < 0.05) continue;
            const State3 s = flow(g, s0, 0.35);
            if (s.region != Region::LinearBlock) continue;
            const double t = ut(rng);
            const auto near_boundary = [&](const State3& q) {
                if (q.region == Region::LinearBlock)
                    return std::abs(std::abs(q.p.x()) - 1.0) < 1e-2 ||
                           std::abs(q.p.z() - 1.0) < 1e-2;
                return q.clock < 1e-2 || q.clock > g.tau_tube - 1e-2;
            };
            if (near_boundary(s) || near_boundary(flow(g, s, t))) continue;
            Eigen::Vector3d dir(u(rng), u(rng), u(rng));
            if (dir.norm() < 1e-3) continue;
            dir.normalize();
            State3 sp = s, sm = s;
            sp.p += h * dir;
            sm.p -= h * dir;
            const Eigen::Vector3d fd =
                (position(g, flow(g, sp, t)) - position(g, flow(g, sm, t))) / (2.0 * h);
            const Eigen::Vector3d an = tangent_flow(g, s, dir, t);
            worst_fd = std::max(worst_fd, (fd - an).norm() / std::max(1.0, an.norm()));
            ++tested;
        }
        c.check(worst_fd < 1e-4, "tangent vs finite differences: " + fmt(worst_fd));
    } catch (const std::exception& e) {
        c.check(false, e.what());
    }
}

void criterion4_foliation_holonomy() {
    Criterion c(4, "foliation and holonomy suite");
    try {
        const auto g = default_params();
        const auto p = ReturnMapParams::from(g);
        std::mt19937_64 rng(55);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double worst = 0.0;
        for (int i = 0; i < 500; ++i) {
            const double x = u(rng);
            if (std::abs(x) < 1e-6) continue;
            const double measured =
                (return_tangent(g, {x, u(rng)}) * Eigen::Vector3d::UnitY()).norm();
            worst = std::max(worst, std::abs(measured - beta_dy(p, x)));
        }
        c.check(worst < 1e-10, "leaf contraction vs b|x|^e: " + fmt(worst));

        const auto orbits = find_periodic(g, 2);
        c.check(orbits.size() == 2, "period-2 pair found");
        const auto chart = build_holonomy_chart(g, orbits.back(), 0.2, 0.1);
        const double comm = holonomy_commutation_error(chart, 8);
        c.check(comm < 1e-8, "holonomy commutation: " + fmt(comm));
        const double inj = chart_injectivity_error(chart, 200);
        c.check(inj < 1e-9, "chart injectivity on 200x200: " + fmt(inj));
        const auto depth = preimage_density_depth(p, orbits.back().x_star, 1e-2, 30);
        c.check(depth.has_value() && *depth <= 30,
                "preimage density depth: " + (depth ? fmt(*depth) : std::string("none")));
    } catch (const std::exception& e) {
        c.check(false, e.what());
    }
}

void criterion5_gap_certificate() {
    Criterion c(5, "gap certificate at T = 50");
    try {
        const auto g = default_params();
        const auto orbits = find_periodic(g, 2);
        const auto chart = build_holonomy_chart(g, orbits.back(), 0.2, 0.1);
        const auto cert = compute_gap_certificate(g, chart, 50.0, 1e-8, 1e-4);
        c.check(cert.valid, "certificate valid");
        c.check(!cert.projected_points.empty(), "finite nonempty projected set");
        c.check(cert.max_arc_diameter < 1e-6, "arc diameter: " + fmt(cert.max_arc_diameter));
        c.check(cert.clearance > 0.0, "clearance = " + fmt(cert.clearance));
        c.check(cert.d_star > 0.0, "d_star = " + fmt(cert.d_star));
        c.check(cert.d_star_stability < 0.10,
                "d_star stability under halving h: " + fmt(cert.d_star_stability));
    } catch (const std::exception& e) {
        c.check(false, e.what());
    }
}

void criterion6_specification_falsification() {
    Criterion c(6, "specification falsification on the full grid, T in {30,50,80}");
    try {
        const auto g = default_params();
        const auto orbits = find_periodic(g, 2);
        const auto chart = build_holonomy_chart(g, orbits.back(), 0.2, 0.1);
        for (double T : {30.0, 50.0, 80.0}) {
            const auto cert = compute_gap_certificate(g, chart, T, 1e-8, 1e-4);
            c.check(cert.valid && cert.eps < cert.eps_critical,
                    "T=" + fmt(T) + " eps below critical");
            ObstructionInstance inst;
            inst.t1 = 20.0;
            inst.T = T;
            inst.t2 = 20.0;
            inst.eps = cert.eps;
            inst.w = cert.w;
            inst.delta_seed = 1e-8;
            const auto res = search_gluing_lorenz(g, inst, 1e-4);
            c.check(res.outcome == ShadowingOutcome::ExhaustedNoWitness,
                    "T=" + fmt(T) + " exhausted");
            c.check(res.best_deviation >= inst.eps,
                    "T=" + fmt(T) + " best_deviation " + fmt(res.best_deviation) + " >= eps " +
                        fmt(inst.eps));
        }
    } catch (const std::exception& e) {
        c.check(false, e.what());
    }
}

void criterion7_positive_control() {
    Criterion c(7, "positive control: cat map 20/20, mixing contrasts");
    try {
        const auto g = default_params();
        const TorusCatSystem sys;
        const double eps = 0.05;
        const int gap_T =
            static_cast<int>(std::ceil(std::log(2.0 / eps) / std::log(sys.lambda_u))) + 2;
        int found = 0;
        for (int i = 0; i < 20; ++i) {
            const auto inst = random_cat_instance(sys, 5000 + static_cast<std::uint64_t>(i), eps,
                                                  10, gap_T);
            const auto res = search_gluing_cat(sys, inst, 2048);
            if (res.witness_found && res.witness_deviation < eps) ++found;
        }
        c.check(found == 20, "witnesses found: " + std::to_string(found) + "/20");

        const auto mix_l = test_mixing(box_graph_lorenz(g, 1024, 100), 4096);
        c.check(mix_l.mixing, "lorenz factor graph mixing at 2^10 boxes");
        const auto mix_r = test_mixing(box_graph_rotation(64, 1, 4, 100), 1000);
        c.check(!mix_r.mixing, "rotation control not mixing");
    } catch (const std::exception& e) {
        c.check(false, e.what());
    }
}

void criterion8_determinism() {
    Criterion c(8, "determinism: byte-identical JSON across reproduce-all runs");
    try {
        const char* cli = std::getenv("SPECFLOW_CLI");
        if (cli == nullptr) {
            c.check(false, "SPECFLOW_CLI not set");
            return;
        }
        const auto dir = fs::temp_directory_path() / "specflow_acceptance_c8";
        fs::remove_all(dir);
        fs::create_directories(dir);
        const auto cfgfile = dir / "run.cfg";
        // Default parameters with a single-T sweep to keep two full runs cheap;
        // determinism is independent of the sweep length.
        write_text("t_sweep = 30\n", cfgfile.string());
        for (const char* run : {"a", "b"}) {
            const std::string cmd = std::string(cli) + " --config " + cfgfile.string() +
                                    " --out " + (dir / run).string() +
                                    " reproduce-all > /dev/null 2>&1";
            const int rc = std::system(cmd.c_str());
            c.check(WEXITSTATUS(rc) == 0, std::string("run ") + run + " exit code");
        }
        int compared = 0;
        bool identical = true;
        for (const auto& entry : fs::directory_iterator(dir / "a")) {
            if (entry.path().extension() != ".json") continue;
            const auto other = dir / "b" / entry.path().filename();
            identical = identical && fs::exists(other) &&
                        read_text(entry.path().string()) == read_text(other.string());
            ++compared;
        }
        c.check(compared >= 5, "JSON artifacts compared: " + std::to_string(compared));
        c.check(identical, "all JSON artifacts byte-identical");
        fs::remove_all(dir);
    } catch (const std::exception& e) {
        c.check(false, e.what());
    }
}

}  // namespace

int main() {
    std::printf("acceptance suite (default parameters)\n");
    criterion1_model_validity();
    criterion2_flow_return_consistency();
    criterion3_hyperbolicity();
    criterion4_foliation_holonomy();
    criterion5_gap_certificate();
    criterion6_specification_falsification();
    criterion7_positive_control();
    criterion8_determinism();
    std::printf(failures == 0 ? "all criteria passed\n" : "%d criteria FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
