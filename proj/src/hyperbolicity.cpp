#include "specflow/hyperbolicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "specflow/errors.hpp"

namespace specflow {

namespace {

Vector3d field_at_sigma(const GeometricLorenzParams& g, const CrossSectionPoint& q) {
    return velocity(g, sigma_state(q));
}

/// Orthonormal basis of span(a, b) as a 3x2 matrix.
Eigen::Matrix<double, 3, 2> plane_basis(const Vector3d& a, const Vector3d& b) {
    Eigen::Matrix<double, 3, 2> m;
    const Vector3d u = a.normalized();
    Vector3d w = b - b.dot(u) * u;
    m.col(0) = u;
    m.col(1) = w.normalized();
    return m;
}

}  // namespace

SectionOrbit section_orbit(const GeometricLorenzParams& g, const CrossSectionPoint& q, int n) {
    SectionOrbit orbit;
    orbit.points.reserve(static_cast<std::size_t>(n) + 1);
    orbit.points.push_back(q);
    CrossSectionPoint cur = q;
    for (int i = 0; i < n; ++i) {
        if (cur.x == 0.0) throw DegenerateOrbitError("orbit hit Gamma");
        const ReturnEvent ev = first_return_flow(g, cur);
        orbit.flight_times.push_back(ev.flight_time);
        cur = ev.point;
        orbit.points.push_back(cur);
    }
    return orbit;
}

SplittingEstimate estimate_splitting(const GeometricLorenzParams& g, const SectionOrbit& orbit) {
    const ReturnMapParams rm = ReturnMapParams::from(g);
    const int n = static_cast<int>(orbit.flight_times.size());
    if (n < 100) throw Error("estimate_splitting: need an orbit with >= 100 returns");
    for (const auto& pt : orbit.points)
        if (pt.x == 0.0) throw DegenerateOrbitError("orbit hit Gamma");

    std::vector<Matrix3d> per_return(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        per_return[static_cast<std::size_t>(i)] = return_tangent(g, orbit.points[static_cast<std::size_t>(i)]);

    // Stable direction by backward power iteration of the per-return
    // matrices; center plane by forward iteration of a 2-frame (the plane of
    // the top two Lyapunov directions); burn-in at both ends.
    const int burn = std::min(30, n / 4);
    std::vector<Vector3d> es(static_cast<std::size_t>(n) + 1);
    std::vector<Eigen::Matrix<double, 3, 2>> ec(static_cast<std::size_t>(n) + 1);
    Vector3d w(0.31, 0.84, 0.45);
    es[static_cast<std::size_t>(n)] = w.normalized();
    for (int i = n - 1; i >= 0; --i) {
        w = per_return[static_cast<std::size_t>(i)].partialPivLu().solve(w);
        w.normalize();
        es[static_cast<std::size_t>(i)] = w;
    }
    ec[0] = plane_basis(field_at_sigma(g, orbit.points[0]), Vector3d::UnitX());
    for (int i = 0; i < n; ++i) {
        const Eigen::Matrix<double, 3, 2> img = per_return[static_cast<std::size_t>(i)] * ec[static_cast<std::size_t>(i)];
        ec[static_cast<std::size_t>(i) + 1] = plane_basis(img.col(0), img.col(1));
    }

    SplittingEstimate est;
    est.lambda_prime = 0.0;
    est.worst_domination = 0.0;
    est.min_angle = std::numeric_limits<double>::infinity();
    est.max_es_error = 0.0;

    for (int i = burn; i <= n - burn; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const CrossSectionPoint q = orbit.points[idx];
        SplittingSample smp;
        smp.base = q;
        smp.e_s = es[idx];
        smp.e_c_frame = ec[idx];

        const Matrix3d m1 = tangent_matrix(g, sigma_state(q), 1.0);
        smp.contraction = (m1 * smp.e_s).norm();
        // Domination against the two invariant directions inside the center
        // plane, per return (crossing-to-crossing speeds are uniformly
        // bounded, unlike mid-tube chord speeds inside time-1 windows).
        const double speed_now = field_at_sigma(g, q).norm();
        const double speed_next = field_at_sigma(g, orbit.points[idx + 1]).norm();
        const double contraction_return = (per_return[idx] * smp.e_s).norm();
        const double dom_flow = contraction_return * speed_now / speed_next;
        const double dom_unstable = contraction_return / alpha_prime(rm, q.x);
        smp.domination = std::max(dom_flow, dom_unstable);

        // Transversality of e_s against the invariant generators of the
        // center plane: the flow direction and the plane's section trace.
        const Vector3d flow_dir = field_at_sigma(g, q).normalized();
        const auto& basis = smp.e_c_frame;
        Vector3d section_dir = basis.col(0) * basis.col(1).z() - basis.col(1) * basis.col(0).z();
        const double ang_flow = std::acos(std::clamp(std::abs(flow_dir.dot(smp.e_s)), 0.0, 1.0));
        double angle = ang_flow;
        if (section_dir.norm() > 1e-12) {
            section_dir.normalize();
            const double ang_sec =
                std::acos(std::clamp(std::abs(section_dir.dot(smp.e_s)), 0.0, 1.0));
            angle = std::min(ang_flow, ang_sec);
        }
        est.min_angle = std::min(est.min_angle, angle);
        est.max_es_error =
            std::max(est.max_es_error, std::min((smp.e_s - Vector3d::UnitY()).norm(),
                                                (smp.e_s + Vector3d::UnitY()).norm()));
        est.lambda_prime = std::max({est.lambda_prime, smp.contraction, smp.domination});
        est.worst_domination = std::max(est.worst_domination, smp.domination);
        est.samples.push_back(std::move(smp));
    }

    // Finite-orbit constant: sup over windows of ||D(t)|e_s|| / lambda'^t.
    est.c_est = 0.0;
    for (int i = burn; i + 10 <= n - burn; ++i) {
        double prod = 1.0;
        double tspan = 0.0;
        Vector3d v = es[static_cast<std::size_t>(i)];
        for (int m = 0; m < 10; ++m) {
            const auto j = static_cast<std::size_t>(i + m);
            v = per_return[j] * v;
            prod = v.norm();
            tspan += orbit.flight_times[j];
            est.c_est = std::max(est.c_est, prod / std::pow(est.lambda_prime, tspan));
        }
    }
    return est;
}

ConeCheck verify_cone_invariance(const GeometricLorenzParams& g, const ConeParams& cone,
                                 const SectionOrbit& orbit, int returns_per_step) {
    ConeCheck out;
    if (std::isinf(cone.kappa)) {
        // The degenerate cone is the whole plane; the stable axis maps to
        // itself, never strictly inside.
        out.invariant = false;
        out.margin = std::numeric_limits<double>::infinity();
        return out;
    }
    const ReturnMapParams rm = ReturnMapParams::from(g);
    const int n = static_cast<int>(orbit.flight_times.size());
    const bool stable = cone.flavor == ConeFlavor::Stable;
    double worst = 0.0;
    for (int i = 0; i + returns_per_step <= n; i += returns_per_step) {
        Matrix2d d = Matrix2d::Identity();
        CrossSectionPoint q = orbit.points[static_cast<std::size_t>(i)];
        for (int r = 0; r < returns_per_step; ++r) {
            d = DL(rm, q) * d;
            q = apply_L(rm, q);
        }
        if (stable) d = d.inverse().eval();
        // 100 directions across the cone, boundary rays first: the ratio of
        // the image's cone coordinate to kappa must stay below 1 everywhere.
        for (int j = 0; j < 100; ++j) {
            const double frac = (j < 2) ? 1.0 : static_cast<double>(j - 1) / 98.0;
            const double tilt = (j == 1 ? -1.0 : 1.0) * frac * cone.kappa;
            Eigen::Vector2d v = stable ? Eigen::Vector2d(tilt, 1.0) : Eigen::Vector2d(1.0, tilt);
            const Eigen::Vector2d w = d * v;
            const double kimg = stable ? std::abs(w.x()) / std::abs(w.y())
                                       : std::abs(w.y()) / std::abs(w.x());
            worst = std::max(worst, kimg / cone.kappa);
        }
    }
    out.margin = worst;
    out.invariant = worst < 1.0;
    return out;
}

SectionalExpansionReport sectional_expansion_check(const GeometricLorenzParams& g,
                                                   const CrossSectionPoint& q, double t_max) {
    SectionalExpansionReport rep;
    // Center plane at the start, from a forward frame burn-in.
    auto basis = plane_basis(velocity(g, sigma_state(q)), Vector3d::UnitX());
    CrossSectionPoint cur = q;
    for (int i = 0; i < 20; ++i) {
        const Eigen::Matrix<double, 3, 2> img = return_tangent(g, cur) * basis;
        basis = plane_basis(img.col(0), img.col(1));
        cur = first_return_flow(g, cur).point;
    }
    const State3 s0 = sigma_state(cur);

    double log_area = 0.0;
    rep.times.push_back(0.0);
    rep.log_det.push_back(0.0);
    State3 s = s0;
    const int steps = static_cast<int>(t_max);
    for (int i = 0; i < steps; ++i) {
        const Matrix3d m = tangent_matrix(g, s, 1.0);
        const Eigen::Matrix<double, 3, 2> img = m * basis;
        const double area = std::sqrt((img.transpose() * img).determinant());
        log_area += std::log(area);
        rep.times.push_back(static_cast<double>(i + 1));
        rep.log_det.push_back(log_area);
        s = flow(g, s, 1.0);
        basis = plane_basis(img.col(0), img.col(1));
    }

    // Least squares y = rate * t + b0.
    const auto nn = static_cast<double>(rep.times.size());
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        st += rep.times[i];
        sy += rep.log_det[i];
        stt += rep.times[i] * rep.times[i];
        sty += rep.times[i] * rep.log_det[i];
    }
    rep.rate = (nn * sty - st * sy) / (nn * stt - st * st);
    const double b0 = (sy - rep.rate * st) / nn;
    double rss = 0.0;
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        const double r = rep.log_det[i] - (rep.rate * rep.times[i] + b0);
        rss += r * r;
    }
    const double total = std::abs(rep.rate) * t_max;
    rep.residual = std::sqrt(rss / nn) / (total > 0.0 ? total : 1.0);
    return rep;
}

bool tangent_curve_in_center_cone(const std::vector<double>& xs, const std::vector<double>& ys,
                                  double kappa) {
    if (xs.size() < 2 || xs.size() != ys.size()) throw Error("tangent_curve_in_center_cone: bad polyline");
    const std::size_t n = xs.size();
    const std::size_t step = std::max<std::size_t>(1, (n - 1) / 100);
    for (std::size_t i = 0; i + 1 < n; i += step) {
        const double dx = xs[i + 1] - xs[i];
        const double dy = ys[i + 1] - ys[i];
        if (std::abs(dy) > kappa * std::abs(dx)) return false;
    }
    return true;
}

json hyperbolicity_report(const GeometricLorenzParams& g, int returns,
                          const CrossSectionPoint& start) {
    const SectionOrbit orbit = section_orbit(g, start, returns);
    const SplittingEstimate est = estimate_splitting(g, orbit);
    const int cone_returns = std::min(returns, 1000);
    SectionOrbit cone_orbit = orbit;
    if (static_cast<int>(cone_orbit.flight_times.size()) > cone_returns) {
        cone_orbit.points.resize(static_cast<std::size_t>(cone_returns) + 1);
        cone_orbit.flight_times.resize(static_cast<std::size_t>(cone_returns));
    }
    const ConeCheck uc = verify_cone_invariance(g, {1.0, ConeFlavor::Unstable}, cone_orbit);
    const ConeCheck sc = verify_cone_invariance(g, {1.0, ConeFlavor::Stable}, cone_orbit);
    const SectionalExpansionReport sec = sectional_expansion_check(g, start, 1000.0);

    json j;
    j["lambda_prime"] = est.lambda_prime;
    j["c_est"] = est.c_est;
    j["worst_domination_margin"] = est.worst_domination;
    j["min_splitting_angle_rad"] = est.min_angle;
    j["max_es_error"] = est.max_es_error;
    j["cone_margins"] = {{"unstable", uc.margin}, {"stable", sc.margin}};
    j["cone_invariant"] = {{"unstable", uc.invariant}, {"stable", sc.invariant}};
    j["sectional_rate"] = sec.rate;
    j["residuals"] = {{"sectional_fit", sec.residual}};
    j["returns"] = returns;
    return j;
}

}  // namespace specflow
