#include "specflow/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "specflow/errors.hpp"

namespace specflow {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

Vector3d exit_point(const GeometricLorenzParams& g, const CrossSectionPoint& q) {
    const double ax = std::abs(q.x);
    return Vector3d(sgn(q.x), q.y * std::pow(ax, g.y_exponent()), std::pow(ax, g.a()));
}

}  // namespace

StableLeaf local_stable_leaf(const CrossSectionPoint& p, double mu) {
    StableLeaf leaf;
    leaf.x0 = p.x;
    leaf.y_center = p.y;
    leaf.mu = mu;
    leaf.y_lo = std::max(p.y - mu, -1.0);
    leaf.y_hi = std::min(p.y + mu, 1.0);
    return leaf;
}

double stable_leaf_slope_pullback(const GeometricLorenzParams& g, const CrossSectionPoint& z,
                                  double slope_at_image) {
    // Leaf direction (m, 1) maps under DL to (alpha' m, beta_x m + beta_y);
    // matching the image slope m' solves m = m' beta_y / (alpha' - m' beta_x).
    const ReturnMapParams rm = ReturnMapParams::from(g);
    const double ap = alpha_prime(rm, z.x);
    const double bx = beta_dx(rm, z.x, z.y);
    const double by = beta_dy(rm, z.x);
    return slope_at_image * by / (ap - slope_at_image * bx);
}

SeparatrixSegment unstable_separatrix(const GeometricLorenzParams& g, int side, double t_max,
                                      double delta_seed, double dt) {
    if (!(t_max > 0.0)) throw Error("unstable_separatrix: need t_max > 0");
    SeparatrixSegment sep;
    sep.side = side;
    sep.t_max = t_max;
    sep.delta_seed = delta_seed;
    const State3 seed = block_state(side * delta_seed, 0.0, 0.0);
    Trajectory traj = sample_orbit(g, seed, t_max, dt);
    sep.points = std::move(traj.samples);
    sep.crossings = std::move(traj.crossings);
    return sep;
}

std::vector<SigmaCrossing> separatrix_crossings(const GeometricLorenzParams& g, int side,
                                                double t_max, double delta_seed) {
    std::vector<SigmaCrossing> out;
    // The seed (side*delta, 0, 0) runs along the unstable axis (z = 0), exits
    // at (side, 0, 0) and lands at (-side, side*c): the kneading point.
    double t = -std::log(delta_seed) / g.lambda1 + g.tau_tube;
    CrossSectionPoint q{-static_cast<double>(side), side * g.c};
    while (t <= t_max) {
        out.push_back({t, q.x, q.y});
        const ReturnEvent ev = first_return_flow(g, q);
        t += ev.flight_time;
        q = ev.point;
    }
    return out;
}

double UnstableCurve::y_at(double x) const {
    if (xs.size() < 2) throw Error("unstable curve not built");
    if (x < xs.front() || x > xs.back()) throw Error("unstable curve: x outside window");
    const double step = xs[1] - xs[0];
    const auto i = std::min(xs.size() - 2, static_cast<std::size_t>((x - xs.front()) / step));
    const double w = (x - xs[i]) / step;
    return ys[i] * (1.0 - w) + ys[i + 1] * w;
}

double UnstableCurve::slope_at(double x) const {
    const double step = xs[1] - xs[0];
    const auto i = std::min(xs.size() - 2, static_cast<std::size_t>((x - xs.front()) / step));
    return (ys[i + 1] - ys[i]) / step;
}

UnstableCurve build_unstable_curve(const GeometricLorenzParams& g, const PeriodicPoint& p,
                                   double half_width) {
    if (p.period_n != 2)
        throw Error("build_unstable_curve: implemented for the period-2 point used by the charts");
    const ReturnMapParams rm = ReturnMapParams::from(g);
    UnstableCurve curve;
    curve.x_p = p.x_star;
    curve.y_p = p.y_star;
    const int n = 4001;
    const double lo = p.x_star - half_width;
    const double hi = p.x_star + half_width;
    curve.xs.resize(n);
    curve.ys.assign(n, p.y_star);
    for (int i = 0; i < n; ++i)
        curve.xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);

    const int s1 = p.x_star > 0.0 ? +1 : -1;  // sign of the cycle point
    // Graph transform of L^2: Y(alpha^2(xi)) = beta(alpha(xi), beta(xi, Y(xi))).
    // Preimages contract toward x_p, so the inverse chain stays in the window.
    std::vector<double> next(static_cast<std::size_t>(n));
    for (int pass = 0; pass < 60; ++pass) {
        double delta = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = curve.xs[static_cast<std::size_t>(i)];
            const auto eta = alpha_inverse(rm, x, -s1);
            if (!eta) throw Error("unstable curve window leaves the branch image");
            const auto xi = alpha_inverse(rm, *eta, s1);
            if (!xi || *xi < curve.xs.front() || *xi > curve.xs.back())
                throw Error("unstable curve preimage leaves the window");
            const double y_xi = curve.y_at(*xi);
            const double y_eta = beta(rm, *xi, y_xi);
            const double y_new = beta(rm, *eta, y_eta);
            next[static_cast<std::size_t>(i)] = y_new;
            delta = std::max(delta, std::abs(y_new - curve.ys[static_cast<std::size_t>(i)]));
        }
        curve.ys = next;
        if (delta < 1e-15) break;
    }
    return curve;
}

State3 HolonomyChart::state_at(const ChartPoint& cp) const {
    const GeometricLorenzParams& g = params;
    const double x = curve.x_p + cp.u;
    const double yc = curve.y_at(x);
    if (cp.t >= 0.0) {
        return block_state(x * std::exp(g.lambda1 * cp.t),
                           yc * std::exp(-g.lambda2 * cp.t) + cp.s, std::exp(-g.lambda3 * cp.t));
    }
    // Negative times live inside the incoming tube of the curve's preimage.
    const ReturnMapParams rm = ReturnMapParams::from(g);
    const auto x_pre = alpha_inverse(rm, x, pre_side);
    if (!x_pre) throw Error("chart point preimage undefined");
    const double ax = std::abs(*x_pre);
    const double y_e_center = (yc - pre_side * g.c) / g.b;
    const double theta = g.tau_tube + cp.t;
    const double rho = theta / g.tau_tube;
    const double leaf_scale = (1.0 - rho) + rho * g.b;
    Vector3d entry(static_cast<double>(pre_side), y_e_center + cp.s / leaf_scale,
                   std::pow(ax, g.a()));
    return State3{pre_side > 0 ? Region::TubePlus : Region::TubeMinus, entry, theta};
}

Vector3d HolonomyChart::position_at(const ChartPoint& cp) const {
    return position(params, state_at(cp));
}

std::optional<ChartPoint> HolonomyChart::locate(const State3& s) const {
    const GeometricLorenzParams& g = params;
    if (s.region == Region::LinearBlock) {
        const double z = s.p.z();
        if (!(z > 0.0) || z > 1.0) return std::nullopt;
        const double t = -std::log(z) / g.lambda3;
        if (t > mu) return std::nullopt;
        const double x0 = s.p.x() * std::pow(z, g.lambda1 / g.lambda3);
        const double u = x0 - curve.x_p;
        if (std::abs(u) > mu_u) return std::nullopt;
        if (x0 < curve.xs.front() || x0 > curve.xs.back()) return std::nullopt;
        const double yl = curve.y_at(x0) * std::pow(z, g.lambda2 / g.lambda3);
        const double sgn_s = s.p.y() - yl;
        if (std::abs(sgn_s) > mu) return std::nullopt;
        return ChartPoint{u, sgn_s, t};
    }
    const int side = s.region == Region::TubePlus ? +1 : -1;
    if (side != pre_side) return std::nullopt;
    const double theta = s.clock;
    const double t = theta - g.tau_tube;
    if (t < -mu || t >= 0.0) return std::nullopt;
    const double x_l = side * (g.k * s.p.z() - 1.0);
    const double u = x_l - curve.x_p;
    if (std::abs(u) > mu_u) return std::nullopt;
    if (x_l < curve.xs.front() || x_l > curve.xs.back()) return std::nullopt;
    const double y_e_center = (curve.y_at(x_l) - side * g.c) / g.b;
    const double rho = theta / g.tau_tube;
    const double leaf_scale = (1.0 - rho) + rho * g.b;
    const double sgn_s = (s.p.y() - y_e_center) * leaf_scale;
    if (std::abs(sgn_s) > mu) return std::nullopt;
    return ChartPoint{u, sgn_s, t};
}

HolonomyChart build_holonomy_chart(const GeometricLorenzParams& g, const PeriodicPoint& p,
                                   double mu, double mu_u) {
    if (!(4.0 * mu < p.flow_period))
        throw MuTooLargeError("need 4*mu below the flow period of the periodic orbit");
    if (!(mu < g.tau_tube)) throw MuTooLargeError("need mu below the tube flight time");

    HolonomyChart chart;
    chart.params = g;
    chart.periodic = p;
    chart.mu = mu;
    chart.mu_u = mu_u;
    chart.pre_side = p.x_star > 0.0 ? -1 : +1;
    chart.curve = build_unstable_curve(g, p, mu_u * 1.25);

    // The leaf window must stay inside the section, and the leaf
    // parametrization inside the tube must stay on the face.
    double max_abs_y = 0.0;
    double max_abs_ye = 0.0;
    for (std::size_t i = 0; i < chart.curve.xs.size(); ++i) {
        const double y = chart.curve.ys[i];
        max_abs_y = std::max(max_abs_y, std::abs(y));
        max_abs_ye = std::max(max_abs_ye, std::abs((y - chart.pre_side * g.c) / g.b));
    }
    if (max_abs_y + mu > 1.0) throw MuTooLargeError("stable leaf window leaves the section");
    if (max_abs_ye + mu / g.b > 1.0) throw MuTooLargeError("tube leaf window leaves the face");

    // Lipschitz constant for the critical epsilon: 3 (1 + 2 K / kappa_min).
    const State3 start = sigma_state(p.x_star, p.y_star);
    double kappa_min = velocity(g, start).norm();
    {
        const double dt = 1e-3;
        State3 s = start;
        for (double t = 0.0; t < p.flow_period; t += dt) {
            s = flow(g, s, dt);
            kappa_min = std::min(kappa_min, velocity(g, s).norm());
        }
    }
    chart.kappa_min = kappa_min;
    chart.l_const = 3.0 * (1.0 + 2.0 * max_speed(g) / kappa_min);

    const double err = chart_injectivity_error(chart, 40);
    if (!(err < 1e-9)) throw MuTooLargeError("chart round-trip injectivity probe failed");
    return chart;
}

double chart_injectivity_error(const HolonomyChart& chart, int n) {
    double worst = 0.0;
    const double scale = 0.999;
    for (double t : {-0.5 * chart.mu, 0.0, 0.5 * chart.mu}) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                ChartPoint cp;
                cp.u = scale * chart.mu_u * (2.0 * i / (n - 1) - 1.0);
                cp.s = scale * chart.mu * (2.0 * j / (n - 1) - 1.0);
                cp.t = t;
                const auto back = chart.locate(chart.state_at(cp));
                if (!back) return std::numeric_limits<double>::infinity();
                worst = std::max({worst, std::abs(back->u - cp.u), std::abs(back->s - cp.s),
                                  std::abs(back->t - cp.t)});
            }
        }
    }
    return worst;
}

double holonomy_commutation_error(const HolonomyChart& chart, int n_probe) {
    const GeometricLorenzParams& g = chart.params;
    double worst = 0.0;
    const double scale = 0.9;
    for (int i = 0; i < n_probe; ++i) {
        for (int j = 0; j < n_probe; ++j) {
            for (double t0 : {-0.45 * chart.mu, 0.0, 0.2 * chart.mu}) {
                ChartPoint cp;
                cp.u = scale * chart.mu_u * (2.0 * i / (n_probe - 1) - 1.0);
                cp.s = scale * chart.mu * (2.0 * j / (n_probe - 1) - 1.0);
                cp.t = t0;
                for (double dt : {0.25 * chart.mu, 0.5 * chart.mu}) {
                    if (cp.t + dt > chart.mu) continue;
                    const State3 moved = flow(g, chart.state_at(cp), dt);
                    const auto loc = chart.locate(moved);
                    if (!loc) continue;
                    const Vector3d a = chart.position_at(chart.pi_s(*loc));
                    const Vector3d b = position(g, flow(g, chart.state_at(chart.pi_s(cp)), dt));
                    worst = std::max(worst, (a - b).norm());
                }
            }
        }
    }
    return worst;
}

double holonomy_lipschitz(const HolonomyChart& chart, int n_probe) {
    double worst = 0.0;
    for (int i = 0; i + 1 < n_probe; ++i) {
        const double u1 = chart.mu_u * (2.0 * i / (n_probe - 1) - 1.0) * 0.95;
        const double u2 = chart.mu_u * (2.0 * (i + 1) / (n_probe - 1) - 1.0) * 0.95;
        for (double s : {-0.5 * chart.mu, 0.25 * chart.mu}) {
            const Vector3d a1 = chart.position_at({u1, s, 0.0});
            const Vector3d a2 = chart.position_at({u2, s, 0.0});
            const Vector3d b1 = chart.position_at({u1, 0.0, 0.0});
            const Vector3d b2 = chart.position_at({u2, 0.0, 0.0});
            const double num = (b1 - b2).norm();
            const double den = (a1 - a2).norm();
            if (den > 0.0) worst = std::max(worst, num / den);
        }
    }
    return worst;
}

ProjectedSet project_separatrix(const HolonomyChart& chart, const SeparatrixSegment& sep_plus,
                                const SeparatrixSegment& sep_minus, double T) {
    const GeometricLorenzParams& g = chart.params;
    ProjectedSet out;
    out.t_used = T;

    auto handle_side = [&](const SeparatrixSegment& sep) {
        for (std::size_t j = 0; j < sep.crossings.size(); ++j) {
            const SigmaCrossing& cr = sep.crossings[j];
            if (cr.t > T) break;
            // The strong-unstable coordinate is invariant along the arc, so
            // only crossings with x in the chart range can ever enter A(D0);
            // the arc may still enter away from the section (the leaf offset
            // contracts going down the block), so membership is tested on
            // samples across the whole time window, not just at the crossing.
            const double u0 = cr.x - chart.curve.x_p;
            if (std::abs(u0) > chart.mu_u) continue;
            if (cr.x < chart.curve.xs.front() || cr.x > chart.curve.xs.back()) continue;

            bool inside = false;
            double u_min = u0, u_max = u0;
            auto visit = [&](const State3& s) {
                if (auto loc = chart.locate(s)) {
                    inside = true;
                    u_min = std::min(u_min, loc->u);
                    u_max = std::max(u_max, loc->u);
                }
            };
            if (std::abs(cr.y - chart.curve.y_at(cr.x)) <= chart.mu) inside = true;
            // Forward samples of the arc (into the block).
            const State3 base = sigma_state(cr.x, cr.y);
            for (int m = 1; m <= 14; ++m) visit(flow(g, base, 0.07 * chart.mu * m));
            // Backward samples (inside the incoming tube), reconstructed from
            // the predecessor crossing (or the seed's block exit).
            Vector3d entry;
            int side;
            if (j == 0) {
                entry = Vector3d(static_cast<double>(sep.side), 0.0, 0.0);
                side = sep.side;
            } else {
                const SigmaCrossing& pv = sep.crossings[j - 1];
                entry = exit_point(g, CrossSectionPoint{pv.x, pv.y});
                side = pv.x > 0.0 ? +1 : -1;
            }
            for (int m = 1; m <= 14; ++m) {
                const double theta = g.tau_tube - 0.07 * chart.mu * m;
                visit(State3{side > 0 ? Region::TubePlus : Region::TubeMinus, entry, theta});
            }
            if (!inside) continue;

            ProjectedArc arc;
            arc.u = u0;
            arc.t_cross = cr.t;
            arc.side = sep.side;
            arc.x = cr.x;
            arc.y = cr.y;
            arc.diameter = u_max - u_min;
            out.arcs.push_back(arc);
        }
    };
    handle_side(sep_plus);
    handle_side(sep_minus);

    std::sort(out.arcs.begin(), out.arcs.end(),
              [](const ProjectedArc& a, const ProjectedArc& b) { return a.u < b.u; });
    for (const auto& arc : out.arcs) {
        if (out.points.empty() || std::abs(out.points.back() - arc.u) > 1e-9)
            out.points.push_back(arc.u);
    }
    return out;
}

GapInterval find_gap_interval(const std::vector<double>& points, double mu_u, double h_dense) {
    GapInterval gap;
    if (points.empty()) {
        gap.lo = -mu_u;
        gap.hi = mu_u;
        gap.clearance = mu_u;
        return gap;
    }
    std::vector<double> bounds;
    bounds.push_back(-mu_u);
    for (double p : points)
        if (p > -mu_u && p < mu_u) bounds.push_back(p);
    bounds.push_back(mu_u);

    double best_w = -1.0, best_lo = 0.0, best_hi = 0.0, best_mid = 0.0;
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
        const double w = bounds[i + 1] - bounds[i];
        const double mid = 0.5 * (bounds[i] + bounds[i + 1]);
        const bool better =
            w > best_w + 1e-15 || (std::abs(w - best_w) <= 1e-15 && std::abs(mid) < std::abs(best_mid));
        if (better) {
            best_w = w;
            best_lo = bounds[i];
            best_hi = bounds[i + 1];
            best_mid = mid;
        }
    }
    if (best_w <= 2.0 * h_dense)
        throw NoGapError("projected points are dense at the stated resolution");
    gap.lo = best_lo + 0.25 * best_w;
    gap.hi = best_hi - 0.25 * best_w;
    gap.clearance = 0.25 * best_w;
    // Actual clearance to the point set (range ends are not points).
    double clear = std::numeric_limits<double>::infinity();
    for (double p : points) {
        const double d = p < gap.lo ? gap.lo - p : (p > gap.hi ? p - gap.hi : 0.0);
        clear = std::min(clear, d);
    }
    if (std::isfinite(clear)) gap.clearance = std::min(gap.clearance, clear);
    return gap;
}

double strip_min_distance(const HolonomyChart& chart, const std::vector<SigmaCrossing>& crossings,
                          const GapInterval& gap, double h) {
    const double x_lo = chart.curve.x_p + gap.lo;
    const double x_hi = chart.curve.x_p + gap.hi;
    double best2 = std::numeric_limits<double>::infinity();
    const auto nx = static_cast<long>(std::floor((x_hi - x_lo) / h)) + 1;
    for (long ix = 0; ix < nx; ++ix) {
        const double x = x_lo + ix * h;
        const double yc = chart.curve.y_at(x);
        const auto ny = static_cast<long>(std::floor(2.0 * chart.mu / h)) + 1;
        for (long iy = 0; iy < ny; ++iy) {
            const double y = yc - chart.mu + iy * h;
            for (const auto& cr : crossings) {
                const double dx = cr.x - x;
                const double dx2 = dx * dx;
                if (dx2 >= best2) continue;
                const double dy = cr.y - y;
                const double d2 = dx2 + dy * dy;
                if (d2 < best2) best2 = d2;
            }
        }
    }
    return std::sqrt(best2);
}

std::optional<WOverGap> find_w_over_gap(const GeometricLorenzParams& g, const HolonomyChart& chart,
                                        const GapInterval& gap, int max_depth) {
    const ReturnMapParams rm = ReturnMapParams::from(g);
    const double x_lo = chart.curve.x_p + gap.lo;
    const double x_hi = chart.curve.x_p + gap.hi;
    const double center = 0.5 * (x_lo + x_hi);
    std::vector<double> level{chart.periodic.x_star};
    for (int depth = 1; depth <= max_depth; ++depth) {
        std::vector<double> next;
        next.reserve(level.size() * 2);
        for (double v : level)
            for (int s : {-1, +1})
                if (auto u = alpha_inverse(rm, v, s)) next.push_back(*u);
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        if (next.size() > 4000000) throw Error("preimage search exploded");
        level = std::move(next);
        double best = std::numeric_limits<double>::infinity();
        double best_x = 0.0;
        for (double v : level) {
            if (v >= x_lo && v <= x_hi && std::abs(v - center) < best) {
                best = std::abs(v - center);
                best_x = v;
            }
        }
        if (std::isfinite(best)) {
            WOverGap w;
            w.depth = depth;
            w.w = CrossSectionPoint{best_x, chart.curve.y_at(best_x)};
            return w;
        }
    }
    return std::nullopt;
}

GapCertificate compute_gap_certificate(const GeometricLorenzParams& g, const HolonomyChart& chart,
                                       double T, double delta_seed, double grid_h) {
    GapCertificate cert;
    cert.t_used = T;
    cert.grid_h = grid_h;
    cert.l_const = chart.l_const;
    cert.mu = chart.mu;
    cert.mu_u = chart.mu_u;
    cert.x_p = chart.curve.x_p;

    const SeparatrixSegment sp = unstable_separatrix(g, +1, T, delta_seed, 0.5);
    const SeparatrixSegment sm = unstable_separatrix(g, -1, T, delta_seed, 0.5);
    const ProjectedSet proj = project_separatrix(chart, sp, sm, T);
    cert.projected_points = proj.points;
    for (const auto& arc : proj.arcs) cert.max_arc_diameter = std::max(cert.max_arc_diameter, arc.diameter);

    const GapInterval gap = find_gap_interval(proj.points, chart.mu_u);
    cert.gap_lo = gap.lo;
    cert.gap_hi = gap.hi;
    cert.clearance = gap.clearance;

    auto merged_crossings = [&](double horizon) {
        std::vector<SigmaCrossing> all = separatrix_crossings(g, +1, horizon, delta_seed);
        std::vector<SigmaCrossing> minus = separatrix_crossings(g, -1, horizon, delta_seed);
        all.insert(all.end(), minus.begin(), minus.end());
        std::sort(all.begin(), all.end(),
                  [](const SigmaCrossing& a, const SigmaCrossing& b) { return a.t < b.t; });
        return all;
    };

    // Pass 1: epsilon from the distance at the plain T horizon.
    const double d0 = strip_min_distance(chart, merged_crossings(T), gap, grid_h);
    double eps = d0 / (4.0 * chart.l_const);

    // Pass 2: recompute on the epsilon-consistent horizon (an eps-tracker can
    // reach crossings of clock up to T + log(eps/delta)/lambda1).
    for (int iter = 0; iter < 12; ++iter) {
        const double horizon = T + std::max(0.0, std::log(eps / delta_seed) / g.lambda1);
        const auto crossings = merged_crossings(horizon);
        const double d_raw = strip_min_distance(chart, crossings, gap, grid_h);
        const double d_star = d_raw - cert.strip_slack * eps;
        if (d_star > 0.0 && eps < d_star / (2.0 * chart.l_const)) {
            cert.horizon = horizon;
            cert.n_crossings_horizon = static_cast<int>(crossings.size());
            cert.d_star = d_star;
            cert.eps = eps;
            cert.eps_critical = d_star / (2.0 * chart.l_const);
            const double d_raw_half = strip_min_distance(chart, crossings, gap, grid_h / 2.0);
            cert.d_star_refined = d_raw_half - cert.strip_slack * eps;
            cert.d_star_stability =
                std::abs(cert.d_star_refined - cert.d_star) / std::max(cert.d_star, 1e-300);
            cert.valid = true;
            break;
        }
        eps *= 0.5;
    }

    if (const auto w = find_w_over_gap(g, chart, gap)) {
        cert.w = w->w;
        cert.w_depth = w->depth;
    } else {
        cert.valid = false;
    }
    return cert;
}

json gap_certificate_json(const GapCertificate& cert) {
    json j;
    j["t_used"] = cert.t_used;
    j["projected_points"] = cert.projected_points;
    j["n_projected"] = cert.projected_points.size();
    j["max_arc_diameter"] = cert.max_arc_diameter;
    j["gap"] = {{"lo", cert.gap_lo}, {"hi", cert.gap_hi}};
    j["clearance"] = cert.clearance;
    j["d_star"] = cert.d_star;
    j["d_star_refined"] = cert.d_star_refined;
    j["d_star_stability"] = cert.d_star_stability;
    j["eps"] = cert.eps;
    j["eps_critical"] = cert.eps_critical;
    j["l_const"] = cert.l_const;
    j["grid_h"] = cert.grid_h;
    j["horizon"] = cert.horizon;
    j["strip_slack"] = cert.strip_slack;
    j["n_crossings_horizon"] = cert.n_crossings_horizon;
    j["w"] = {{"x", cert.w.x}, {"y", cert.w.y}, {"depth", cert.w_depth}};
    j["chart"] = {{"mu", cert.mu}, {"mu_u", cert.mu_u}, {"x_p", cert.x_p}};
    j["valid"] = cert.valid;
    j["note"] = "resolution-limited certificate: distances evaluated on the stated grid";
    return j;
}

json gap_figure_data(const GeometricLorenzParams&, const HolonomyChart& chart,
                     const GapCertificate& cert, const SeparatrixSegment& sep_plus,
                     const SeparatrixSegment& sep_minus) {
    json j;
    json curve = json::array();
    const auto& xs = chart.curve.xs;
    const auto& ys = chart.curve.ys;
    const std::size_t stride = std::max<std::size_t>(1, xs.size() / 200);
    for (std::size_t i = 0; i < xs.size(); i += stride) curve.push_back({xs[i], ys[i]});
    j["curve"] = curve;
    j["x_p"] = chart.curve.x_p;
    j["y_p"] = chart.curve.y_p;
    j["mu"] = chart.mu;
    j["mu_u"] = chart.mu_u;

    json leaves = json::array();
    for (int i = 0; i <= 12; ++i) {
        const double x = chart.curve.x_p + chart.mu_u * (2.0 * i / 12.0 - 1.0);
        const double yc = chart.curve.y_at(x);
        leaves.push_back({x, yc - chart.mu, yc + chart.mu});
    }
    j["leaves"] = leaves;

    json crossings = json::array();
    for (const auto* sep : {&sep_plus, &sep_minus})
        for (const auto& cr : sep->crossings)
            if (cr.t <= cert.t_used) crossings.push_back({cr.x, cr.y, cr.t});
    j["crossings"] = crossings;

    json sep_path = json::array();
    for (const auto& smp : sep_plus.points) {
        if (smp.t > cert.t_used) break;
        sep_path.push_back({smp.pos.x(), smp.pos.y(), smp.pos.z()});
    }
    j["separatrix_plus_path"] = sep_path;

    j["projected_points"] = cert.projected_points;
    j["gap"] = {{"lo", cert.gap_lo}, {"hi", cert.gap_hi}};
    j["w"] = {cert.w.x, cert.w.y};
    j["d_star"] = cert.d_star;
    j["t_used"] = cert.t_used;
    return j;
}

BowenStableReport bowen_ball_in_stable(const GeometricLorenzParams& g, const PeriodicPoint& p,
                                       double eps0, int t_grid_returns, std::uint64_t seed,
                                       int n_samples) {
    if (!(eps0 <= 1e-2)) throw Error("bowen_ball_in_stable: need eps0 <= 1e-2");
    const ReturnMapParams rm = ReturnMapParams::from(g);
    const CycleMultipliers mult = cycle_multipliers(rm, p);
    const double per_return_growth = std::pow(mult.unstable, 1.0 / p.period_n);
    const double dx_range = 0.5 * eps0 / std::pow(per_return_growth, t_grid_returns);
    const double total_time = t_grid_returns * p.flow_period / p.period_n;
    const double dt = eps0 / (10.0 * max_speed(g));

    // Reference positions of the periodic orbit, shared across samples.
    const auto n_steps = static_cast<std::size_t>(std::ceil(total_time / dt));
    std::vector<Vector3d> ref(n_steps + 1);
    {
        State3 s = sigma_state(p.x_star, p.y_star);
        for (std::size_t i = 0; i <= n_steps; ++i) {
            ref[i] = position(g, s);
            s = flow(g, s, dt);
        }
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    BowenStableReport rep;
    rep.all_within = true;
    for (int i = 0; i < n_samples; ++i) {
        const double dx = dx_range * unif(rng);
        const double dy = 0.5 * eps0 * unif(rng);
        State3 s = sigma_state(p.x_star + dx, p.y_star + dy);
        double dev = 0.0;
        for (std::size_t j = 0; j <= n_steps; ++j) {
            dev = std::max(dev, (position(g, s) - ref[j]).norm());
            if (dev > eps0) break;
            if (j < n_steps) s = flow(g, s, dt);
        }
        if (dev > eps0) continue;  // not a tracked point
        ++rep.n_tracked;
        // Section distance to the stable leaf through the periodic point;
        // checked against eps0 itself, stronger than L * eps0 for any L >= 1.
        const double d_s = std::abs(dx);
        rep.worst_distance = std::max(rep.worst_distance, d_s);
        if (d_s > eps0) rep.all_within = false;
        if (dev > 0.0) rep.measured_const = std::max(rep.measured_const, d_s / dev);
    }
    return rep;
}

bool check_tangency_unstable_in_center(const GeometricLorenzParams& g, const PeriodicPoint& p,
                                       double kappa) {
    const UnstableCurve curve = build_unstable_curve(g, p, 0.125);
    std::vector<double> xs, ys;
    const std::size_t stride = std::max<std::size_t>(1, curve.xs.size() / 101);
    for (std::size_t i = 0; i < curve.xs.size(); i += stride) {
        xs.push_back(curve.xs[i]);
        ys.push_back(curve.ys[i]);
    }
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        if (std::abs(ys[i + 1] - ys[i]) > kappa * std::abs(xs[i + 1] - xs[i])) return false;
    return true;
}

int tracking_escape_returns(const GeometricLorenzParams& g, const PeriodicPoint& p, double dx,
                            double eps0, int max_returns) {
    const ReturnMapParams rm = ReturnMapParams::from(g);
    CrossSectionPoint q{p.x_star + dx, p.y_star};
    CrossSectionPoint r{p.x_star, p.y_star};
    for (int n = 0; n < max_returns; ++n) {
        const double d = std::max(std::abs(q.x - r.x), std::abs(q.y - r.y));
        if (d > eps0) return n;
        q = apply_L(rm, q);
        r = apply_L(rm, r);
    }
    return max_returns;
}

}  // namespace specflow
