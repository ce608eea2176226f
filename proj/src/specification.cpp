#include "specflow/specification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <thread>

#include "specflow/errors.hpp"
#include "specflow/return_map.hpp"

namespace specflow {

namespace {

constexpr double kStripSlack = 1.1;  // transverse landing-offset inflation bound

double sup_dist(double ax, double ay, double bx, double by) {
    return std::max(std::abs(ax - bx), std::abs(ay - by));
}

}  // namespace

double SpecificationInstance::min_gap() const {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < segments.size(); ++i)
        g = std::min(g, segments[i + 1].t_begin - segments[i].t_end);
    return g;
}

void SpecificationInstance::validate(const GeometricLorenzParams& g, double tol) const {
    if (segments.empty()) throw Error("instance has no segments");
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        if (!(s.t_begin < s.t_end)) throw Error("segment interval is empty");
        if (i > 0 && !(segments[i - 1].t_end <= s.t_begin))
            throw Error("segment intervals overlap or are out of order");
        if (s.at_singularity) continue;
        // Orbit-piece property: X_{t2}(P(t1)) = P(t1 + t2) along the segment.
        const double len = s.t_end - s.t_begin;
        for (double f : {0.25, 0.5}) {
            const State3 a = flow(g, flow(g, s.initial, f * len), (1.0 - f) * len);
            const State3 b = flow(g, s.initial, len);
            if ((position(g, a) - position(g, b)).norm() > tol)
                throw Error("segment is not a genuine orbit piece");
        }
    }
}

SpecificationInstance instance_from_json(const GeometricLorenzParams& g, const json& j) {
    SpecificationInstance inst;
    inst.eps = j.at("eps").get<double>();
    for (const auto& js : j.at("segments")) {
        OrbitSegment seg;
        seg.t_begin = js.at("t_begin").get<double>();
        seg.t_end = js.at("t_end").get<double>();
        if (js.contains("at_singularity") && js["at_singularity"].get<bool>()) {
            seg.at_singularity = true;
            seg.initial = block_state(0.0, 0.0, 0.0);
        } else {
            seg.initial = sigma_state(js.at("x").get<double>(), js.at("y").get<double>());
        }
        inst.segments.push_back(seg);
    }
    inst.validate(g);
    return inst;
}

json instance_to_json(const SpecificationInstance& inst) {
    json j;
    j["eps"] = inst.eps;
    json segs = json::array();
    for (const auto& s : inst.segments) {
        json js;
        js["t_begin"] = s.t_begin;
        js["t_end"] = s.t_end;
        if (s.at_singularity) {
            js["at_singularity"] = true;
        } else {
            js["x"] = s.initial.p.x();
            js["y"] = s.initial.p.y();
        }
        segs.push_back(js);
    }
    j["segments"] = segs;
    return j;
}

BowenBallResult in_bowen_ball(const GeometricLorenzParams& g, const State3& x, const State3& ref,
                              double T, double eps) {
    BowenBallResult r;
    if (std::isinf(eps)) {
        r.inside = true;
        r.max_deviation = 0.0;
        return r;
    }
    const double dt = eps / (10.0 * max_speed(g));
    const auto n = static_cast<std::size_t>(std::ceil(T / dt));
    State3 a = x, b = ref;
    for (std::size_t i = 0; i <= n; ++i) {
        r.max_deviation = std::max(r.max_deviation, (position(g, a) - position(g, b)).norm());
        if (r.max_deviation > eps) {
            r.inside = false;
            return r;
        }
        if (i < n) {
            a = flow(g, a, dt);
            b = flow(g, b, dt);
        }
    }
    r.inside = true;
    return r;
}

namespace {

struct StripData {
    std::vector<double> xs, ys, ts;  // crossings sorted by x
    double horizon = 0.0;
};

StripData build_strip(const GeometricLorenzParams& g, const ObstructionInstance& inst) {
    StripData strip;
    strip.horizon =
        inst.T + std::max(0.0, std::log(inst.eps / inst.delta_seed) / g.lambda1);
    std::vector<SigmaCrossing> all = separatrix_crossings(g, +1, strip.horizon, inst.delta_seed);
    const auto minus = separatrix_crossings(g, -1, strip.horizon, inst.delta_seed);
    all.insert(all.end(), minus.begin(), minus.end());
    std::sort(all.begin(), all.end(),
              [](const SigmaCrossing& a, const SigmaCrossing& b) { return a.x < b.x; });
    for (const auto& cr : all) {
        strip.xs.push_back(cr.x);
        strip.ys.push_back(cr.y);
        strip.ts.push_back(cr.t);
    }
    return strip;
}

/// Deviation of the candidate orbit anchored at the section point (x, y) at
/// time T against the orbit of w over [0, t2] (the second segment).
double forward_deviation(const GeometricLorenzParams& g, const CrossSectionPoint& c,
                         const CrossSectionPoint& w, double t2, double eps, double cap) {
    const double dt = eps / (10.0 * max_speed(g));
    const auto n = static_cast<std::size_t>(std::ceil(t2 / dt));
    State3 a = sigma_state(c), b = sigma_state(w);
    double dev = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        dev = std::max(dev, (position(g, a) - position(g, b)).norm());
        if (dev > cap) return dev;
        if (i < n) {
            a = flow(g, a, dt);
            b = flow(g, b, dt);
        }
    }
    return dev;
}

}  // namespace

ShadowingResult search_gluing_lorenz(const GeometricLorenzParams& g,
                                     const ObstructionInstance& inst, double h, int threads) {
    if (!(h > 0.0) || !(inst.eps > 0.0)) throw Error("search_gluing: need h > 0 and eps > 0");
    const StripData strip = build_strip(g, inst);
    if (strip.xs.empty()) throw Error("search_gluing: empty separatrix strip");

    ShadowingResult res;
    res.eps = inst.eps;
    res.grid_h = h;

    const auto n = static_cast<long long>(std::floor(2.0 / h)) + 1;  // per axis
    res.candidates = n * n;

    // Certified per-candidate lower bound on the deviation:
    //   dev1 >= sup-dist to the nearest strip crossing / slack,
    //   dev2 >= sup-dist to w.
    // The minimum over the grid is taken column by column in fixed order;
    // a column is skipped only when its own lower bound cannot beat the
    // current minimum (so the result equals the brute-force grid minimum).
    struct ColumnScan {
        double best = std::numeric_limits<double>::infinity();
        double bx = 0.0, by = 0.0;
    };

    auto scan_columns = [&](long long i_begin, long long i_end, ColumnScan& out) {
        std::vector<std::size_t> js;
        for (long long ix = i_begin; ix < i_end; ++ix) {
            const double x = -1.0 + static_cast<double>(ix) * h;
            double min_dx = std::numeric_limits<double>::infinity();
            for (double sx : strip.xs) min_dx = std::min(min_dx, std::abs(x - sx));
            const double col_bound = std::max(min_dx / kStripSlack, std::abs(x - inst.w.x));
            if (col_bound >= out.best) continue;
            // Candidate crossings that can matter in this column.
            js.clear();
            for (std::size_t j = 0; j < strip.xs.size(); ++j)
                if (std::abs(x - strip.xs[j]) / kStripSlack < out.best) js.push_back(j);
            for (long long iy = 0; iy < n; ++iy) {
                const double y = -1.0 + static_cast<double>(iy) * h;
                double f = std::numeric_limits<double>::infinity();
                for (std::size_t j : js)
                    f = std::min(f, sup_dist(x, y, strip.xs[j], strip.ys[j]));
                const double bound = std::max(f / kStripSlack, sup_dist(x, y, inst.w.x, inst.w.y));
                if (bound < out.best) {
                    out.best = bound;
                    out.bx = x;
                    out.by = y;
                }
            }
        }
    };

    ColumnScan total;
    if (threads <= 1) {
        scan_columns(0, n, total);
    } else {
        // Deterministic reduction: fixed chunks merged in index order; ties
        // resolved toward the earlier chunk, matching the serial scan.
        const long long chunk = (n + threads - 1) / threads;
        std::vector<ColumnScan> parts(static_cast<std::size_t>(threads));
        std::vector<std::thread> pool;
        for (int tI = 0; tI < threads; ++tI) {
            const long long b = tI * chunk;
            const long long e = std::min(n, b + chunk);
            pool.emplace_back([&, tI, b, e] { scan_columns(b, e, parts[static_cast<std::size_t>(tI)]); });
        }
        for (auto& th : pool) th.join();
        for (const auto& part : parts)
            if (part.best < total.best) total = part;
    }

    res.grid_lower_bound = total.best;
    res.best_deviation = total.best;
    res.best_candidate = CrossSectionPoint{total.bx, total.by};

    if (total.best >= inst.eps) {
        res.outcome = ShadowingOutcome::ExhaustedNoWitness;
        res.note = "no grid candidate below eps at the stated resolution";
        return res;
    }

    // Refinement: genuine witnesses ride the separatrix orbit itself. A
    // crossing of clock t_j supports the glued point (nu, 0, 0) with
    // nu = delta * exp(lambda1 (t_j - T)), whose own backward deviation is
    // exactly |nu|; its forward deviation is simulated and re-verified at
    // half time step. Crossings within (1 + slack) eps of w cover every grid
    // candidate whose bound dipped below eps.
    double refined_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < strip.xs.size(); ++j) {
        const CrossSectionPoint s_j{strip.xs[j], strip.ys[j]};
        if (sup_dist(s_j.x, s_j.y, inst.w.x, inst.w.y) > (1.0 + kStripSlack) * inst.eps) continue;
        const double nu = inst.delta_seed * std::exp(g.lambda1 * (strip.ts[j] - inst.T));
        const double dev2 = forward_deviation(g, s_j, inst.w, inst.t2, inst.eps, 2.0 * inst.eps);
        const double dev = std::max(nu, dev2);
        refined_min = std::min(refined_min, dev);
        if (dev < inst.eps) {
            const double dev2b =
                forward_deviation(g, s_j, inst.w, inst.t2, inst.eps / 2.0, 2.0 * inst.eps);
            if (std::max(nu, dev2b) < inst.eps * 1.01) {
                res.outcome = ShadowingOutcome::Witness;
                res.witness = s_j;
                res.witness_nu = nu;
                res.witness_deviation = std::max(nu, dev2b);
                res.note = "witness on the separatrix orbit, re-verified at half step";
                return res;
            }
        }
    }
    res.outcome = ShadowingOutcome::ExhaustedNoWitness;
    res.resolution_limited_regime = true;
    if (std::isfinite(refined_min)) res.best_deviation = refined_min;
    res.note =
        "grid bound fell below eps but no refined candidate qualifies: loose-eps regime, "
        "claim limited to the stated resolution";
    return res;
}

ShadowingResult search_gluing_forward(const GeometricLorenzParams& g,
                                      const SpecificationInstance& inst, double h) {
    inst.validate(g);
    for (const auto& s : inst.segments)
        if (s.at_singularity)
            throw Error("search_gluing_forward: singularity segments need the obstruction search");

    ShadowingResult res;
    res.eps = inst.eps;
    res.grid_h = h;
    const double t0 = inst.segments.front().t_begin;
    const auto n = static_cast<long long>(std::floor(2.0 / h)) + 1;
    res.candidates = n * n;
    res.best_deviation = std::numeric_limits<double>::infinity();

    const double dt = inst.eps / (10.0 * max_speed(g));
    for (long long ix = 0; ix < n; ++ix) {
        const double x = -1.0 + static_cast<double>(ix) * h;
        for (long long iy = 0; iy < n; ++iy) {
            const double y = -1.0 + static_cast<double>(iy) * h;
            // Cheapest first: distance at the first segment start.
            const double d0 =
                (position(g, sigma_state(x, y)) - position(g, inst.segments.front().initial)).norm();
            double dev = d0;
            if (d0 <= inst.eps) {
                dev = d0;
                for (const auto& seg : inst.segments) {
                    State3 cand = flow(g, sigma_state(x, y), seg.t_begin - t0);
                    State3 ref = seg.initial;
                    const double len = seg.t_end - seg.t_begin;
                    const auto m = static_cast<std::size_t>(std::ceil(len / dt));
                    for (std::size_t i = 0; i <= m; ++i) {
                        dev = std::max(dev, (position(g, cand) - position(g, ref)).norm());
                        if (dev > inst.eps) break;
                        if (i < m) {
                            cand = flow(g, cand, dt);
                            ref = flow(g, ref, dt);
                        }
                    }
                    if (dev > inst.eps) break;
                }
                if (dev <= inst.eps) {
                    // Independent re-simulation at half the step before
                    // reporting the witness.
                    double dev2 = 0.0;
                    for (const auto& seg : inst.segments) {
                        State3 cand = flow(g, sigma_state(x, y), seg.t_begin - t0);
                        State3 ref = seg.initial;
                        const double len = seg.t_end - seg.t_begin;
                        const auto m = static_cast<std::size_t>(std::ceil(len / (dt / 2.0)));
                        for (std::size_t i = 0; i <= m; ++i) {
                            dev2 = std::max(dev2,
                                            (position(g, cand) - position(g, ref)).norm());
                            if (i < m) {
                                cand = flow(g, cand, dt / 2.0);
                                ref = flow(g, ref, dt / 2.0);
                            }
                        }
                    }
                    if (dev2 <= inst.eps * 1.01) {
                        res.outcome = ShadowingOutcome::Witness;
                        res.witness = CrossSectionPoint{x, y};
                        res.witness_deviation = dev2;
                        return res;
                    }
                    dev = dev2;
                }
            }
            if (dev < res.best_deviation) {
                res.best_deviation = dev;
                res.best_candidate = CrossSectionPoint{x, y};
            }
        }
    }
    res.outcome = ShadowingOutcome::ExhaustedNoWitness;
    res.grid_lower_bound = res.best_deviation;
    return res;
}

BoxGraph box_graph_lorenz(const GeometricLorenzParams& g, int n_boxes, int samples_per_box) {
    const ReturnMapParams rm = ReturnMapParams::from(g);
    BoxGraph bg;
    bg.n_boxes = n_boxes;
    bg.edges.assign(static_cast<std::size_t>(n_boxes), {});
    bg.visited.assign(static_cast<std::size_t>(n_boxes), 0);
    const double w = 2.0 / n_boxes;
    auto box_of = [&](double x) {
        int b = static_cast<int>(std::floor((x + 1.0) / w));
        return std::clamp(b, 0, n_boxes - 1);
    };
    for (int b = 0; b < n_boxes; ++b) {
        std::vector<int> targets;
        for (int s = 0; s < samples_per_box; ++s) {
            const double x = -1.0 + w * (b + (s + 0.5) / samples_per_box);
            if (x == 0.0) continue;
            targets.push_back(box_of(alpha(rm, x)));
        }
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
        bg.edges[static_cast<std::size_t>(b)] = std::move(targets);
    }
    // Visited boxes from a long generic orbit (deterministic start).
    double x = 0.378462;
    for (int i = 0; i < 1000; ++i) x = alpha(rm, x);
    for (int i = 0; i < 200000; ++i) {
        bg.visited[static_cast<std::size_t>(box_of(x))] = 1;
        x = alpha(rm, x);
    }
    return bg;
}

BoxGraph box_graph_catmap(int n_per_side, int samples_per_box) {
    BoxGraph bg;
    bg.n_boxes = n_per_side * n_per_side;
    bg.edges.assign(static_cast<std::size_t>(bg.n_boxes), {});
    bg.visited.assign(static_cast<std::size_t>(bg.n_boxes), 0);
    const double w = 1.0 / n_per_side;
    auto box_of = [&](double x, double y) {
        const int bx = std::clamp(static_cast<int>(std::floor(x / w)), 0, n_per_side - 1);
        const int by = std::clamp(static_cast<int>(std::floor(y / w)), 0, n_per_side - 1);
        return bx * n_per_side + by;
    };
    const int side_samples = std::max(2, static_cast<int>(std::lround(std::sqrt(samples_per_box))));
    for (int bx = 0; bx < n_per_side; ++bx) {
        for (int by = 0; by < n_per_side; ++by) {
            std::vector<int> targets;
            for (int i = 0; i < side_samples; ++i) {
                for (int j = 0; j < side_samples; ++j) {
                    const double x = (bx + (i + 0.5) / side_samples) * w;
                    const double y = (by + (j + 0.5) / side_samples) * w;
                    double nx = std::fmod(2.0 * x + y, 1.0);
                    double ny = std::fmod(x + y, 1.0);
                    targets.push_back(box_of(nx, ny));
                }
            }
            std::sort(targets.begin(), targets.end());
            targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
            bg.edges[static_cast<std::size_t>(bx * n_per_side + by)] = std::move(targets);
        }
    }
    double x = 0.2371, y = 0.6191;
    for (int i = 0; i < 400000; ++i) {
        bg.visited[static_cast<std::size_t>(box_of(x, y))] = 1;
        const double nx = std::fmod(2.0 * x + y, 1.0);
        const double ny = std::fmod(x + y, 1.0);
        x = nx;
        y = ny;
    }
    return bg;
}

BoxGraph box_graph_rotation(int n_boxes, int num, int den, int samples_per_box) {
    BoxGraph bg;
    bg.n_boxes = n_boxes;
    bg.edges.assign(static_cast<std::size_t>(n_boxes), {});
    bg.visited.assign(static_cast<std::size_t>(n_boxes), 0);
    const double rot = static_cast<double>(num) / den;
    const double w = 1.0 / n_boxes;
    auto box_of = [&](double x) {
        return std::clamp(static_cast<int>(std::floor(x / w)), 0, n_boxes - 1);
    };
    for (int b = 0; b < n_boxes; ++b) {
        std::vector<int> targets;
        for (int s = 0; s < samples_per_box; ++s) {
            const double x = (b + (s + 0.5) / samples_per_box) * w;
            targets.push_back(box_of(std::fmod(x + rot, 1.0)));
        }
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
        bg.edges[static_cast<std::size_t>(b)] = std::move(targets);
    }
    double x = 0.1234;
    for (int i = 0; i < 10000; ++i) {
        bg.visited[static_cast<std::size_t>(box_of(x))] = 1;
        x = std::fmod(x + rot, 1.0);
    }
    return bg;
}

MixingReport test_mixing(const BoxGraph& graph, int n_max) {
    MixingReport rep;
    rep.n_boxes = graph.n_boxes;
    std::vector<int> vis;
    for (int b = 0; b < graph.n_boxes; ++b)
        if (graph.visited[static_cast<std::size_t>(b)]) vis.push_back(b);
    rep.n_visited = static_cast<int>(vis.size());
    if (vis.empty()) throw InsufficientSamplingError("no visited boxes");
    for (int b : vis)
        if (graph.edges[static_cast<std::size_t>(b)].empty())
            throw InsufficientSamplingError("visited box with no outgoing sample");

    // Strong connectivity of the visited subgraph: forward and backward BFS
    // from the first visited box must reach every visited box.
    std::vector<char> in_set(static_cast<std::size_t>(graph.n_boxes), 0);
    for (int b : vis) in_set[static_cast<std::size_t>(b)] = 1;
    std::vector<std::vector<int>> redges(static_cast<std::size_t>(graph.n_boxes));
    for (int b : vis)
        for (int to : graph.edges[static_cast<std::size_t>(b)])
            if (in_set[static_cast<std::size_t>(to)]) redges[static_cast<std::size_t>(to)].push_back(b);

    auto bfs = [&](int start, bool backward) {
        std::vector<int> dist(static_cast<std::size_t>(graph.n_boxes), -1);
        std::vector<int> queue{start};
        dist[static_cast<std::size_t>(start)] = 0;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            const int u = queue[qi];
            const auto& adj = backward ? redges[static_cast<std::size_t>(u)]
                                       : graph.edges[static_cast<std::size_t>(u)];
            for (int v : adj) {
                if (!in_set[static_cast<std::size_t>(v)]) continue;
                if (dist[static_cast<std::size_t>(v)] < 0) {
                    dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
                    queue.push_back(v);
                }
            }
        }
        return dist;
    };
    const auto dist_f = bfs(vis.front(), false);
    const auto dist_b = bfs(vis.front(), true);
    rep.strongly_connected = true;
    for (int b : vis)
        if (dist_f[static_cast<std::size_t>(b)] < 0 || dist_b[static_cast<std::size_t>(b)] < 0)
            rep.strongly_connected = false;

    // Aperiodicity: gcd over edges of (level(u) + 1 - level(v)).
    int gcd = 0;
    if (rep.strongly_connected) {
        for (int u : vis) {
            if (dist_f[static_cast<std::size_t>(u)] < 0 ||
                dist_f[static_cast<std::size_t>(u)] > n_max)
                continue;
            for (int v : graph.edges[static_cast<std::size_t>(u)]) {
                if (!in_set[static_cast<std::size_t>(v)]) continue;
                const int d = dist_f[static_cast<std::size_t>(u)] + 1 - dist_f[static_cast<std::size_t>(v)];
                gcd = std::gcd(gcd, std::abs(d));
            }
        }
    }
    rep.period_gcd = gcd;
    rep.mixing = rep.strongly_connected && gcd == 1;
    return rep;
}

ObstructionOutcome run_obstruction_experiment(const GeometricLorenzParams& g,
                                              const HolonomyChart& chart,
                                              const std::vector<double>& t_sweep, double t1,
                                              double t2, double delta_seed, double grid_h,
                                              int threads,
                                              const std::vector<double>& eps_factor_sweep) {
    ObstructionOutcome out;
    out.t1 = t1;
    out.t2 = t2;
    for (double T : t_sweep) {
        const GapCertificate cert = compute_gap_certificate(g, chart, T, delta_seed, grid_h);
        out.last_certificate = cert;
        ObstructionRow row;
        row.T = T;
        row.n_projected = static_cast<int>(cert.projected_points.size());
        row.clearance = cert.clearance;
        row.d_star = cert.d_star;
        row.eps = cert.eps;
        row.grid_h = grid_h;
        row.certified = cert.valid && cert.eps < cert.eps_critical;

        ObstructionInstance inst;
        inst.t1 = t1;
        inst.T = T;
        inst.t2 = t2;
        inst.eps = cert.eps;
        inst.w = cert.w;
        inst.delta_seed = delta_seed;
        const ShadowingResult res = search_gluing_lorenz(g, inst, grid_h, threads);
        row.witness_found = res.outcome == ShadowingOutcome::Witness;
        row.best_deviation = res.best_deviation;
        row.grid_lower_bound = res.grid_lower_bound;
        row.resolution_limited = res.resolution_limited_regime;
        if (row.witness_found) out.all_exhausted = false;
        out.rows.push_back(row);
    }
    // Sanity probes above the threshold: coarse grid, no certificate claim.
    for (double factor : eps_factor_sweep) {
        const GapCertificate& cert = out.last_certificate;
        ObstructionInstance inst;
        inst.t1 = t1;
        inst.T = cert.t_used;
        inst.t2 = t2;
        inst.eps = factor * cert.d_star;
        inst.w = cert.w;
        inst.delta_seed = delta_seed;
        const double h_loose = 1e-2;
        const ShadowingResult res = search_gluing_lorenz(g, inst, h_loose, threads);
        ObstructionRow row;
        row.T = cert.t_used;
        row.n_projected = static_cast<int>(cert.projected_points.size());
        row.clearance = cert.clearance;
        row.d_star = cert.d_star;
        row.eps = inst.eps;
        row.grid_h = h_loose;
        row.certified = false;
        row.witness_found = res.outcome == ShadowingOutcome::Witness;
        row.best_deviation =
            res.outcome == ShadowingOutcome::Witness ? res.witness_deviation : res.best_deviation;
        row.grid_lower_bound = res.grid_lower_bound;
        row.resolution_limited = res.resolution_limited_regime;
        out.loose_rows.push_back(row);
    }
    return out;
}

json obstruction_json(const ObstructionOutcome& o) {
    auto row_json = [](const ObstructionRow& r) {
        json row;
        row["T"] = r.T;
        row["n_projected"] = r.n_projected;
        row["gap_clearance"] = r.clearance;
        row["d_star"] = r.d_star;
        row["eps"] = r.eps;
        row["grid_h"] = r.grid_h;
        row["outcome"] = r.witness_found ? "Witness" : "ExhaustedNoWitness";
        row["best_deviation"] = r.best_deviation;
        row["grid_lower_bound"] = r.grid_lower_bound;
        row["certified_regime"] = r.certified;
        row["resolution_limited"] = r.resolution_limited;
        return row;
    };
    json j;
    json rows = json::array();
    for (const auto& r : o.rows) rows.push_back(row_json(r));
    j["rows"] = rows;
    json loose = json::array();
    for (const auto& r : o.loose_rows) loose.push_back(row_json(r));
    j["loose_probes"] = loose;
    j["all_exhausted"] = o.all_exhausted;
    j["windows"] = {{"t1", o.t1}, {"t2", o.t2}};
    j["note"] =
        "claims are limited to the stated grid resolution and T sweep; the certified grid "
        "bounds are independent of t1/t2 (the windows only enter witness refinement)";
    return j;
}

std::string obstruction_csv(const ObstructionOutcome& o) {
    std::string s = "T,n_projected,gap_clearance,d_star,eps,grid_h,outcome,best_deviation,loose\n";
    char buf[240];
    auto add = [&](const ObstructionRow& r, int loose) {
        std::snprintf(buf, sizeof(buf), "%.17g,%d,%.17g,%.17g,%.17g,%.17g,%s,%.17g,%d\n", r.T,
                      r.n_projected, r.clearance, r.d_star, r.eps, r.grid_h,
                      r.witness_found ? "Witness" : "ExhaustedNoWitness", r.best_deviation, loose);
        s += buf;
    };
    for (const auto& r : o.rows) add(r, 0);
    for (const auto& r : o.loose_rows) add(r, 1);
    return s;
}

std::string obstruction_table(const ObstructionOutcome& o) {
    std::string s =
        "    T  #proj   clearance      d_star         eps  outcome              best_dev\n";
    char buf[160];
    auto add = [&](const ObstructionRow& r, const char* tag) {
        std::snprintf(buf, sizeof(buf), "%5.0f  %5d  %10.4g  %10.4g  %10.4g  %-19s %9.4g%s\n",
                      r.T, r.n_projected, r.clearance, r.d_star, r.eps,
                      r.witness_found ? "Witness" : "ExhaustedNoWitness", r.best_deviation, tag);
        s += buf;
    };
    for (const auto& r : o.rows) add(r, "");
    for (const auto& r : o.loose_rows) add(r, "  (loose probe)");
    return s;
}

}  // namespace specflow
