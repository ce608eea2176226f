#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "specflow/flow.hpp"
#include "specflow/io.hpp"
#include "specflow/params.hpp"
#include "specflow/return_map.hpp"

namespace specflow {

/// A local stable leaf on Sigma: the vertical segment {x = x0} clipped to the
/// section, of half length mu around y_center.
struct StableLeaf {
    double x0 = 0.0;
    double y_center = 0.0;
    double mu = 0.0;
    double y_lo = 0.0;
    double y_hi = 0.0;
};

StableLeaf local_stable_leaf(const CrossSectionPoint& p, double mu);

/// One step of the stable-foliation graph transform at x: the slope (dx/dy)
/// of the leaf through (x, y) whose image leaf has slope `slope_at_image`.
/// Vertical leaves (slope 0) are exactly invariant; any slope field
/// contracts toward 0 under repeated pullback, which validates taking the
/// stable foliation model-exact.
double stable_leaf_slope_pullback(const GeometricLorenzParams& params, const CrossSectionPoint& z,
                                  double slope_at_image);

/// Flowed unstable separatrix of the singularity, seeded at (side*delta, 0, 0)
/// on the unstable axis (the model is exactly linear near the origin, so the
/// seed lies on the separatrix to rounding error).
struct SeparatrixSegment {
    int side = +1;
    double t_max = 0.0;
    double delta_seed = 1e-8;
    std::vector<TrajectorySample> points;
    std::vector<SigmaCrossing> crossings;
};

SeparatrixSegment unstable_separatrix(const GeometricLorenzParams& params, int side, double t_max,
                                      double delta_seed = 1e-8, double dt = 0.05);

/// Crossing list only (fast path: first landing closed form, then iterated
/// returns with accumulated flight times).
std::vector<SigmaCrossing> separatrix_crossings(const GeometricLorenzParams& params, int side,
                                                double t_max, double delta_seed = 1e-8);

/// The local unstable curve of the periodic point on Sigma, represented as a
/// graph y = Y(x) on a uniform x grid and computed by the graph transform of
/// the return map (contraction rate b^2 |x|^(2 e_y) per pass).
struct UnstableCurve {
    double x_p = 0.0;
    double y_p = 0.0;
    std::vector<double> xs;
    std::vector<double> ys;
    double y_at(double x) const;
    double slope_at(double x) const;
};

UnstableCurve build_unstable_curve(const GeometricLorenzParams& params, const PeriodicPoint& p,
                                   double half_width);

struct ChartPoint {
    double u = 0.0;  // strong-unstable coordinate (x offset from x_p on Sigma)
    double s = 0.0;  // signed arclength along the stable leaf
    double t = 0.0;  // flow-time offset from the section, |t| <= mu
};

/// Product chart A(D0) ~ D0 x [-mu, mu] around the periodic point: D0 is the
/// unstable curve thickened by flow time |t| <= mu, and each D0 point carries
/// its stable leaf of half length mu. All maps are closed-form; negative
/// times are represented inside the incoming tube via the curve's return-map
/// preimage, so no backward flow is ever evaluated.
struct HolonomyChart {
    GeometricLorenzParams params;
    PeriodicPoint periodic;
    UnstableCurve curve;
    double mu = 0.0;
    double mu_u = 0.0;
    double l_const = 0.0;    // Lipschitz constant fed to the critical epsilon
    double kappa_min = 0.0;  // min speed along the periodic orbit
    int pre_side = 0;        // sign of the curve's return-map preimage branch

    State3 state_at(const ChartPoint& cp) const;
    Vector3d position_at(const ChartPoint& cp) const;
    /// Chart coordinates of a hybrid state, when it lies inside A(D0).
    std::optional<ChartPoint> locate(const State3& s) const;
    /// Holonomy projection onto D0 (collapses the stable leaf coordinate).
    ChartPoint pi_s(const ChartPoint& cp) const { return {cp.u, 0.0, cp.t}; }
    /// Orbit projection onto the strong-unstable coordinate.
    double pi(const ChartPoint& cp) const { return cp.u; }
};

/// Builds the chart and validates the product structure (throws MuTooLarge
/// when 4*mu >= flow period, the leaf window leaves the section, the tube
/// leaf parametrization leaves the face, or the round-trip injectivity probe
/// fails).
HolonomyChart build_holonomy_chart(const GeometricLorenzParams& params, const PeriodicPoint& p,
                                   double mu, double mu_u);

/// Round-trip injectivity check of the chart product structure on an
/// n x n (u, s) grid for t in {-mu/2, 0, mu/2}; returns the max round-trip
/// coordinate error.
double chart_injectivity_error(const HolonomyChart& chart, int n);

/// Max commutation error |pi_s(X_dt(P)) - X_dt(pi_s(P))| over a probe grid,
/// dt in (0, mu].
double holonomy_commutation_error(const HolonomyChart& chart, int n_probe);

/// Measured Lipschitz distortion of the holonomy between nearby leaves.
double holonomy_lipschitz(const HolonomyChart& chart, int n_probe);

struct ProjectedArc {
    double u = 0.0;         // collapsed strong-unstable coordinate
    double diameter = 0.0;  // spread of the projection across the arc samples
    double t_cross = 0.0;   // separatrix clock of the crossing
    int side = +1;
    double x = 0.0, y = 0.0;  // the Sigma crossing itself
};

struct ProjectedSet {
    std::vector<ProjectedArc> arcs;
    std::vector<double> points;  // sorted u values
    double t_used = 0.0;
};

/// Collapse every arc of the time <= T separatrix inside A(D0) through
/// pi o pi_s. Each orbit arc collapses to a single strong-unstable
/// coordinate; the per-arc diameter is measured across samples of the arc on
/// both sides of the section. Empty result is legitimate (the separatrix has
/// not entered the chart by time T).
ProjectedSet project_separatrix(const HolonomyChart& chart, const SeparatrixSegment& sep_plus,
                                const SeparatrixSegment& sep_minus, double T);

struct GapInterval {
    double lo = 0.0;
    double hi = 0.0;
    double clearance = 0.0;
};

/// Largest open subinterval of [-mu_u, mu_u] avoiding the projected points
/// (ties toward 0), shrunk to its middle half so the clearance is strictly
/// positive. Throws NoGapError when the points are h_dense-dense.
GapInterval find_gap_interval(const std::vector<double>& points, double mu_u,
                              double h_dense = 1e-4);

struct GapCertificate {
    std::vector<double> projected_points;
    double gap_lo = 0.0;
    double gap_hi = 0.0;
    double clearance = 0.0;
    double t_used = 0.0;
    double d_star = 0.0;
    double d_star_refined = 0.0;  // recomputed at h/2
    double d_star_stability = 0.0;
    double eps = 0.0;           // working epsilon, below the critical one
    double eps_critical = 0.0;  // d_star / (2 L)
    double l_const = 0.0;
    double grid_h = 0.0;
    double horizon = 0.0;  // separatrix clock covered by the epsilon strip
    double strip_slack = 1.1;
    int n_crossings_horizon = 0;
    CrossSectionPoint w;  // strong-stable point over the gap
    int w_depth = 0;
    double mu = 0.0, mu_u = 0.0, x_p = 0.0;
    bool valid = false;
    double max_arc_diameter = 0.0;
};

/// Certified minimum Sigma distance between the separatrix crossings (clock
/// <= horizon) and the stable strip over the gap, evaluated on a grid of
/// resolution h in fixed order.
double strip_min_distance(const HolonomyChart& chart, const std::vector<SigmaCrossing>& crossings,
                          const GapInterval& gap, double h);

/// Point of the strong stable set of the periodic point lying over the gap:
/// a preimage of x_star under the one-dimensional factor, found at minimal
/// depth (ties toward the gap center), paired with the curve height.
struct WOverGap {
    CrossSectionPoint w;
    int depth = 0;
};
std::optional<WOverGap> find_w_over_gap(const GeometricLorenzParams& params,
                                        const HolonomyChart& chart, const GapInterval& gap,
                                        int max_depth = 40);

/// Full pipeline for one T: project, select the gap, derive epsilon from
/// d_star and L, recompute d_star on the epsilon-consistent horizon, and run
/// the grid-refinement stability study.
GapCertificate compute_gap_certificate(const GeometricLorenzParams& params,
                                       const HolonomyChart& chart, double T, double delta_seed,
                                       double grid_h);

json gap_certificate_json(const GapCertificate& cert);
json gap_figure_data(const GeometricLorenzParams& params, const HolonomyChart& chart,
                     const GapCertificate& cert, const SeparatrixSegment& sep_plus,
                     const SeparatrixSegment& sep_minus);

struct BowenStableReport {
    bool all_within = false;
    double measured_const = 0.0;
    int n_tracked = 0;
    double worst_distance = 0.0;
};

/// Empirical check that eps0-tracked points lie in the stable set of the
/// periodic orbit: samples points near the periodic point that track the
/// orbit for t_grid returns and measures their section distance to the leaf
/// through the periodic point, relative to their own tracking deviation.
BowenStableReport bowen_ball_in_stable(const GeometricLorenzParams& params,
                                       const PeriodicPoint& p, double eps0, int t_grid_returns,
                                       std::uint64_t seed, int n_samples = 1000);

/// Returns after which a point offset by dx in x from the periodic point
/// stops eps0-tracking the periodic orbit (uniform expansion makes this
/// O(log(eps0/dx)) returns).
int tracking_escape_returns(const GeometricLorenzParams& params, const PeriodicPoint& p,
                            double dx, double eps0, int max_returns = 100);

/// True when the tangent of the computed local unstable curve of the
/// periodic point stays inside the center cone |v_y| <= kappa |v_x| at 100
/// sample points.
bool check_tangency_unstable_in_center(const GeometricLorenzParams& params,
                                       const PeriodicPoint& p, double kappa = 0.5);

}  // namespace specflow
