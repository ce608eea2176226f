#pragma once

#include <Eigen/Core>
#include <vector>

#include "specflow/flow.hpp"
#include "specflow/io.hpp"
#include "specflow/params.hpp"
#include "specflow/return_map.hpp"
#include "specflow/tangent.hpp"

namespace specflow {

/// Sequence of Sigma crossings of one orbit, with flight times.
struct SectionOrbit {
    std::vector<CrossSectionPoint> points;
    std::vector<double> flight_times;  // flight_times[i]: from points[i] to points[i+1]
};

/// Iterate the first return n times from q (throws DegenerateOrbitError if
/// the orbit hits Gamma).
SectionOrbit section_orbit(const GeometricLorenzParams& params, const CrossSectionPoint& q, int n);

enum class ConeFlavor { Unstable, Stable, Center };

struct ConeParams {
    double kappa = 1.0;
    ConeFlavor flavor = ConeFlavor::Unstable;
};

struct SplittingSample {
    CrossSectionPoint base;
    Vector3d e_s;                          // estimated stable direction (unit)
    Eigen::Matrix<double, 3, 2> e_c_frame;  // orthonormal basis of the center plane
    double contraction;                    // ||DX_1 | e_s|| at this sample
    double domination;                     // ||DX_1 | e_s|| * ||DX_{-1} | E^c|| at this sample
};

struct SplittingEstimate {
    std::vector<SplittingSample> samples;
    double lambda_prime = 0.0;      // max of contraction and domination over samples
    double c_est = 0.0;             // finite-orbit constant for the contraction bound
    double worst_domination = 0.0;  // max domination product
    double min_angle = 0.0;         // min angle (rad) between e_s and the center plane
    double max_es_error = 0.0;      // max deviation of e_s from the model-exact vertical
};

/// Estimate the stable/center splitting along an orbit of >= 100 returns:
/// stable direction by backward power iteration of the per-return tangent
/// matrices, center plane by forward iteration of a 2-frame. The contraction
/// rate is measured over time-1 windows at each crossing; the domination
/// product is measured against the two invariant directions of the center
/// plane at their natural granularity (flow direction over the same time-1
/// window, unstable section direction over one return), which is the
/// adapted-metric version of the inequality - raw pointwise products over
/// the whole plane only satisfy the C lambda^t bound asymptotically.
SplittingEstimate estimate_splitting(const GeometricLorenzParams& params,
                                     const SectionOrbit& orbit);

struct ConeCheck {
    bool invariant = false;
    double margin = 0.0;  // worst kappa_image / kappa over the orbit
};

/// Cone invariance for section-tangent cones, checked per return along the
/// orbit (backward per return for stable cones). 100 directions per sample,
/// boundary rays included. kappa = infinity reports false: the whole tangent
/// plane is never strictly invariant (the stable axis is fixed).
ConeCheck verify_cone_invariance(const GeometricLorenzParams& params, const ConeParams& cone,
                                 const SectionOrbit& orbit, int returns_per_step = 1);

struct SectionalExpansionReport {
    std::vector<double> times;
    std::vector<double> log_det;  // log |det(DX_t restricted to the center plane)|
    double rate = 0.0;            // least-squares slope
    double residual = 0.0;        // RMS residual relative to total growth
};

/// Area growth of the derivative flow on the center plane along the orbit of
/// q, sampled once per unit time up to t_max, with a least-squares fit of the
/// exponential rate.
SectionalExpansionReport sectional_expansion_check(const GeometricLorenzParams& params,
                                                   const CrossSectionPoint& q, double t_max);

/// True when every tangent vector of the polyline (x_i, y_i) on Sigma lies in
/// the center cone {|v_y| <= kappa * |v_x|} at 100 sample points.
bool tangent_curve_in_center_cone(const std::vector<double>& xs, const std::vector<double>& ys,
                                  double kappa);

/// Full verification report (JSON) over an orbit with `returns` returns from
/// a generic start point.
json hyperbolicity_report(const GeometricLorenzParams& params, int returns,
                          const CrossSectionPoint& start);

}  // namespace specflow
