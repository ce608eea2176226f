#pragma once

#include <Eigen/Core>

#include "specflow/flow.hpp"
#include "specflow/params.hpp"

namespace specflow {

using Eigen::Matrix3d;

/// Derivative D_s X_t of the time-t flow map at s, as a 3x3 matrix acting on
/// ambient tangent vectors. Exact: diagonal inside the linear block, the
/// affine tube map's linear part inside tubes, with the transition time-shear
/// correction I + (v_post - v_pre) n^T / (n . v_pre) at each region boundary
/// (without it the cocycle law and the flow-direction equivariance fail).
/// For t < 0 the state is flowed backward first (subject to the backward
/// reach of `flow`) and the forward matrix is inverted.
Matrix3d tangent_matrix(const GeometricLorenzParams& params, const State3& s, double t);

/// Transport of a single tangent vector.
Vector3d tangent_flow(const GeometricLorenzParams& params, const State3& s, const Vector3d& v,
                      double t);

/// Derivative of the first-return map to Sigma at q, as the 3x3 time-T map
/// with T the flight time of q.
Matrix3d return_tangent(const GeometricLorenzParams& params, const CrossSectionPoint& q);

}  // namespace specflow
