#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "specflow/flow.hpp"
#include "specflow/params.hpp"

namespace specflow {

using Eigen::Matrix2d;

/// One-dimensional factor of the first-return map: sign(x)(k|x|^a - 1).
/// Throws DomainGammaError at x = 0.
double alpha(const ReturnMapParams& params, double x);

/// Derivative k*a*|x|^(a-1); exceeds sqrt(2) on (0,1] and diverges at 0.
double alpha_prime(const ReturnMapParams& params, double x);

/// Contracting factor: sign(x)*c + b*y*|x|^exponent_y.
double beta(const ReturnMapParams& params, double x, double y);

/// d(beta)/dy = b*|x|^exponent_y.
double beta_dy(const ReturnMapParams& params, double x);

/// d(beta)/dx.
double beta_dx(const ReturnMapParams& params, double x, double y);

/// First-return map L(x, y) = (alpha(x), beta(x, y)).
CrossSectionPoint apply_L(const ReturnMapParams& params, const CrossSectionPoint& p);

/// Derivative of L at (x, y): lower-triangular [[alpha', 0], [beta_x, beta_y]].
Matrix2d DL(const ReturnMapParams& params, const CrossSectionPoint& p);

/// Sign word of the first n iterates (the sign of x before each return).
struct Itinerary {
    std::vector<int> word;  // entries +1 / -1
    std::string str() const;
};

/// n-th iterate of L plus the itinerary along the way.
CrossSectionPoint iterate_L(const ReturnMapParams& params, CrossSectionPoint p, int n,
                            Itinerary* itinerary = nullptr);

/// Branch inverses of alpha. alpha restricted to (0,1] is increasing onto
/// (-1, k-1]; restricted to [-1,0) it is increasing onto [1-k, 1).
std::optional<double> alpha_inverse(const ReturnMapParams& params, double v, int branch_sign);

struct PeriodicPoint {
    double x_star = 0.0;
    double y_star = 0.0;
    int period_n = 0;
    double flow_period = 0.0;
    Itinerary itinerary;
};

/// All period-n points of the return map, found by bisection on the monotone
/// branches of alpha^n (branches indexed by sign itineraries), each refined
/// to 1e-12 in x; y* is the fixed point of the affine beta-composition along
/// the cycle. Results sorted by x*.
std::vector<PeriodicPoint> find_periodic(const GeometricLorenzParams& params, int n);

/// Unstable and stable multipliers of DL^n along the cycle of `p`.
struct CycleMultipliers {
    double unstable = 0.0;  // product of alpha'(x_i)
    double stable = 0.0;    // product of b|x_i|^e
};
CycleMultipliers cycle_multipliers(const ReturnMapParams& params, const PeriodicPoint& p);

/// Preimage set of x under n pulls of alpha (both branches, all chains that
/// stay in [-1,1] \ {0}).
std::vector<double> alpha_preimages(const ReturnMapParams& params, double x, int n);

/// Smallest N <= n_max such that the union of alpha-preimages of x up to
/// depth N is delta-dense in [-1, 1]; returns nullopt if none.
std::optional<int> preimage_density_depth(const ReturnMapParams& params, double x, double delta,
                                          int n_max);

void write_periodic_csv(const std::vector<PeriodicPoint>& orbits, const std::string& path);

}  // namespace specflow
