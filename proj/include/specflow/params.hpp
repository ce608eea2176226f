#pragma once

#include <cmath>
#include <map>
#include <string>

namespace specflow {

/// Parameters of the geometric Lorenz flow: the saddle rates of the linear
/// block, the coefficients of the one-dimensional factor alpha and the
/// contracting factor beta of the first-return map, and the constant flight
/// time through each return tube.
///
/// The linear block is [-1,1] x [-1,1] x (0,1] with vector field
/// (lambda1*x, -lambda2*y, -lambda3*z); the induced first return on the top
/// face Sigma = {z = 1} is L(x,y) = (alpha(x), beta(x,y)) with
///   alpha(x) = sign(x) * (k*|x|^a - 1),        a = lambda3/lambda1,
///   beta(x,y) = sign(x)*c + b*y*|x|^(lambda2/lambda1).
struct GeometricLorenzParams {
    double lambda1 = 1.0;
    double lambda2 = 2.0;
    double lambda3 = 0.8;
    double k = 1.9;
    double b = 0.3;
    double c = 0.6;
    double tau_tube = 1.0;

    /// Exponent of alpha, tied to the saddle rates.
    double a() const { return lambda3 / lambda1; }
    /// Exponent of the |x| factor in beta.
    double y_exponent() const { return lambda2 / lambda1; }

    /// Throws InvalidParamsError unless every model invariant holds:
    ///   0 < lambda3 < lambda1 < lambda2,
    ///   k * a > sqrt(2)   (alpha' > sqrt(2) on (0,1]),
    ///   k < 2             (alpha(1) = k - 1 < 1),
    ///   |c| + b <= 1      (beta image stays in [-1,1]),
    ///   c > b             (tube landing regions disjoint, flow injective),
    ///   tau_tube > 0.
    void validate() const;

    /// Construct from key=value entries (missing keys keep defaults).
    static GeometricLorenzParams from_config(const std::map<std::string, std::string>& kv);
};

/// Parameters of the first-return map alone.
struct ReturnMapParams {
    double k = 1.9;
    double a = 0.8;
    double b = 0.3;
    double c = 0.6;
    double exponent_y = 2.0;

    void validate() const;
    static ReturnMapParams from(const GeometricLorenzParams& p) {
        return ReturnMapParams{p.k, p.a(), p.b, p.c, p.y_exponent()};
    }
};

}  // namespace specflow
