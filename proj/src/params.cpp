#include "specflow/params.hpp"

#include <cmath>
#include <sstream>

#include "specflow/errors.hpp"

namespace specflow {

namespace {

double parse_double(const std::map<std::string, std::string>& kv, const std::string& key,
                    double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        std::size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw InvalidParamsError("config key '" + key + "' is not a number: " + it->second);
    }
}

[[noreturn]] void fail(const std::string& msg) { throw InvalidParamsError(msg); }

}  // namespace

void GeometricLorenzParams::validate() const {
    if (!(lambda3 > 0.0 && lambda3 < lambda1 && lambda1 < lambda2))
        fail("need 0 < lambda3 < lambda1 < lambda2");
    if (!(k > 0.0)) fail("need k > 0");
    const double aa = a();
    if (!(aa > 0.0 && aa < 1.0)) fail("need a = lambda3/lambda1 in (0,1)");
    if (!(k * aa > std::sqrt(2.0))) fail("need k*a > sqrt(2) so that alpha' > sqrt(2)");
    if (!(k < 2.0)) fail("need k < 2 so that alpha(1) = k - 1 < 1");
    if (!(b > 0.0 && b < 1.0)) fail("need b in (0,1)");
    if (!(std::abs(c) + b <= 1.0)) fail("need |c| + b <= 1 so beta maps into [-1,1]");
    // Tube landing regions on Sigma are y in [c-b, c+b] and [-c-b, -c+b];
    // they must be disjoint or the glued flow would not be injective.
    if (!(std::abs(c) > b)) fail("need |c| > b so the two tube landing strips are disjoint");
    if (!(tau_tube > 0.0)) fail("need tau_tube > 0");
}

GeometricLorenzParams GeometricLorenzParams::from_config(
    const std::map<std::string, std::string>& kv) {
    GeometricLorenzParams p;
    p.lambda1 = parse_double(kv, "lambda1", p.lambda1);
    p.lambda2 = parse_double(kv, "lambda2", p.lambda2);
    p.lambda3 = parse_double(kv, "lambda3", p.lambda3);
    p.k = parse_double(kv, "k", p.k);
    p.b = parse_double(kv, "b", p.b);
    p.c = parse_double(kv, "c", p.c);
    p.tau_tube = parse_double(kv, "tau_tube", p.tau_tube);
    p.validate();
    return p;
}

void ReturnMapParams::validate() const {
    GeometricLorenzParams p;
    p.k = k;
    p.b = b;
    p.c = c;
    // Reconstruct rates compatible with (a, exponent_y); only the ratios matter.
    p.lambda1 = 1.0;
    p.lambda2 = exponent_y;
    p.lambda3 = a;
    p.validate();
}

}  // namespace specflow
