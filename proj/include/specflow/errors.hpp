#pragma once

#include <stdexcept>
#include <string>

namespace specflow {

/// Base class for all structured errors raised by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Parameter set violates a model invariant (CLI exit code 3).
struct InvalidParamsError : Error {
    using Error::Error;
};

/// Operation evaluated on the cusp line Gamma = {x = 0} where the return map
/// is undefined.
struct DomainGammaError : Error {
    DomainGammaError() : Error("point lies on Gamma (x = 0): no first return") {}
};

/// time_to_exit requested for a point on the local stable manifold of the
/// singularity (x = 0): the orbit never leaves the linear block.
struct OnStableManifoldError : Error {
    OnStableManifoldError() : Error("x = 0: orbit falls to the singularity, never exits") {}
};

/// Backward flow would have to reverse through a return tube beyond the
/// model's backward reach (or the point has no backward history at all).
struct BackwardThroughTubeError : Error {
    using Error::Error;
};

/// Splitting estimation hit the cusp line.
struct DegenerateOrbitError : Error {
    using Error::Error;
};

/// Holonomy chart product structure failed the injectivity check.
struct MuTooLargeError : Error {
    using Error::Error;
};

/// Gap search found the projected points h-dense in the unstable coordinate.
struct NoGapError : Error {
    using Error::Error;
};

/// Box graph has a sampled box with no outgoing transition.
struct InsufficientSamplingError : Error {
    using Error::Error;
};

}  // namespace specflow
