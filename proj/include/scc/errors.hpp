#pragma once

#include <stdexcept>

namespace scc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid model parameters or experiment configuration.
struct ConfigError : Error {
    using Error::Error;
};

// A rapidity was driven into a pole of the Richardson equations (+1 or -1),
// or two rapidities collided within resolution.
struct PoleError : Error {
    using Error::Error;
};

// A nonlinear solve failed to converge.
struct SolverError : Error {
    using Error::Error;
};

// The fringe power spectrum has no sufficiently dominant peak, so no single
// oscillation frequency can be read off.
struct NoDominantPeakError : Error {
    using Error::Error;
};

}  // namespace scc
