#pragma once

#include <cmath>

#include "hilfer/error.hpp"

namespace hilfer {

/// Gamma function on x > 0.
inline double gamma_fn(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw Error(ErrorCode::OutOfDomain, "gamma_fn requires a finite x > 0");
    }
    return std::tgamma(x);
}

}  // namespace hilfer
