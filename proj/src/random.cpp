#include "imdpv/random.hpp"

#include "imdpv/error.hpp"

#include <cmath>

namespace imdpv {

double Rng::gamma(double shape) {
    if (!(shape > 0) || !std::isfinite(shape))
        throw InputError("gamma shape must be positive and finite");
    return boost::random::gamma_distribution<double>(shape)(engine_);
}

} // namespace imdpv
