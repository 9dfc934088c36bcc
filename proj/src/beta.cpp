#include "imdpv/beta.hpp"

#include "imdpv/error.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <cmath>

namespace imdpv {

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0) || !(b > 0) || !std::isfinite(a) || !std::isfinite(b))
        throw InputError("incomplete Beta parameters must be positive and finite");
    if (!(x >= 0.0 && x <= 1.0))
        throw InputError("incomplete Beta argument outside [0, 1]");
    return boost::math::ibeta(a, b, x);
}

double inverse_regularized_incomplete_beta(double p, double a, double b) {
    if (!(p >= 0.0 && p <= 1.0))
        throw InputError("Beta quantile level outside [0, 1]");
    if (!(a > 0) || !(b > 0) || !std::isfinite(a) || !std::isfinite(b))
        throw InputError("Beta quantile parameters must be positive");
    return boost::math::ibeta_inv(a, b, p);
}

} // namespace imdpv
