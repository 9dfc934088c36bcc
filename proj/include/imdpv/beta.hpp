#pragma once

namespace imdpv {

/// Regularized incomplete Beta function I_x(a, b), a, b > 0, x in [0, 1].
double regularized_incomplete_beta(double x, double a, double b);

/// Inverse of I_x(a, b) in x: the p-quantile of Beta(a, b).
double inverse_regularized_incomplete_beta(double p, double a, double b);

} // namespace imdpv
