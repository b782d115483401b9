#pragma once

namespace copulacp {

double normal_cdf(double x);
double normal_quantile(double p);

}  // namespace copulacp
