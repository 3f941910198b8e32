#pragma once

namespace weakiv {

// Upper-tail chi-square probability P[X > x] for X ~ chi2(df), computed via
// the regularized incomplete gamma function.
double chi2_sf(double x, int df);

// p-quantile of chi2(df).
double chi2_quantile(double p, int df);

// p-quantile of the noncentral chi-square with (possibly non-integer)
// degrees of freedom df and noncentrality ncp.
double noncentral_chi2_quantile(double p, double df, double ncp);

}  // namespace weakiv
