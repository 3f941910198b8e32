#include "weakiv/distributions.hpp"

#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_chi_squared.hpp>

#include "weakiv/errors.hpp"

namespace weakiv {

double chi2_sf(double x, int df) {
  if (df <= 0) throw DomainError("chi2_sf requires df >= 1");
  if (!std::isfinite(x)) throw DomainError("chi2_sf requires finite x");
  if (x < 0.0) throw DomainError("chi2_sf requires x >= 0");
  boost::math::chi_squared dist(static_cast<double>(df));
  return boost::math::cdf(boost::math::complement(dist, x));
}

double chi2_quantile(double p, int df) {
  if (df <= 0) throw DomainError("chi2_quantile requires df >= 1");
  if (p < 0.0 || p > 1.0) throw DomainError("chi2_quantile requires p in [0,1]");
  boost::math::chi_squared dist(static_cast<double>(df));
  return boost::math::quantile(dist, p);
}

double noncentral_chi2_quantile(double p, double df, double ncp) {
  if (df <= 0.0) throw DomainError("noncentral_chi2_quantile requires df > 0");
  if (ncp < 0.0) throw DomainError("noncentral_chi2_quantile requires ncp >= 0");
  if (p <= 0.0 || p >= 1.0) throw DomainError("noncentral_chi2_quantile requires p in (0,1)");
  if (ncp == 0.0) {
    boost::math::chi_squared dist(df);
    return boost::math::quantile(dist, p);
  }
  boost::math::non_central_chi_squared dist(df, ncp);
  return boost::math::quantile(dist, p);
}

}  // namespace weakiv
