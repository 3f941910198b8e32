#include "weakiv/design.hpp"

#include <cmath>
#include <numbers>

#include "weakiv/errors.hpp"

namespace weakiv {

double gaussian_abs_moment(double p) {
  if (p < 0.0) throw DomainError("gaussian_abs_moment requires p >= 0");
  return std::pow(2.0, 0.5 * p) * std::tgamma(0.5 * (p + 1.0)) / std::sqrt(std::numbers::pi);
}

double design_sigma_v(const Design& design, int k_z) {
  if (design.alpha < 0.0) throw ConfigError("design alpha must be nonnegative");
  switch (design.kind) {
    case Design::Kind::Design1:
    case Design::Kind::Power:
      // E[g^2] = E|z_1|^{2a}
      return gaussian_abs_moment(2.0 * design.alpha);
    case Design::Kind::Design2:
      // E[g^2] = E[exp(a sum z_j)] = exp(k_z a^2 / 2)
      return std::exp(0.5 * static_cast<double>(k_z) * design.alpha * design.alpha);
  }
  throw ConfigError("unknown design kind");
}

}  // namespace weakiv
