#pragma once

namespace weakiv {

// Error-generating designs for the Monte Carlo engine. All designs share the
// structural model y = beta0 + beta1 x + u, x = pi0 + sum_j pi z_j + v with
// beta0 = beta1 = pi0 = 0, i.i.d. standard normal instruments and
// (u*, v*) jointly standard normal with correlation rho. They differ in the
// conditional scale g(z) applied to (u*, v*):
//
//   Design1(a):   g = |z_1|^a                  (single-instrument scale)
//   Design2(a):   g = sqrt(exp(a sum_j z_j))   (all-instrument exponential)
//   Power(a, w):  Design1 scale plus a z_1 w shift in u, so the instrument
//                 invalidity parameter w indexes power; w = 0 is the null.
struct Design {
  enum class Kind { Design1, Design2, Power };

  Kind kind = Kind::Design1;
  double alpha = 0.0;  // heteroskedasticity strength, >= 0
  double omega = 0.0;  // Power design shift; ignored otherwise

  static Design design1(double alpha) { return {Kind::Design1, alpha, 0.0}; }
  static Design design2(double alpha) { return {Kind::Design2, alpha, 0.0}; }
  static Design power(double alpha, double omega) { return {Kind::Power, alpha, omega}; }
};

// E|Z|^p for standard normal Z: 2^{p/2} Gamma((p+1)/2) / sqrt(pi).
double gaussian_abs_moment(double p);

// Unconditional first-stage error variance E[v_i^2] under the design.
double design_sigma_v(const Design& design, int k_z);

}  // namespace weakiv
