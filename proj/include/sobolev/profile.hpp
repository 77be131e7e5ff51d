// profile.hpp -- non-increasing functions of the volume variable.

#ifndef SOBOLEV_PROFILE_HPP
#define SOBOLEV_PROFILE_HPP

#include "sobolev/core.hpp"

#include <Eigen/Dense>

#include <string>

namespace sobolev {

enum class Interpolation {
  /// values(k) holds on [s(k), s(k+1)), the last cell ending at total_volume.
  Step,
  /// Samples at s(k) with s(0) = 0 and s(last) = total_volume, linear between.
  Linear
};

/// A non-increasing, nonnegative function on [0, total_volume]: u*(s) or phi*(s).
struct VolumeProfile {
  Eigen::VectorXd s;
  Eigen::VectorXd values;
  double total_volume = 0.0;
  Interpolation kind = Interpolation::Linear;

  Eigen::Index size() const { return values.size(); }

  /// Evaluation with the profile's own semantics; zero beyond total_volume.
  double operator()(double at) const;
};

/// Throws unless the profile is well formed, nonnegative and non-increasing.
void check_volume_profile(const VolumeProfile &profile,
                          const std::string &who = "volume profile");

/// Integral of profile^power over [0, upto] (exact for steps, trapezoid for
/// linear samples). Zero values contribute nothing, even for power 0.
double power_integral(const VolumeProfile &profile, double power,
                      double upto);

inline double power_integral(const VolumeProfile &profile, double power) {
  return power_integral(profile, power, profile.total_volume);
}

/// Running integral of profile^power evaluated at each point of `at`.
Eigen::VectorXd cumulative_power_integral(const VolumeProfile &profile,
                                          double power,
                                          const Eigen::VectorXd &at);

/// Breakpoints of the profile, including 0 and total_volume.
Eigen::VectorXd breakpoints(const VolumeProfile &profile);

/// Step profile with cells of equal width `cell`, values in the given order.
VolumeProfile step_profile(const Eigen::VectorXd &values, double cell);

} // namespace sobolev

#endif // SOBOLEV_PROFILE_HPP
