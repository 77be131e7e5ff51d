#include "sobolev/profile.hpp"

#include <algorithm>
#include <cmath>

namespace sobolev {

namespace {

// Index of the last breakpoint <= at.
Eigen::Index locate(const Eigen::VectorXd &s, double at) {
  const double *begin = s.data();
  const double *end = s.data() + s.size();
  const double *it = std::upper_bound(begin, end, at);
  return std::max<Eigen::Index>(0, (it - begin) - 1);
}

// Prefix integrals of profile^power at each breakpoint of the profile.
Eigen::VectorXd prefix_integrals(const VolumeProfile &profile, double power) {
  const Eigen::VectorXd knots = breakpoints(profile);
  const Eigen::Index m = knots.size();
  Eigen::VectorXd out(m);
  out(0) = 0;
  double carry = 0;
  for (Eigen::Index k = 1; k < m; ++k) {
    const double width = knots(k) - knots(k - 1);
    double piece;
    if (profile.kind == Interpolation::Step) {
      piece = width * positive_power(profile.values(k - 1), power);
    } else {
      piece = 0.5 * width *
              (positive_power(profile.values(k - 1), power) +
               positive_power(profile.values(k), power));
    }
    // Kahan-style carry keeps long step sums exact to rounding.
    const double y = piece - carry;
    const double t = out(k - 1) + y;
    carry = (t - out(k - 1)) - y;
    out(k) = t;
  }
  return out;
}

double partial_piece(const VolumeProfile &profile, double power,
                     const Eigen::VectorXd &knots, Eigen::Index k, double at) {
  const double width = at - knots(k);
  if (width <= 0 || k + 1 >= knots.size())
    return 0;
  if (profile.kind == Interpolation::Step)
    return width * positive_power(profile.values(k), power);
  const double v = profile(at);
  return 0.5 * width *
         (positive_power(profile.values(k), power) + positive_power(v, power));
}

} // namespace

Eigen::VectorXd breakpoints(const VolumeProfile &profile) {
  if (profile.kind == Interpolation::Linear)
    return profile.s;
  Eigen::VectorXd knots(profile.s.size() + 1);
  knots.head(profile.s.size()) = profile.s;
  knots(profile.s.size()) = profile.total_volume;
  return knots;
}

double VolumeProfile::operator()(double at) const {
  if (values.size() == 0 || at > total_volume || at < 0)
    return 0.0;
  const Eigen::Index k = locate(s, at);
  if (kind == Interpolation::Step)
    return values(k);
  if (k + 1 >= s.size())
    return values(s.size() - 1);
  const double t = (at - s(k)) / (s(k + 1) - s(k));
  return (1 - t) * values(k) + t * values(k + 1);
}

void check_volume_profile(const VolumeProfile &profile,
                          const std::string &who) {
  const Eigen::Index m = profile.values.size();
  if (m == 0 || profile.s.size() != m)
    throw usage_error(who + ": sample arrays are empty or mismatched");
  if (!profile.values.allFinite() || !profile.s.allFinite())
    throw usage_error(who + ": non-finite samples");
  if (profile.s(0) != 0)
    throw usage_error(who + ": grid must start at s = 0");
  for (Eigen::Index k = 1; k < m; ++k)
    if (!(profile.s(k) > profile.s(k - 1)))
      throw usage_error(who + ": grid must be strictly increasing");
  if (profile.kind == Interpolation::Linear) {
    if (m < 2 || profile.s(m - 1) != profile.total_volume)
      throw usage_error(who + ": linear grid must end at total_volume");
  } else if (!(profile.total_volume > profile.s(m - 1))) {
    throw usage_error(who + ": last step must have positive width");
  }
  if ((profile.values.array() < 0).any())
    throw usage_error(who + ": negative values");
  for (Eigen::Index k = 1; k < m; ++k)
    if (profile.values(k) > profile.values(k - 1))
      throw usage_error(who + ": values must be non-increasing (increase at "
                              "sample " +
                        std::to_string(k) + ")");
}

double power_integral(const VolumeProfile &profile, double power,
                      double upto) {
  const Eigen::VectorXd at = Eigen::VectorXd::Constant(1, upto);
  return cumulative_power_integral(profile, power, at)(0);
}

Eigen::VectorXd cumulative_power_integral(const VolumeProfile &profile,
                                          double power,
                                          const Eigen::VectorXd &at) {
  const Eigen::VectorXd knots = breakpoints(profile);
  const Eigen::VectorXd prefix = prefix_integrals(profile, power);
  Eigen::VectorXd out(at.size());
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    const double x = std::clamp(at(i), 0.0, profile.total_volume);
    const Eigen::Index k = locate(knots, x);
    out(i) = prefix(k) + partial_piece(profile, power, knots, k, x);
  }
  return out;
}

VolumeProfile step_profile(const Eigen::VectorXd &values, double cell) {
  if (!(cell > 0))
    throw usage_error("step_profile: cell width must be positive");
  VolumeProfile out;
  out.kind = Interpolation::Step;
  out.values = values;
  out.s.resize(values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k)
    out.s(k) = cell * double(k);
  out.total_volume = cell * double(values.size());
  return out;
}

} // namespace sobolev
