// radial.hpp -- extremal Sobolev functions on balls.
//
// The ball extremal solves  phi'' + (n-1)/r phi' + Lambda phi^(p-1) = 0  on
// [0, radius] with phi(radius) = 0. Because the equation is invariant under
// y(r) -> a y(b r) with a^(p-2) b^2 fixed, one forward integration of the
// Lambda = 1 problem from y(0) = 1 determines every ball extremal: the first
// zero R0 fixes the dilation and the L^p normalization fixes the amplitude.

#ifndef SOBOLEV_RADIAL_HPP
#define SOBOLEV_RADIAL_HPP

#include "sobolev/core.hpp"
#include "sobolev/profile.hpp"

#include <Eigen/Dense>
#include "json.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace sobolev {

struct ShootOptions {
  /// Absolute and relative error tolerance of the Runge-Kutta integrator.
  double tol = 1e-12;
  /// Permit p > 2; the radial problem is still solvable but unsupported.
  bool allow_supercritical = false;
  /// Give up if no zero is found before this radius.
  double max_radius = 1e3;
};

/// One accepted Dormand-Prince step with its continuous extension.
struct DenseStep {
  double r0 = 0;
  double h = 0;
  /// rcont[k] for the state (y, y', moment).
  std::array<Eigen::Vector3d, 5> coeff;

  Eigen::Vector3d operator()(double r) const;
};

/// Solution of the Lambda = 1 problem up to its first zero.
struct RawShot {
  int n = 2;
  double p = 2;
  Eigen::VectorXd r;  // accepted nodes, r(0) = series start
  Eigen::VectorXd y;  // y at the nodes
  Eigen::VectorXd dy; // y' at the nodes
  double R0 = 0;      // first zero of y
  /// integral_0^R0 y^p r^(n-1) dr, integrated alongside y.
  double radial_moment = 0;
  std::vector<DenseStep> steps;
  double tol = 0;

  /// (y, y') anywhere on [0, R0] from the continuous extension.
  Eigen::Vector2d state(double r) const;
};

/// The L^p-normalized extremal on the ball of radius `radius`.
struct RadialProfile {
  int n = 2;
  double p = 2;
  double radius = 1;
  Eigen::VectorXd r;    // uniform grid on [0, radius]
  Eigen::VectorXd phi;  // phi(r), phi(radius) = 0
  Eigen::VectorXd dphi; // phi'(r)
  double Lambda = 0;
  /// C_p of the ball; equal to Lambda under the unit L^p normalization.
  double cp_ball = 0;
  /// ||phi||_p^p as produced by the shooting integral (1 up to rounding).
  double normalization = 0;

  /// Cubic Hermite evaluation of phi; zero outside [0, radius].
  double operator()(double at) const;
};

RawShot shoot(int n, double p, const ShootOptions &options = {});

/// Rescales the shot onto the ball of the given radius with ||phi||_p = 1.
RadialProfile normalize_to_ball(const RawShot &shot, double radius = 1.0,
                                int samples = 2049);

inline RadialProfile normalize_to_unit_ball(const RawShot &shot,
                                            int samples = 2049) {
  return normalize_to_ball(shot, 1.0, samples);
}

double cp_unit_ball(int n, double p, const ShootOptions &options = {});

/// C_p of the ball of radius `radius`, with the zero forced there.
double cp_ball(int n, double p, double radius, const ShootOptions &options = {});

/// integral over the ball of phi^q, by Gauss-Legendre on the Hermite interpolant.
double ball_moment(const RadialProfile &profile, double q);

/// phi*(s) for the radius-rho extremal rho^(-n/p) phi(x/rho) of a unit-ball
/// profile, at volume s (zero for s >= omega_n rho^n).
double ball_volume_value(const RadialProfile &unit, double rho, double s);

/// phi*(s) on a uniform s-grid over [0, omega_n rho^n].
VolumeProfile volume_profile(const RadialProfile &unit, double rho,
                             int samples = 0);

/// Max over interior samples s >= s_min of |(phi*)'(s) + cp n^-2 omega_n^(-2/n) s^(-2+2/n)
/// integral_0^s (phi*)^(p-1)|, with a backward-difference derivative.
/// s_min <= 0 selects |B| / 16, independent of the grid so that the residual
/// converges when (phi*)' is singular at s = 0 (n >= 3).
double verify_integro_differential(const VolumeProfile &vp, double cp, int n,
                                   double p, double s_min = -1);

/// JSON-headed CSV: one JSON header line, then "r,phi,dphi" rows.
/// Keys of `extra` are merged into the header.
void write_radial_profile(std::ostream &out, const RadialProfile &profile,
                          const nlohmann::json &extra = nlohmann::json::object());
/// JSON-headed CSV with "s,value" rows.
void write_volume_profile(std::ostream &out, const VolumeProfile &profile,
                          const nlohmann::json &extra = nlohmann::json::object());
VolumeProfile read_volume_profile(std::istream &in);

} // namespace sobolev

#endif // SOBOLEV_RADIAL_HPP
