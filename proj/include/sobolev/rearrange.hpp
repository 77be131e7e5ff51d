// rearrange.hpp -- distribution functions and rearrangements of grid fields.

#ifndef SOBOLEV_REARRANGE_HPP
#define SOBOLEV_REARRANGE_HPP

#include "sobolev/elliptic.hpp"
#include "sobolev/profile.hpp"

#include <Eigen/Dense>

namespace sobolev {

/// mu(t) = |{u > t}| as a right-continuous step function. t(0) = 0 and the
/// remaining thresholds are the distinct positive node values, ascending.
struct DistributionFunction {
  Eigen::VectorXd t;
  Eigen::VectorXd mu;
  double total_volume = 0; // |Omega| of the staircase domain
  double sup = 0;

  double operator()(double level) const;
};

DistributionFunction distribution(const GriddedField &field);

/// u*: node values sorted descending, one cell of width h^2 each.
VolumeProfile decreasing_rearrangement(const GriddedField &field);

/// |sum_Omega u^q h^2 - integral_0^|Omega| (u*)^q ds|.
double equimeasurability_residual(const GriddedField &field, double q);

/// u dagger on the disk of area |Omega|: cell k of u* becomes the annulus
/// between the radii of areas k h^2 and (k + 1) h^2.
struct SymmetricRearrangement {
  double radius = 0;
  VolumeProfile profile;

  double operator()(const Eigen::Vector2d &x) const;
  /// ||u dagger||_q summed over annuli.
  double norm(double q) const;
};

SymmetricRearrangement symmetric_rearrangement(const GriddedField &field);

struct TalentiOptions {
  double s_min = -1; // <= 0: four cells
};

/// Talenti's bound -(u*)' <= cp n^-2 omega_n^(-2/n) s^(-2+2/n) integral_0^s
/// (u*)^(p-1), checked in integrated form: F(s) = u*(s) + integral_{s_min}^s
/// of the right-hand side must be non-decreasing. Returns max over nodes
/// a < b of F(a) - F(b); a nonpositive value certifies the bound on the grid.
double verify_talenti(const VolumeProfile &u_star, double cp, int n, double p,
                      const TalentiOptions &options = {});

/// Cumulative q1-power integrals of f stay below those of g at every
/// breakpoint of either profile (relative slack 1e-12).
bool hlp_dominates(const VolumeProfile &f, const VolumeProfile &g, double q1);

enum class HlpStatus { Holds, PreconditionFailed, ConclusionFailed };

struct HlpCheck {
  HlpStatus status = HlpStatus::Holds;
  double lhs = 0; // integral of f^q2
  double rhs = 0; // integral of g^q2
  bool holds() const { return status == HlpStatus::Holds; }
};

HlpCheck hlp_conclusion_check(const VolumeProfile &f, const VolumeProfile &g,
                              double q1, double q2);

} // namespace sobolev

#endif // SOBOLEV_REARRANGE_HPP
