// chiti.hpp -- comparison ball, single crossing, and the reverse Hoelder
// constant for extremal Sobolev functions.

#ifndef SOBOLEV_CHITI_HPP
#define SOBOLEV_CHITI_HPP

#include "sobolev/elliptic.hpp"
#include "sobolev/profile.hpp"
#include "sobolev/radial.hpp"

#include <Eigen/Dense>
#include "json.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace sobolev {

/// B*: the ball with C_p(B*) = C_p(Omega), carrying its normalized extremal.
struct ComparisonBall {
  int n = 2;
  double p = 2;
  double cp = 0;
  double rho = 0;
  double volume = 0;       // |B*| = omega_n rho^n
  double total_volume = 0; // |Omega|; phi* vanishes on (|B*|, |Omega|]
  RadialProfile unit;      // extremal on the unit ball
  VolumeProfile phi_star;  // sampled on [0, max(|B*|, |Omega|)]

  /// phi*(s) from the radial solution; zero beyond |B*|.
  double operator()(double s) const;
};

/// Builds B* for C_p(Omega) = cp_omega. Throws a verification error
/// ("Faber-Krahn violated") when |B*| > |Omega| (1 + fk_tolerance).
ComparisonBall comparison_ball(double cp_omega, int n, double p,
                               double total_volume, double fk_tolerance = 1e-9,
                               int samples = 4097);

enum class CrossingOutcome { SingleCrossing, IdenticalProfiles };

/// delta = phi*(0) / sqrt(cells) is the value change across one lattice step.
struct CrossingOptions {
  int window = 0;              // moving-average width in cells; 0: sqrt(cells)
  double band = -1;            // suppression band; <= 0: delta / 4
  double identity_band = -1;   // identical profiles below this; <= 0: 2 delta
};

struct CrossingAnalysis {
  CrossingOutcome outcome = CrossingOutcome::SingleCrossing;
  double s1 = 0;
  int crossing_count = 0;
  double band = 0;
  double identity_band = 0;
  int window = 1;
  double max_abs_difference = 0; // raw D
  Eigen::VectorXd s;             // cell midpoints of the common grid
  Eigen::VectorXd difference;    // D = phi* - u*
  Eigen::VectorXd smoothed;      // D averaged over `window` cells
};

/// D(s) = phi*(s) - u*(s) on u*'s cells, extended over [0, |B*|] when B* is
/// larger, then averaged over a window of cells. A smoothed D inside the
/// identity band is reported as identical profiles. Otherwise |D| < band is
/// treated as zero and the remaining signal must change sign exactly once,
/// from positive to negative; s1 is where the smoothed D crosses zero.
/// Violations throw a verification error carrying a sketch of D. A
/// suppressed D of one sign throughout is a normalization contradiction.
CrossingAnalysis crossing_analysis(const VolumeProfile &u_star,
                                   const ComparisonBall &ball,
                                   const CrossingOptions &options = {});

struct DominanceCheck {
  double min_I = 0;     // min over cell boundaries of I(s)
  double s_at_min = 0;
  double I_end = 0;     // I(|Omega|), zero up to quadrature error
  double norm_u = 0;    // ||u*||_p^p
  double norm_phi = 0;  // ||phi*||_p^p
  Eigen::VectorXd s;    // cell boundaries
  Eigen::VectorXd I;
};

/// I(s) = integral_0^s (phi*)^p - (u*)^p. Throws when the p-norms differ by
/// more than `normalization_tolerance` (relative).
DominanceCheck dominance_check(const VolumeProfile &u_star,
                               const ComparisonBall &ball, double p,
                               double normalization_tolerance = 1e-6);

/// K-hat(n, p, q): the cp-independent factor of K, from the unit-ball extremal.
double khat(int n, double p, double q, const ShootOptions &options = {});

/// Exponent (n / alpha) (1/p - 1/q) of cp in K.
double k_exponent(int n, double p, double q);

/// K(n, p, q, cp) = ||phi||_p / ||phi||_q on B*, evaluated both on the
/// radius-rho ball directly and as K-hat cp^exponent; throws a verification
/// error if the two disagree beyond 1e-8 (relative).
double constant_K(int n, double p, double q, double cp_omega,
                  const ShootOptions &options = {});

/// The p = 1 constant in torsional-rigidity form, P = 4 / C_1.
struct TorsionForm {
  double P = 0;
  double exponent = 0;   // n / (n + 2) (1 - 1/q)
  double four_factor = 0; // 4^(-exponent), absorbed into K-hat
  double khat = 0;       // K-hat(n, 1, q)
  double K = 0;          // khat * four_factor * P^exponent
};

/// Throws a verification error unless K matches constant_K(n, 1, q, cp1)
/// to 1e-12 (relative).
TorsionForm torsion_form(int n, double q, double cp1_omega,
                         const ShootOptions &options = {});

struct ReverseHolderOptions {
  int n = 2;
  double margin_tolerance = 1e-3; // tau, relative to ||u||_p
  double dominance_budget = 5;    // tau_I = budget * h
  double fk_budget = 4;           // tau_FK = budget * h / sqrt(|Omega|)
  CrossingOptions crossing;
  double equality_tolerance = 0.02; // |margin| bound on balls, relative
};

struct QReport {
  double q = 0;
  double K = 0;
  double khat = 0;
  double norm_q = 0; // ||u||_q
  double rhs = 0;    // K ||u||_q
  double margin = 0; // ||u||_p - rhs
  std::string hlp;   // conclusion check status
};

struct ReverseHolderReport {
  nlohmann::json domain;
  int n = 2;
  double p = 2;
  double h = 0;
  double cp_omega = 0;
  double rho = 0;
  double volume_omega = 0;
  double volume_ball = 0;
  double lhs = 0; // ||u||_p
  std::vector<QReport> per_q;
  CrossingAnalysis crossing;
  DominanceCheck dominance;
  double talenti = 0;
  double equimeasurability = 0; // worst relative residual over the q list
  double tau = 0;
  double tau_I = 0;
  double tau_FK = 0;
  bool equality_case = false;
  bool passed = false;
  std::vector<std::string> failures;
};

/// Rearranges u, builds B*, runs the crossing and dominance analyses and
/// evaluates the margin for every q. Errors carry the failing stage.
ReverseHolderReport verify_reverse_holder(const SobolevResult &result,
                                          std::vector<double> q_list,
                                          const ReverseHolderOptions &options = {});

nlohmann::json to_json(const ReverseHolderReport &report);
void write_table(std::ostream &out, const ReverseHolderReport &report);

} // namespace sobolev

#endif // SOBOLEV_CHITI_HPP
