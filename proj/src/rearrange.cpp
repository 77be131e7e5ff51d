#include "sobolev/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace sobolev {

namespace {

Eigen::VectorXd checked_values(const GriddedField &field, const char *who) {
  const Eigen::VectorXd v = field.inside_values();
  if (v.size() == 0)
    throw usage_error(std::string(who) + ": empty mask");
  if (!v.allFinite())
    throw usage_error(std::string(who) + ": non-finite field values");
  if ((v.array() < 0).any())
    throw usage_error(std::string(who) + ": field must be nonnegative");
  return v;
}

} // namespace

double DistributionFunction::operator()(double level) const {
  if (level < 0)
    return total_volume;
  const double *begin = t.data();
  const double *it = std::upper_bound(begin, begin + t.size(), level);
  return mu((it - begin) - 1);
}

DistributionFunction distribution(const GriddedField &field) {
  Eigen::VectorXd v = checked_values(field, "distribution");
  std::sort(v.data(), v.data() + v.size());
  const double cell = field.cell_area();

  std::vector<double> t{0.0}, mu;
  // nodes strictly above 0
  const Eigen::Index zeros =
      std::upper_bound(v.data(), v.data() + v.size(), 0.0) - v.data();
  mu.push_back(cell * double(v.size() - zeros));
  for (Eigen::Index k = zeros; k < v.size();) {
    Eigen::Index next = k;
    while (next < v.size() && v(next) == v(k))
      ++next;
    t.push_back(v(k));
    mu.push_back(cell * double(v.size() - next));
    k = next;
  }
  DistributionFunction out;
  out.t = Eigen::Map<Eigen::VectorXd>(t.data(), Eigen::Index(t.size()));
  out.mu = Eigen::Map<Eigen::VectorXd>(mu.data(), Eigen::Index(mu.size()));
  out.total_volume = field.measure();
  out.sup = v(v.size() - 1);
  return out;
}

VolumeProfile decreasing_rearrangement(const GriddedField &field) {
  Eigen::VectorXd v = checked_values(field, "decreasing_rearrangement");
  std::sort(v.data(), v.data() + v.size(), std::greater<>());
  VolumeProfile out = step_profile(v, field.cell_area());
  check_volume_profile(out, "decreasing_rearrangement");
  return out;
}

double equimeasurability_residual(const GriddedField &field, double q) {
  if (!(q > 0))
    throw usage_error("equimeasurability_residual: q must be positive");
  const Eigen::VectorXd v = checked_values(field, "equimeasurability_residual");
  const double direct =
      field.cell_area() * compensated_sum(v.array().pow(q).matrix());
  return std::abs(direct - power_integral(decreasing_rearrangement(field), q));
}

double SymmetricRearrangement::operator()(const Eigen::Vector2d &x) const {
  return profile(std::numbers::pi * x.squaredNorm());
}

double SymmetricRearrangement::norm(double q) const {
  const Eigen::VectorXd knots = breakpoints(profile);
  Eigen::VectorXd pieces(profile.size());
  for (Eigen::Index k = 0; k < profile.size(); ++k) {
    const double r0 = std::sqrt(knots(k) / std::numbers::pi);
    const double r1 = std::sqrt(knots(k + 1) / std::numbers::pi);
    pieces(k) = positive_power(profile.values(k), q) * std::numbers::pi *
                (r1 - r0) * (r1 + r0);
  }
  return std::pow(compensated_sum(pieces), 1.0 / q);
}

SymmetricRearrangement symmetric_rearrangement(const GriddedField &field) {
  SymmetricRearrangement out;
  out.profile = decreasing_rearrangement(field);
  out.radius = std::sqrt(out.profile.total_volume / std::numbers::pi);
  return out;
}

double verify_talenti(const VolumeProfile &u_star, double cp, int n, double p,
                      const TalentiOptions &options) {
  check_volume_profile(u_star, "verify_talenti");
  const Eigen::Index m = u_star.size();
  const bool step = u_star.kind == Interpolation::Step;
  // Nodes: cell midpoints for steps, the samples otherwise.
  const Eigen::VectorXd knots = breakpoints(u_star);
  Eigen::VectorXd x(m);
  for (Eigen::Index k = 0; k < m; ++k)
    x(k) = step ? 0.5 * (knots(k) + knots(k + 1)) : u_star.s(k);
  const double cell = knots(1) - knots(0);
  const double s_min = options.s_min > 0 ? options.s_min : 4 * cell;

  const Eigen::VectorXd running = cumulative_power_integral(u_star, p - 1, x);
  const double pref =
      cp / (double(n) * n * std::pow(unit_ball_volume(n), 2.0 / n));
  auto rhs = [&](Eigen::Index k) {
    return pref * std::pow(x(k), -2.0 + 2.0 / n) * running(k);
  };

  // F(s) = u*(s) + integral_{s_min}^s rhs must be non-decreasing.
  double worst = -std::numeric_limits<double>::infinity();
  double peak = -std::numeric_limits<double>::infinity();
  double integral = 0;
  Eigen::Index prev = -1;
  for (Eigen::Index k = 0; k < m; ++k) {
    if (x(k) < s_min || x(k) <= 0)
      continue;
    if (prev >= 0)
      integral += 0.5 * (rhs(k) + rhs(prev)) * (x(k) - x(prev));
    const double F = u_star.values(k) + integral;
    if (prev >= 0)
      worst = std::max(worst, peak - F);
    peak = std::max(peak, F);
    prev = k;
  }
  return std::isfinite(worst) ? worst : 0.0;
}

namespace {

Eigen::VectorXd union_breakpoints(const VolumeProfile &f,
                                  const VolumeProfile &g) {
  const Eigen::VectorXd a = breakpoints(f), b = breakpoints(g);
  std::vector<double> all(a.data(), a.data() + a.size());
  all.insert(all.end(), b.data(), b.data() + b.size());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return Eigen::Map<Eigen::VectorXd>(all.data(), Eigen::Index(all.size()));
}

void check_exponent(double q, const char *who) {
  if (!(q > 0) || !std::isfinite(q))
    throw usage_error(std::string(who) + ": exponent must be positive");
}

} // namespace

bool hlp_dominates(const VolumeProfile &f, const VolumeProfile &g, double q1) {
  check_exponent(q1, "hlp_dominates");
  check_volume_profile(f, "hlp_dominates (f)");
  check_volume_profile(g, "hlp_dominates (g)");
  const Eigen::VectorXd at = union_breakpoints(f, g);
  const Eigen::VectorXd F = cumulative_power_integral(f, q1, at);
  const Eigen::VectorXd G = cumulative_power_integral(g, q1, at);
  const double scale = std::max({1.0, F.maxCoeff(), G.maxCoeff()});
  return ((F - G).array() <= 1e-12 * scale).all();
}

HlpCheck hlp_conclusion_check(const VolumeProfile &f, const VolumeProfile &g,
                              double q1, double q2) {
  check_exponent(q2, "hlp_conclusion_check");
  if (q2 < q1)
    throw usage_error("hlp_conclusion_check: requires q2 >= q1");
  HlpCheck out;
  out.lhs = power_integral(f, q2);
  out.rhs = power_integral(g, q2);
  if (!hlp_dominates(f, g, q1)) {
    out.status = HlpStatus::PreconditionFailed;
    return out;
  }
  const double scale = std::max({1.0, out.lhs, out.rhs});
  out.status = out.lhs <= out.rhs + 1e-12 * scale ? HlpStatus::Holds
                                                  : HlpStatus::ConclusionFailed;
  return out;
}

} // namespace sobolev
