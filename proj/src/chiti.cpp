#include "sobolev/chiti.hpp"

#include "sobolev/rearrange.hpp"

#include "csv.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace sobolev {

double ComparisonBall::operator()(double s) const {
  return ball_volume_value(unit, rho, s);
}

ComparisonBall comparison_ball(double cp_omega, int n, double p,
                               double total_volume, double fk_tolerance,
                               int samples) {
  if (!(cp_omega > 0) || !std::isfinite(cp_omega))
    throw usage_error("comparison_ball: cp must be positive");
  if (!(total_volume > 0))
    throw usage_error("comparison_ball: |Omega| must be positive");
  ComparisonBall ball;
  ball.n = n;
  ball.p = p;
  ball.cp = cp_omega;
  ball.total_volume = total_volume;
  ball.unit = normalize_to_unit_ball(shoot(n, p));
  ball.rho = std::pow(cp_omega / ball.unit.cp_ball, 1.0 / alpha(n, p));
  ball.volume = unit_ball_volume(n) * std::pow(ball.rho, n);
  if (ball.volume > total_volume * (1 + fk_tolerance)) {
    std::ostringstream msg;
    msg << "Faber-Krahn violated: |B*| = " << csv::number(ball.volume)
        << " exceeds |Omega| = " << csv::number(total_volume)
        << " beyond relative tolerance " << fk_tolerance;
    throw Error(ErrorKind::Verification, msg.str(), "comparison_ball");
  }
  ball.phi_star = volume_profile(ball.unit, ball.rho, samples);
  if (total_volume > ball.volume) {
    const Eigen::Index m = ball.phi_star.size();
    ball.phi_star.s.conservativeResize(m + 1);
    ball.phi_star.values.conservativeResize(m + 1);
    ball.phi_star.s(m) = total_volume;
    ball.phi_star.values(m) = 0;
    ball.phi_star.total_volume = total_volume;
  }
  return ball;
}

namespace {

// u*'s cells, continued with the last width until both profiles are covered.
Eigen::VectorXd common_knots(const VolumeProfile &u_star, double extent) {
  if (u_star.kind != Interpolation::Step)
    throw usage_error("expected a step profile for u*");
  check_volume_profile(u_star, "u*");
  std::vector<double> knots;
  const Eigen::VectorXd own = breakpoints(u_star);
  knots.assign(own.data(), own.data() + own.size());
  const double width = knots.back() - knots[knots.size() - 2];
  while (knots.back() < extent * (1 - 1e-12))
    knots.push_back(knots.back() + width);
  return Eigen::Map<Eigen::VectorXd>(knots.data(), Eigen::Index(knots.size()));
}

std::string sketch(const Eigen::VectorXd &s, const Eigen::VectorXd &d) {
  std::ostringstream out;
  out << "D(s) at";
  const Eigen::Index m = s.size();
  const Eigen::Index stride = std::max<Eigen::Index>(1, m / 16);
  for (Eigen::Index k = 0; k < m; k += stride)
    out << ' ' << std::setprecision(4) << s(k) << ':' << d(k);
  return out.str();
}

} // namespace

CrossingAnalysis crossing_analysis(const VolumeProfile &u_star,
                                   const ComparisonBall &ball,
                                   const CrossingOptions &options) {
  const Eigen::VectorXd knots =
      common_knots(u_star, std::max(u_star.total_volume, ball.volume));
  const Eigen::Index m = knots.size() - 1;
  CrossingAnalysis out;
  out.s.resize(m);
  out.difference.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    out.s(k) = 0.5 * (knots(k) + knots(k + 1));
    const double u = k < u_star.size() ? u_star.values(k) : 0.0;
    out.difference(k) = ball(out.s(k)) - u;
  }
  const Eigen::VectorXd &D = out.difference;
  out.max_abs_difference = D.cwiseAbs().maxCoeff();

  const double root = std::sqrt(double(m));
  out.window = options.window > 0 ? options.window
                                  : std::max(1, int(std::lround(root)));
  const double delta = ball(0) / root;
  out.band = options.band > 0 ? options.band : delta / 4;
  out.identity_band = options.identity_band > 0 ? options.identity_band : 2 * delta;

  Eigen::VectorXd prefix(m + 1);
  prefix(0) = 0;
  for (Eigen::Index k = 0; k < m; ++k)
    prefix(k + 1) = prefix(k) + D(k);
  out.smoothed.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index a = std::max<Eigen::Index>(0, k - out.window / 2);
    const Eigen::Index b = std::min<Eigen::Index>(m, k + out.window / 2 + 1);
    out.smoothed(k) = (prefix(b) - prefix(a)) / double(b - a);
  }
  const Eigen::VectorXd &S = out.smoothed;
  if (S.cwiseAbs().maxCoeff() < out.identity_band) {
    out.outcome = CrossingOutcome::IdenticalProfiles;
    return out;
  }

  auto fail = [&](const std::string &what) {
    throw Error(ErrorKind::Verification,
                what + "; band " + csv::number(out.band) + "; " +
                    sketch(out.s, S),
                "crossing_analysis");
  };
  int sign = 0, changes = 0;
  Eigen::Index last_positive = -1, first_negative_after = -1;
  bool any_positive = false, any_negative = false;
  for (Eigen::Index k = 0; k < m; ++k) {
    const int here = S(k) > out.band ? 1 : S(k) < -out.band ? -1 : 0;
    if (here == 0)
      continue;
    if (here > 0) {
      any_positive = true;
      last_positive = k;
    } else {
      any_negative = true;
    }
    if (sign != 0 && here != sign)
      ++changes;
    if (here < 0 && sign > 0)
      first_negative_after = k;
    sign = here;
  }
  out.crossing_count = changes;
  if (!any_positive || !any_negative)
    fail(std::string("normalization contradiction: ") +
         (any_positive ? "phi* > u*" : "u* > phi*") +
         " throughout, so the two cannot share an L^p norm");
  if (changes != 1)
    fail("expected one crossing, found " + std::to_string(changes));
  if (first_negative_after < 0)
    fail("crossing runs upward: u* exceeds phi* near s = 0");

  Eigen::Index j = last_positive + 1;
  while (j < first_negative_after && S(j) > 0)
    ++j;
  const double d0 = S(j - 1), d1 = S(j);
  out.s1 = d0 == d1 ? out.s(j)
                    : out.s(j - 1) + d0 / (d0 - d1) * (out.s(j) - out.s(j - 1));
  if (!(out.s1 > 0 && out.s1 < ball.volume))
    fail("crossing point " + csv::number(out.s1) + " outside (0, |B*|)");
  return out;
}

DominanceCheck dominance_check(const VolumeProfile &u_star,
                               const ComparisonBall &ball, double p,
                               double normalization_tolerance) {
  const Eigen::VectorXd knots =
      common_knots(u_star, std::max(u_star.total_volume, ball.volume));
  const Eigen::Index m = knots.size() - 1;
  // 3-point Gauss-Legendre on [-1, 1]
  const std::array<double, 3> node = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  const std::array<double, 3> weight = {5.0 / 9, 8.0 / 9, 5.0 / 9};

  DominanceCheck out;
  out.s = knots;
  out.I.resize(m + 1);
  out.I(0) = 0;
  double running = 0, carry = 0, phi_total = 0, phi_carry = 0;
  out.min_I = 0;
  out.s_at_min = 0;
  for (Eigen::Index k = 0; k < m; ++k) {
    const double a = knots(k);
    const double b = std::min(knots(k + 1), ball.volume);
    double phi_piece = 0;
    if (b > a)
      for (int g = 0; g < 3; ++g)
        phi_piece += weight[g] * 0.5 * (b - a) *
                     positive_power(ball(0.5 * (a + b) + 0.5 * (b - a) * node[g]), p);
    const double u = k < u_star.size() ? u_star.values(k) : 0.0;
    const double piece = phi_piece - (knots(k + 1) - a) * positive_power(u, p);
    // compensated running sums
    double y = piece - carry, t = running + y;
    carry = (t - running) - y;
    running = t;
    y = phi_piece - phi_carry;
    t = phi_total + y;
    phi_carry = (t - phi_total) - y;
    phi_total = t;
    out.I(k + 1) = running;
    if (running < out.min_I) {
      out.min_I = running;
      out.s_at_min = knots(k + 1);
    }
  }
  out.I_end = running;
  out.norm_phi = phi_total;
  out.norm_u = power_integral(u_star, p);
  if (std::abs(out.norm_u - out.norm_phi) >
      normalization_tolerance * std::max(out.norm_u, out.norm_phi))
    throw Error(ErrorKind::Verification,
                "normalization mismatch: ||u*||_p^p = " +
                    csv::number(out.norm_u) + ", ||phi*||_p^p = " +
                    csv::number(out.norm_phi),
                "dominance_check");
  return out;
}

double k_exponent(int n, double p, double q) {
  return double(n) / alpha(n, p) * (1 / p - 1 / q);
}

namespace {

void check_q(double p, double q, const char *who) {
  if (!std::isfinite(q) || q < p)
    throw usage_error(std::string(who) + ": requires q >= p (q = " +
                      csv::number(q) + ", p = " + csv::number(p) + ")");
}

double norm_ratio(const RadialProfile &profile, double p, double q) {
  return std::pow(ball_moment(profile, p), 1 / p) /
         std::pow(ball_moment(profile, q), 1 / q);
}

} // namespace

double khat(int n, double p, double q, const ShootOptions &options) {
  check_q(p, q, "khat");
  const RadialProfile unit = normalize_to_unit_ball(shoot(n, p, options));
  return norm_ratio(unit, p, q) * std::pow(unit.cp_ball, -k_exponent(n, p, q));
}

double constant_K(int n, double p, double q, double cp_omega,
                  const ShootOptions &options) {
  check_q(p, q, "constant_K");
  if (!(cp_omega > 0) || !std::isfinite(cp_omega))
    throw usage_error("constant_K: cp must be positive");
  const RawShot shot = shoot(n, p, options);
  const RadialProfile unit = normalize_to_unit_ball(shot);
  const double rho = std::pow(cp_omega / unit.cp_ball, 1.0 / alpha(n, p));
  const double direct = norm_ratio(normalize_to_ball(shot, rho), p, q);
  const double e = k_exponent(n, p, q);
  const double scaled =
      norm_ratio(unit, p, q) * std::pow(unit.cp_ball, -e) * std::pow(cp_omega, e);
  if (std::abs(direct - scaled) > 1e-8 * std::abs(direct))
    throw Error(ErrorKind::Verification,
                "K paths disagree: direct " + csv::number(direct) +
                    ", scaled " + csv::number(scaled),
                "constant_K");
  return direct;
}

TorsionForm torsion_form(int n, double q, double cp1_omega,
                         const ShootOptions &options) {
  check_q(1.0, q, "torsion_form");
  if (!(cp1_omega > 0) || !std::isfinite(cp1_omega))
    throw usage_error("torsion_form: C_1 must be positive");
  TorsionForm out;
  out.P = 4 / cp1_omega;
  out.exponent = double(n) / (n + 2) * (1 - 1 / q);
  out.four_factor = std::pow(4.0, -out.exponent);
  out.khat = khat(n, 1.0, q, options);
  out.K = out.khat * out.four_factor * std::pow(out.P, out.exponent);
  const double K = constant_K(n, 1.0, q, cp1_omega, options);
  if (std::abs(out.K - K) > 1e-12 * K)
    throw Error(ErrorKind::Verification,
                "torsional form " + csv::number(out.K) +
                    " does not reproduce K = " + csv::number(K),
                "torsion_form");
  return out;
}

ReverseHolderReport verify_reverse_holder(const SobolevResult &result,
                                          std::vector<double> q_list,
                                          const ReverseHolderOptions &options) {
  const double p = result.p;
  if (p < 1 || p > 2)
    throw usage_error("theorem requires 1 <= p <= 2 (got p = " +
                      csv::number(p) + ")");
  if (q_list.empty())
    throw usage_error("verify_reverse_holder: empty q list");
  std::sort(q_list.begin(), q_list.end());
  q_list.erase(std::unique(q_list.begin(), q_list.end()), q_list.end());
  for (double q : q_list)
    check_q(p, q, "verify_reverse_holder");

  ReverseHolderReport rep;
  rep.n = options.n;
  rep.p = p;
  rep.h = result.field.h;
  rep.cp_omega = result.cp;

  const VolumeProfile u_star = decreasing_rearrangement(result.field);
  rep.volume_omega = u_star.total_volume;
  std::vector<double> eq_q = {0.5, 1.0, p, 2.0, 4.0};
  eq_q.insert(eq_q.end(), q_list.begin(), q_list.end());
  for (double q : eq_q)
    rep.equimeasurability =
        std::max(rep.equimeasurability,
                 equimeasurability_residual(result.field, q) /
                     power_integral(u_star, q));
  rep.lhs = std::pow(power_integral(u_star, p), 1 / p);

  rep.tau = options.margin_tolerance * rep.lhs;
  rep.tau_I = options.dominance_budget * rep.h;
  rep.tau_FK = options.fk_budget * rep.h / std::sqrt(rep.volume_omega);

  const ComparisonBall ball =
      comparison_ball(result.cp, rep.n, p, rep.volume_omega, rep.tau_FK);
  rep.rho = ball.rho;
  rep.volume_ball = ball.volume;

  rep.talenti = verify_talenti(u_star, result.cp, rep.n, p);
  rep.crossing = crossing_analysis(u_star, ball, options.crossing);
  rep.equality_case =
      rep.crossing.outcome == CrossingOutcome::IdenticalProfiles;
  rep.dominance = dominance_check(u_star, ball, p);
  const bool dominated = rep.dominance.min_I >= -rep.tau_I;

  for (double q : q_list) {
    QReport row;
    row.q = q;
    row.K = constant_K(rep.n, p, q, result.cp);
    row.khat = khat(rep.n, p, q);
    row.norm_q = std::pow(power_integral(u_star, q), 1 / q);
    row.rhs = row.K * row.norm_q;
    row.margin = rep.lhs - row.rhs;
    // HLP with f = u*, g = phi*: integral u^q <= integral phi^q = K^-q
    const bool conclusion = row.norm_q <= (1 / row.K) * (1 + options.margin_tolerance);
    row.hlp = !dominated ? "precondition failed"
                         : conclusion ? "holds" : "conclusion failed";
    rep.per_q.push_back(row);
  }

  for (const QReport &row : rep.per_q) {
    const bool ok = rep.equality_case
                        ? std::abs(row.margin) <= options.equality_tolerance * rep.lhs
                        : row.margin >= -rep.tau;
    if (!ok)
      rep.failures.push_back("margin at q = " + csv::number(row.q) + " is " +
                             csv::number(row.margin));
  }
  if (!dominated)
    rep.failures.push_back("dominance min I = " +
                           csv::number(rep.dominance.min_I) + " below -tau_I");
  if (!rep.equality_case && !(rep.volume_ball < rep.volume_omega))
    rep.failures.push_back("|B*| is not below |Omega| for a non-ball");
  rep.passed = rep.failures.empty();
  return rep;
}

nlohmann::json to_json(const ReverseHolderReport &r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const QReport &q : r.per_q)
    rows.push_back({{"q", q.q},
                    {"K", q.K},
                    {"khat", q.khat},
                    {"norm_q", q.norm_q},
                    {"rhs", q.rhs},
                    {"margin", q.margin},
                    {"hlp", q.hlp}});
  nlohmann::json crossing = {
      {"outcome", r.equality_case ? "identical profiles" : "single crossing"},
      {"crossing_count", r.crossing.crossing_count},
      {"band", r.crossing.band},
      {"identity_band", r.crossing.identity_band},
      {"window", r.crossing.window},
      {"max_abs_difference", r.crossing.max_abs_difference}};
  if (!r.equality_case)
    crossing["s1"] = r.crossing.s1;
  return {{"format", "sobolev-lab/reverse-holder-report"},
          {"version", csv::kFormatVersion},
          {"domain", r.domain},
          {"n", r.n},
          {"p", r.p},
          {"h", r.h},
          {"cp_omega", r.cp_omega},
          {"rho", r.rho},
          {"volume_omega", r.volume_omega},
          {"volume_ball", r.volume_ball},
          {"lhs", r.lhs},
          {"q", rows},
          {"crossing", crossing},
          {"dominance",
           {{"min_I", r.dominance.min_I},
            {"s_at_min", r.dominance.s_at_min},
            {"I_end", r.dominance.I_end}}},
          {"talenti_violation", r.talenti},
          {"equimeasurability", r.equimeasurability},
          {"tolerances", {{"tau", r.tau}, {"tau_I", r.tau_I}, {"tau_FK", r.tau_FK}}},
          {"equality_case", r.equality_case},
          {"verdict", r.equality_case ? "equality case (ball)"
                                      : r.passed ? "inequality holds" : "failed"},
          {"passed", r.passed},
          {"failures", r.failures}};
}

void write_table(std::ostream &out, const ReverseHolderReport &r) {
  auto num = [](double x) {
    std::ostringstream s;
    s << std::setprecision(8) << x;
    return s.str();
  };
  out << "domain      " << r.domain.dump() << '\n'
      << "n, p, h     " << r.n << ", " << num(r.p) << ", " << num(r.h) << '\n'
      << "C_p(Omega)  " << num(r.cp_omega) << '\n'
      << "rho         " << num(r.rho) << '\n'
      << "|Omega|     " << num(r.volume_omega) << '\n'
      << "|B*|        " << num(r.volume_ball) << '\n'
      << "||u||_p     " << num(r.lhs) << '\n';
  if (r.equality_case)
    out << "crossing    identical profiles (max |D| " +
               num(r.crossing.max_abs_difference) + ", identity band " +
               num(r.crossing.identity_band) + ")\n";
  else
    out << "crossing    " << r.crossing.crossing_count << " at s1 = "
        << num(r.crossing.s1) << " (band " << num(r.crossing.band) << ")\n";
  out << "min I(s)    " << num(r.dominance.min_I) << " (tau_I " << num(r.tau_I)
      << ")\n"
      << "talenti     " << num(r.talenti) << '\n'
      << "verdict     "
      << (r.equality_case ? "equality case (ball)"
                          : r.passed ? "inequality holds" : "failed")
      << "\n\n";
  const std::vector<std::string> head = {"q", "K", "khat", "||u||_q",
                                         "K||u||_q", "margin", "hlp"};
  std::vector<std::vector<std::string>> cells = {head};
  for (const QReport &q : r.per_q)
    cells.push_back({num(q.q), num(q.K), num(q.khat), num(q.norm_q),
                     num(q.rhs), num(q.margin), q.hlp});
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto &row : cells)
    for (std::size_t c = 0; c < row.size(); ++c)
      width[c] = std::max(width[c], row[c].size());
  for (const auto &row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c)
      out << (c ? "  " : "") << std::setw(int(width[c])) << row[c];
    out << '\n';
  }
  for (const std::string &f : r.failures)
    out << "failure: " << f << '\n';
}

} // namespace sobolev
