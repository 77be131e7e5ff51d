#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "sobolev/chiti.hpp"
#include "sobolev/rearrange.hpp"

#include <random>
#include <sstream>

using namespace sobolev;
using doctest::Approx;

namespace {

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::abs(b);
}

// u* sampled from phi* at the cell midpoints of a uniform grid
VolumeProfile sampled_steps(const ComparisonBall &ball, int cells, double scale) {
  Eigen::VectorXd v(cells);
  const double w = ball.volume / cells;
  for (int k = 0; k < cells; ++k)
    v(k) = scale * ball((k + 0.5) * w);
  return step_profile(v, w);
}

const SobolevResult &solved(const DomainSpec &spec, double p, double h) {
  static std::vector<std::tuple<std::string, double, double, SobolevResult>> cache;
  const std::string key = domain_to_json(spec).dump();
  for (const auto &[k, pp, hh, r] : cache)
    if (k == key && pp == p && hh == h)
      return r;
  cache.emplace_back(key, p, h, minimize_quotient(build_grid(spec, h), p));
  return std::get<3>(cache.back());
}

} // namespace

TEST_CASE("comparison ball") {
  const double pi = oracle::pi;
  for (double p : {1.0, 1.5, 2.0}) {
    const ComparisonBall unit = comparison_ball(cp_unit_ball(2, p), 2, p, pi);
    CHECK(unit.rho == Approx(1.0).epsilon(1e-12));
    CHECK(unit.volume == Approx(pi).epsilon(1e-12));
    CHECK(power_integral(unit.phi_star, p) == Approx(1.0).epsilon(1e-6));
  }

  const ComparisonBall two = comparison_ball(std::pow(2.0, -4) * 8 / pi, 2, 1.0, 4 * pi);
  CHECK(two.rho == Approx(2.0).epsilon(1e-10));

  const double j0 = oracle::j0();
  const ComparisonBall sq = comparison_ball(2 * pi * pi, 2, 2.0, 1.0);
  const double rho = std::sqrt(j0 * j0 / (2 * pi * pi));
  CHECK(sq.rho == Approx(rho).epsilon(1e-9));
  CHECK(sq.rho == Approx(0.5412).epsilon(1e-4));
  CHECK(sq.volume == Approx(pi * rho * rho).epsilon(1e-9));
  CHECK(sq.volume == Approx(0.9203).epsilon(1e-4));
  // zero extension to |Omega|
  CHECK(sq.phi_star.total_volume == 1.0);
  CHECK(sq.phi_star(0.95) == 0.0);
  CHECK(sq(0.95) == 0.0);
  CHECK(sq(0.5) > 0);
  check_volume_profile(sq.phi_star);

  try {
    comparison_ball(0.1, 2, 2.0, 1.0);
    FAIL("expected Faber-Krahn violation");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::Verification);
    CHECK(std::string(e.what()).find("Faber-Krahn violated") != std::string::npos);
  }
  CHECK_THROWS_AS(comparison_ball(-1.0, 2, 2.0, 1.0), Error);
}

TEST_CASE("crossing analysis on synthetic profiles") {
  const ComparisonBall ball = comparison_ball(cp_unit_ball(2, 1.5), 2, 1.5, oracle::pi);
  const CrossingAnalysis same = crossing_analysis(sampled_steps(ball, 4096, 1.0), ball);
  CHECK(same.outcome == CrossingOutcome::IdenticalProfiles);
  CHECK(same.max_abs_difference < 1e-3);

  try {
    crossing_analysis(sampled_steps(ball, 4096, 1.1), ball);
    FAIL("expected a normalization contradiction");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::Verification);
    CHECK(std::string(e.what()).find("normalization contradiction") != std::string::npos);
  }

  // a flatter profile of equal mass crosses once, downward
  const int cells = 4096;
  const double w = ball.volume / cells;
  Eigen::VectorXd v(cells);
  for (int k = 0; k < cells; ++k)
    v(k) = 0.5 * ball((k + 0.5) * w) + 0.25;
  const double mass = step_profile(v, w).values.array().pow(1.5).sum() * w;
  v /= std::pow(mass, 1 / 1.5);
  const CrossingAnalysis one = crossing_analysis(step_profile(v, w), ball);
  CHECK(one.outcome == CrossingOutcome::SingleCrossing);
  CHECK(one.crossing_count == 1);
  CHECK(one.s1 > 0);
  CHECK(one.s1 < ball.volume);
  for (Eigen::Index k = 0; k < one.s.size(); ++k) {
    if (one.s(k) <= one.s1)
      REQUIRE(one.smoothed(k) >= -one.band);
    else
      REQUIRE(one.smoothed(k) <= one.band);
  }
}

TEST_CASE("crossing analysis on grid extremals") {
  for (double p : {1.0, 2.0}) {
    const SobolevResult &disk = solved(unit_disk(), p, 1.0 / 64);
    const VolumeProfile u = decreasing_rearrangement(disk.field);
    const ComparisonBall ball = comparison_ball(disk.cp, 2, p, u.total_volume, 0.05);
    const CrossingAnalysis c = crossing_analysis(u, ball);
    CHECK(c.outcome == CrossingOutcome::IdenticalProfiles);
    CHECK(c.max_abs_difference <= 0.03 * ball(0));
  }

  // the square's crossing point is stable under refinement
  std::vector<double> s1;
  for (double h : {1.0 / 64, 1.0 / 128}) {
    const SobolevResult &sq = solved(unit_square(), 1.0, h);
    const VolumeProfile u = decreasing_rearrangement(sq.field);
    const ComparisonBall ball = comparison_ball(sq.cp, 2, 1.0, u.total_volume);
    const CrossingAnalysis c = crossing_analysis(u, ball);
    CHECK(c.crossing_count == 1);
    CHECK(c.s1 > 0);
    CHECK(c.s1 < ball.volume);
    s1.push_back(c.s1);
  }
  CHECK(std::abs(s1[0] - s1[1]) < 4.0 / 64);
}

TEST_CASE("dominance") {
  const double h = 1.0 / 64;
  for (const DomainSpec &spec : {unit_disk(), unit_square()}) {
    const SobolevResult &r = solved(spec, 1.0, h);
    const VolumeProfile u = decreasing_rearrangement(r.field);
    const ComparisonBall ball = comparison_ball(r.cp, 2, 1.0, u.total_volume, 0.05);
    const DominanceCheck d = dominance_check(u, ball, 1.0);
    CHECK(d.I(0) == 0.0);
    CHECK(std::abs(d.I_end) < 1e-9);
    CHECK(d.min_I >= -5 * h);
    CHECK(d.norm_u == Approx(1.0).epsilon(1e-12));
    CHECK(d.norm_phi == Approx(1.0).epsilon(1e-8));

    VolumeProfile heavy = u;
    heavy.values *= 1.1;
    CHECK_THROWS_AS(dominance_check(heavy, ball, 1.0), Error);
  }
}

TEST_CASE("constant K") {
  const double pi = oracle::pi;
  CHECK(constant_K(2, 1.0, 1.0, 8 / pi) == 1.0);
  CHECK(constant_K(2, 1.5, 1.5, 3.0) == Approx(1.0).epsilon(1e-15));
  CHECK(rel_close(constant_K(2, 1.0, 2.0, 8 / pi), std::sqrt(3 * pi) / 2, 1e-6));
  const double K = constant_K(2, 1.0, 2.0, 1.7);
  CHECK(rel_close(constant_K(2, 1.0, 2.0, 3.4) / K, std::pow(2.0, -0.25), 1e-9));
  CHECK_THROWS_AS(constant_K(2, 2.0, 1.5, 1.0), Error);

  // both evaluation paths over the acceptance lattice
  for (int n : {2, 3}) {
    for (double p : {1.0, 1.5, 2.0}) {
      const double cpB = cp_unit_ball(n, p);
      for (double q : {p, 2 * p, 4.0}) {
        if (q < p)
          continue;
        for (double f : {0.1, 1.0, 10.0}) {
          const double direct = constant_K(n, p, q, f * cpB);
          const double scaled = khat(n, p, q) * std::pow(f * cpB, k_exponent(n, p, q));
          CHECK(rel_close(direct, scaled, 1e-8));
        }
      }
    }
  }

  // the p = 2 exponent coincides with the eigenvalue exponent -(n/2)(1/p - 1/q)
  for (int n : {2, 3, 4})
    for (double q : {2.0, 3.0, 4.0})
      CHECK(k_exponent(n, 2.0, q) == Approx(-(n / 2.0) * (0.5 - 1 / q)));
}

TEST_CASE("torsion form") {
  const double pi = oracle::pi;
  const TorsionForm disk = torsion_form(2, 2.0, 8 / pi);
  CHECK(disk.P == Approx(pi / 2));
  CHECK(disk.exponent == Approx(0.25));
  CHECK(disk.four_factor == Approx(std::pow(4.0, -0.25)));
  CHECK(rel_close(disk.K, std::sqrt(3 * pi) / 2, 1e-6));

  const TorsionForm flat = torsion_form(2, 1.0, 5.0);
  CHECK(flat.exponent == 0.0);
  CHECK(flat.K == Approx(1.0).epsilon(1e-14));

  for (int n : {2, 3, 4}) {
    CHECK(double(n) / (n + 2) == Approx(-n / alpha(n, 1.0)));
    for (double q : {1.5, 2.0, 4.0})
      for (double cp : {0.5, 3.0, 40.0})
        CHECK(rel_close(torsion_form(n, q, cp).K, constant_K(n, 1.0, q, cp), 1e-12));
  }
}

TEST_CASE("reverse Hoelder report on the disk") {
  const double h = 1.0 / 64;
  for (double p : {1.0, 2.0}) {
    const ReverseHolderReport r = verify_reverse_holder(solved(unit_disk(), p, h), {p, 2 * p});
    CHECK(r.equality_case);
    CHECK(r.passed);
    for (const QReport &q : r.per_q)
      CHECK(std::abs(q.margin) <= 0.02 * r.lhs);
    CHECK(r.per_q[0].margin == 0.0);
    const nlohmann::json j = to_json(r);
    CHECK(j.at("verdict") == "equality case (ball)");
    CHECK(j.at("format") == "sobolev-lab/reverse-holder-report");
  }
}

TEST_CASE("reverse Hoelder report on the square") {
  const SobolevResult &sq = solved(unit_square(), 2.0, 1.0 / 128);
  const ReverseHolderReport r = verify_reverse_holder(sq, {4.0, 2.0, 3.0});
  REQUIRE(r.per_q.size() == 3);
  CHECK(r.per_q[0].q == 2.0); // sorted
  CHECK(r.per_q[0].margin == 0.0);
  for (const QReport &q : r.per_q) {
    CHECK(q.margin >= 0);
    CHECK(q.hlp == "holds");
  }
  CHECK(r.per_q[2].margin > 0);
  // regression value of the q = 4 margin at h = 1/128
  CHECK(r.per_q[2].margin == Approx(3.27e-3).epsilon(0.01));
  CHECK_FALSE(r.equality_case);
  CHECK(r.crossing.crossing_count == 1);
  CHECK(r.volume_ball < r.volume_omega);
  CHECK(r.passed);
  CHECK(r.equimeasurability <= 1e-12);

  std::ostringstream table;
  write_table(table, r);
  CHECK(table.str().find("margin") != std::string::npos);
  CHECK(table.str().find("inequality holds") != std::string::npos);

  // margins depend on u only through u*
  Eigen::VectorXd inside = sq.field.inside_values();
  std::mt19937_64 rng(3);
  std::shuffle(inside.data(), inside.data() + inside.size(), rng);
  SobolevResult shuffled = sq;
  shuffled.field = sq.field.with_inside_values(inside);
  const ReverseHolderReport s = verify_reverse_holder(shuffled, {2.0, 3.0, 4.0});
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(s.per_q[k].margin == r.per_q[k].margin);

  SobolevResult super = sq;
  super.p = 2.5;
  try {
    verify_reverse_holder(super, {3.0});
    FAIL("expected a usage error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::Usage);
    CHECK(std::string(e.what()).find("theorem requires 1 <= p <= 2") != std::string::npos);
  }
  CHECK_THROWS_AS(verify_reverse_holder(sq, {1.5}), Error);
}
