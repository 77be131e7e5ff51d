#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "sobolev/radial.hpp"

#include <sstream>

using namespace sobolev;
using doctest::Approx;

namespace {
bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::abs(b);
}
} // namespace

TEST_CASE("shoot: closed-form first zeros") {
  const RawShot torsion = shoot(2, 1.0);
  CHECK(rel_close(torsion.R0, 2.0, 1e-11));
  // y = 1 - r^2/4 exactly; check the continuous extension too.
  for (double r : {0.3, 1.0, 1.7, 1.99})
    CHECK(torsion.state(r)(0) == Approx(1 - r * r / 4).epsilon(1e-11));

  CHECK(rel_close(shoot(2, 2.0).R0, oracle::j0(), 1e-10));

  const RawShot sinc = shoot(3, 2.0);
  CHECK(rel_close(sinc.R0, oracle::pi, 1e-10));
  for (double r : {0.5, 1.5, 2.5, 3.0})
    CHECK(std::abs(sinc.state(r)(0) - std::sin(r) / r) < 1e-10);

  // nodes are strictly decreasing up to the zero
  for (const auto &shot : {torsion, sinc, shoot(2, 1.5), shoot(4, 1.2)}) {
    CHECK(shot.y(0) == Approx(1.0).epsilon(1e-11));
    for (Eigen::Index i = 1; i < shot.y.size(); ++i)
      REQUIRE(shot.y(i) < shot.y(i - 1));
    CHECK(std::abs(shot.y(shot.y.size() - 1)) < 1e-11);
  }
}

TEST_CASE("shoot: exponent gate") {
  CHECK_THROWS_AS(shoot(3, 6.0), Error);
  CHECK_THROWS_AS(shoot(2, 0.5), Error);
  CHECK_THROWS_AS(shoot(2, 2.5), Error);
  ShootOptions lifted;
  lifted.allow_supercritical = true;
  const RawShot sup = shoot(2, 3.0, lifted);
  CHECK(sup.R0 > 0);
}

TEST_CASE("normalization and Lambda") {
  const double j0 = oracle::j0();
  const RadialProfile bessel = normalize_to_unit_ball(shoot(2, 2.0));
  CHECK(rel_close(bessel.Lambda, j0 * j0, 1e-9));

  const RadialProfile torsion = normalize_to_unit_ball(shoot(2, 1.0));
  CHECK(rel_close(torsion.cp_ball, 8 / oracle::pi, 1e-10));
  // phi = (2/pi)(1 - r^2)
  for (Eigen::Index i = 0; i < torsion.r.size(); i += 97) {
    const double r = torsion.r(i);
    CHECK(std::abs(torsion.phi(i) - 2 / oracle::pi * (1 - r * r)) < 1e-10);
  }

  CHECK(rel_close(cp_unit_ball(3, 1.0), 45 / (4 * oracle::pi), 1e-9));
  for (int n = 2; n <= 5; ++n)
    CHECK(rel_close(cp_unit_ball(n, 1.0), oracle::torsion_cp_unit_ball(n), 1e-9));
  CHECK(rel_close(cp_unit_ball(3, 2.0), oracle::pi * oracle::pi, 1e-9));
}

TEST_CASE("p = 2 matches the squared Bessel zero") {
  for (int n = 2; n <= 5; ++n) {
    const double j = oracle::ball_bessel_zero(n);
    CHECK(rel_close(cp_unit_ball(n, 2.0), j * j, 1e-9));
  }
}

TEST_CASE("profile invariants") {
  for (int n : {2, 3, 4}) {
    for (double p : {1.0, 1.3, 1.5, 2.0}) {
      CAPTURE(n);
      CAPTURE(p);
      const RadialProfile prof = normalize_to_unit_ball(shoot(n, p));
      CHECK(prof.phi(prof.phi.size() - 1) == 0.0);
      CHECK(prof.phi(0) == prof.phi.maxCoeff());
      for (Eigen::Index i = 1; i < prof.phi.size(); ++i)
        REQUIRE(prof.phi(i) < prof.phi(i - 1));
      CHECK(std::abs(prof.normalization - 1) < 1e-12);
      // Gauss-Legendre on the interpolant, independent of the ODE moment.
      CHECK(std::abs(ball_moment(prof, p) - 1) < 1e-8);
      // Richardson-extrapolated trapezoid on the raw samples.
      const Eigen::Index m = prof.r.size();
      const Eigen::VectorXd integrand =
          (prof.phi.array().pow(p) * prof.r.array().pow(n - 1)).matrix();
      const double fine = profile_integral(prof.r, integrand, 1.0);
      Eigen::VectorXd rc(m / 2 + 1), ic(m / 2 + 1);
      for (Eigen::Index i = 0; i <= m / 2; ++i) {
        rc(i) = prof.r(2 * i);
        ic(i) = integrand(2 * i);
      }
      const double coarse = profile_integral(rc, ic, 1.0);
      const double extrap = n * oracle::omega(n) * (4 * fine - coarse) / 3;
      CHECK(std::abs(extrap - 1) < 1e-6);
      // ODE residual by central differences of the stored derivative.
      const double dr = prof.r(1);
      double worst = 0;
      // phi^(p-1) is not smooth at the boundary; stay clear of it.
      for (Eigen::Index i = 8; prof.r(i) < 0.9; ++i) {
        const double d2 = (prof.dphi(i + 1) - prof.dphi(i - 1)) / (2 * dr);
        const double res = d2 + (n - 1) / prof.r(i) * prof.dphi(i) +
                           prof.Lambda * std::pow(prof.phi(i), p - 1);
        worst = std::max(worst, std::abs(res));
      }
      CHECK(worst < 1e-4);
    }
  }
}

TEST_CASE("scaling law on balls") {
  for (int n : {2, 3}) {
    for (double p : {1.0, 1.5, 2.0}) {
      const double base = cp_unit_ball(n, p);
      for (double r : {0.5, 2.0, 3.0})
        CHECK(rel_close(cp_ball(n, p, r) / base, std::pow(r, alpha(n, p)), 1e-8));
    }
  }
}

TEST_CASE("refinement in the integrator tolerance") {
  for (double p : {1.0, 1.5, 2.0}) {
    ShootOptions coarse, fine;
    coarse.tol = 1e-10;
    fine.tol = 0.5e-10;
    const double a = cp_unit_ball(2, p, coarse);
    const double b = cp_unit_ball(2, p, fine);
    CHECK(std::abs(a - b) < 10 * coarse.tol * a);
  }
}

TEST_CASE("volume profile") {
  const RadialProfile torsion = normalize_to_unit_ball(shoot(2, 1.0));
  const VolumeProfile vp = volume_profile(torsion, 1.0);
  CHECK(vp.total_volume == Approx(oracle::pi));
  CHECK(vp.values(0) == torsion.phi(0));
  CHECK(vp(oracle::pi) == 0.0);
  // phi*(s) = (2/pi)(1 - s/pi)
  for (double s : {0.1, 1.0, 2.0, 3.0})
    CHECK(std::abs(vp(s) - 2 / oracle::pi * (1 - s / oracle::pi)) < 1e-10);
  check_volume_profile(vp);

  // radius-rho extremal keeps unit L^p norm
  const RadialProfile bessel = normalize_to_unit_ball(shoot(2, 1.5));
  for (double rho : {0.4, 1.0, 2.5}) {
    const VolumeProfile scaled = volume_profile(bessel, rho, 8193);
    CHECK(power_integral(scaled, 1.5) == Approx(1.0).epsilon(1e-6));
    CHECK(scaled.total_volume == Approx(oracle::pi * rho * rho));
  }
  CHECK_THROWS_AS(volume_profile(bessel, 0.0), Error);
}

TEST_CASE("integro-differential identity on balls") {
  // n = 2, p = 1: both sides equal -2/pi^2.
  const RadialProfile torsion = normalize_to_unit_ball(shoot(2, 1.0));
  const VolumeProfile tv = volume_profile(torsion, 1.0);
  CHECK(verify_integro_differential(tv, torsion.cp_ball, 2, 1.0) < 1e-8);

  // zero profile: both sides vanish
  VolumeProfile zero = tv;
  zero.values.setZero();
  CHECK(verify_integro_differential(zero, 1.0, 2, 1.5) == 0.0);

  // first-order convergence for a curved profile
  for (double p : {1.5, 2.0}) {
    const RadialProfile prof = normalize_to_unit_ball(shoot(2, p));
    const double fine =
        verify_integro_differential(volume_profile(prof, 1.0, 2049), prof.cp_ball, 2, p);
    const double coarse =
        verify_integro_differential(volume_profile(prof, 1.0, 1025), prof.cp_ball, 2, p);
    CHECK(fine < 1e-3);
    CHECK(coarse / fine == Approx(2.0).epsilon(0.15));
  }
}

TEST_CASE("profile files") {
  const RadialProfile prof = normalize_to_unit_ball(shoot(2, 2.0), 33);
  std::stringstream ss;
  write_radial_profile(ss, prof, {{"config", {{"n", 2}}}});
  std::string header;
  std::getline(ss, header);
  const auto j = nlohmann::json::parse(header);
  CHECK(j.at("format") == "sobolev-lab/radial-profile");
  CHECK(j.at("samples") == 33);
  CHECK(j.at("config").at("n") == 2);

  const VolumeProfile vp = volume_profile(prof, 0.7);
  std::stringstream vs;
  write_volume_profile(vs, vp);
  const VolumeProfile back = read_volume_profile(vs);
  CHECK(back.values == vp.values);
  CHECK(back.s == vp.s);
  CHECK(back.total_volume == vp.total_volume);
}
