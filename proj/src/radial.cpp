#include "sobolev/radial.hpp"

#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

namespace sobolev {

namespace {

using State = Eigen::Vector3d; // (y, y', integral of y^p r^(n-1))

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer, Norsett & Wanner).
constexpr double d1 = -12715105075.0 / 11282082432,
                 d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072,
                 d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

struct LaneEmden {
  int n;
  double p;

  // Odd continuation of y^(p-1) past the zero; only the trial stages of the
  // bracketing step ever see y <= 0.
  double source(double y) const {
    if (p == 1.0)
      return y > 0 ? 1.0 : 0.0;
    return std::copysign(std::pow(std::abs(y), p - 1), y);
  }

  State operator()(double r, const State &x) const {
    State dx;
    dx(0) = x(1);
    dx(1) = -double(n - 1) / r * x(1) - source(x(0));
    dx(2) = positive_power(x(0), p) * std::pow(r, n - 1);
    return dx;
  }
};

struct Trial {
  State y1;
  State k1, k7;
  double err = 0;
  DenseStep dense;
};

Trial dopri_step(const LaneEmden &f, double r, const State &y, const State &k1,
                 double h, double tol) {
  const State k2 = f(r + c2 * h, y + h * a21 * k1);
  const State k3 = f(r + c3 * h, y + h * (a31 * k1 + a32 * k2));
  const State k4 = f(r + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const State k5 =
      f(r + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const State k6 = f(r + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 +
                                     a64 * k4 + a65 * k5));
  Trial t;
  t.y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
  t.k1 = k1;
  t.k7 = f(r + h, t.y1);
  const State err =
      h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * t.k7);
  const State scale =
      (tol + tol * y.cwiseAbs().cwiseMax(t.y1.cwiseAbs()).array()).matrix();
  t.err = std::sqrt(err.cwiseQuotient(scale).squaredNorm() / 3.0);

  const State ydiff = t.y1 - y;
  const State bspl = h * k1 - ydiff;
  t.dense.r0 = r;
  t.dense.h = h;
  t.dense.coeff[0] = y;
  t.dense.coeff[1] = ydiff;
  t.dense.coeff[2] = bspl;
  t.dense.coeff[3] = ydiff - h * t.k7 - bspl;
  t.dense.coeff[4] =
      h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * t.k7);
  return t;
}

constexpr double kSeriesStart = 1e-6;
constexpr double kZeroTolerance = 1e-13;

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 4> kGaussNodes = {
    0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
    0.9602898564975363};
constexpr std::array<double, 4> kGaussWeights = {
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
    0.1012285362903763};

} // namespace

Eigen::Vector3d DenseStep::operator()(double r) const {
  const double theta = (r - r0) / h;
  const double theta1 = 1 - theta;
  return coeff[0] +
         theta * (coeff[1] +
                  theta1 * (coeff[2] +
                            theta * (coeff[3] + theta1 * coeff[4])));
}

Eigen::Vector2d RawShot::state(double at) const {
  if (at <= r(0))
    return {1.0 - at * at / (2.0 * n), -at / n};
  auto it = std::upper_bound(
      steps.begin(), steps.end(), at,
      [](double x, const DenseStep &s) { return x < s.r0; });
  const DenseStep &step = it == steps.begin() ? steps.front() : *(it - 1);
  return step(std::min(at, R0)).head<2>();
}

RawShot shoot(int n, double p, const ShootOptions &options) {
  if (!admissible(n, p))
    throw usage_error(admissibility_message(n, p));
  if (p > 2 && !options.allow_supercritical)
    throw usage_error("p = " + std::to_string(p) +
                      " > 2 requires --experimental-supercritical");
  if (!(options.tol > 0))
    throw usage_error("shoot: tolerance must be positive");

  const LaneEmden f{n, p};
  const double eps = kSeriesStart;
  double r = eps;
  State y(1.0 - eps * eps / (2.0 * n), -eps / n, std::pow(eps, n) / n);
  State k1 = f(r, y);
  double h = 1e-4;

  std::vector<double> rs{r}, ys{y(0)}, dys{y(1)};
  RawShot shot;
  shot.n = n;
  shot.p = p;
  shot.tol = options.tol;

  for (;;) {
    if (r > options.max_radius)
      throw Error(ErrorKind::Solver, "no zero found before r = " +
                                         std::to_string(options.max_radius),
                  "shoot");
    Trial t = dopri_step(f, r, y, k1, h, options.tol);
    if (!(t.err <= 1.0)) {
      const double fac = std::isfinite(t.err)
                             ? std::max(0.2, 0.9 * std::pow(t.err, -0.2))
                             : 0.2;
      h *= fac;
      if (h < 1e-14)
        throw Error(ErrorKind::Solver, "step size underflow", "shoot");
      continue;
    }
    if (t.y1(0) > 0) {
      shot.steps.push_back(t.dense);
      r += h;
      y = t.y1;
      k1 = t.k7;
      rs.push_back(r);
      ys.push_back(y(0));
      dys.push_back(y(1));
      const double fac = t.err > 0 ? 0.9 * std::pow(t.err, -0.2) : 5.0;
      h *= std::clamp(fac, 0.2, 5.0);
      continue;
    }

    // The accepted trial step brackets the zero: bisect on its length.
    double lo = 0, hi = h;
    while (hi - lo > kZeroTolerance * std::max(1.0, r)) {
      const double mid = 0.5 * (lo + hi);
      if (dopri_step(f, r, y, k1, mid, options.tol).y1(0) > 0)
        lo = mid;
      else
        hi = mid;
    }
    const double last = 0.5 * (lo + hi);
    Trial fin = dopri_step(f, r, y, k1, last, options.tol);
    shot.steps.push_back(fin.dense);
    r += last;
    rs.push_back(r);
    ys.push_back(fin.y1(0));
    dys.push_back(fin.y1(1));
    shot.R0 = r;
    shot.radial_moment = fin.y1(2);
    break;
  }

  shot.r = Eigen::Map<Eigen::VectorXd>(rs.data(), Eigen::Index(rs.size()));
  shot.y = Eigen::Map<Eigen::VectorXd>(ys.data(), Eigen::Index(ys.size()));
  shot.dy = Eigen::Map<Eigen::VectorXd>(dys.data(), Eigen::Index(dys.size()));
  return shot;
}

RadialProfile normalize_to_ball(const RawShot &shot, double radius,
                                int samples) {
  if (!(radius > 0))
    throw usage_error("normalize_to_ball: radius must be positive");
  if (samples < 3)
    throw usage_error("normalize_to_ball: need at least three samples");
  const int n = shot.n;
  const double p = shot.p;
  const double I = n * unit_ball_volume(n) * shot.radial_moment;
  if (!(I > 0))
    throw Error(ErrorKind::Solver, "nonpositive L^p integral", "normalize");

  const double dilation = shot.R0 / radius; // y is sampled at dilation * r
  const double amplitude = std::pow(std::pow(dilation, n) / I, 1.0 / p);

  RadialProfile out;
  out.n = n;
  out.p = p;
  out.radius = radius;
  out.r.resize(samples);
  out.phi.resize(samples);
  out.dphi.resize(samples);
  for (int i = 0; i < samples; ++i) {
    const double ri = radius * double(i) / double(samples - 1);
    const Eigen::Vector2d s = shot.state(dilation * ri);
    out.r(i) = ri;
    out.phi(i) = amplitude * s(0);
    out.dphi(i) = amplitude * dilation * s(1);
  }
  out.r(samples - 1) = radius;
  out.phi(samples - 1) = 0.0;
  out.Lambda = dilation * dilation * std::pow(amplitude, 2 - p);
  out.cp_ball = out.Lambda;
  out.normalization = std::pow(amplitude, p) * I / std::pow(dilation, n);
  return out;
}

double cp_unit_ball(int n, double p, const ShootOptions &options) {
  return normalize_to_unit_ball(shoot(n, p, options), 3).cp_ball;
}

double cp_ball(int n, double p, double radius, const ShootOptions &options) {
  return normalize_to_ball(shoot(n, p, options), radius, 3).cp_ball;
}

double RadialProfile::operator()(double at) const {
  if (at < 0 || at >= radius)
    return 0.0;
  const Eigen::Index last = r.size() - 1;
  const double dr = radius / double(last);
  const Eigen::Index i = std::min<Eigen::Index>(Eigen::Index(at / dr), last - 1);
  const double t = (at - r(i)) / dr;
  const double t2 = t * t, t3 = t2 * t;
  const double v = (2 * t3 - 3 * t2 + 1) * phi(i) +
                   (t3 - 2 * t2 + t) * dr * dphi(i) +
                   (-2 * t3 + 3 * t2) * phi(i + 1) +
                   (t3 - t2) * dr * dphi(i + 1);
  return std::max(v, 0.0);
}

double ball_moment(const RadialProfile &profile, double q) {
  const int n = profile.n;
  const Eigen::Index cells = profile.r.size() - 1;
  const double dr = profile.radius / double(cells);
  double total = 0, carry = 0;
  for (Eigen::Index i = 0; i < cells; ++i) {
    const double mid = profile.r(i) + 0.5 * dr;
    double cell = 0;
    for (std::size_t k = 0; k < kGaussNodes.size(); ++k)
      for (double sign : {-1.0, 1.0}) {
        const double x = mid + sign * 0.5 * dr * kGaussNodes[k];
        cell += kGaussWeights[k] * positive_power(profile(x), q) *
                std::pow(x, n - 1);
      }
    const double y = 0.5 * dr * cell - carry;
    const double t = total + y;
    carry = (t - total) - y;
    total = t;
  }
  return n * unit_ball_volume(n) * total;
}

double ball_volume_value(const RadialProfile &unit, double rho, double s) {
  if (unit.radius != 1.0)
    throw usage_error("ball_volume_value: profile must live on the unit ball");
  const int n = unit.n;
  const double omega = unit_ball_volume(n);
  if (s < 0 || s >= omega * std::pow(rho, n))
    return 0.0;
  const double x = std::pow(s / omega, 1.0 / n);
  return std::pow(rho, -double(n) / unit.p) * unit(x / rho);
}

VolumeProfile volume_profile(const RadialProfile &unit, double rho,
                             int samples) {
  if (!(rho > 0))
    throw usage_error("volume_profile: radius must be positive");
  if (samples <= 0)
    samples = int(unit.r.size());
  if (samples < 2)
    throw usage_error("volume_profile: need at least two samples");
  const double total = unit_ball_volume(unit.n) * std::pow(rho, unit.n);
  VolumeProfile out;
  out.kind = Interpolation::Linear;
  out.total_volume = total;
  out.s.resize(samples);
  out.values.resize(samples);
  for (int i = 0; i < samples; ++i) {
    out.s(i) = total * double(i) / double(samples - 1);
    out.values(i) = ball_volume_value(unit, rho, out.s(i));
  }
  out.s(samples - 1) = total;
  out.values(samples - 1) = 0.0;
  // Hermite overshoot can break monotonicity at rounding level only.
  for (int i = 1; i < samples; ++i)
    out.values(i) = std::min(out.values(i), out.values(i - 1));
  return out;
}

double verify_integro_differential(const VolumeProfile &vp, double cp, int n,
                                   double p, double s_min) {
  check_volume_profile(vp, "verify_integro_differential");
  if (vp.kind != Interpolation::Linear)
    throw usage_error("verify_integro_differential expects sampled profiles");
  const Eigen::Index m = vp.size();
  if (s_min <= 0)
    s_min = vp.total_volume / 16;
  const double pref =
      cp / (double(n) * n * std::pow(unit_ball_volume(n), 2.0 / n));
  const Eigen::VectorXd running = cumulative_power_integral(vp, p - 1, vp.s);
  double worst = 0;
  for (Eigen::Index i = 1; i + 1 < m; ++i) {
    if (vp.s(i) < s_min)
      continue;
    const double lhs =
        (vp.values(i) - vp.values(i - 1)) / (vp.s(i) - vp.s(i - 1));
    const double rhs =
        -pref * std::pow(vp.s(i), -2.0 + 2.0 / n) * running(i);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

void write_radial_profile(std::ostream &out, const RadialProfile &profile,
                          const nlohmann::json &extra) {
  nlohmann::json header = {{"format", "sobolev-lab/radial-profile"},
                           {"version", csv::kFormatVersion},
                           {"n", profile.n},
                           {"p", profile.p},
                           {"radius", profile.radius},
                           {"Lambda", profile.Lambda},
                           {"cp_ball", profile.cp_ball},
                           {"normalization", profile.normalization},
                           {"samples", profile.r.size()}};
  header.update(extra);
  out << header.dump() << "\n" << "r,phi,dphi\n";
  for (Eigen::Index i = 0; i < profile.r.size(); ++i)
    out << csv::number(profile.r(i)) << ',' << csv::number(profile.phi(i))
        << ',' << csv::number(profile.dphi(i)) << '\n';
}

void write_volume_profile(std::ostream &out, const VolumeProfile &profile,
                          const nlohmann::json &extra) {
  nlohmann::json header = {
      {"format", "sobolev-lab/volume-profile"},
      {"version", csv::kFormatVersion},
      {"kind", profile.kind == Interpolation::Step ? "step" : "linear"},
      {"total_volume", profile.total_volume},
      {"samples", profile.size()}};
  header.update(extra);
  out << header.dump() << "\n" << "s,value\n";
  for (Eigen::Index i = 0; i < profile.size(); ++i)
    out << csv::number(profile.s(i)) << ',' << csv::number(profile.values(i))
        << '\n';
}

VolumeProfile read_volume_profile(std::istream &in) {
  const nlohmann::json header =
      csv::read_header(in, "sobolev-lab/volume-profile");
  VolumeProfile out;
  out.kind = header.at("kind").get<std::string>() == "step"
                 ? Interpolation::Step
                 : Interpolation::Linear;
  out.total_volume = header.at("total_volume").get<double>();
  std::string line;
  std::getline(in, line);
  if (line != "s,value")
    throw usage_error("volume profile: expected column header s,value");
  std::vector<double> s, v;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    const auto cells = csv::split(line);
    if (cells.size() != 2)
      throw usage_error("volume profile: expected two columns");
    s.push_back(csv::parse_number(cells[0]));
    v.push_back(csv::parse_number(cells[1]));
  }
  out.s = Eigen::Map<Eigen::VectorXd>(s.data(), Eigen::Index(s.size()));
  out.values = Eigen::Map<Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
  check_volume_profile(out, "volume profile file");
  return out;
}

} // namespace sobolev
