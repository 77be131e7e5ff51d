// core.hpp -- shared numeric primitives for the sobolev library.

#ifndef SOBOLEV_CORE_HPP
#define SOBOLEV_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sobolev {

/// Failure classes; the CLI maps them onto exit codes 2, 3 and 4.
enum class ErrorKind { Usage, Solver, Verification };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what, std::string stage = {})
      : std::runtime_error(stage.empty() ? what : stage + ": " + what),
        kind_(kind), stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string &stage() const noexcept { return stage_; }

private:
  ErrorKind kind_;
  std::string stage_;
};

inline Error usage_error(const std::string &what) {
  return Error(ErrorKind::Usage, what);
}

/// True iff 1 <= p and, for n >= 3, p lies below the critical exponent 2n/(n-2).
template <typename Scalar = double>
constexpr bool admissible(int n, Scalar p) {
  if (n < 2 || !(p >= Scalar(1)))
    return false;
  if (n == 2)
    return true;
  return p < Scalar(2 * n) / Scalar(n - 2);
}

inline std::string admissibility_message(int n, double p) {
  if (n < 2)
    return "dimension n must be >= 2, got " + std::to_string(n);
  if (!(p >= 1.0))
    return "exponent p must satisfy p >= 1, got " + std::to_string(p);
  return "exponent p = " + std::to_string(p) +
         " is not below the critical exponent 2n/(n-2) = " +
         std::to_string(2.0 * n / (n - 2)) + " for n = " + std::to_string(n);
}

/// Exponent of the dilation law C_p(r Omega) = r^alpha C_p(Omega).
template <typename Scalar = double>
Scalar alpha(int n, Scalar p) {
  if (!admissible(n, p))
    throw usage_error(admissibility_message(n, double(p)));
  return Scalar(n - 2) - Scalar(2 * n) / p;
}

/// Volume of the unit ball in R^n.
template <typename Scalar = double>
Scalar unit_ball_volume(int n) {
  if (n < 1)
    throw usage_error("unit_ball_volume: dimension must be >= 1");
  using std::pow;
  using std::tgamma;
  return pow(std::numbers::pi_v<Scalar>, Scalar(n) / 2) /
         tgamma(Scalar(n) / 2 + 1);
}

/// Dimension and exponents of one run. q is only meaningful for comparisons.
struct Exponents {
  int n = 2;
  double p = 2.0;
  double q = 2.0;

  Exponents(int n_, double p_, double q_) : n(n_), p(p_), q(q_) {
    if (!admissible(n, p))
      throw usage_error(admissibility_message(n, p));
  }

  double alpha() const { return sobolev::alpha(n, p); }
};

/// Neumaier-compensated sum of a dense expression.
template <typename Derived>
typename Derived::Scalar compensated_sum(const Eigen::DenseBase<Derived> &x) {
  using Scalar = typename Derived::Scalar;
  Scalar sum(0), c(0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Scalar v = x.derived().coeff(i);
    const Scalar t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      c += (sum - t) + v;
    else
      c += (v - t) + sum;
    sum = t;
  }
  return sum + c;
}

/// f^power with the convention 0^0 = 0, so vanishing tails never count as mass.
template <typename Scalar>
inline Scalar positive_power(Scalar f, Scalar power) {
  return f > Scalar(0) ? std::pow(f, power) : Scalar(0);
}

namespace detail {
template <typename DerivedT, typename DerivedF>
void check_profile(const Eigen::MatrixBase<DerivedT> &t,
                   const Eigen::MatrixBase<DerivedF> &f,
                   typename DerivedF::Scalar power) {
  if (t.size() != f.size() || t.size() < 2)
    throw usage_error("profile_integral: need at least two matching samples");
  if (!t.allFinite() || !f.allFinite())
    throw usage_error("profile_integral: non-finite samples");
  for (Eigen::Index i = 1; i < t.size(); ++i)
    if (!(t(i) > t(i - 1)))
      throw usage_error("profile_integral: grid must be strictly increasing");
  if (power != std::round(power) && (f.array() < 0).any())
    throw usage_error(
        "profile_integral: negative samples with non-integer power");
}
} // namespace detail

/// Composite trapezoid of f(t)^power over the sample grid t.
template <typename DerivedT, typename DerivedF>
typename DerivedF::Scalar
profile_integral(const Eigen::MatrixBase<DerivedT> &t,
                 const Eigen::MatrixBase<DerivedF> &f,
                 typename DerivedF::Scalar power) {
  using Scalar = typename DerivedF::Scalar;
  detail::check_profile(t, f, power);
  const Eigen::Index m = t.size();
  const auto g = f.array().pow(power).matrix().eval();
  const auto dt = (t.tail(m - 1) - t.head(m - 1)).eval();
  const auto mid = (Scalar(0.5) * (g.tail(m - 1) + g.head(m - 1))).eval();
  return compensated_sum(dt.cwiseProduct(mid));
}

/// Running trapezoid integral of f^power; entry i holds the integral up to t(i).
template <typename DerivedT, typename DerivedF>
Eigen::Matrix<typename DerivedF::Scalar, Eigen::Dynamic, 1>
cumulative_profile_integral(const Eigen::MatrixBase<DerivedT> &t,
                            const Eigen::MatrixBase<DerivedF> &f,
                            typename DerivedF::Scalar power) {
  using Scalar = typename DerivedF::Scalar;
  detail::check_profile(t, f, power);
  const Eigen::Index m = t.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(m);
  out(0) = 0;
  Scalar prev = std::pow(f(0), power);
  for (Eigen::Index i = 1; i < m; ++i) {
    const Scalar cur = std::pow(f(i), power);
    out(i) = out(i - 1) + Scalar(0.5) * (t(i) - t(i - 1)) * (prev + cur);
    prev = cur;
  }
  return out;
}

} // namespace sobolev

#endif // SOBOLEV_CORE_HPP
