// hlp_pairs.hpp -- seeded random decreasing step functions for the HLP suite.

#ifndef SOBOLEV_TESTS_HLP_PAIRS_HPP
#define SOBOLEV_TESTS_HLP_PAIRS_HPP

#include "sobolev/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace hlp_pairs {

inline sobolev::VolumeProfile steps(std::vector<double> values,
                                    std::vector<double> widths) {
  sobolev::VolumeProfile out;
  out.kind = sobolev::Interpolation::Step;
  out.values = Eigen::Map<Eigen::VectorXd>(values.data(), Eigen::Index(values.size()));
  out.s.resize(out.values.size());
  double at = 0;
  for (std::size_t k = 0; k < widths.size(); ++k) {
    out.s(Eigen::Index(k)) = at;
    at += widths[k];
  }
  out.total_volume = at;
  return out;
}

struct Tally {
  int accepted = 0;
  int draws = 0;
  int counterexamples = 0;
};

/// Draws pairs (f, g) on a common interval until `wanted` of them satisfy the
/// q1 dominance, then checks the conclusion at q2 in {q1, 2 q1, 5 q1}. Half
/// of the candidates flatten g^q1 over blocks of cells, which is dominated.
class Generator {
public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  Tally run(double q1, int wanted) {
    Tally t;
    while (t.accepted < wanted && t.draws < 200 * wanted) {
      ++t.draws;
      const double total = 0.5 + 2 * unit_(rng_);
      const sobolev::VolumeProfile g = random_profile(total);
      const sobolev::VolumeProfile f =
          t.draws % 2 ? flattened(g, q1) : random_profile(total);
      if (!sobolev::hlp_dominates(f, g, q1))
        continue;
      ++t.accepted;
      for (double q2 : {q1, 2 * q1, 5 * q1})
        if (!sobolev::hlp_conclusion_check(f, g, q1, q2).holds())
          ++t.counterexamples;
    }
    return t;
  }

private:
  sobolev::VolumeProfile random_profile(double total) {
    const int m = cells_(rng_);
    std::vector<double> v(m), w(m);
    double sum = 0;
    for (int k = 0; k < m; ++k) {
      v[k] = 3 * unit_(rng_);
      w[k] = 0.05 + unit_(rng_);
      sum += w[k];
    }
    std::sort(v.begin(), v.end(), std::greater<>());
    for (double &x : w)
      x *= total / sum;
    return steps(v, w);
  }

  sobolev::VolumeProfile flattened(const sobolev::VolumeProfile &g, double q1) {
    sobolev::VolumeProfile f = g;
    const Eigen::VectorXd knots = sobolev::breakpoints(g);
    Eigen::Index k = 0;
    while (k < g.size()) {
      const Eigen::Index len = std::min<Eigen::Index>(g.size() - k, 1 + cells_(rng_) % 4);
      double mass = 0, width = 0;
      for (Eigen::Index j = k; j < k + len; ++j) {
        const double wj = knots(j + 1) - knots(j);
        mass += std::pow(g.values(j), q1) * wj;
        width += wj;
      }
      for (Eigen::Index j = k; j < k + len; ++j)
        f.values(j) = std::pow(mass / width, 1.0 / q1) * (1 - 0.1 * unit_(rng_));
      k += len;
    }
    for (Eigen::Index j = 1; j < f.size(); ++j)
      f.values(j) = std::min(f.values(j), f.values(j - 1));
    return f;
  }

  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::uniform_int_distribution<int> cells_{1, 12};
};

} // namespace hlp_pairs

#endif // SOBOLEV_TESTS_HLP_PAIRS_HPP
