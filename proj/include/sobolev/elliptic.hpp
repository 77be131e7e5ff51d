// elliptic.hpp -- C_p(Omega) and its extremal on masked planar grids.

#ifndef SOBOLEV_ELLIPTIC_HPP
#define SOBOLEV_ELLIPTIC_HPP

#include "sobolev/core.hpp"
#include "sobolev/domain.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

namespace sobolev {

/// A scalar function on a uniform square lattice. Node (i, j) sits at
/// origin + h (i, j) and is stored at j * nx + i. Values vanish off the mask.
struct GriddedField {
  int nx = 0;
  int ny = 0;
  double h = 0;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  Eigen::Array<bool, Eigen::Dynamic, 1> mask;
  Eigen::VectorXd values;

  Eigen::Index index(int i, int j) const { return Eigen::Index(j) * nx + i; }
  Eigen::Vector2d node(int i, int j) const {
    return origin + h * Eigen::Vector2d(i, j);
  }
  double cell_area() const { return h * h; }
  Eigen::Index inside_count() const { return mask.count(); }
  /// |Omega| of the staircase domain: inside nodes times h^2.
  double measure() const { return double(inside_count()) * cell_area(); }
  /// Values at inside nodes, in storage order.
  Eigen::VectorXd inside_values() const;
  /// Same lattice and mask, new inside values (storage order).
  GriddedField with_inside_values(const Eigen::VectorXd &inside) const;
};

/// Masks the nodes strictly inside the domain. The lattice is aligned to
/// integer multiples of h and padded by one node on every side.
GriddedField build_grid(const DomainSpec &spec, double h,
                        Eigen::Index max_nodes = 4'000'000);

struct PoissonOptions {
  double tolerance = 1e-10;
  int max_iterations = 20000;
};

/// The 5-point Dirichlet Laplacian -Delta_h on the inside nodes of a mask,
/// assembled once and solved with conjugate gradients.
class DirichletLaplacian {
public:
  explicit DirichletLaplacian(const GriddedField &grid,
                              PoissonOptions options = {});
  ~DirichletLaplacian();
  DirichletLaplacian(DirichletLaplacian &&) noexcept;
  DirichletLaplacian &operator=(DirichletLaplacian &&) noexcept;

  /// Solves -Delta_h v = rhs on inside nodes; `guess` seeds the iteration.
  Eigen::VectorXd solve(const Eigen::VectorXd &rhs,
                        const Eigen::VectorXd &guess) const;
  Eigen::VectorXd solve(const Eigen::VectorXd &rhs) const;

  const Eigen::SparseMatrix<double> &matrix() const;
  Eigen::Index size() const;
  int last_iterations() const { return last_iterations_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  mutable int last_iterations_ = 0;
};

/// v with -Delta_h v = rhs inside the mask and v = 0 elsewhere.
GriddedField poisson_solve(const GriddedField &grid, const GriddedField &rhs,
                           const PoissonOptions &options = {});

/// Dirichlet energy over lattice edges divided by (h^2 sum |u|^p)^(2/p).
double quotient(const GriddedField &field, double p);

/// (h^2 sum |u|^p)^(1/p) over inside nodes.
double lp_norm(const GriddedField &field, double p);

struct QuotientOptions {
  double tolerance = 1e-10;
  int max_iterations = 500;
  PoissonOptions poisson;
  bool allow_supercritical = false;
};

struct SobolevResult {
  GriddedField field; // ||u||_p = 1
  double cp = 0;
  int iterations = 0;
  double residual = 0; // last relative change in cp or in u (sup norm)
  double p = 2;
  std::vector<double> trajectory;
};

/// Fixed-point iteration u <- normalize_p((-Delta_h)^-1 u^(p-1)) from the
/// constant initial guess; inverse power iteration when p = 2.
SobolevResult minimize_quotient(const GriddedField &grid, double p,
                                const QuotientOptions &options = {});

/// JSON header line, then ny rows of nx values (row j = 0 first); NaN marks
/// nodes outside the mask.
void write_field(std::ostream &out, const GriddedField &field,
                 const nlohmann::json &extra = nlohmann::json::object());
GriddedField read_field(std::istream &in, nlohmann::json *header = nullptr);

} // namespace sobolev

#endif // SOBOLEV_ELLIPTIC_HPP
