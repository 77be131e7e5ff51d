#include "sobolev/elliptic.hpp"

#include "csv.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace sobolev {

Eigen::VectorXd GriddedField::inside_values() const {
  Eigen::VectorXd out(inside_count());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    if (mask(i))
      out(k++) = values(i);
  return out;
}

GriddedField GriddedField::with_inside_values(const Eigen::VectorXd &inside) const {
  if (inside.size() != inside_count())
    throw usage_error("with_inside_values: size does not match the mask");
  GriddedField out = *this;
  out.values.setZero();
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    if (mask(i))
      out.values(i) = inside(k++);
  return out;
}

GriddedField build_grid(const DomainSpec &spec, double h,
                        Eigen::Index max_nodes) {
  if (!(h > 0) || !std::isfinite(h))
    throw usage_error("grid spacing h must be positive");
  validate(spec);
  const BoundingBox box = bounding_box(spec);
  const long imin = long(std::floor(box.lower.x() / h)) - 1;
  const long jmin = long(std::floor(box.lower.y() / h)) - 1;
  const long imax = long(std::ceil(box.upper.x() / h)) + 1;
  const long jmax = long(std::ceil(box.upper.y() / h)) + 1;
  const long nx = imax - imin + 1, ny = jmax - jmin + 1;
  if (double(nx) * double(ny) > double(max_nodes))
    throw usage_error("grid of " + std::to_string(nx) + " x " +
                      std::to_string(ny) + " nodes exceeds the node budget");

  GriddedField g;
  g.nx = int(nx);
  g.ny = int(ny);
  g.h = h;
  g.origin = Eigen::Vector2d(double(imin) * h, double(jmin) * h);
  g.mask.setConstant(nx * ny, false);
  g.values.setZero(nx * ny);
  for (long j = 0; j < ny; ++j)
    for (long i = 0; i < nx; ++i) {
      // Lattice coordinates as exact integer multiples of h.
      const Eigen::Vector2d x(double(imin + i) * h, double(jmin + j) * h);
      g.mask(g.index(int(i), int(j))) = contains(spec, x);
    }
  if (g.inside_count() == 0)
    throw usage_error("domain unresolved at this h: no lattice node inside");
  return g;
}

struct DirichletLaplacian::Impl {
  Eigen::SparseMatrix<double> A;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                           Eigen::Lower | Eigen::Upper>
      cg;
  PoissonOptions options;
};

DirichletLaplacian::DirichletLaplacian(const GriddedField &grid,
                                       PoissonOptions options)
    : impl_(std::make_unique<Impl>()) {
  impl_->options = options;
  std::vector<Eigen::Index> slot(grid.mask.size(), -1);
  Eigen::Index m = 0;
  for (Eigen::Index i = 0; i < grid.mask.size(); ++i)
    if (grid.mask(i))
      slot[i] = m++;

  const double inv_h2 = 1.0 / (grid.h * grid.h);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(std::size_t(5 * m));
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const Eigen::Index row = slot[grid.index(i, j)];
      if (row < 0)
        continue;
      entries.emplace_back(row, row, 4.0 * inv_h2);
      const int di[4] = {-1, 1, 0, 0};
      const int dj[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const int ii = i + di[k], jj = j + dj[k];
        if (ii < 0 || jj < 0 || ii >= grid.nx || jj >= grid.ny)
          continue;
        const Eigen::Index col = slot[grid.index(ii, jj)];
        if (col >= 0)
          entries.emplace_back(row, col, -inv_h2);
      }
    }
  impl_->A.resize(m, m);
  impl_->A.setFromTriplets(entries.begin(), entries.end());
  impl_->A.makeCompressed();
  impl_->cg.setTolerance(options.tolerance);
  impl_->cg.setMaxIterations(options.max_iterations);
  impl_->cg.compute(impl_->A);
}

DirichletLaplacian::~DirichletLaplacian() = default;
DirichletLaplacian::DirichletLaplacian(DirichletLaplacian &&) noexcept = default;
DirichletLaplacian &
DirichletLaplacian::operator=(DirichletLaplacian &&) noexcept = default;

const Eigen::SparseMatrix<double> &DirichletLaplacian::matrix() const {
  return impl_->A;
}

Eigen::Index DirichletLaplacian::size() const { return impl_->A.rows(); }

Eigen::VectorXd DirichletLaplacian::solve(const Eigen::VectorXd &rhs,
                                          const Eigen::VectorXd &guess) const {
  if (rhs.size() != size() || guess.size() != size())
    throw usage_error("poisson_solve: right-hand side does not match the mask");
  if (!rhs.allFinite())
    throw usage_error("poisson_solve: non-finite right-hand side");
  if (rhs.squaredNorm() == 0) {
    last_iterations_ = 0;
    return Eigen::VectorXd::Zero(size());
  }
  Eigen::VectorXd v = impl_->cg.solveWithGuess(rhs, guess);
  last_iterations_ = int(impl_->cg.iterations());
  if (impl_->cg.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "conjugate gradient did not converge: " << impl_->cg.iterations()
        << " iterations, relative residual " << impl_->cg.error()
        << " (target " << impl_->options.tolerance << ")";
    throw Error(ErrorKind::Solver, msg.str(), "poisson_solve");
  }
  return v;
}

Eigen::VectorXd DirichletLaplacian::solve(const Eigen::VectorXd &rhs) const {
  return solve(rhs, Eigen::VectorXd::Zero(size()));
}

GriddedField poisson_solve(const GriddedField &grid, const GriddedField &rhs,
                           const PoissonOptions &options) {
  if (rhs.nx != grid.nx || rhs.ny != grid.ny ||
      !(rhs.mask == grid.mask).all())
    throw usage_error("poisson_solve: grid and right-hand side masks differ");
  const DirichletLaplacian lap(grid, options);
  return grid.with_inside_values(lap.solve(rhs.inside_values()));
}

namespace {

double lp_sum(const Eigen::VectorXd &inside, double p) {
  return compensated_sum(inside.array().abs().pow(p));
}

} // namespace

double lp_norm(const GriddedField &field, double p) {
  return std::pow(field.cell_area() * lp_sum(field.inside_values(), p), 1.0 / p);
}

double quotient(const GriddedField &field, double p) {
  auto value = [&](int i, int j) {
    if (i < 0 || j < 0 || i >= field.nx || j >= field.ny)
      return 0.0;
    const Eigen::Index k = field.index(i, j);
    return field.mask(k) ? field.values(k) : 0.0;
  };
  double energy = 0;
  for (int j = -1; j < field.ny; ++j)
    for (int i = -1; i < field.nx; ++i) {
      const double u = value(i, j);
      const double right = value(i + 1, j) - u;
      const double up = value(i, j + 1) - u;
      energy += right * right + up * up;
    }
  const double mass = field.cell_area() * lp_sum(field.inside_values(), p);
  if (!(mass > 0))
    throw usage_error("quotient of a trivial function");
  return energy / std::pow(mass, 2.0 / p);
}

SobolevResult minimize_quotient(const GriddedField &grid, double p,
                                const QuotientOptions &options) {
  if (!admissible(2, p))
    throw usage_error(admissibility_message(2, p));
  if (p > 2 && !options.allow_supercritical)
    throw usage_error("p = " + std::to_string(p) +
                      " > 2 requires --experimental-supercritical");
  if (!(options.tolerance > 0))
    throw usage_error("minimize_quotient: tolerance must be positive");

  const DirichletLaplacian lap(grid, options.poisson);
  const double cell = grid.cell_area();
  auto normalize = [&](Eigen::VectorXd v) {
    v.array() = v.array().max(0.0);
    const double norm = std::pow(cell * lp_sum(v, p), 1.0 / p);
    return Eigen::VectorXd(v / norm);
  };

  SobolevResult result;
  result.p = p;
  Eigen::VectorXd u = normalize(Eigen::VectorXd::Ones(lap.size()));
  Eigen::VectorXd guess = Eigen::VectorXd::Zero(lap.size());
  double cp_prev = quotient(grid.with_inside_values(u), p);
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Eigen::VectorXd rhs =
        p == 1.0 ? Eigen::VectorXd::Ones(lap.size())
                 : Eigen::VectorXd(u.array().pow(p - 1));
    const Eigen::VectorXd v = lap.solve(rhs, guess);
    const Eigen::VectorXd next = normalize(v);
    const double drift = (next - u).lpNorm<Eigen::Infinity>() /
                         next.lpNorm<Eigen::Infinity>();
    u = next;
    const double cp = quotient(grid.with_inside_values(u), p);
    result.trajectory.push_back(cp);
    result.iterations = it;
    result.residual = std::max(std::abs(cp - cp_prev) / cp, drift);
    // Warm start: at the fixed point v is a multiple of the normalized u.
    guess = v.norm() / u.norm() * u;
    if (it > 1 && result.residual < options.tolerance) {
      result.field = grid.with_inside_values(u);
      result.cp = cp;
      return result;
    }
    cp_prev = cp;
  }
  std::ostringstream msg;
  msg << "fixed point did not converge in " << options.max_iterations
      << " iterations; last cp values:";
  const std::size_t from =
      result.trajectory.size() > 5 ? result.trajectory.size() - 5 : 0;
  for (std::size_t k = from; k < result.trajectory.size(); ++k)
    msg << ' ' << csv::number(result.trajectory[k]);
  throw Error(ErrorKind::Solver, msg.str(), "minimize_quotient");
}

void write_field(std::ostream &out, const GriddedField &field,
                 const nlohmann::json &extra) {
  nlohmann::json header = {{"format", "sobolev-lab/gridded-field"},
                           {"version", csv::kFormatVersion},
                           {"nx", field.nx},
                           {"ny", field.ny},
                           {"h", field.h},
                           {"origin", {field.origin.x(), field.origin.y()}}};
  header.update(extra);
  out << header.dump() << '\n';
  for (int j = 0; j < field.ny; ++j) {
    for (int i = 0; i < field.nx; ++i) {
      const Eigen::Index k = field.index(i, j);
      if (i)
        out << ',';
      out << csv::number(field.mask(k) ? field.values(k) : std::nan(""));
    }
    out << '\n';
  }
}

GriddedField read_field(std::istream &in, nlohmann::json *header_out) {
  const nlohmann::json header =
      csv::read_header(in, "sobolev-lab/gridded-field");
  GriddedField g;
  try {
    g.nx = header.at("nx").get<int>();
    g.ny = header.at("ny").get<int>();
    g.h = header.at("h").get<double>();
    g.origin = Eigen::Vector2d(header.at("origin").at(0).get<double>(),
                               header.at("origin").at(1).get<double>());
  } catch (const nlohmann::json::exception &e) {
    throw usage_error(std::string("gridded field header: ") + e.what());
  }
  if (g.nx <= 0 || g.ny <= 0 || !(g.h > 0))
    throw usage_error("gridded field header has invalid dimensions");
  g.mask.setConstant(Eigen::Index(g.nx) * g.ny, false);
  g.values.setZero(Eigen::Index(g.nx) * g.ny);
  std::string line;
  for (int j = 0; j < g.ny; ++j) {
    if (!std::getline(in, line))
      throw usage_error("gridded field: missing row " + std::to_string(j));
    const auto cells = csv::split(line);
    if (int(cells.size()) != g.nx)
      throw usage_error("gridded field: row " + std::to_string(j) +
                        " has the wrong number of columns");
    for (int i = 0; i < g.nx; ++i) {
      const double v = csv::parse_number(cells[std::size_t(i)]);
      const Eigen::Index k = g.index(i, j);
      if (!std::isnan(v)) {
        g.mask(k) = true;
        g.values(k) = v;
      }
    }
  }
  if (header_out)
    *header_out = header;
  return g;
}

} // namespace sobolev
