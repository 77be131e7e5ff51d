// domain.hpp -- declarative planar domains.

#ifndef SOBOLEV_DOMAIN_HPP
#define SOBOLEV_DOMAIN_HPP

#include "sobolev/core.hpp"

#include <Eigen/Dense>
#include "json.hpp"

#include <string>
#include <variant>
#include <vector>

namespace sobolev {

/// Disk of the given radius centred at the origin.
struct Disk {
  double radius = 1.0;
};

/// Axis-aligned rectangle [0,width] x [0,height].
struct Rectangle {
  double width = 1.0;
  double height = 1.0;
};

/// Ellipse x^2/a^2 + y^2/b^2 < 1.
struct Ellipse {
  double a = 1.0;
  double b = 1.0;
};

/// Square [0,side]^2 with the upper-right square of side notch*side removed.
struct LShape {
  double side = 1.0;
  double notch = 0.5;
};

/// Simple polygon, vertices in order (either orientation).
struct Polygon {
  std::vector<Eigen::Vector2d> vertices;
};

using Shape = std::variant<Disk, Rectangle, Ellipse, LShape, Polygon>;

struct DomainSpec {
  Shape shape = Disk{};
  double scale = 1.0;
};

struct BoundingBox {
  Eigen::Vector2d lower;
  Eigen::Vector2d upper;
};

/// Shape keyword as it appears in the JSON form ("disk", "rectangle", ...).
std::string shape_name(const DomainSpec &spec);

/// Throws a usage error unless the domain has a nonempty bounded interior.
void validate(const DomainSpec &spec);

double area(const DomainSpec &spec);

BoundingBox bounding_box(const DomainSpec &spec);

/// Strict interior test; points on the boundary (within rounding) are outside.
bool contains(const DomainSpec &spec, const Eigen::Vector2d &x);

DomainSpec domain_from_json(const nlohmann::json &j);
nlohmann::json domain_to_json(const DomainSpec &spec);

/// Accepts inline JSON ("{...}") or a path to a JSON file.
DomainSpec load_domain(const std::string &text_or_path);

/// Convenience constructors.
inline DomainSpec unit_disk() { return {Disk{1.0}, 1.0}; }
inline DomainSpec unit_square() { return {Rectangle{1.0, 1.0}, 1.0}; }

} // namespace sobolev

#endif // SOBOLEV_DOMAIN_HPP
