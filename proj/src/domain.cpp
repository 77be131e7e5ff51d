#include "sobolev/domain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace sobolev {

namespace {

template <class... Ts> struct overloaded : Ts... {
  using Ts::operator()...;
};

double cross(const Eigen::Vector2d &a, const Eigen::Vector2d &b) {
  return a.x() * b.y() - a.y() * b.x();
}

double signed_area(const std::vector<Eigen::Vector2d> &v) {
  double a = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    a += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * a;
}

bool segments_intersect(const Eigen::Vector2d &p1, const Eigen::Vector2d &p2,
                        const Eigen::Vector2d &q1, const Eigen::Vector2d &q2) {
  const double d1 = cross(p2 - p1, q1 - p1);
  const double d2 = cross(p2 - p1, q2 - p1);
  const double d3 = cross(q2 - q1, p1 - q1);
  const double d4 = cross(q2 - q1, p2 - q1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 &&
         d2 != 0 && d3 != 0 && d4 != 0;
}

double segment_distance(const Eigen::Vector2d &x, const Eigen::Vector2d &a,
                        const Eigen::Vector2d &b) {
  const Eigen::Vector2d ab = b - a;
  const double t = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (x - (a + t * ab)).norm();
}

// Relative slack for classifying lattice points that sit on the boundary.
constexpr double kBoundarySlack = 1e-12;

} // namespace

std::string shape_name(const DomainSpec &spec) {
  return std::visit(overloaded{[](const Disk &) { return "disk"; },
                               [](const Rectangle &) { return "rectangle"; },
                               [](const Ellipse &) { return "ellipse"; },
                               [](const LShape &) { return "l-shape"; },
                               [](const Polygon &) { return "polygon"; }},
                    spec.shape);
}

void validate(const DomainSpec &spec) {
  if (!(spec.scale > 0) || !std::isfinite(spec.scale))
    throw usage_error("domain scale must be positive");
  std::visit(
      overloaded{
          [](const Disk &d) {
            if (!(d.radius > 0))
              throw usage_error("disk radius must be positive");
          },
          [](const Rectangle &r) {
            if (!(r.width > 0) || !(r.height > 0))
              throw usage_error("rectangle has empty interior");
          },
          [](const Ellipse &e) {
            if (!(e.a > 0) || !(e.b > 0))
              throw usage_error("ellipse semi-axes must be positive");
          },
          [](const LShape &l) {
            if (!(l.side > 0))
              throw usage_error("l-shape side must be positive");
            if (!(l.notch > 0) || !(l.notch < 1))
              throw usage_error("l-shape notch fraction must lie in (0,1)");
          },
          [](const Polygon &poly) {
            const auto &v = poly.vertices;
            const std::size_t m = v.size();
            if (m < 3)
              throw usage_error("polygon needs at least three vertices");
            for (const auto &x : v)
              if (!x.allFinite())
                throw usage_error("polygon vertex is not finite");
            for (std::size_t i = 0; i < m; ++i)
              for (std::size_t j = i + 1; j < m; ++j) {
                if ((j == i + 1) || (i == 0 && j == m - 1))
                  continue;
                if (segments_intersect(v[i], v[(i + 1) % m], v[j],
                                       v[(j + 1) % m]))
                  throw usage_error("polygon edges intersect: not simple");
              }
            if (std::abs(signed_area(v)) == 0)
              throw usage_error("polygon has zero area");
          }},
      spec.shape);
}

double area(const DomainSpec &spec) {
  const double s2 = spec.scale * spec.scale;
  return s2 * std::visit(overloaded{
                             [](const Disk &d) {
                               return std::numbers::pi * d.radius * d.radius;
                             },
                             [](const Rectangle &r) { return r.width * r.height; },
                             [](const Ellipse &e) {
                               return std::numbers::pi * e.a * e.b;
                             },
                             [](const LShape &l) {
                               return l.side * l.side * (1 - l.notch * l.notch);
                             },
                             [](const Polygon &p) {
                               return std::abs(signed_area(p.vertices));
                             }},
                         spec.shape);
}

BoundingBox bounding_box(const DomainSpec &spec) {
  BoundingBox box = std::visit(
      overloaded{
          [](const Disk &d) {
            return BoundingBox{{-d.radius, -d.radius}, {d.radius, d.radius}};
          },
          [](const Rectangle &r) {
            return BoundingBox{{0, 0}, {r.width, r.height}};
          },
          [](const Ellipse &e) {
            return BoundingBox{{-e.a, -e.b}, {e.a, e.b}};
          },
          [](const LShape &l) {
            return BoundingBox{{0, 0}, {l.side, l.side}};
          },
          [](const Polygon &p) {
            BoundingBox b{p.vertices.front(), p.vertices.front()};
            for (const auto &v : p.vertices) {
              b.lower = b.lower.cwiseMin(v);
              b.upper = b.upper.cwiseMax(v);
            }
            return b;
          }},
      spec.shape);
  box.lower *= spec.scale;
  box.upper *= spec.scale;
  return box;
}

bool contains(const DomainSpec &spec, const Eigen::Vector2d &point) {
  const Eigen::Vector2d x = point / spec.scale;
  const double eps = kBoundarySlack;
  return std::visit(
      overloaded{
          [&](const Disk &d) {
            return x.squaredNorm() < d.radius * d.radius * (1 - eps);
          },
          [&](const Rectangle &r) {
            const double e = eps * std::max(r.width, r.height);
            return x.x() > e && x.x() < r.width - e && x.y() > e &&
                   x.y() < r.height - e;
          },
          [&](const Ellipse &e) {
            const double u = x.x() / e.a, v = x.y() / e.b;
            return u * u + v * v < 1 - eps;
          },
          [&](const LShape &l) {
            const double e = eps * l.side;
            const bool in_square = x.x() > e && x.x() < l.side - e &&
                                   x.y() > e && x.y() < l.side - e;
            const double cut = l.side * (1 - l.notch);
            const bool in_notch = x.x() > cut - e && x.y() > cut - e;
            return in_square && !in_notch;
          },
          [&](const Polygon &p) {
            const auto &v = p.vertices;
            double diam = 0;
            for (const auto &a : v)
              for (const auto &b : v)
                diam = std::max(diam, (a - b).norm());
            bool inside = false;
            for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
              if (segment_distance(x, v[j], v[i]) <= eps * diam)
                return false;
              if ((v[i].y() > x.y()) != (v[j].y() > x.y())) {
                const double xc = v[j].x() + (x.y() - v[j].y()) *
                                                 (v[i].x() - v[j].x()) /
                                                 (v[i].y() - v[j].y());
                if (x.x() < xc)
                  inside = !inside;
              }
            }
            return inside;
          }},
      spec.shape);
}

DomainSpec domain_from_json(const nlohmann::json &j) {
  if (!j.is_object() || !j.contains("shape"))
    throw usage_error("domain JSON must be an object with a \"shape\" key");
  DomainSpec spec;
  const std::string shape = j.at("shape").get<std::string>();
  spec.scale = j.value("scale", 1.0);
  try {
    if (shape == "disk") {
      spec.shape = Disk{j.value("radius", 1.0)};
    } else if (shape == "rectangle" || shape == "square") {
      const double w = j.value("width", j.value("side", 1.0));
      spec.shape = Rectangle{w, j.value("height", w)};
    } else if (shape == "ellipse") {
      spec.shape = Ellipse{j.at("a").get<double>(), j.at("b").get<double>()};
    } else if (shape == "l-shape") {
      spec.shape = LShape{j.value("side", 1.0), j.value("notch", 0.5)};
    } else if (shape == "polygon") {
      Polygon poly;
      for (const auto &v : j.at("vertices"))
        poly.vertices.emplace_back(v.at(0).get<double>(),
                                   v.at(1).get<double>());
      spec.shape = std::move(poly);
    } else {
      throw usage_error("unknown shape \"" + shape + "\"");
    }
  } catch (const nlohmann::json::exception &e) {
    throw usage_error(std::string("malformed domain JSON: ") + e.what());
  }
  validate(spec);
  return spec;
}

nlohmann::json domain_to_json(const DomainSpec &spec) {
  nlohmann::json j = std::visit(
      overloaded{
          [](const Disk &d) {
            return nlohmann::json{{"shape", "disk"}, {"radius", d.radius}};
          },
          [](const Rectangle &r) {
            return nlohmann::json{
                {"shape", "rectangle"}, {"width", r.width}, {"height", r.height}};
          },
          [](const Ellipse &e) {
            return nlohmann::json{{"shape", "ellipse"}, {"a", e.a}, {"b", e.b}};
          },
          [](const LShape &l) {
            return nlohmann::json{
                {"shape", "l-shape"}, {"side", l.side}, {"notch", l.notch}};
          },
          [](const Polygon &p) {
            nlohmann::json verts = nlohmann::json::array();
            for (const auto &v : p.vertices)
              verts.push_back({v.x(), v.y()});
            return nlohmann::json{{"shape", "polygon"}, {"vertices", verts}};
          }},
      spec.shape);
  j["scale"] = spec.scale;
  return j;
}

DomainSpec load_domain(const std::string &text_or_path) {
  std::string text = text_or_path;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos)
    throw usage_error("empty domain specification");
  if (text[first] != '{') {
    std::ifstream in(text_or_path);
    if (!in)
      throw usage_error("cannot open domain file " + text_or_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw usage_error(std::string("domain JSON does not parse: ") + e.what());
  }
  return domain_from_json(j);
}

} // namespace sobolev
