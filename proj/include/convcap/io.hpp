#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "convcap/adm.hpp"
#include "convcap/capacity.hpp"
#include "convcap/geometry.hpp"
#include "convcap/radius_tree.hpp"
#include "convcap/yau.hpp"

namespace convcap {

using Json = nlohmann::json;

namespace detail {

inline const Json& field(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw InputError(path + "." + key + ": missing field");
  return j.at(key);
}

inline double number(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_number()) throw InputError(path + "." + key + ": expected a number");
  return v.get<double>();
}

inline double number_or(const Json& j, const std::string& key, double fallback, const std::string& path) {
  return j.contains(key) ? number(j, key, path) : fallback;
}

inline std::vector<double> numbers(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_array()) throw InputError(path + "." + key + ": expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw InputError(path + "." + key + "[" + std::to_string(i) + "]: expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

inline Eigen::VectorXd vector_or_zero(const Json& j, const std::string& key, int n, const std::string& path) {
  if (!j.contains(key)) return Eigen::VectorXd::Zero(n);
  const auto v = numbers(j, key, path);
  if (static_cast<int>(v.size()) != n) throw InputError(path + "." + key + ": expected " + std::to_string(n) + " entries");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), n);
}

inline Vec3 vec3(const std::vector<double>& v, const std::string& path) {
  if (v.size() != 3) throw InputError(path + ": expected 3 entries");
  return {v[0], v[1], v[2]};
}

}  // namespace detail

/// Body schema:
///   {"kind": "support2", "values": [...]}
///   {"kind": "support2", "disk": {"radius": r, "center": [x, y]}}
///   {"kind": "support2", "ellipse": {"a": a, "b": b, "center": [..], "rotation": t}}
///   {"kind": "support2", "fourier": {"r0": r0, "cos": [...], "sin": [...]}}
///   {"kind": "support2", "random": {"seed": s, "r0": r0}}
///   {"kind": "ball", "radius": r, "center": [x, y, z]}
///   {"kind": "ellipsoid", "semi_axes": [a, b, c], "center": [..], "rotation": [9 entries]}
///   {"kind": "box", "half_sides": [a, b, c], "center": [..]}
/// support2 bodies accept "grid" (default 720).
inline Body body_from_json(const Json& j, const std::string& path = "body") {
  if (!j.is_object()) throw InputError(path + ": expected an object");
  const Json& kind = detail::field(j, "kind", path);
  if (!kind.is_string()) throw InputError(path + ".kind: expected a string");
  const std::string k = kind.get<std::string>();
  if (k == "support2") {
    const int grid = static_cast<int>(detail::number_or(j, "grid", SupportBody2::kDefaultGridSize, path));
    SupportBody2 b;
    if (j.contains("values")) {
      b = SupportBody2(detail::numbers(j, "values", path));
    } else if (j.contains("disk")) {
      const Json& d = j.at("disk");
      const auto c = detail::vector_or_zero(d, "center", 2, path + ".disk");
      b = SupportBody2::disk(detail::number(d, "radius", path + ".disk"), Vec2(c[0], c[1]), grid);
    } else if (j.contains("ellipse")) {
      const Json& d = j.at("ellipse");
      const std::string p = path + ".ellipse";
      const auto c = detail::vector_or_zero(d, "center", 2, p);
      b = SupportBody2::ellipse(detail::number(d, "a", p), detail::number(d, "b", p), Vec2(c[0], c[1]),
                                detail::number_or(d, "rotation", 0.0, p), grid);
    } else if (j.contains("fourier")) {
      const Json& d = j.at("fourier");
      const std::string p = path + ".fourier";
      b = SupportBody2::fourier(detail::number(d, "r0", p), d.contains("cos") ? detail::numbers(d, "cos", p) : std::vector<double>{},
                                d.contains("sin") ? detail::numbers(d, "sin", p) : std::vector<double>{}, grid);
    } else if (j.contains("random")) {
      const Json& d = j.at("random");
      const std::string p = path + ".random";
      b = random_support_body(static_cast<std::uint64_t>(detail::number(d, "seed", p)), detail::number_or(d, "r0", 1.0, p), grid);
    } else {
      throw InputError(path + ": support2 needs one of values, disk, ellipse, fourier, random");
    }
    b.require_convex();
    return b;
  }
  const Vec3 c = [&] {
    const auto v = detail::vector_or_zero(j, "center", 3, path);
    return Vec3(v[0], v[1], v[2]);
  }();
  if (k == "ball") return ParamBody3::ball(detail::number(j, "radius", path), c);
  Mat3 rot = Mat3::Identity();
  if (j.contains("rotation")) {
    const auto v = detail::numbers(j, "rotation", path);
    if (v.size() != 9) throw InputError(path + ".rotation: expected 9 entries, row major");
    for (int r = 0; r < 3; ++r)
      for (int q = 0; q < 3; ++q) rot(r, q) = v[3 * r + q];
    if (!(rot.transpose() * rot - Mat3::Identity()).isZero(1e-9) || rot.determinant() < 0.0) {
      throw InputError(path + ".rotation: not a proper rotation");
    }
  }
  if (k == "ellipsoid") {
    const Vec3 a = detail::vec3(detail::numbers(j, "semi_axes", path), path + ".semi_axes");
    return ParamBody3::ellipsoid(a.x(), a.y(), a.z(), c, rot);
  }
  if (k == "box") {
    const Vec3 a = detail::vec3(detail::numbers(j, "half_sides", path), path + ".half_sides");
    return ParamBody3::box(a.x(), a.y(), a.z(), c, rot);
  }
  throw InputError(path + ".kind: unknown body kind '" + k + "'");
}

inline Json body_to_json(const Body& body) {
  return std::visit(
      [](const auto& b) -> Json {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, SupportBody2>) {
          return Json{{"kind", "support2"}, {"values", b.support_values()}};
        } else if constexpr (std::is_same_v<T, ParamBody3>) {
          Json j;
          const std::vector<double> c{b.center.x(), b.center.y(), b.center.z()};
          const std::vector<double> a{b.axes.x(), b.axes.y(), b.axes.z()};
          switch (b.kind) {
            case ParamBody3::Kind::Ball: j = {{"kind", "ball"}, {"radius", b.radius()}}; break;
            case ParamBody3::Kind::Ellipsoid: j = {{"kind", "ellipsoid"}, {"semi_axes", a}}; break;
            case ParamBody3::Kind::Box: j = {{"kind", "box"}, {"half_sides", a}}; break;
          }
          j["center"] = c;
          if (!b.rotation.isIdentity(0.0)) {
            std::vector<double> r;
            for (int a = 0; a < 3; ++a)
              for (int q = 0; q < 3; ++q) r.push_back(b.rotation(a, q));
            j["rotation"] = r;
          }
          return j;
        } else {
          throw InputError("general 3D support bodies have no serialized form");
        }
      },
      body);
}

/// {"kind": "gaussian_bump", "dimension": n, "amplitude": a, "width": s, "center": [...]}
/// {"kind": "radial_power", "dimension": n, "amplitude": a, "exponent": q}
/// {"kind": "tabulated", "dimension": n, "radii": [...], "values": [...]}
inline MassDensity density_from_json(const Json& j, const std::string& path = "density") {
  const Json& kind = detail::field(j, "kind", path);
  if (!kind.is_string()) throw InputError(path + ".kind: expected a string");
  const std::string k = kind.get<std::string>();
  const int n = static_cast<int>(detail::number(j, "dimension", path));
  if (n != 2 && n != 3) throw InputError(path + ".dimension: must be 2 or 3");
  const Eigen::VectorXd c = detail::vector_or_zero(j, "center", n, path);
  if (k == "gaussian_bump") {
    return MassDensity::gaussian_bump(n, detail::number(j, "amplitude", path), detail::number(j, "width", path), c);
  }
  if (k == "radial_power") {
    return MassDensity::radial_power(n, detail::number(j, "amplitude", path), detail::number(j, "exponent", path), c);
  }
  if (k == "tabulated") {
    return MassDensity::tabulated(n, detail::numbers(j, "radii", path), detail::numbers(j, "values", path), c);
  }
  throw InputError(path + ".kind: unknown density kind '" + k + "'");
}

/// {"kind": "schwarzschild", "m": m} | {"kind": "power", "c", "e", "inner_radius"}
/// | {"kind": "constant", "c", "inner_radius"} | {"kind": "tabulated", "r0", "dr", "values", "gamma"}
inline GraphFunction profile_from_json(const Json& j, const std::string& path = "profile") {
  const Json& kind = detail::field(j, "kind", path);
  if (!kind.is_string()) throw InputError(path + ".kind: expected a string");
  const std::string k = kind.get<std::string>();
  if (k == "schwarzschild") return GraphFunction::schwarzschild(detail::number(j, "m", path));
  if (k == "power") {
    return GraphFunction::power(detail::number(j, "c", path), detail::number(j, "e", path),
                                detail::number_or(j, "inner_radius", 1.0, path));
  }
  if (k == "constant") return GraphFunction::constant(detail::number(j, "c", path), detail::number_or(j, "inner_radius", 1.0, path));
  if (k == "tabulated") {
    return GraphFunction::tabulated(detail::number(j, "r0", path), detail::number(j, "dr", path), detail::numbers(j, "values", path),
                                    detail::number(j, "gamma", path));
  }
  throw InputError(path + ".kind: unknown profile kind '" + k + "'");
}

/// Grid options: angular_cells, radial_cells, outer_radius_factor, grading,
/// refine_factor, extrapolate, tolerance, epsilon, cells_per_min_width.
/// cells_per_min_width c sets angular_cells to round(pi c) in 2D and
/// round(c / 2) per cube-sphere face edge in 3D.
inline CapacityOptions capacity_options_from_json(const Json& j, int dim, const std::string& path = "grid") {
  CapacityOptions o = CapacityOptions::defaults(dim);
  if (j.is_null()) return o;
  if (!j.is_object()) throw InputError(path + ": expected an object");
  static const std::vector<std::string> known{"angular_cells", "radial_cells", "outer_radius_factor", "grading",
                                              "refine_factor", "extrapolate",  "tolerance",           "epsilon",
                                              "cells_per_min_width"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) throw InputError(path + "." + it.key() + ": unknown grid option");
  }
  if (j.contains("cells_per_min_width")) {
    if (j.contains("angular_cells")) throw InputError(path + ": give angular_cells or cells_per_min_width, not both");
    const double c = detail::number(j, "cells_per_min_width", path);
    o.mesh.angular_cells = static_cast<int>(std::lround(dim == 2 ? pi * c : 0.5 * c));
  }
  o.mesh.angular_cells = static_cast<int>(detail::number_or(j, "angular_cells", o.mesh.angular_cells, path));
  o.mesh.radial_cells = static_cast<int>(detail::number_or(j, "radial_cells", o.mesh.radial_cells, path));
  o.mesh.outer_radius_factor = detail::number_or(j, "outer_radius_factor", o.mesh.outer_radius_factor, path);
  o.mesh.grading = detail::number_or(j, "grading", o.mesh.grading, path);
  o.refine_factor = detail::number_or(j, "refine_factor", o.refine_factor, path);
  o.solver.tolerance = detail::number_or(j, "tolerance", o.solver.tolerance, path);
  o.solver.epsilon = detail::number_or(j, "epsilon", o.solver.epsilon, path);
  if (j.contains("extrapolate")) {
    if (!j.at("extrapolate").is_boolean()) throw InputError(path + ".extrapolate: expected a boolean");
    o.extrapolate = j.at("extrapolate").get<bool>();
  }
  if (o.mesh.angular_cells < 4 || o.mesh.radial_cells < 4) throw InputError(path + ": need at least 4 cells per direction");
  if (!(o.mesh.outer_radius_factor > 2.0)) throw InputError(path + ".outer_radius_factor: must exceed 2");
  if (!(o.refine_factor > 1.0)) throw InputError(path + ".refine_factor: must exceed 1");
  return o;
}

inline Json to_json(const CapacityResult& r) {
  return {{"energy_route", r.energy_route},   {"flux_route", r.flux_route},
          {"extrapolated", r.extrapolated},   {"flux_extrapolated", r.flux_extrapolated},
          {"estimate", r.estimate},           {"coarse_energy", r.coarse_energy},
          {"coarse_flux", r.coarse_flux},     {"coarse_nodes", r.coarse_nodes},
          {"fine_nodes", r.fine_nodes}};
}

inline Json to_json(const Radius& r) {
  if (r.present()) return *r;
  return Json{{"absent", r.reason}};
}

inline Json to_json(const InequalityCheck& c) {
  Json j{{"name", c.name}, {"p_range", c.p_range}, {"applicable", c.applicable}};
  if (c.applicable) {
    j["lhs"] = c.lhs;
    j["rhs"] = c.rhs;
    j["slack"] = c.slack;
    j["tolerance"] = c.tolerance;
    j["pass"] = c.pass;
  }
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

inline Json to_json(const SandwichRecord& s) {
  return {{"alpha", s.alpha},       {"beta", s.beta},           {"lower", s.lower},
          {"upper", s.upper},       {"surface_value", s.surface_value}, {"lower_pass", s.lower_pass},
          {"upper_pass", s.upper_pass}, {"tolerance", s.tolerance}, {"extrapolated", s.extrapolated}};
}

inline Json to_json(const RadiusReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  Json j{{"dimension", r.dimension},
         {"p", r.p},
         {"capacity", r.capacity},
         {"capacity_estimate", r.capacity_estimate},
         {"radii",
          {{"volume", to_json(r.volume_radius)},
           {"surface", to_json(r.surface_radius)},
           {"capacity", to_json(r.capacity_radius)},
           {"semidiameter", to_json(r.semidiameter)},
           {"mean", to_json(r.mean_radius)},
           {"imc", to_json(r.imc_radius)}}},
         {"checks", checks},
         {"pass", r.all_pass()}};
  if (r.sandwich) j["sandwich"] = to_json(*r.sandwich);
  return j;
}

inline Json to_json(const OptimState& s) {
  return {{"iteration", s.iteration},       {"objective", s.objective},     {"step", s.step},
          {"gradient_norm", s.gradient_norm}, {"el_residual", s.el_residual}, {"inradius", s.inradius},
          {"collapsed", s.collapsed},       {"parameters", s.parameters}};
}

inline Json to_json(const AdmResult& a) {
  return {{"mass", a.mass},         {"two_mass", a.two_mass},         {"radii", a.radii},
          {"shell_values", a.shell_values}, {"exponent", a.exponent}, {"fit_residual", a.fit_residual}};
}

inline Json to_json(const LamResult& l) {
  return {{"mass", l.mass}, {"two_mass", l.two_mass}, {"boundary_term", l.boundary_term}, {"bulk_term", l.bulk_term}};
}

inline Json to_json(const PenroseRecord& p) {
  return {{"mass", p.mass},
          {"two_mass", p.two_mass},
          {"mass_radius", p.mass_radius},
          {"capacity_radius", p.capacity_radius},
          {"surface_radius", p.surface_radius},
          {"capacity_slack", p.capacity_slack},
          {"surface_slack", p.surface_slack},
          {"capacity_pass", p.capacity_pass},
          {"surface_pass", p.surface_pass},
          {"tolerance", p.tolerance}};
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path + ": cannot write file");
  out << text;
}

/// 64-bit FNV-1a, stable across platforms.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

}  // namespace convcap
