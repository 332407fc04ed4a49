#pragma once

#include <string>
#include <vector>

#include "vlcsim/core.hpp"

namespace vlcsim {

// One patch of a meshed surface. Patches act as ideal diffuse re-emitters
// during reflection bookkeeping, so position, inward normal, area and
// reflectivity are all that later stages need.
struct SurfaceElement {
  Vec3 position;
  Vec3 normal;
  double area{0};
  double reflectivity{0};
};

// Rectangular room surface. The unit normal is cross(edge_u, edge_v)
// normalized and must point into the room.
struct Surface {
  std::string name;
  Vec3 origin;  // one corner of the rectangle
  Vec3 edge_u;  // full first edge
  Vec3 edge_v;  // full second edge
  double reflectivity{0};

  Vec3 normal() const { return cross(edge_u, edge_v).normalized(); }
  double area() const { return cross(edge_u, edge_v).norm(); }
};

// Splits a surface into a grid of rectangular elements with target pitch
// element_size. Counts round down to whole elements (at least one per axis)
// and the element dimensions stretch so the grid tiles the surface exactly,
// keeping the summed element area equal to the surface area. Elements are
// emitted in row-major order: the edge_u index varies slowest.
inline std::vector<SurfaceElement> mesh_surface(const Surface& surface, double element_size) {
  if (!(element_size > 0.0))
    throw std::invalid_argument("mesh_surface: element size must be positive");

  const double len_u = surface.edge_u.norm();
  const double len_v = surface.edge_v.norm();
  // The nudge keeps exactly divisible sides (the usual case) from losing an
  // element to floating-point residue in the division.
  auto count = [](double len, double size) {
    const auto n = static_cast<std::size_t>(std::floor(len / size + 1e-9));
    return n < 1 ? std::size_t{1} : n;
  };
  const std::size_t nu = count(len_u, element_size);
  const std::size_t nv = count(len_v, element_size);

  const Vec3 step_u = surface.edge_u / static_cast<double>(nu);
  const Vec3 step_v = surface.edge_v / static_cast<double>(nv);
  const double area = (len_u / static_cast<double>(nu)) * (len_v / static_cast<double>(nv));
  const Vec3 normal = surface.normal();

  std::vector<SurfaceElement> elements;
  elements.reserve(nu * nv);
  for (std::size_t i = 0; i < nu; ++i) {
    for (std::size_t j = 0; j < nv; ++j) {
      SurfaceElement e;
      e.position = surface.origin + step_u * (static_cast<double>(i) + 0.5) +
                   step_v * (static_cast<double>(j) + 0.5);
      e.normal = normal;
      e.area = area;
      e.reflectivity = surface.reflectivity;
      elements.push_back(e);
    }
  }
  return elements;
}

// Axis-aligned room spanning [0, width] x [0, length] x [0, height].
struct RoomConfig {
  double width = 4.0;    // x extent [m]
  double length = 8.0;   // y extent [m]
  double height = 3.0;   // z extent [m]
  double rho_ceiling = 0.8;
  double rho_walls = 0.8;
  double rho_floor = 0.3;
  double fine_element_size = 0.05;    // mesh pitch for first reflections [m]
  double coarse_element_size = 0.20;  // mesh pitch for second reflections [m]
};

// Room geometry with both reflection meshes built once up front. Surfaces
// are ordered floor, ceiling, wall x=0, wall x=width, wall y=0, wall
// y=length, and the cached element lists concatenate the per-surface meshes
// in that order.
struct Room {
  RoomConfig config;
  std::vector<Surface> surfaces;
  std::vector<SurfaceElement> fine_elements;
  std::vector<SurfaceElement> coarse_elements;

  bool contains(const Vec3& p) const {
    return p.x >= 0.0 && p.x <= config.width && p.y >= 0.0 && p.y <= config.length &&
           p.z >= 0.0 && p.z <= config.height;
  }
};

inline Room build_room(const RoomConfig& cfg) {
  if (!(cfg.width > 0.0 && cfg.length > 0.0 && cfg.height > 0.0))
    throw std::invalid_argument("build_room: room dimensions must be positive");
  for (double rho : {cfg.rho_ceiling, cfg.rho_walls, cfg.rho_floor})
    if (!(rho >= 0.0 && rho <= 1.0))
      throw std::invalid_argument("build_room: reflectivity outside [0, 1]");

  const double w = cfg.width, l = cfg.length, h = cfg.height;
  Room room;
  room.config = cfg;
  // Edge vectors are arranged so cross(edge_u, edge_v) points into the room.
  room.surfaces = {
      {"floor", {0, 0, 0}, {w, 0, 0}, {0, l, 0}, cfg.rho_floor},
      {"ceiling", {0, 0, h}, {0, l, 0}, {w, 0, 0}, cfg.rho_ceiling},
      {"wall_x0", {0, 0, 0}, {0, l, 0}, {0, 0, h}, cfg.rho_walls},
      {"wall_x1", {w, 0, 0}, {0, 0, h}, {0, l, 0}, cfg.rho_walls},
      {"wall_y0", {0, 0, 0}, {0, 0, h}, {w, 0, 0}, cfg.rho_walls},
      {"wall_y1", {0, l, 0}, {w, 0, 0}, {0, 0, h}, cfg.rho_walls},
  };

  for (const Surface& s : room.surfaces) {
    auto fine = mesh_surface(s, cfg.fine_element_size);
    room.fine_elements.insert(room.fine_elements.end(), fine.begin(), fine.end());
    auto coarse = mesh_surface(s, cfg.coarse_element_size);
    room.coarse_elements.insert(room.coarse_elements.end(), coarse.begin(), coarse.end());
  }
  return room;
}

}  // namespace vlcsim
