#pragma once

#include <cstdint>
#include <string>

#include "mglue/glue.hpp"

namespace mglue {

struct LayoutStyle {
  double scale = 400;    // drawing units per unit of length
  double margin = 10;
  double stroke = 0.5;
  double jitter = 0.6;   // max rotation jitter in radians
  std::uint64_t seed = 1;
};

/// Planar, non-isometric picture of a glued structure: block 1 at the
/// origin, circles of radius lambda_n / (2 pi), segments as sticks of length
/// lambda_n, each block drawn at its attachment point with a seeded
/// rotation. Finite blocks are rejected.
std::string render_layout(const GluedStructure& s, const LayoutStyle& style = {});
void write_layout_svg(const std::string& path, const GluedStructure& s, const LayoutStyle& style = {});

}  // namespace mglue
