#include "mglue/layout.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "mglue/errors.hpp"

namespace mglue {

namespace {

constexpr double kTau = 2 * std::numbers::pi;

struct Placed {
  double x = 0, y = 0;  // circle center or segment base
  double theta = 0;     // angle of the root (circle) or direction (segment)
  double len = 0;       // lambda_n
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string render_layout(const GluedStructure& s, const LayoutStyle& style) {
  const BlockTree& t = s.tree();
  for (std::size_t i = 1; i <= t.size(); ++i)
    if (t.block(i).is_finite()) throw ParameterError("render_layout: finite blocks are not supported");

  std::vector<Placed> pl(t.size() + 1);
  auto point_on = [&](std::size_t i, double c, double& px, double& py, double& out_angle) {
    const Placed& p = pl[i];
    if (t.block(i).kind() == BlockKind::circle) {
      const double r = p.len / kTau;
      const double a = p.theta + kTau * c;
      px = p.x + r * std::cos(a);
      py = p.y + r * std::sin(a);
      out_angle = a;
    } else {
      px = p.x + p.len * c * std::cos(p.theta);
      py = p.y + p.len * c * std::sin(p.theta);
      out_angle = p.theta + (c < 1 ? std::numbers::pi / 2 : 0.0);
    }
  };

  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_x;
  auto grow_box = [&](double x, double y, double pad) {
    lo_x = std::min(lo_x, x - pad);
    lo_y = std::min(lo_y, y - pad);
    hi_x = std::max(hi_x, x + pad);
    hi_y = std::max(hi_y, y + pad);
  };

  for (std::size_t i = 1; i <= t.size(); ++i) {
    Placed& p = pl[i];
    p.len = t.lambda(i);
    Stream rng(style.seed, StreamTag::layout, i);
    const double jit = style.jitter * (2 * rng.uniform() - 1);
    if (i == 1) {
      p.theta = -std::numbers::pi / 2 + jit;
      if (t.block(1).kind() == BlockKind::segment) p.theta = std::numbers::pi / 2 + jit;
    } else {
      double ax, ay, out;
      point_on(t.parent(i), t.attach(i), ax, ay, out);
      const double dir = out + jit;
      if (t.block(i).kind() == BlockKind::circle) {
        const double r = p.len / kTau;
        p.x = ax + r * std::cos(dir);
        p.y = ay + r * std::sin(dir);
        p.theta = dir + std::numbers::pi;
      } else {
        p.x = ax;
        p.y = ay;
        p.theta = dir;
      }
    }
    if (t.block(i).kind() == BlockKind::circle) {
      grow_box(p.x, p.y, p.len / kTau);
    } else {
      grow_box(p.x, p.y, 0);
      grow_box(p.x + p.len * std::cos(p.theta), p.y + p.len * std::sin(p.theta), 0);
    }
  }

  const double k = style.scale;
  const double w = (hi_x - lo_x) * k + 2 * style.margin;
  const double h = (hi_y - lo_y) * k + 2 * style.margin;
  auto X = [&](double x) { return num((x - lo_x) * k + style.margin); };
  auto Y = [&](double y) { return num((hi_y - y) * k + style.margin); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\">\n";
  out << "<metadata>non-isometric layout; scale=" << num(k) << " units per length; jitter="
      << num(style.jitter) << " rad; seed=" << style.seed << "; blocks=" << t.size() << "</metadata>\n";
  out << "<g fill=\"none\" stroke=\"black\" stroke-width=\"" << num(style.stroke) << "\">\n";
  for (std::size_t i = 1; i <= t.size(); ++i) {
    const Placed& p = pl[i];
    if (t.block(i).kind() == BlockKind::circle) {
      out << "<circle cx=\"" << X(p.x) << "\" cy=\"" << Y(p.y) << "\" r=\"" << num(p.len / kTau * k)
          << "\"/>\n";
    } else {
      out << "<line x1=\"" << X(p.x) << "\" y1=\"" << Y(p.y) << "\" x2=\""
          << X(p.x + p.len * std::cos(p.theta)) << "\" y2=\"" << Y(p.y + p.len * std::sin(p.theta))
          << "\"/>\n";
    }
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

void write_layout_svg(const std::string& path, const GluedStructure& s, const LayoutStyle& style) {
  const std::string doc = render_layout(s, style);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  f << doc;
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace mglue
