#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "mglue/blocks.hpp"

namespace mglue {

/// An addressable point of a glued space: node id and within-block coordinate.
struct PointRef {
  std::size_t block = 0;
  double coord = 0;
  friend bool operator==(const PointRef&, const PointRef&) = default;
};

/// Tree of scaled blocks. Node ids start at 1 and every node is added after
/// its parent, so parent id < child id. Each node carries a label (its block
/// index in the gluing sequence); in a dense structure label == id.
class BlockTree {
 public:
  BlockTree() { reserve(0); }

  void reserve(std::size_t n);
  std::size_t add_root(std::size_t label, BlockHandle block, double lambda, double weight);
  std::size_t add_child(std::size_t label, BlockHandle block, double lambda, double weight,
                        std::size_t parent, double attach);

  std::size_t size() const { return parent_.size() - 1; }
  std::size_t parent(std::size_t i) const { return parent_[i]; }
  double attach(std::size_t i) const { return attach_[i]; }
  double lambda(std::size_t i) const { return lambda_[i]; }
  double weight(std::size_t i) const { return weight_[i]; }
  std::size_t depth(std::size_t i) const { return depth_[i]; }
  std::size_t label(std::size_t i) const { return label_[i]; }
  const Block& block(std::size_t i) const { return *block_[i]; }
  const BlockHandle& handle(std::size_t i) const { return block_[i]; }
  const std::vector<std::size_t>& children(std::size_t i) const { return children_[i]; }

  /// Scaled distance from the root of node i to a point of node i.
  double height_in(std::size_t i, double coord) const {
    return lambda_[i] * block_[i]->distance(block_[i]->root(), coord);
  }

  void check(const PointRef& p) const;
  /// Glued distance; +inf between different components.
  double distance(PointRef a, PointRef b) const;
  /// First point on the ancestry chain whose node label is <= n.
  PointRef project(PointRef x, std::size_t n) const;
  /// Distance from x to its projection, as an explicit path sum.
  double distance_to_projection(PointRef x, std::size_t n) const;

  /// Visit every node whose block meets the open ball B(p, r): calls
  /// f(node, entry_coord, offset) where entry is the point of the node closest
  /// to p and offset the distance from p to it.
  template <typename F>
  void visit_ball(PointRef p, double r, F&& f) const;

 private:
  std::vector<std::size_t> parent_;
  std::vector<double> attach_;
  std::vector<double> lambda_;
  std::vector<double> weight_;
  std::vector<std::size_t> depth_;
  std::vector<std::size_t> label_;
  std::vector<BlockHandle> block_;
  std::vector<std::vector<std::size_t>> children_;
};

/// H(i) = sup distance from the root of node i to points of its subtree.
std::vector<double> subtree_heights(const BlockTree& t);

template <typename F>
void BlockTree::visit_ball(PointRef p, double r, F&& f) const {
  std::vector<std::pair<std::size_t, double>> stack;
  auto spread = [&](std::size_t node, double coord, double base, std::size_t skip) {
    for (std::size_t c : children_[node]) {
      if (c == skip) continue;
      const double d = base + lambda_[node] * block_[node]->distance(coord, attach_[c]);
      if (d < r) stack.emplace_back(c, d);
    }
  };
  f(p.block, p.coord, 0.0);
  spread(p.block, p.coord, 0.0, 0);
  std::size_t cur = p.block;
  double coord = p.coord;
  double up = 0;
  while (parent_[cur] != 0) {
    up += height_in(cur, coord);
    if (!(up < r)) break;
    const std::size_t par = parent_[cur];
    coord = attach_[cur];
    f(par, coord, up);
    spread(par, coord, up, cur);
    cur = par;
  }
  while (!stack.empty()) {
    const auto [node, d] = stack.back();
    stack.pop_back();
    const double root = block_[node]->root();
    f(node, root, d);
    spread(node, root, d, 0);
  }
}

}  // namespace mglue
