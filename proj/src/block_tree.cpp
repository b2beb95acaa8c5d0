#include "mglue/block_tree.hpp"

#include <algorithm>

#include "mglue/errors.hpp"

namespace mglue {

void BlockTree::reserve(std::size_t n) {
  if (parent_.empty()) {
    // slot 0 is a sentinel so node ids are 1-based
    parent_.push_back(0);
    attach_.push_back(0);
    lambda_.push_back(0);
    weight_.push_back(0);
    depth_.push_back(0);
    label_.push_back(0);
    block_.emplace_back();
    children_.emplace_back();
  }
  parent_.reserve(n + 1);
  attach_.reserve(n + 1);
  lambda_.reserve(n + 1);
  weight_.reserve(n + 1);
  depth_.reserve(n + 1);
  label_.reserve(n + 1);
  block_.reserve(n + 1);
  children_.reserve(n + 1);
}

std::size_t BlockTree::add_root(std::size_t label, BlockHandle block, double lambda, double weight) {
  if (!block) throw ParameterError("null block");
  parent_.push_back(0);
  attach_.push_back(0);
  lambda_.push_back(lambda);
  weight_.push_back(weight);
  depth_.push_back(0);
  label_.push_back(label);
  block_.push_back(std::move(block));
  children_.emplace_back();
  return size();
}

std::size_t BlockTree::add_child(std::size_t label, BlockHandle block, double lambda, double weight,
                                 std::size_t parent, double attach) {
  if (!block) throw ParameterError("null block");
  if (parent == 0 || parent > size()) throw ParameterError("parent node does not exist");
  parent_.push_back(parent);
  attach_.push_back(attach);
  lambda_.push_back(lambda);
  weight_.push_back(weight);
  depth_.push_back(depth_[parent] + 1);
  label_.push_back(label);
  block_.push_back(std::move(block));
  children_.emplace_back();
  children_[parent].push_back(size());
  return size();
}

void BlockTree::check(const PointRef& p) const {
  if (p.block == 0 || p.block > size()) throw ParameterError("point refers to a missing block");
  const Block& b = *block_[p.block];
  if (b.is_finite()) {
    const auto i = static_cast<std::size_t>(p.coord);
    if (p.coord < 0 || i >= b.size() || static_cast<double>(i) != p.coord)
      throw ParameterError("invalid atom coordinate");
  } else if (!(p.coord >= 0 && p.coord <= 1)) {
    throw ParameterError("coordinate outside [0,1]");
  }
}

double BlockTree::distance(PointRef a, PointRef b) const {
  check(a);
  check(b);
  double acc = 0;
  while (a.block != b.block) {
    PointRef& lo = (a.block > b.block) ? a : b;
    acc += height_in(lo.block, lo.coord);
    const std::size_t par = parent_[lo.block];
    if (par == 0) return std::numeric_limits<double>::infinity();
    lo = PointRef{par, attach_[lo.block]};
  }
  return acc + lambda_[a.block] * block_[a.block]->distance(a.coord, b.coord);
}

PointRef BlockTree::project(PointRef x, std::size_t n) const {
  check(x);
  while (label_[x.block] > n) {
    const std::size_t par = parent_[x.block];
    if (par == 0) throw DomainError("projection target outside this component");
    x = PointRef{par, attach_[x.block]};
  }
  return x;
}

double BlockTree::distance_to_projection(PointRef x, std::size_t n) const {
  check(x);
  double acc = 0;
  while (label_[x.block] > n) {
    const std::size_t par = parent_[x.block];
    if (par == 0) throw DomainError("projection target outside this component");
    acc += height_in(x.block, x.coord);
    x = PointRef{par, attach_[x.block]};
  }
  return acc;
}

std::vector<double> subtree_heights(const BlockTree& t) {
  std::vector<double> h(t.size() + 1, 0.0);
  for (std::size_t i = t.size(); i >= 1; --i) {
    double best = t.lambda(i) * t.block(i).haut();
    for (std::size_t c : t.children(i)) best = std::max(best, t.height_in(i, t.attach(c)) + h[c]);
    h[i] = best;
  }
  return h;
}

}  // namespace mglue
