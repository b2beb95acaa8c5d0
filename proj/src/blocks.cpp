#include "mglue/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "mglue/csv.hpp"
#include "mglue/errors.hpp"

namespace mglue {

std::string to_string(BlockKind k) {
  switch (k) {
    case BlockKind::segment: return "segment";
    case BlockKind::circle: return "circle";
    case BlockKind::finite: return "finite";
  }
  return "?";
}

BlockKind parse_block_kind(const std::string& s) {
  if (s == "segment") return BlockKind::segment;
  if (s == "circle") return BlockKind::circle;
  if (s == "finite" || s == "star") return BlockKind::finite;
  throw ParameterError("unknown block kind: " + s);
}

namespace {

double circ(double x, double y) {
  double u = std::fabs(x - y);
  u -= std::floor(u);
  return std::min(u, 1.0 - u);
}

std::size_t atom_of(double x, std::size_t k) {
  const auto i = static_cast<std::size_t>(x);
  if (x < 0 || i >= k || static_cast<double>(i) != x)
    throw ParameterError("invalid atom coordinate");
  return i;
}

}  // namespace

Block Block::segment() {
  Block b;
  b.kind_ = BlockKind::segment;
  b.haut_ = 1.0;
  b.diam_ = 1.0;
  return b;
}

Block Block::circle() {
  Block b;
  b.kind_ = BlockKind::circle;
  b.haut_ = 0.5;
  b.diam_ = 0.5;
  return b;
}

Block Block::star(std::size_t k) {
  if (k == 0) throw ParameterError("finite block needs k >= 1 points");
  return star_arms(std::vector<double>(k, 0.5), std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

Block Block::star_arms(std::vector<double> arms, std::vector<double> atoms) {
  const std::size_t k = arms.size();
  if (k == 0) throw ParameterError("finite block needs k >= 1 points");
  std::vector<std::vector<double>> d(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (i != j) d[i][j] = arms[i] + arms[j];
  return finite(std::move(d), std::move(atoms));
}

Block Block::finite(std::vector<std::vector<double>> dist, std::vector<double> atoms) {
  const std::size_t k = atoms.size();
  if (k == 0) throw ParameterError("finite block needs k >= 1 points");
  if (dist.size() != k) throw ParameterError("distance matrix size mismatch");
  double total = 0;
  for (double a : atoms) {
    if (!(a > 0) || !std::isfinite(a)) throw ParameterError("finite block atoms must be positive");
    total += a;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw ParameterError("finite block atoms must sum to 1");
  for (std::size_t i = 0; i < k; ++i) {
    if (dist[i].size() != k) throw ParameterError("distance matrix must be square");
    if (dist[i][i] != 0) throw ParameterError("distance matrix diagonal must be zero");
    for (std::size_t j = 0; j < k; ++j) {
      if (!(dist[i][j] >= 0) || dist[i][j] != dist[j][i])
        throw ParameterError("distance matrix must be symmetric and nonnegative");
      if (i != j && dist[i][j] == 0) throw ParameterError("distinct points at distance zero");
    }
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t l = 0; l < k; ++l)
        if (dist[i][j] > dist[i][l] + dist[l][j] + 1e-12)
          throw ParameterError("distance matrix violates the triangle inequality");
  Block b;
  b.kind_ = BlockKind::finite;
  b.dist_ = std::move(dist);
  b.atoms_ = std::move(atoms);
  b.finish();
  return b;
}

void Block::finish() {
  const std::size_t k = atoms_.size();
  cdf_.resize(k);
  std::partial_sum(atoms_.begin(), atoms_.end(), cdf_.begin());
  haut_ = 0;
  diam_ = 0;
  for (std::size_t i = 0; i < k; ++i) {
    haut_ = std::max(haut_, dist_[0][i]);
    for (std::size_t j = 0; j < k; ++j) diam_ = std::max(diam_, dist_[i][j]);
  }
}

double Block::distance(double x, double y) const {
  switch (kind_) {
    case BlockKind::segment: return std::fabs(x - y);
    case BlockKind::circle: return circ(x, y);
    case BlockKind::finite: return dist_[atom_of(x, size())][atom_of(y, size())];
  }
  return 0;
}

double Block::ball_mass(double x, double r) const {
  if (!(r > 0)) return 0;
  switch (kind_) {
    case BlockKind::segment: return std::max(0.0, std::min(1.0, x + r) - std::max(0.0, x - r));
    case BlockKind::circle: return std::min(1.0, 2 * r);
    case BlockKind::finite: {
      const std::size_t i = atom_of(x, size());
      double m = 0;
      for (std::size_t j = 0; j < size(); ++j)
        if (dist_[i][j] < r) m += atoms_[j];
      return m;
    }
  }
  return 0;
}

bool Block::in_upper_half(double x) const {
  return distance(root(), x) > haut_ / 2;
}

double Block::upper_half_mass() const {
  if (kind_ != BlockKind::finite) return 0.5;
  double m = 0;
  for (std::size_t j = 0; j < size(); ++j)
    if (dist_[0][j] >= haut_ / 2) m += atoms_[j];
  return m;
}

double Block::ball_upper_mass(double x, double r) const {
  if (!(r > 0)) return 0;
  auto overlap = [](double a, double b, double c, double d) {
    return std::max(0.0, std::min(b, d) - std::max(a, c));
  };
  switch (kind_) {
    case BlockKind::segment: return overlap(x - r, x + r, 0.5, 1.0);
    case BlockKind::circle: {
      if (r >= 0.5) return 0.5;
      // unroll the arc (x - r, x + r) against the three lifts of (1/4, 3/4)
      double m = 0;
      for (double shift : {-1.0, 0.0, 1.0}) m += overlap(x - r, x + r, 0.25 + shift, 0.75 + shift);
      return m;
    }
    case BlockKind::finite: {
      const std::size_t i = atom_of(x, size());
      double m = 0;
      for (std::size_t j = 0; j < size(); ++j)
        if (dist_[i][j] < r && in_upper_half(static_cast<double>(j))) m += atoms_[j];
      return m;
    }
  }
  return 0;
}

double Block::sample(Stream& rng) const {
  if (kind_ != BlockKind::finite) return rng.uniform();
  const double u = rng.uniform() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<double>(it - cdf_.begin());
}

double Block::sample_upper_half(Stream& rng) const {
  switch (kind_) {
    case BlockKind::segment: return 0.5 + 0.5 * rng.uniform();
    case BlockKind::circle: return 0.25 + 0.5 * rng.uniform();
    case BlockKind::finite: {
      double total = 0;
      for (std::size_t j = 0; j < size(); ++j)
        if (in_upper_half(static_cast<double>(j))) total += atoms_[j];
      if (!(total > 0)) throw DomainError("upper half carries no mass");
      double u = rng.uniform() * total;
      std::size_t last = 0;
      for (std::size_t j = 0; j < size(); ++j) {
        if (!in_upper_half(static_cast<double>(j))) continue;
        last = j;
        if (u < atoms_[j]) return static_cast<double>(j);
        u -= atoms_[j];
      }
      return static_cast<double>(last);
    }
  }
  return 0;
}

double Block::sample_in_ball(double x, double r, Stream& rng) const {
  switch (kind_) {
    case BlockKind::segment: {
      const double lo = std::max(0.0, x - r);
      const double hi = std::min(1.0, x + r);
      return lo + (hi - lo) * rng.uniform();
    }
    case BlockKind::circle: {
      if (r >= 0.5) return rng.uniform();
      double y = x - r + 2 * r * rng.uniform();
      y -= std::floor(y);
      return y;
    }
    case BlockKind::finite: {
      const double total = ball_mass(x, r);
      if (!(total > 0)) throw DomainError("ball carries no mass");
      double u = rng.uniform() * total;
      const std::size_t i = atom_of(x, size());
      std::size_t last = i;
      for (std::size_t j = 0; j < size(); ++j) {
        if (!(dist_[i][j] < r)) continue;
        last = j;
        if (u < atoms_[j]) return static_cast<double>(j);
        u -= atoms_[j];
      }
      return static_cast<double>(last);
    }
  }
  return 0;
}

std::vector<double> Block::probe_grid(std::size_t density) const {
  std::vector<double> out;
  if (kind_ == BlockKind::finite) {
    for (std::size_t j = 0; j < size(); ++j) out.push_back(static_cast<double>(j));
    return out;
  }
  out.reserve(density + 1);
  if (kind_ == BlockKind::segment) {
    for (std::size_t i = 0; i <= density; ++i)
      out.push_back(static_cast<double>(i) / static_cast<double>(density));
  } else {
    for (std::size_t i = 0; i < density; ++i)
      out.push_back(static_cast<double>(i) / static_cast<double>(density));
  }
  return out;
}

std::string Block::describe() const {
  std::ostringstream os;
  os << "{\"kind\":\"" << to_string(kind_) << "\"";
  if (kind_ == BlockKind::finite) {
    os << ",\"k\":" << size() << ",\"haut\":" << fmt(haut_) << ",\"atoms\":[";
    for (std::size_t j = 0; j < size(); ++j) os << (j ? "," : "") << fmt(atoms_[j]);
    os << "]";
  }
  os << "}";
  return os.str();
}

double phi(double d, double r) {
  if (!(r > 0) || r >= 1) return d / 2;
  return std::min(d / 2, std::log(2.0) / std::log(1.0 / r));
}

void BlockLaw::validate() const {
  if (kind == BlockKind::finite && k < 2)
    throw ParameterError("finite block law must have at least 2 points");
}

std::string BlockLaw::describe() const {
  std::ostringstream os;
  os << "{\"kind\":\"" << to_string(kind) << "\"";
  if (kind == BlockKind::finite) os << ",\"k\":" << k << ",\"random_arms\":" << (random_arms ? "true" : "false");
  os << "}";
  return os.str();
}

Block make_block(const BlockLaw& law, std::uint64_t seed) {
  switch (law.kind) {
    case BlockKind::segment: return Block::segment();
    case BlockKind::circle: return Block::circle();
    case BlockKind::finite: {
      if (law.k == 0) throw ParameterError("finite block needs k >= 1 points");
      if (!law.random_arms) return Block::star(law.k);
      Stream rng(seed);
      std::vector<double> arms(law.k);
      for (double& a : arms) a = rng.uniform(0.25, 0.75);
      return Block::star_arms(std::move(arms),
                              std::vector<double>(law.k, 1.0 / static_cast<double>(law.k)));
    }
  }
  throw ParameterError("unknown block kind");
}

BlockSource::BlockSource(BlockLaw law, std::uint64_t seed) : law_(law), seed_(seed) {
  law_.validate();
  if (law_.deterministic()) shared_ = std::make_shared<const Block>(make_block(law_, 0));
}

BlockHandle BlockSource::at(std::uint64_t index) const {
  if (shared_) return shared_;
  Stream s(seed_, StreamTag::block_content, index);
  return std::make_shared<const Block>(make_block(law_, s()));
}

std::size_t covering_number(const Block& b, double r) {
  if (!(r > 0)) throw ParameterError("covering radius must be positive");
  if (!b.is_finite()) {
    // n open arcs or intervals of length 2r cover a length-1 set iff 2rn > 1
    const double n = std::floor(1.0 / (2 * r)) + 1;
    return static_cast<std::size_t>(n);
  }
  // farthest-point traversal: r-separated centers, so at most N_{r/2}
  const std::size_t k = b.size();
  std::vector<double> gap(k, std::numeric_limits<double>::infinity());
  std::size_t count = 0;
  std::size_t next = 0;
  while (true) {
    ++count;
    for (std::size_t j = 0; j < k; ++j)
      gap[j] = std::min(gap[j], b.distance(static_cast<double>(next), static_cast<double>(j)));
    const auto far = std::max_element(gap.begin(), gap.end());
    if (*far < r) break;
    next = static_cast<std::size_t>(far - gap.begin());
  }
  return count;
}

bool covers(const Block& b, const std::vector<double>& centers, double r) {
  if (centers.empty()) return false;
  if (b.is_finite()) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      bool hit = false;
      for (double c : centers)
        if (b.distance(c, static_cast<double>(j)) < r) {
          hit = true;
          break;
        }
      if (!hit) return false;
    }
    return true;
  }
  std::vector<double> s(centers);
  std::sort(s.begin(), s.end());
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    if (!(s[i + 1] - s[i] < 2 * r)) return false;
  if (b.kind() == BlockKind::segment) return s.front() < r && 1.0 - s.back() < r;
  return (s.front() + 1.0) - s.back() < 2 * r;
}

namespace {

// Sorted continuum net with an incrementally maintained count of gaps that
// open r-balls fail to bridge.
class IntervalNet {
 public:
  IntervalNet(bool circle, double r) : circle_(circle), r_(r) {}

  bool admissible(double x) const {
    if (pts_.empty()) return true;
    auto it = pts_.lower_bound(x);
    auto far = [&](double c) { return dist(x, c) >= r_ / 2; };
    if (it != pts_.end() && !far(*it)) return false;
    if (it != pts_.begin() && !far(*std::prev(it))) return false;
    if (circle_ && (!far(*pts_.begin()) || !far(*pts_.rbegin()))) return false;
    return true;
  }

  void insert(double x) {
    if (pts_.empty()) {
      pts_.insert(x);
      bad_ = edge_bad();
      return;
    }
    bad_ -= edge_bad();
    auto it = pts_.lower_bound(x);
    if (it != pts_.end() && it != pts_.begin()) {
      const double a = *std::prev(it), b = *it;
      bad_ -= gap_bad(a, b);
      bad_ += gap_bad(a, x) + gap_bad(x, b);
    } else if (it == pts_.begin()) {
      bad_ += gap_bad(x, *it);
    } else {
      bad_ += gap_bad(*std::prev(it), x);
    }
    pts_.insert(x);
    bad_ += edge_bad();
  }

  bool covered() const { return !pts_.empty() && bad_ == 0; }

 private:
  double dist(double x, double c) const { return circle_ ? circ(x, c) : std::fabs(x - c); }
  int gap_bad(double a, double b) const { return (b - a < 2 * r_) ? 0 : 1; }
  // boundary gaps: the segment ends, or the wrap-around arc of the circle
  int edge_bad() const {
    const double lo = *pts_.begin(), hi = *pts_.rbegin();
    if (circle_) return ((lo + 1.0) - hi < 2 * r_) ? 0 : 1;
    return (lo < r_ ? 0 : 1) + (1.0 - hi < r_ ? 0 : 1);
  }

  bool circle_;
  double r_;
  std::set<double> pts_;
  int bad_ = 0;
};

}  // namespace

std::vector<double> build_net(const Block& b, double r, Stream& rng, const NetOptions& opt) {
  if (!(r > 0)) throw ParameterError("net radius must be positive");
  std::vector<double> centers;
  if (b.is_finite()) {
    const std::size_t k = b.size();
    std::vector<char> covered(k, 0);
    std::size_t n_cov = 0;
    for (std::uint64_t draw = 0; draw < opt.draw_budget; ++draw) {
      const double x = b.sample(rng);
      bool ok = true;
      for (double c : centers)
        if (b.distance(x, c) < r / 2) {
          ok = false;
          break;
        }
      if (!ok) continue;
      centers.push_back(x);
      for (std::size_t j = 0; j < k; ++j)
        if (!covered[j] && b.distance(x, static_cast<double>(j)) < r) {
          covered[j] = 1;
          ++n_cov;
        }
      if (n_cov == k) return centers;
    }
  } else {
    IntervalNet net(b.kind() == BlockKind::circle, r);
    for (std::uint64_t draw = 0; draw < opt.draw_budget; ++draw) {
      const double x = b.sample(rng);
      if (!net.admissible(x)) continue;
      net.insert(x);
      centers.push_back(x);
      if (net.covered()) return centers;
    }
  }
  throw NumericalError("build_net: draw budget of " + std::to_string(opt.draw_budget) +
                       " exhausted with " + std::to_string(centers.size()) +
                       " centers at r = " + fmt(r));
}

std::size_t FragmentDecomposition::locate(const Block& b, double x) const {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double d = b.distance(x, centers[i]);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

std::size_t FragmentDecomposition::count_meeting(const Block& b, double x, double rp) const {
  std::size_t n = 0;
  for (const auto& f : fragments) {
    bool meets = false;
    if (b.is_finite()) {
      for (std::size_t a : f.atom_ids)
        if (b.distance(x, static_cast<double>(a)) < rp) meets = true;
    } else {
      for (const auto& [lo, hi] : f.pieces) {
        double d;
        if (x >= lo && x <= hi)
          d = 0;
        else
          d = std::min(b.distance(x, lo), b.distance(x, hi));
        if (d < rp) meets = true;
      }
    }
    if (meets) ++n;
  }
  return n;
}

FragmentDecomposition build_fragments(const Block& b, double r, Stream& rng, const NetOptions& opt) {
  FragmentDecomposition fd;
  fd.r = r;
  fd.centers = build_net(b, r, rng, opt);
  const std::size_t n = fd.centers.size();
  fd.fragments.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fd.fragments[i].center_index = i;
    fd.fragments[i].center = fd.centers[i];
  }
  if (b.is_finite()) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const std::size_t i = fd.locate(b, static_cast<double>(j));
      auto& f = fd.fragments[i];
      f.atom_ids.push_back(j);
      f.mass += b.atoms()[j];
      f.reach = std::max(f.reach, b.distance(f.center, static_cast<double>(j)));
    }
    return fd;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
    return fd.centers[a] < fd.centers[c];
  });
  auto add_piece = [&](std::size_t i, double lo, double hi) {
    if (hi <= lo) return;
    auto& f = fd.fragments[i];
    f.pieces.emplace_back(lo, hi);
    f.mass += hi - lo;
    f.reach = std::max({f.reach, b.distance(f.center, lo), b.distance(f.center, hi)});
  };
  if (b.kind() == BlockKind::segment) {
    double lo = 0;
    for (std::size_t s = 0; s < n; ++s) {
      const double hi = (s + 1 < n) ? (fd.centers[order[s]] + fd.centers[order[s + 1]]) / 2 : 1.0;
      add_piece(order[s], lo, hi);
      lo = hi;
    }
  } else if (n == 1) {
    add_piece(0, 0.0, 1.0);
  } else {
    const double first = fd.centers[order.front()];
    const double last = fd.centers[order.back()];
    double wrap = (last + first + 1.0) / 2;
    if (wrap >= 1.0) wrap -= 1.0;
    for (std::size_t s = 0; s < n; ++s) {
      const double c = fd.centers[order[s]];
      const double lo = (s == 0) ? wrap : (fd.centers[order[s - 1]] + c) / 2;
      const double hi = (s + 1 < n) ? (c + fd.centers[order[s + 1]]) / 2 : wrap;
      if (s == 0 && lo > c) {
        add_piece(order[s], lo, 1.0);
        add_piece(order[s], 0.0, hi);
      } else if (s + 1 == n && hi < c) {
        add_piece(order[s], lo, 1.0);
        add_piece(order[s], 0.0, hi);
      } else {
        add_piece(order[s], lo, hi);
      }
    }
  }
  return fd;
}

double fragment_meeting_bound(double d, double r, double rp) {
  const double p4 = phi(d, r / 4);
  const double p2 = phi(d, rp + 2 * r);
  return std::pow(4.0, d + p4) * std::pow(3.0, d - p2) * std::pow(std::max(r, rp), d - p2) *
         std::pow(r, -d - p4);
}

void write_fragments_csv(const std::string& path, const FragmentDecomposition& fd) {
  CsvWriter out(path, {"center_index", "center_coord", "mass", "diameter_bound"});
  for (const auto& f : fd.fragments) out.row(f.center_index, f.center, f.mass, 2 * f.reach);
}

}  // namespace mglue
