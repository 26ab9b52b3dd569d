#include "lbto/triangulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace lbto {

namespace {

constexpr int kInf = -1;

struct Cell {
  std::array<int, 4> v{-1, -1, -1, -1};
  std::array<int, 4> n{-1, -1, -1, -1};
  bool alive = true;
};

Vec cross(const Vec& a, const Vec& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double det3(const Vec& a, const Vec& b, const Vec& c) { return dot(a, cross(b, c)); }

// Positive for counterclockwise (2D) / right-handed (3D) vertex order.
double orient2(const Vec& a, const Vec& b, const Vec& c) {
  return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}
double orient3(const Vec& a, const Vec& b, const Vec& c, const Vec& d) { return det3(b - a, c - a, d - a); }

// Positive when e is strictly inside the circumcircle of the positively oriented (a, b, c).
double incircle(const Vec& a, const Vec& b, const Vec& c, const Vec& e) {
  const Vec ra = a - e, rb = b - e, rc = c - e;
  const double la = ra[0] * ra[0] + ra[1] * ra[1];
  const double lb = rb[0] * rb[0] + rb[1] * rb[1];
  const double lc = rc[0] * rc[0] + rc[1] * rc[1];
  return ra[0] * (rb[1] * lc - lb * rc[1]) - ra[1] * (rb[0] * lc - lb * rc[0]) + la * (rb[0] * rc[1] - rb[1] * rc[0]);
}

// Positive when e is strictly inside the circumsphere of the positively oriented (a, b, c, d).
double insphere(const Vec& a, const Vec& b, const Vec& c, const Vec& d, const Vec& e) {
  const Vec ra = a - e, rb = b - e, rc = c - e, rd = d - e;
  const double la = dot(ra, ra), lb = dot(rb, rb), lc = dot(rc, rc), ld = dot(rd, rd);
  // Expansion of det [r_i, l_i] along the last column; negated so that inside is positive
  // under the det[b-a, c-a, d-a] > 0 orientation.
  const double det = -la * det3(rb, rc, rd) + lb * det3(ra, rc, rd) - lc * det3(ra, rb, rd) + ld * det3(ra, rb, rc);
  return -det;
}

class Builder {
 public:
  Builder(std::span<const Vec> pts, int dims) : d_(dims), input_(pts.begin(), pts.end()) {}

  void run(std::vector<std::array<int, 4>>& simplices, std::vector<std::array<int, 4>>& neighbors,
           std::vector<int>& skipped);

 private:
  double orient_of(const std::array<int, 4>& v) const {
    return d_ == 2 ? orient2(q_[v[0]], q_[v[1]], q_[v[2]]) : orient3(q_[v[0]], q_[v[1]], q_[v[2]], q_[v[3]]);
  }
  int inf_pos(const Cell& c) const {
    for (int i = 0; i <= d_; ++i)
      if (c.v[i] == kInf) return i;
    return -1;
  }
  bool in_conflict(const Cell& c, int p) const;
  bool inside_facet_circle(const Cell& c, int skip, int p) const;
  int find_conflict(int p);
  bool insert(int p);
  int new_cell();
  void link(const std::vector<int>& cells, int skip_vertex);

  int d_;
  std::vector<Vec> input_;
  std::vector<Vec> q_;
  std::vector<Cell> cells_;
  std::vector<int> free_;
  std::vector<int> mark_;
  int stamp_ = 0;
  int hint_ = 0;
};

bool Builder::inside_facet_circle(const Cell& c, int skip, int p) const {
  std::array<int, 3> f{};
  int m = 0;
  for (int i = 0; i <= d_; ++i)
    if (i != skip) f[m++] = c.v[i];
  const Vec& x = q_[p];
  if (d_ == 2) return dot(x - q_[f[0]], x - q_[f[1]]) < -kGeomEps;
  const Vec a = q_[f[0]];
  const Vec u = q_[f[1]] - a, v = q_[f[2]] - a;
  const Vec w = cross(u, v);
  const double ww = dot(w, w);
  if (ww <= kGeomEps * kGeomEps) return false;
  const Vec num = dot(v, v) * cross(w, u) + dot(u, u) * cross(v, w);
  const Vec cc = a + (0.5 / ww) * num;
  const Vec rr = a - cc, rx = x - cc;
  return dot(rx, rx) < dot(rr, rr) - kGeomEps;
}

bool Builder::in_conflict(const Cell& c, int p) const {
  const int ip = inf_pos(c);
  if (ip < 0) {
    const auto& v = c.v;
    const double s = d_ == 2 ? incircle(q_[v[0]], q_[v[1]], q_[v[2]], q_[p])
                             : insphere(q_[v[0]], q_[v[1]], q_[v[2]], q_[v[3]], q_[p]);
    return s > kGeomEps;
  }
  std::array<int, 4> v = c.v;
  v[ip] = p;
  const double o = orient_of(v);
  if (o > kGeomEps) return true;
  if (o < -kGeomEps) return false;
  return inside_facet_circle(c, ip, p);
}

int Builder::find_conflict(int p) {
  int cur = hint_;
  if (cur < 0 || cur >= static_cast<int>(cells_.size()) || !cells_[cur].alive) {
    cur = -1;
    for (int i = 0; i < static_cast<int>(cells_.size()); ++i)
      if (cells_[i].alive) {
        cur = i;
        break;
      }
  }
  const int limit = 4 * static_cast<int>(cells_.size()) + 64;
  for (int step = 0; step < limit && cur >= 0; ++step) {
    const Cell& c = cells_[cur];
    const int ip = inf_pos(c);
    if (ip >= 0) {
      if (in_conflict(c, p)) return cur;
      cur = c.n[ip];
      continue;
    }
    int next = -1;
    for (int r = 0; r <= d_; ++r) {
      const int i = (r + step) % (d_ + 1);
      std::array<int, 4> v = c.v;
      v[i] = p;
      if (orient_of(v) < -kGeomEps) {
        next = c.n[i];
        break;
      }
    }
    if (next < 0) {
      if (in_conflict(c, p)) return cur;
      break;
    }
    cur = next;
  }
  for (int i = 0; i < static_cast<int>(cells_.size()); ++i)
    if (cells_[i].alive && in_conflict(cells_[i], p)) return i;
  return -1;
}

int Builder::new_cell() {
  if (!free_.empty()) {
    const int id = free_.back();
    free_.pop_back();
    cells_[id] = Cell{};
    mark_[id] = 0;
    return id;
  }
  cells_.emplace_back();
  mark_.push_back(0);
  return static_cast<int>(cells_.size()) - 1;
}

// Connects the given cells across shared facets that contain `skip_vertex`
// (all of them when skip_vertex == -2).
void Builder::link(const std::vector<int>& cells, int skip_vertex) {
  std::unordered_map<std::uint64_t, std::pair<int, int>> open;
  for (int id : cells) {
    const Cell& c = cells_[id];
    for (int j = 0; j <= d_; ++j) {
      if (skip_vertex != -2 && c.v[j] == skip_vertex) continue;
      std::array<std::int64_t, 3> key{};
      int m = 0;
      for (int i = 0; i <= d_; ++i) {
        if (i == j || (skip_vertex != -2 && c.v[i] == skip_vertex)) continue;
        key[m++] = c.v[i] + 1;
      }
      std::sort(key.begin(), key.begin() + m);
      std::uint64_t h = 0;
      for (int i = 0; i < m; ++i) h = h * 0x100000001ull + static_cast<std::uint64_t>(key[i]);
      auto [it, inserted] = open.try_emplace(h, id, j);
      if (!inserted) {
        cells_[id].n[j] = it->second.first;
        cells_[it->second.first].n[it->second.second] = id;
        open.erase(it);
      }
    }
  }
}

bool Builder::insert(int p) {
  const int seed = find_conflict(p);
  if (seed < 0) return false;
  for (int i = 0; i <= d_; ++i) {
    const int v = cells_[seed].v[i];
    if (v != kInf && distance(q_[v], q_[p]) < 1e-13) return false;
  }

  ++stamp_;
  std::vector<int> cavity{seed};
  mark_[seed] = stamp_;
  for (std::size_t s = 0; s < cavity.size(); ++s) {
    const Cell& c = cells_[cavity[s]];
    for (int i = 0; i <= d_; ++i) {
      const int nb = c.n[i];
      if (nb < 0 || mark_[nb] == stamp_) continue;
      if (in_conflict(cells_[nb], p)) {
        mark_[nb] = stamp_;
        cavity.push_back(nb);
      }
    }
  }

  // Grow the cavity until every new simplex is properly oriented (star-shaped from p).
  std::vector<std::pair<int, int>> boundary;
  for (int round = 0;; ++round) {
    if (round > 64) return false;
    boundary.clear();
    std::vector<int> grow;
    for (int id : cavity) {
      const Cell& c = cells_[id];
      for (int i = 0; i <= d_; ++i) {
        const int nb = c.n[i];
        if (mark_[nb] == stamp_) continue;
        boundary.emplace_back(id, i);
        std::array<int, 4> v = c.v;
        v[i] = p;
        bool ok = true;
        const int ip = inf_pos(Cell{v, {}, true});
        if (ip < 0) {
          ok = orient_of(v) > kGeomEps;
        } else if (d_ == 3) {
          std::array<int, 3> f{};
          int m = 0;
          for (int k = 0; k <= d_; ++k)
            if (k != ip) f[m++] = v[k];
          const Vec w = cross(q_[f[1]] - q_[f[0]], q_[f[2]] - q_[f[0]]);
          ok = norm(w) > kGeomEps;
        }
        if (!ok) grow.push_back(nb);
      }
    }
    if (grow.empty()) break;
    for (int nb : grow) {
      if (mark_[nb] == stamp_) continue;
      mark_[nb] = stamp_;
      cavity.push_back(nb);
    }
  }

  // Every vertex of the cavity must survive on its boundary.
  {
    std::vector<int> inner, outer;
    for (int id : cavity)
      for (int i = 0; i <= d_; ++i) inner.push_back(cells_[id].v[i]);
    for (const auto& [id, i] : boundary)
      for (int k = 0; k <= d_; ++k)
        if (k != i) outer.push_back(cells_[id].v[k]);
    std::sort(inner.begin(), inner.end());
    inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
    std::sort(outer.begin(), outer.end());
    outer.erase(std::unique(outer.begin(), outer.end()), outer.end());
    if (!std::includes(outer.begin(), outer.end(), inner.begin(), inner.end())) return false;
  }

  std::vector<int> created;
  created.reserve(boundary.size());
  for (const auto& [id, i] : boundary) {
    const int nc = new_cell();
    Cell& c = cells_[nc];
    const Cell& old = cells_[id];
    c.v = old.v;
    c.v[i] = p;
    const int outside = old.n[i];
    c.n[i] = outside;
    for (int k = 0; k <= d_; ++k)
      if (cells_[outside].n[k] == id) cells_[outside].n[k] = nc;
    created.push_back(nc);
  }
  link(created, p);
  for (int id : cavity) {
    cells_[id].alive = false;
    free_.push_back(id);
  }
  hint_ = created.front();
  for (int id : created)
    if (inf_pos(cells_[id]) < 0) {
      hint_ = id;
      break;
    }
  return true;
}

void Builder::run(std::vector<std::array<int, 4>>& simplices, std::vector<std::array<int, 4>>& neighbors,
                  std::vector<int>& skipped) {
  const int n = static_cast<int>(input_.size());
  if (n < d_ + 1) throw Error(ErrorCode::DegenerateInput, "need at least d+1 points");

  Vec lo = input_[0], hi = input_[0];
  for (const Vec& x : input_)
    for (int a = 0; a < d_; ++a) {
      lo[a] = std::min(lo[a], x[a]);
      hi[a] = std::max(hi[a], x[a]);
    }
  double scale = 0.0;
  for (int a = 0; a < d_; ++a) scale = std::max(scale, hi[a] - lo[a]);
  if (!(scale > 0)) throw Error(ErrorCode::DegenerateInput, "all points coincide");
  q_.resize(input_.size());
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < 3; ++a) q_[i][a] = a < d_ ? (input_[i][a] - lo[a]) / scale : 0.0;

  // Initial simplex from the first affinely independent points.
  std::array<int, 4> init{0, -1, -1, -1};
  for (int i = 1; i < n && init[1] < 0; ++i)
    if (distance(q_[i], q_[0]) > kGeomEps) init[1] = i;
  for (int i = 1; i < n && init[1] >= 0 && init[2] < 0; ++i) {
    const Vec w = cross(q_[init[1]] - q_[0], q_[i] - q_[0]);
    if (norm(w) > kGeomEps) init[2] = i;
  }
  if (d_ == 3)
    for (int i = 1; i < n && init[2] >= 0 && init[3] < 0; ++i)
      if (std::abs(orient3(q_[0], q_[init[1]], q_[init[2]], q_[i])) > kGeomEps) init[3] = i;
  for (int k = 0; k <= d_; ++k)
    if (init[k] < 0) throw Error(ErrorCode::DegenerateInput, "points are affinely dependent");
  if (orient_of(init) < 0) std::swap(init[0], init[1]);

  const int finite = new_cell();
  cells_[finite].v = init;
  std::vector<int> all{finite};
  for (int i = 0; i <= d_; ++i) {
    const int g = new_cell();
    Cell& c = cells_[g];
    c.v = init;
    c.v[i] = kInf;
    // Flip so that substituting an outside point for the infinite vertex is positive.
    const int a = (i + 1) % (d_ + 1), b = (i + 2) % (d_ + 1);
    std::swap(c.v[a], c.v[b]);
    all.push_back(g);
  }
  link(all, -2);
  hint_ = finite;

  std::vector<int> order;
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (int k = 0; k <= d_; ++k) used[init[k]] = 1;
  for (int i = 0; i < n; ++i)
    if (!used[i]) order.push_back(i);
  // Morton order keeps the point-location walks short.
  auto morton = [&](int i) {
    std::uint64_t code = 0;
    std::array<std::uint64_t, 3> c{};
    for (int a = 0; a < d_; ++a)
      c[a] = static_cast<std::uint64_t>(std::clamp(q_[i][a], 0.0, 1.0) * ((1u << 20) - 1));
    for (int b = 19; b >= 0; --b)
      for (int a = 0; a < d_; ++a) code = (code << 1) | ((c[a] >> b) & 1u);
    return code;
  };
  std::vector<std::uint64_t> codes(static_cast<std::size_t>(n));
  for (int i : order) codes[i] = morton(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return codes[a] < codes[b]; });

  for (int p : order)
    if (!insert(p)) skipped.push_back(p);
  std::sort(skipped.begin(), skipped.end());

  std::vector<int> remap(cells_.size(), -1);
  for (std::size_t i = 0; i < cells_.size(); ++i)
    if (cells_[i].alive && inf_pos(cells_[i]) < 0) {
      remap[i] = static_cast<int>(simplices.size());
      simplices.push_back(cells_[i].v);
    }
  neighbors.assign(simplices.size(), {-1, -1, -1, -1});
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (remap[i] < 0) continue;
    for (int k = 0; k <= d_; ++k) neighbors[remap[i]][k] = remap[cells_[i].n[k]];
  }
}

}  // namespace

Triangulation Triangulation::build(std::span<const Vec> points, int dims) {
  if (dims != 2 && dims != 3) throw Error(ErrorCode::InvalidArgument, "triangulation dims must be 2 or 3");
  Triangulation t;
  t.dims_ = dims;
  t.points_.assign(points.begin(), points.end());
  for (auto& p : t.points_)
    if (dims == 2) p[2] = 0.0;
  Builder b(t.points_, dims);
  b.run(t.simplices_, t.neighbors_, t.skipped_);
  t.build_locator();
  return t;
}

std::array<double, 4> Triangulation::barycentric(std::size_t i, const Vec& x) const {
  const auto& s = simplices_[i];
  const Vec& a = points_[s[0]];
  std::array<double, 4> w{0, 0, 0, 0};
  if (dims_ == 2) {
    const Vec u = points_[s[1]] - a, v = points_[s[2]] - a, r = x - a;
    const double det = u[0] * v[1] - u[1] * v[0];
    w[1] = (r[0] * v[1] - r[1] * v[0]) / det;
    w[2] = (u[0] * r[1] - u[1] * r[0]) / det;
    w[0] = 1.0 - w[1] - w[2];
  } else {
    const Vec u = points_[s[1]] - a, v = points_[s[2]] - a, z = points_[s[3]] - a, r = x - a;
    const double det = det3(u, v, z);
    w[1] = det3(r, v, z) / det;
    w[2] = det3(u, r, z) / det;
    w[3] = det3(u, v, r) / det;
    w[0] = 1.0 - w[1] - w[2] - w[3];
  }
  return w;
}

void Triangulation::build_locator() {
  Vec lo = points_.front(), hi = points_.front();
  for (const Vec& p : points_)
    for (int a = 0; a < dims_; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  double scale = 0;
  for (int a = 0; a < dims_; ++a) scale = std::max(scale, hi[a] - lo[a]);
  const double per_axis = std::ceil(std::pow(static_cast<double>(std::max<std::size_t>(1, simplices_.size())) / 2.0,
                                             1.0 / dims_));
  box_lo_ = lo;
  for (int a = 0; a < 3; ++a) {
    if (a < dims_) {
      bucket_dims_[a] = std::clamp(static_cast<int>(per_axis), 1, 256);
      const double ext = std::max(hi[a] - lo[a], 1e-300);
      bucket_size_[a] = ext / bucket_dims_[a];
    } else {
      bucket_dims_[a] = 1;
      bucket_size_[a] = 1;
    }
  }
  buckets_.assign(static_cast<std::size_t>(bucket_dims_[0]) * bucket_dims_[1] * bucket_dims_[2], {});
  const double vol_scale = std::pow(scale, dims_);
  for (std::size_t i = 0; i < simplices_.size(); ++i) {
    const auto& s = simplices_[i];
    const double vol = dims_ == 2 ? orient2(points_[s[0]], points_[s[1]], points_[s[2]])
                                  : orient3(points_[s[0]], points_[s[1]], points_[s[2]], points_[s[3]]);
    if (!(std::abs(vol) / vol_scale > kVolumeEps)) continue;
    Index3 b0{0, 0, 0}, b1{0, 0, 0};
    for (int a = 0; a < dims_; ++a) {
      double mn = points_[s[0]][a], mx = mn;
      for (int k = 1; k <= dims_; ++k) {
        mn = std::min(mn, points_[s[k]][a]);
        mx = std::max(mx, points_[s[k]][a]);
      }
      b0[a] = std::clamp(static_cast<int>(std::floor((mn - lo[a]) / bucket_size_[a])) - 1, 0, bucket_dims_[a] - 1);
      b1[a] = std::clamp(static_cast<int>(std::floor((mx - lo[a]) / bucket_size_[a])) + 1, 0, bucket_dims_[a] - 1);
    }
    for (int z = b0[2]; z <= b1[2]; ++z)
      for (int y = b0[1]; y <= b1[1]; ++y)
        for (int x = b0[0]; x <= b1[0]; ++x)
          buckets_[static_cast<std::size_t>(x) + static_cast<std::size_t>(bucket_dims_[0]) * (y + static_cast<std::size_t>(bucket_dims_[1]) * z)]
              .push_back(static_cast<int>(i));
  }
}

std::optional<SimplexLocation> Triangulation::locate(const Vec& x) const {
  Index3 b{0, 0, 0};
  for (int a = 0; a < dims_; ++a) {
    const double f = (x[a] - box_lo_[a]) / bucket_size_[a];
    if (!(f >= -1e-9 * bucket_dims_[a] && f <= bucket_dims_[a] * (1.0 + 1e-9))) return std::nullopt;
    b[a] = std::clamp(static_cast<int>(std::floor(f)), 0, bucket_dims_[a] - 1);
  }
  const auto& cand =
      buckets_[static_cast<std::size_t>(b[0]) + static_cast<std::size_t>(bucket_dims_[0]) * (b[1] + static_cast<std::size_t>(bucket_dims_[1]) * b[2])];
  std::optional<SimplexLocation> best;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int id : cand) {
    const auto& s = simplices_[static_cast<std::size_t>(id)];
    for (int k = 0; k <= dims_; ++k) {
      if (points_[s[k]] == x) {
        SimplexLocation loc{id, s, {0, 0, 0, 0}};
        loc.weights[k] = 1.0;
        return loc;
      }
    }
    const auto w = barycentric(static_cast<std::size_t>(id), x);
    double mn = w[0];
    for (int k = 1; k <= dims_; ++k) mn = std::min(mn, w[k]);
    if (mn > best_min) {
      best_min = mn;
      best = SimplexLocation{id, s, w};
    }
  }
  if (!best || best_min < -kBaryEps) return std::nullopt;
  return best;
}

}  // namespace lbto
