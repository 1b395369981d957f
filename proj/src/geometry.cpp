#include "clustersim/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <random>

#include "clustersim/errors.hpp"

namespace clustersim::geometry {
namespace {

constexpr int kMaxResamples = 10000;

void sample_disk(std::vector<Point>& out, double mean, double radius, Rng& rng) {
  std::poisson_distribution<long> count(mean);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const long n = count(rng);
  out.resize(static_cast<std::size_t>(n));
  for (auto& p : out) {
    const double r = radius * std::sqrt(unif(rng));
    const double th = 2.0 * std::numbers::pi * unif(rng);
    p = {r * std::cos(th), r * std::sin(th)};
  }
}

// Uniform bucket grid over the bounding box of a point set.
class GridIndex {
 public:
  explicit GridIndex(std::span<const Point> pts) : pts_(pts) {
    double lo_x = std::numeric_limits<double>::max(), lo_y = lo_x;
    double hi_x = std::numeric_limits<double>::lowest(), hi_y = hi_x;
    for (const auto& p : pts) {
      lo_x = std::min(lo_x, p.x);
      lo_y = std::min(lo_y, p.y);
      hi_x = std::max(hi_x, p.x);
      hi_y = std::max(hi_y, p.y);
    }
    const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
    side_ = std::max<int>(1, static_cast<int>(std::sqrt(static_cast<double>(pts.size()))));
    cell_ = span / side_ * (1.0 + 1e-9);
    ox_ = lo_x;
    oy_ = lo_y;
    start_.assign(static_cast<std::size_t>(side_ * side_) + 1, 0);
    for (const auto& p : pts) ++start_[bucket(cx(p.x), cy(p.y)) + 1];
    for (std::size_t i = 1; i < start_.size(); ++i) start_[i] += start_[i - 1];
    items_.resize(pts.size());
    auto fill = start_;
    for (std::size_t i = 0; i < pts.size(); ++i) items_[fill[bucket(cx(pts[i].x), cy(pts[i].y))]++] = i;
  }

  std::size_t nearest(Point q) const {
    const int qx = cx(q.x), qy = cy(q.y);
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int ring = 0;; ++ring) {
      for (int gx = qx - ring; gx <= qx + ring; ++gx) {
        for (int gy = qy - ring; gy <= qy + ring; ++gy) {
          if (std::max(std::abs(gx - qx), std::abs(gy - qy)) != ring) continue;
          if (gx < 0 || gy < 0 || gx >= side_ || gy >= side_) continue;
          const std::size_t b = bucket(gx, gy);
          for (std::size_t k = start_[b]; k < start_[b + 1]; ++k) {
            const std::size_t i = items_[k];
            const double dx = pts_[i].x - q.x, dy = pts_[i].y - q.y;
            const double d2 = dx * dx + dy * dy;
            if (d2 < best_d2 || (d2 == best_d2 && i < best)) {
              best_d2 = d2;
              best = i;
            }
          }
        }
      }
      // Every point in rings > ring lies at least ring * cell_ away (query clamped inside).
      const double reach = ring * cell_ - outside_margin(q);
      if (best_d2 < std::numeric_limits<double>::infinity() && reach > 0 && reach * reach > best_d2) break;
      if (ring > 2 * side_ + 2) break;
    }
    return best;
  }

 private:
  int clamp_cell(double v) const { return std::clamp(static_cast<int>(std::floor(v)), 0, side_ - 1); }
  int cx(double x) const { return clamp_cell((x - ox_) / cell_); }
  int cy(double y) const { return clamp_cell((y - oy_) / cell_); }
  std::size_t bucket(int gx, int gy) const { return static_cast<std::size_t>(gx * side_ + gy); }
  // Distance by which q lies outside the grid box (clamping shrinks the ring bound).
  double outside_margin(Point q) const {
    const double hx = ox_ + side_ * cell_, hy = oy_ + side_ * cell_;
    const double dx = std::max({ox_ - q.x, 0.0, q.x - hx});
    const double dy = std::max({oy_ - q.y, 0.0, q.y - hy});
    return dx + dy;
  }

  std::span<const Point> pts_;
  int side_ = 1;
  double cell_ = 1.0, ox_ = 0.0, oy_ = 0.0;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> items_;
};

// Keeps the part of a convex polygon with n.p <= c (Sutherland-Hodgman, one edge).
std::vector<Point> clip(const std::vector<Point>& poly, Point n, double c) {
  std::vector<Point> out;
  out.reserve(poly.size() + 1);
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Point p = poly[i], q = poly[(i + 1) % m];
    const double fp = n.x * p.x + n.y * p.y - c;
    const double fq = n.x * q.x + n.y * q.y - c;
    if (fp <= 0) out.push_back(p);
    if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) {
      const double t = fp / (fp - fq);
      out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
    }
  }
  return out;
}

}  // namespace

double window_radius(const SimConfig& cfg) {
  return std::sqrt(cfg.window_cluster_count / (std::numbers::pi * cfg.lambda_c));
}

std::vector<std::size_t> associate(std::span<const Point> bs, std::span<const Point> clusters) {
  std::vector<std::size_t> out(bs.size(), 0);
  if (clusters.empty()) return out;
  GridIndex index(clusters);
  for (std::size_t i = 0; i < bs.size(); ++i) out[i] = index.nearest(bs[i]);
  return out;
}

NetworkRealization sample_realization(const SimConfig& cfg, Rng& rng) {
  NetworkRealization net;
  net.window_radius = window_radius(cfg);
  const double area = std::numbers::pi * net.window_radius * net.window_radius;
  sample_disk(net.bs_points, cfg.lambda_b * area, net.window_radius, rng);
  sample_disk(net.cluster_points, cfg.lambda_c * area, net.window_radius, rng);
  net.bs_to_cluster = associate(net.bs_points, net.cluster_points);
  return net;
}

std::vector<Point> disk_polygon(double radius, int sides) {
  std::vector<Point> poly(static_cast<std::size_t>(sides));
  for (int k = 0; k < sides; ++k) {
    const double th = 2.0 * std::numbers::pi * k / sides;
    poly[static_cast<std::size_t>(k)] = {radius * std::cos(th), radius * std::sin(th)};
  }
  return poly;
}

std::vector<Point> voronoi_cell(std::span<const Point> sites, std::size_t site, std::vector<Point> poly) {
  const Point c = sites[site];
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(sites.size());
  for (std::size_t j = 0; j < sites.size(); ++j) {
    if (j != site) order.emplace_back(distance(sites[j], c), j);
  }
  std::sort(order.begin(), order.end());
  auto reach = [&] {
    double r = 0.0;
    for (const auto& v : poly) r = std::max(r, distance(v, c));
    return r;
  };
  double max_vertex = reach();
  for (const auto& [d, j] : order) {
    // A bisector farther than the farthest vertex cannot cut the cell.
    if (d > 2.0 * max_vertex) break;
    const Point s = sites[j];
    const Point n{s.x - c.x, s.y - c.y};
    const double rhs = 0.5 * ((s.x * s.x + s.y * s.y) - (c.x * c.x + c.y * c.y));
    poly = clip(poly, n, rhs);
    if (poly.empty()) break;
    max_vertex = reach();
  }
  return poly;
}

TypicalCluster build_typical_cluster(const NetworkRealization& net, const ClusterOptions& opt) {
  if (net.bs_points.empty()) throw DegenerateRealization("no base station in window");
  if (net.cluster_points.empty()) throw DegenerateRealization("no cluster station in window");

  TypicalCluster tc;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < net.bs_points.size(); ++i) {
    const double d = norm(net.bs_points[i]);
    if (d < best) {
      best = d;
      tc.serving_bs_index = i;
    }
  }
  tc.r0 = best;
  tc.cluster_index = net.bs_to_cluster[tc.serving_bs_index];
  const Point c0 = net.cluster_points[tc.cluster_index];
  tc.r1 = distance(net.bs_points[tc.serving_bs_index], c0);

  tc.cell = voronoi_cell(net.cluster_points, tc.cluster_index, disk_polygon(net.window_radius));
  if (tc.cell.size() < 3) throw DegenerateRealization("empty cluster cell");
  const double guard = opt.guard_fraction * net.window_radius;
  for (const auto& v : tc.cell) {
    tc.r_M = std::max(tc.r_M, distance(v, c0));
    if (opt.guard_fraction < 1.0 && norm(v) > guard) {
      throw DegenerateRealization("cluster cell reaches the guard annulus");
    }
  }

  double nearest_station = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < net.cluster_points.size(); ++j) {
    if (j != tc.cluster_index) nearest_station = std::min(nearest_station, distance(net.cluster_points[j], c0));
  }
  tc.r_m = std::isfinite(nearest_station) ? 0.5 * nearest_station : net.window_radius - norm(c0);

  for (std::size_t i = 0; i < net.bs_points.size(); ++i) {
    if (i == tc.serving_bs_index) continue;
    const Interferer it{i, norm(net.bs_points[i])};
    if (net.bs_to_cluster[i] == tc.cluster_index) {
      tc.intra_interferers.push_back(it);
    } else {
      tc.out_interferers.push_back(it);
    }
  }
  std::sort(tc.intra_interferers.begin(), tc.intra_interferers.end(),
            [](const Interferer& a, const Interferer& b) {
              return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
            });
  return tc;
}

TypicalCluster sample_typical_cluster(const SimConfig& cfg, Rng& rng, std::size_t* rejections,
                                      NetworkRealization* net_out) {
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    auto net = sample_realization(cfg, rng);
    try {
      auto tc = build_typical_cluster(net);
      if (net_out) *net_out = std::move(net);
      return tc;
    } catch (const DegenerateRealization&) {
      if (rejections) ++*rejections;
    }
  }
  throw DegenerateRealization("no usable realization after repeated resampling");
}

}  // namespace clustersim::geometry
