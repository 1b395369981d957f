#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "clustersim/config.hpp"
#include "clustersim/rng.hpp"

namespace clustersim::geometry {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }
inline double norm(Point a) { return std::hypot(a.x, a.y); }

/// One sampled deployment on a disk window centred on the typical user (the origin).
struct NetworkRealization {
  std::vector<Point> bs_points;
  std::vector<Point> cluster_points;
  double window_radius = 0.0;
  /// Index into cluster_points of each base station's nearest cluster station.
  std::vector<std::size_t> bs_to_cluster;
};

struct Interferer {
  std::size_t index = 0;  ///< into NetworkRealization::bs_points
  double distance = 0.0;  ///< to the typical user
};

/// The tagged cluster seen from the typical user.
struct TypicalCluster {
  std::size_t serving_bs_index = 0;
  std::size_t cluster_index = 0;
  double r0 = 0.0;   ///< user to serving base station
  double r1 = 0.0;   ///< serving base station to its cluster station
  /// Other base stations of the serving cluster, ascending distance.
  std::vector<Interferer> intra_interferers;
  double r_m = 0.0;  ///< inscribed radius of the cluster cell about its station
  double r_M = 0.0;  ///< circumscribed radius of the cluster cell about its station
  /// Every base station outside the serving cluster, in index order.
  std::vector<Interferer> out_interferers;
  /// Vertices of the cluster cell (counter-clockwise).
  std::vector<Point> cell;

  int n() const { return static_cast<int>(intra_interferers.size()); }
};

/// Window radius holding window_cluster_count clusters on average.
double window_radius(const SimConfig& cfg);

/// Poisson base stations and cluster stations on the window, with association.
NetworkRealization sample_realization(const SimConfig& cfg, Rng& rng);

/// Nearest cluster station of every base station (ties go to the lower index).
std::vector<std::size_t> associate(std::span<const Point> bs, std::span<const Point> clusters);

struct ClusterOptions {
  /// Cells with a vertex farther than guard_fraction * window_radius from the
  /// centre are rejected. Values >= 1 disable the guard.
  double guard_fraction = 0.9;
};

/// Extracts the serving cluster and every radius used by the bounds.
/// Throws DegenerateRealization when the realization cannot be used.
TypicalCluster build_typical_cluster(const NetworkRealization& net, const ClusterOptions& opt = {});

/// Voronoi cell of cluster station `site` clipped to the convex `window` polygon.
std::vector<Point> voronoi_cell(std::span<const Point> sites, std::size_t site,
                                std::vector<Point> window);

/// Regular polygon inscribed in the disk of the given radius about the origin.
std::vector<Point> disk_polygon(double radius, int sides = 128);

/// Draws a typical cluster, resampling rejected realizations.
/// `rejections` (if non-null) is incremented once per rejected draw.
TypicalCluster sample_typical_cluster(const SimConfig& cfg, Rng& rng, std::size_t* rejections = nullptr,
                                      NetworkRealization* net_out = nullptr);

}  // namespace clustersim::geometry
