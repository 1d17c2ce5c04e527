#pragma once

#include <cstdint>
#include <vector>

#include "gigp/group.hpp"

namespace gigp::lift {

struct RawPointCloud {
  std::size_t n_points = 0;
  std::size_t dim = 0;       // spatial dimension
  std::size_t feat_dim = 0;  // feature channels
  std::vector<double> coords;    // n_points x dim, row major
  std::vector<double> features;  // n_points x feat_dim, row major

  const double* coord(std::size_t i) const { return coords.data() + i * dim; }
  std::vector<double> coord_vec(std::size_t i) const {
    return {coord(i), coord(i) + dim};
  }
  void validate() const;
};

// (group element, orbit coordinate, feature) — what every layer consumes.
struct LiftedPoint {
  group::GroupElement elem;
  double orbit = 0.0;
  std::vector<double> feature;
};

struct LiftedCloud {
  group::GroupId group_id;
  std::size_t feat_dim = 0;
  std::vector<LiftedPoint> points;

  std::size_t size() const { return points.size(); }
  std::vector<double> features_matrix() const;
  void set_features(const std::vector<double>& flat, std::size_t feat_dim_new);
};

// orbit coordinate of a raw point: radius for SO(n), 0 for Tn
double orbit_of(const std::vector<double>& x, group::GroupId g);

// canonical orbit representative: (orbit, 0, ..., 0) for SO(n), 0 for Tn
std::vector<double> origin_of(double orbit, group::GroupId g, std::size_t n);

// Canonical element carrying origin_of(orbit_of(x)) to x. For SO3 this is
// the minimal geodesic rotation; points at the exact origin lift to the
// identity with orbit 0.
group::GroupElement canonical_lift(const std::vector<double>& x,
                                   group::GroupId g);

LiftedCloud lift(const RawPointCloud& cloud, group::GroupId g);

// m elements of the stabilizer coset {u : u * origin = x}, SO3 only. The
// first sample is the canonical element; the rest are drawn uniformly over
// the stabilizer circle.
std::vector<group::GroupElement> stabilizer_sample(const std::vector<double>& x,
                                                   group::GroupId g,
                                                   std::size_t m,
                                                   std::uint64_t rng_seed);

}  // namespace gigp::lift
