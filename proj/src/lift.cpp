#include "gigp/lift.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gigp::lift {

using group::GroupElement;
using group::GroupId;

void RawPointCloud::validate() const {
  if (n_points < 1 || feat_dim < 1 || dim < 1)
    throw std::invalid_argument("RawPointCloud: need n_points, dim, feat_dim >= 1");
  if (coords.size() != n_points * dim || features.size() != n_points * feat_dim)
    throw std::invalid_argument("RawPointCloud: buffer sizes inconsistent");
  for (double v : coords)
    if (!std::isfinite(v)) throw std::invalid_argument("RawPointCloud: non-finite coord");
  for (double v : features)
    if (!std::isfinite(v)) throw std::invalid_argument("RawPointCloud: non-finite feature");
}

std::vector<double> LiftedCloud::features_matrix() const {
  std::vector<double> out;
  out.reserve(points.size() * feat_dim);
  for (const auto& p : points)
    out.insert(out.end(), p.feature.begin(), p.feature.end());
  return out;
}

void LiftedCloud::set_features(const std::vector<double>& flat,
                               std::size_t feat_dim_new) {
  if (flat.size() != points.size() * feat_dim_new)
    throw std::invalid_argument("set_features: size mismatch");
  feat_dim = feat_dim_new;
  for (std::size_t i = 0; i < points.size(); ++i)
    points[i].feature.assign(flat.begin() + i * feat_dim_new,
                             flat.begin() + (i + 1) * feat_dim_new);
}

double orbit_of(const std::vector<double>& x, GroupId g) {
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("orbit_of: non-finite point");
  switch (g) {
    case GroupId::SO2:
    case GroupId::SO3: {
      double s = 0.0;
      for (double v : x) s += v * v;
      return std::sqrt(s);
    }
    case GroupId::Tn:
      return 0.0;  // transitive action, single orbit
  }
  throw std::logic_error("orbit_of: bad group id");
}

std::vector<double> origin_of(double orbit, GroupId g, std::size_t n) {
  if (orbit < 0.0) throw std::invalid_argument("origin_of: negative orbit");
  std::vector<double> o(n, 0.0);
  if (g != GroupId::Tn) o[0] = orbit;
  return o;
}

GroupElement canonical_lift(const std::vector<double>& x, GroupId g) {
  switch (g) {
    case GroupId::SO2: {
      if (x.size() != 2) throw std::invalid_argument("canonical_lift: need 2d point");
      if (x[0] == 0.0 && x[1] == 0.0) return group::identity(GroupId::SO2);
      return group::so2(std::atan2(x[1], x[0]));
    }
    case GroupId::SO3: {
      if (x.size() != 3) throw std::invalid_argument("canonical_lift: need 3d point");
      const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      if (r == 0.0) return group::identity(GroupId::SO3);
      const double ux = x[0] / r, uy = x[1] / r, uz = x[2] / r;
      // minimal geodesic rotation taking e1 to (ux, uy, uz), as a quaternion
      // (1 + e1.u, e1 x u) before normalization
      double qw = 1.0 + ux, qx = 0.0, qy = -uz, qz = uy;
      const double qn = std::sqrt(qw * qw + qy * qy + qz * qz);
      if (qn < 1e-9) {
        // antipodal: rotate by pi about e2
        return group::GroupElement{GroupId::SO3, {-1, 0, 0, 0, 1, 0, 0, 0, -1}};
      }
      qw /= qn;
      qy /= qn;
      qz /= qn;
      std::vector<double> m(9);
      m[0] = 1 - 2 * (qy * qy + qz * qz);
      m[1] = 2 * (qx * qy - qw * qz);
      m[2] = 2 * (qx * qz + qw * qy);
      m[3] = 2 * (qx * qy + qw * qz);
      m[4] = 1 - 2 * (qx * qx + qz * qz);
      m[5] = 2 * (qy * qz - qw * qx);
      m[6] = 2 * (qx * qz - qw * qy);
      m[7] = 2 * (qy * qz + qw * qx);
      m[8] = 1 - 2 * (qx * qx + qy * qy);
      return group::GroupElement{GroupId::SO3, std::move(m)};
    }
    case GroupId::Tn:
      return group::translation(x);
  }
  throw std::logic_error("canonical_lift: bad group id");
}

LiftedCloud lift(const RawPointCloud& cloud, GroupId g) {
  cloud.validate();
  LiftedCloud out;
  out.group_id = g;
  out.feat_dim = cloud.feat_dim;
  out.points.reserve(cloud.n_points);
  for (std::size_t i = 0; i < cloud.n_points; ++i) {
    const std::vector<double> x = cloud.coord_vec(i);
    LiftedPoint p;
    p.orbit = orbit_of(x, g);
    p.elem = canonical_lift(x, g);
    p.feature.assign(cloud.features.begin() + i * cloud.feat_dim,
                     cloud.features.begin() + (i + 1) * cloud.feat_dim);
    out.points.push_back(std::move(p));
  }
  return out;
}

std::vector<GroupElement> stabilizer_sample(const std::vector<double>& x,
                                            GroupId g, std::size_t m,
                                            std::uint64_t rng_seed) {
  if (g != GroupId::SO3)
    throw std::invalid_argument(
        "stabilizer_sample: only SO3 has a nontrivial stabilizer to sample");
  if (m < 1) throw std::invalid_argument("stabilizer_sample: m >= 1 required");
  const GroupElement canon = canonical_lift(x, g);
  std::vector<GroupElement> out;
  out.reserve(m);
  out.push_back(canon);
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> dist(0.0, 2.0 * std::numbers::pi);
  for (std::size_t j = 1; j < m; ++j) {
    const double t = dist(rng);
    const double c = std::cos(t), s = std::sin(t);
    // rotation about e1 fixes the origin representative (r, 0, 0)
    GroupElement stab{GroupId::SO3, {1, 0, 0, 0, c, -s, 0, s, c}};
    out.push_back(group::compose(canon, stab));
  }
  return out;
}

}  // namespace gigp::lift
