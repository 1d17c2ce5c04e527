#include "gigp/group.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gigp::group {

namespace {

constexpr double kPi = std::numbers::pi;

void check_same_group(const GroupElement& g, const GroupElement& h,
                      const char* op) {
  if (g.group != h.group || g.data.size() != h.data.size())
    throw std::invalid_argument(std::string(op) + ": mismatched group elements");
}

std::vector<double> mat3_mul(const std::vector<double>& a,
                             const std::vector<double>& b) {
  std::vector<double> c(9, 0.0);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      const double av = a[i * 3 + k];
      for (int j = 0; j < 3; ++j) c[i * 3 + j] += av * b[k * 3 + j];
    }
  return c;
}

std::vector<double> mat3_transpose(const std::vector<double>& a) {
  return {a[0], a[3], a[6], a[1], a[4], a[7], a[2], a[5], a[8]};
}

double det3(const std::vector<double>& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) -
         m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

}  // namespace

double wrap_angle(double t) {
  double w = std::remainder(t, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

double orthogonality_drift(const std::vector<double>& m) {
  const std::vector<double> g = mat3_mul(mat3_transpose(m), m);
  double drift = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      drift = std::max(drift, std::fabs(g[i * 3 + j] - (i == j ? 1.0 : 0.0)));
  return drift;
}

std::vector<double> reproject_rotation(const std::vector<double>& m) {
  // Gram-Schmidt on rows
  std::vector<double> r = m;
  auto row = [&](int i) { return r.data() + i * 3; };
  auto norm = [](const double* v) {
    return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  };
  auto dot = [](const double* a, const double* b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  };
  double n0 = norm(row(0));
  if (n0 < 1e-12) throw std::invalid_argument("reproject: degenerate matrix");
  for (int j = 0; j < 3; ++j) row(0)[j] /= n0;
  double p = dot(row(1), row(0));
  for (int j = 0; j < 3; ++j) row(1)[j] -= p * row(0)[j];
  double n1 = norm(row(1));
  if (n1 < 1e-12) throw std::invalid_argument("reproject: degenerate matrix");
  for (int j = 0; j < 3; ++j) row(1)[j] /= n1;
  // third row = cross of first two, which also fixes the determinant sign
  r[6] = r[1] * r[5] - r[2] * r[4];
  r[7] = r[2] * r[3] - r[0] * r[5];
  r[8] = r[0] * r[4] - r[1] * r[3];
  return r;
}

GroupElement identity(GroupId g, std::size_t n) {
  switch (g) {
    case GroupId::SO2:
      return {GroupId::SO2, {0.0}};
    case GroupId::SO3:
      return {GroupId::SO3, {1, 0, 0, 0, 1, 0, 0, 0, 1}};
    case GroupId::Tn:
      return {GroupId::Tn, std::vector<double>(n, 0.0)};
  }
  throw std::logic_error("identity: bad group id");
}

GroupElement so2(double angle) { return {GroupId::SO2, {wrap_angle(angle)}}; }

GroupElement so3(const std::vector<double>& row_major) {
  if (row_major.size() != 9) throw std::invalid_argument("so3: need 9 entries");
  std::vector<double> m = row_major;
  const double drift = orthogonality_drift(m);
  if (drift > 0.1 || det3(m) <= 0.0)
    throw std::invalid_argument("so3: matrix is not a rotation");
  if (drift > 1e-8) m = reproject_rotation(m);
  return {GroupId::SO3, std::move(m)};
}

GroupElement translation(std::vector<double> t) {
  return {GroupId::Tn, std::move(t)};
}

GroupElement compose(const GroupElement& g, const GroupElement& h) {
  check_same_group(g, h, "compose");
  switch (g.group) {
    case GroupId::SO2:
      return so2(g.data[0] + h.data[0]);
    case GroupId::SO3: {
      std::vector<double> m = mat3_mul(g.data, h.data);
      if (orthogonality_drift(m) > 1e-8) m = reproject_rotation(m);
      return {GroupId::SO3, std::move(m)};
    }
    case GroupId::Tn: {
      std::vector<double> t(g.data.size());
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = g.data[i] + h.data[i];
      return {GroupId::Tn, std::move(t)};
    }
  }
  throw std::logic_error("compose: bad group id");
}

GroupElement inverse(const GroupElement& g) {
  switch (g.group) {
    case GroupId::SO2:
      return so2(-g.data[0]);
    case GroupId::SO3:
      return {GroupId::SO3, mat3_transpose(g.data)};
    case GroupId::Tn: {
      std::vector<double> t(g.data.size());
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = -g.data[i];
      return {GroupId::Tn, std::move(t)};
    }
  }
  throw std::logic_error("inverse: bad group id");
}

GroupElement exp_map(const AlgebraVector& a) {
  for (double c : a.coords)
    if (!std::isfinite(c)) throw std::invalid_argument("exp: non-finite coords");
  switch (a.group) {
    case GroupId::SO2:
      return so2(a.coords[0]);
    case GroupId::Tn:
      return {GroupId::Tn, a.coords};
    case GroupId::SO3: {
      if (a.coords.size() != 3)
        throw std::invalid_argument("exp: so3 needs 3 coords");
      const double x = a.coords[0], y = a.coords[1], z = a.coords[2];
      const double th = std::sqrt(x * x + y * y + z * z);
      double s, c2;  // sin(th)/th and (1-cos(th))/th^2
      if (th < 1e-6) {
        const double t2 = th * th;
        s = 1.0 - t2 / 6.0;
        c2 = 0.5 - t2 / 24.0;
      } else {
        s = std::sin(th) / th;
        c2 = (1.0 - std::cos(th)) / (th * th);
      }
      // I + s*K + c2*K^2 with K = skew(x, y, z)
      std::vector<double> m(9);
      m[0] = 1.0 - c2 * (y * y + z * z);
      m[1] = -s * z + c2 * x * y;
      m[2] = s * y + c2 * x * z;
      m[3] = s * z + c2 * x * y;
      m[4] = 1.0 - c2 * (x * x + z * z);
      m[5] = -s * x + c2 * y * z;
      m[6] = -s * y + c2 * x * z;
      m[7] = s * x + c2 * y * z;
      m[8] = 1.0 - c2 * (x * x + y * y);
      return {GroupId::SO3, std::move(m)};
    }
  }
  throw std::logic_error("exp: bad group id");
}

AlgebraVector log_map(const GroupElement& g) {
  switch (g.group) {
    case GroupId::SO2:
      return {GroupId::SO2, {g.data[0]}};
    case GroupId::Tn:
      return {GroupId::Tn, g.data};
    case GroupId::SO3: {
      // quaternion extraction keeps the axis well conditioned near angle pi
      const std::vector<double>& m = g.data;
      const double tr = m[0] + m[4] + m[8];
      double qw, qx, qy, qz;
      if (tr > 0.0) {
        double s = std::sqrt(tr + 1.0) * 2.0;
        qw = 0.25 * s;
        qx = (m[7] - m[5]) / s;
        qy = (m[2] - m[6]) / s;
        qz = (m[3] - m[1]) / s;
      } else if (m[0] >= m[4] && m[0] >= m[8]) {
        double s = std::sqrt(1.0 + m[0] - m[4] - m[8]) * 2.0;
        qw = (m[7] - m[5]) / s;
        qx = 0.25 * s;
        qy = (m[1] + m[3]) / s;
        qz = (m[2] + m[6]) / s;
      } else if (m[4] >= m[8]) {
        double s = std::sqrt(1.0 + m[4] - m[0] - m[8]) * 2.0;
        qw = (m[2] - m[6]) / s;
        qx = (m[1] + m[3]) / s;
        qy = 0.25 * s;
        qz = (m[5] + m[7]) / s;
      } else {
        double s = std::sqrt(1.0 + m[8] - m[0] - m[4]) * 2.0;
        qw = (m[3] - m[1]) / s;
        qx = (m[2] + m[6]) / s;
        qy = (m[5] + m[7]) / s;
        qz = 0.25 * s;
      }
      double qn = std::sqrt(qw * qw + qx * qx + qy * qy + qz * qz);
      qw /= qn;
      qx /= qn;
      qy /= qn;
      qz /= qn;
      if (qw < 0.0) {
        qw = -qw;
        qx = -qx;
        qy = -qy;
        qz = -qz;
      }
      const double vn = std::sqrt(qx * qx + qy * qy + qz * qz);
      const double angle = 2.0 * std::atan2(vn, qw);
      std::vector<double> a(3, 0.0);
      if (vn < 1e-12) {
        // tiny rotation: theta/2 ~ vn, axis*theta ~ 2*(qx,qy,qz)
        a = {2.0 * qx, 2.0 * qy, 2.0 * qz};
      } else {
        a = {angle * qx / vn, angle * qy / vn, angle * qz / vn};
      }
      if (kPi - angle < 1e-12) {
        // angle-pi branch is double valued; pick the sign making the first
        // nonzero component positive
        for (double c : a) {
          if (std::fabs(c) > 1e-12) {
            if (c < 0.0)
              for (double& q : a) q = -q;
            break;
          }
        }
      }
      return {GroupId::SO3, std::move(a)};
    }
  }
  throw std::logic_error("log: bad group id");
}

std::size_t action_dim(const GroupElement& g) {
  switch (g.group) {
    case GroupId::SO2:
      return 2;
    case GroupId::SO3:
      return 3;
    case GroupId::Tn:
      return g.data.size();
  }
  throw std::logic_error("action_dim: bad group id");
}

std::size_t algebra_dim(GroupId g, std::size_t n) {
  switch (g) {
    case GroupId::SO2:
      return 1;
    case GroupId::SO3:
      return 3;
    case GroupId::Tn:
      return n;
  }
  throw std::logic_error("algebra_dim: bad group id");
}

std::vector<double> act(const GroupElement& g, const std::vector<double>& x) {
  if (x.size() != action_dim(g))
    throw std::invalid_argument("act: point dimension mismatch");
  switch (g.group) {
    case GroupId::SO2: {
      const double c = std::cos(g.data[0]), s = std::sin(g.data[0]);
      return {c * x[0] - s * x[1], s * x[0] + c * x[1]};
    }
    case GroupId::SO3: {
      const std::vector<double>& m = g.data;
      return {m[0] * x[0] + m[1] * x[1] + m[2] * x[2],
              m[3] * x[0] + m[4] * x[1] + m[5] * x[2],
              m[6] * x[0] + m[7] * x[1] + m[8] * x[2]};
    }
    case GroupId::Tn: {
      std::vector<double> y(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + g.data[i];
      return y;
    }
  }
  throw std::logic_error("act: bad group id");
}

double left_invariant_distance(const GroupElement& u, const GroupElement& v) {
  check_same_group(u, v, "left_invariant_distance");
  const AlgebraVector a = log_map(compose(inverse(u), v));
  double s = 0.0;
  for (double c : a.coords) s += c * c;
  return std::sqrt(s);
}

GroupElement random_element(GroupId g, std::size_t n, std::mt19937_64& rng) {
  switch (g) {
    case GroupId::SO2: {
      std::uniform_real_distribution<double> dist(-kPi, kPi);
      return so2(dist(rng));
    }
    case GroupId::SO3: {
      // uniform via normalized 4d gaussian quaternion
      std::normal_distribution<double> dist(0.0, 1.0);
      double q[4];
      double nrm = 0.0;
      do {
        nrm = 0.0;
        for (double& c : q) {
          c = dist(rng);
          nrm += c * c;
        }
      } while (nrm < 1e-12);
      nrm = std::sqrt(nrm);
      const double w = q[0] / nrm, x = q[1] / nrm, y = q[2] / nrm, z = q[3] / nrm;
      std::vector<double> m(9);
      m[0] = 1 - 2 * (y * y + z * z);
      m[1] = 2 * (x * y - w * z);
      m[2] = 2 * (x * z + w * y);
      m[3] = 2 * (x * y + w * z);
      m[4] = 1 - 2 * (x * x + z * z);
      m[5] = 2 * (y * z - w * x);
      m[6] = 2 * (x * z - w * y);
      m[7] = 2 * (y * z + w * x);
      m[8] = 1 - 2 * (x * x + y * y);
      return {GroupId::SO3, std::move(m)};
    }
    case GroupId::Tn: {
      std::normal_distribution<double> dist(0.0, 1.0);
      std::vector<double> t(n);
      for (double& c : t) c = dist(rng);
      return {GroupId::Tn, std::move(t)};
    }
  }
  throw std::logic_error("random_element: bad group id");
}

}  // namespace gigp::group
