#pragma once

#include <cstddef>
#include <random>
#include <vector>

namespace gigp::group {

enum class GroupId { SO2, SO3, Tn };

// A symmetry transformation. Storage per group:
//   SO2: one angle in (-pi, pi]
//   SO3: 3x3 orthogonal matrix, row major, det +1
//   Tn:  translation vector
struct GroupElement {
  GroupId group;
  std::vector<double> data;
};

// Tangent-space coordinates: 1 for SO2, 3 (axis-angle) for SO3, n for Tn.
struct AlgebraVector {
  GroupId group;
  std::vector<double> coords;
};

// normalizes into (-pi, pi]
double wrap_angle(double t);

GroupElement identity(GroupId g, std::size_t n = 0);
GroupElement so2(double angle);
// validates orthogonality; reprojects when drift exceeds 1e-8, throws when
// the input is not close to a rotation
GroupElement so3(const std::vector<double>& row_major);
GroupElement translation(std::vector<double> t);

GroupElement compose(const GroupElement& g, const GroupElement& h);
GroupElement inverse(const GroupElement& g);
GroupElement exp_map(const AlgebraVector& a);
AlgebraVector log_map(const GroupElement& g);
std::vector<double> act(const GroupElement& g, const std::vector<double>& x);
double left_invariant_distance(const GroupElement& u, const GroupElement& v);

// dimension of the Euclidean space acted on (Tn reads it off the element)
std::size_t action_dim(const GroupElement& g);
std::size_t algebra_dim(GroupId g, std::size_t n = 0);

double orthogonality_drift(const std::vector<double>& m);
// Gram-Schmidt reorthonormalization, det forced positive
std::vector<double> reproject_rotation(const std::vector<double>& m);

GroupElement random_element(GroupId g, std::size_t n, std::mt19937_64& rng);

}  // namespace gigp::group
