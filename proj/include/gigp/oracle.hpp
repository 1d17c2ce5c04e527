#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace gigp::oracle {

// Small enumerated domain with an orbit partition. The group action is
// modeled as the within-orbit symmetric group: any finite action factors
// through it for the purposes of the expressivity check.
struct FiniteDomain {
  std::size_t n_elements = 0;
  std::size_t n_values = 0;
  std::vector<std::size_t> orbit_of_element;  // element -> orbit id, 0-based

  std::size_t n_orbits() const;
  void validate() const;
  static FiniteDomain from_orbit_sizes(const std::vector<std::size_t>& sizes,
                                       std::size_t n_values);
};

// value index per element; a point of F^X
using Assignment = std::vector<std::size_t>;

// Exact nonnegative integer in product-of-primes form. The additive log form
// is display-only; keeping the integers exact preserves injectivity literally
// instead of up to float collisions.
struct Encoding {
  mpz_class value{1};
  bool operator==(const Encoding& o) const { return value == o.value; }
  bool operator<(const Encoding& o) const { return value < o.value; }
  double log() const;
};

std::uint64_t nth_prime(std::size_t n);  // 1-based: nth_prime(1) == 2

// Deterministic code for (element, value) pairs: injective in value within
// each orbit and disjoint across orbits, enumerated lexicographically by
// (orbit, value). codes[element * n_values + value], 1-based.
std::vector<std::size_t> enumerate_value_codes(const FiniteDomain& d);

// product of p_code over a multiset of codes; empty -> 1
Encoding psi_encode(const std::vector<std::size_t>& codes);

// index dictionary over every per-orbit encoding the domain can produce,
// sorted ascending, 1-based
std::map<Encoding, std::size_t> build_orbit_encoding_dictionary(
    const FiniteDomain& d);

// product of p_index(enc) over the orbit encodings; unseen encoding -> error
Encoding phi_encode(const std::vector<Encoding>& orbit_encodings,
                    const std::map<Encoding, std::size_t>& dictionary);

// g(X) = phi over per-orbit psi encodings of one assignment
Encoding g_encode(const FiniteDomain& d, const Assignment& a,
                  const std::vector<std::size_t>& codes,
                  const std::map<Encoding, std::size_t>& dictionary);

std::size_t n_assignments(const FiniteDomain& d);  // |F|^|X|
Assignment assignment_from_rank(const FiniteDomain& d, std::size_t rank);

// canonical key of an assignment's equivalence class: per-orbit sorted values
std::vector<std::vector<std::size_t>> class_key(const FiniteDomain& d,
                                                const Assignment& a);

struct ExpressivityReport {
  bool pass = false;
  bool f_invariant = true;
  bool g_class_invariant = true;
  std::size_t assignments = 0;
  std::size_t classes = 0;
  std::size_t collisions = 0;
  std::string witness;  // first violation found, if any

  std::string summary() const;
  std::string machine_lines() const;  // key=value, one per line
};

// Verifies that g separates exactly the invariance classes of the domain, so
// rho := f o g^{-1} exists as a lookup table. f is a table indexed by
// assignment rank and must be constant on classes (violations are reported
// with a witness instead of silently accepted).
ExpressivityReport verify_expressivity(const FiniteDomain& d,
                                       const std::vector<double>& f_table);

// helpers for building f tables
std::vector<double> make_invariant_table(
    const FiniteDomain& d,
    const std::function<double(const std::vector<std::vector<std::size_t>>&)>& fn);
std::vector<double> random_invariant_table(const FiniteDomain& d,
                                           std::mt19937_64& rng);

}  // namespace gigp::oracle
