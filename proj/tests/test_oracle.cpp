#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "gigp/oracle.hpp"

using namespace gigp::oracle;

namespace {

// trial-division factorization: recovers the code multiset from psi's product
std::vector<std::size_t> decode_psi(const Encoding& enc) {
  mpz_class v = enc.value;
  std::vector<std::size_t> codes;
  for (std::size_t idx = 1; v > 1; ++idx) {
    const mpz_class p = static_cast<unsigned long>(nth_prime(idx));
    while (v % p == 0) {
      codes.push_back(idx);
      v /= p;
    }
    REQUIRE(idx < 1000);
  }
  std::sort(codes.begin(), codes.end());
  return codes;
}

}  // namespace

TEST_CASE("value codes") {
  // one orbit, two values: codes {1, 2} in value order
  const FiniteDomain d1 = FiniteDomain::from_orbit_sizes({3}, 2);
  const auto codes1 = enumerate_value_codes(d1);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(codes1[e * 2 + 0] == 1);
    CHECK(codes1[e * 2 + 1] == 2);
  }

  // orbit-qualified codes are injective over (orbit, value) pairs
  const FiniteDomain d2 = FiniteDomain::from_orbit_sizes({2, 1, 3}, 3);
  const auto codes2 = enumerate_value_codes(d2);
  std::vector<std::size_t> seen;
  for (std::size_t e = 0; e < d2.n_elements; ++e)
    for (std::size_t v = 0; v < 3; ++v) seen.push_back(codes2[e * 3 + v]);
  std::sort(seen.begin(), seen.end());
  // elements in one orbit share codes; distinct orbits use disjoint ranges
  std::vector<std::size_t> distinct = seen;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  CHECK(distinct.size() == 9);  // 3 orbits x 3 values
  CHECK(distinct.front() == 1);
  CHECK(distinct.back() == 9);

  // deterministic across calls
  CHECK(enumerate_value_codes(d2) == codes2);
}

TEST_CASE("psi_encode") {
  CHECK(psi_encode({1, 2}).value == 6);
  CHECK(std::fabs(psi_encode({1, 2}).log() - 1.791759469228055) < 1e-12);
  CHECK(psi_encode({}).value == 1);
  const Encoding e = psi_encode({1, 1, 2});
  CHECK(e.value == 12);
  CHECK(decode_psi(e) == std::vector<std::size_t>{1, 1, 2});

  // permutation invariance: any order of the same multiset
  CHECK(psi_encode({2, 1, 1}).value == e.value);
  CHECK(psi_encode({1, 2, 1}).value == e.value);

  CHECK_THROWS_AS(psi_encode({0}), std::invalid_argument);
}

TEST_CASE("psi is injective on code multisets, exhaustively at desk scale") {
  // all multisets of codes {1..4} of size <= 4
  std::map<mpz_class, std::vector<std::size_t>> seen;
  std::vector<std::size_t> stack;
  std::function<void(std::size_t)> rec = [&](std::size_t min_code) {
    if (stack.size() <= 4 && !stack.empty()) {
      const Encoding enc = psi_encode(stack);
      auto it = seen.find(enc.value);
      if (it != seen.end()) CHECK(it->second == stack);
      seen[enc.value] = stack;
    }
    if (stack.size() == 4) return;
    for (std::size_t c = min_code; c <= 4; ++c) {
      stack.push_back(c);
      rec(c);
      stack.pop_back();
    }
  };
  rec(1);
  // 4 multisets of size 1 ... C(7,4)=35 of size 4
  CHECK(seen.size() == 4 + 10 + 20 + 35);
}

TEST_CASE("phi_encode") {
  const FiniteDomain d = FiniteDomain::from_orbit_sizes({2, 2}, 2);
  const auto dict = build_orbit_encoding_dictionary(d);

  // the smallest encoding in the dictionary has index 1, so phi of just it is 2
  CHECK(phi_encode({dict.begin()->first}, dict).value == 2);
  auto second = std::next(dict.begin());
  CHECK(phi_encode({dict.begin()->first, second->first}, dict).value == 6);

  Encoding unseen;
  unseen.value = 9999991;
  CHECK_THROWS_AS(phi_encode({unseen}, dict), std::invalid_argument);
}

TEST_CASE("g separates all classes of a 4-element 2-orbit 2-value domain") {
  const FiniteDomain d = FiniteDomain::from_orbit_sizes({2, 2}, 2);
  const auto codes = enumerate_value_codes(d);
  const auto dict = build_orbit_encoding_dictionary(d);
  CHECK(n_assignments(d) == 16);

  std::map<std::vector<std::vector<std::size_t>>, mpz_class> class_to_g;
  std::map<mpz_class, std::vector<std::vector<std::size_t>>> g_to_class;
  for (std::size_t rank = 0; rank < 16; ++rank) {
    const Assignment a = assignment_from_rank(d, rank);
    const auto key = class_key(d, a);
    const Encoding g = g_encode(d, a, codes, dict);
    if (class_to_g.count(key))
      CHECK(class_to_g[key] == g.value);  // invariant within class
    else
      class_to_g[key] = g.value;
    if (g_to_class.count(g.value))
      CHECK(g_to_class[g.value] == key);  // injective across classes
    else
      g_to_class[g.value] = key;
  }
  CHECK(class_to_g.size() == 9);  // 3 multisets per orbit of size 2 over 2 values
  CHECK(g_to_class.size() == 9);
}

TEST_CASE("verify_expressivity") {
  const FiniteDomain d = FiniteDomain::from_orbit_sizes({3, 2}, 2);

  // constant f is trivially expressible
  const auto constant = make_invariant_table(d, [](const auto&) { return 4.0; });
  const auto rep1 = verify_expressivity(d, constant);
  CHECK(rep1.pass);
  CHECK(rep1.collisions == 0);
  CHECK(rep1.assignments == 32);

  // count of value 0 inside orbit 1
  const auto counting = make_invariant_table(d, [](const auto& key) {
    return static_cast<double>(
        std::count(key[1].begin(), key[1].end(), std::size_t(0)));
  });
  const auto rep2 = verify_expressivity(d, counting);
  CHECK(rep2.pass);
  CHECK(rep2.classes == 4 * 3);  // multisets: size-3 over 2 values x size-2

  // adversarial f differing inside one class is rejected with a witness
  auto broken = counting;
  // ranks 1 and 2 assign value 1 to exactly one of the first two elements of
  // orbit 0, so they are equivalent; give them different f values
  broken[1] = 123.0;
  const auto rep3 = verify_expressivity(d, broken);
  CHECK_FALSE(rep3.pass);
  CHECK_FALSE(rep3.f_invariant);
  CHECK(rep3.witness.find("f differs") != std::string::npos);

  // random invariant tables pass
  std::mt19937_64 rng(71);
  for (int t = 0; t < 5; ++t) {
    const auto rep = verify_expressivity(d, random_invariant_table(d, rng));
    CHECK(rep.pass);
  }

  CHECK_THROWS_AS(verify_expressivity(d, std::vector<double>(7, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("swapped equal-size orbits stay distinguishable") {
  // two orbits of equal size: assignments that swap the orbits' value
  // multisets are NOT group equivalent and g must separate them
  const FiniteDomain d = FiniteDomain::from_orbit_sizes({2, 2}, 2);
  const auto codes = enumerate_value_codes(d);
  const auto dict = build_orbit_encoding_dictionary(d);
  const Assignment a = {0, 0, 1, 1};  // orbit0 all value0, orbit1 all value1
  const Assignment b = {1, 1, 0, 0};  // swapped
  CHECK(g_encode(d, a, codes, dict).value != g_encode(d, b, codes, dict).value);
}

TEST_CASE("domain validation") {
  FiniteDomain bad;
  bad.n_elements = 2;
  bad.n_values = 2;
  bad.orbit_of_element = {0, 2};  // orbit 1 empty
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
