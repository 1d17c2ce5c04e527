#include "gigp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gigp::oracle {

std::size_t FiniteDomain::n_orbits() const {
  std::size_t mx = 0;
  for (std::size_t o : orbit_of_element) mx = std::max(mx, o + 1);
  return mx;
}

void FiniteDomain::validate() const {
  if (n_elements < 1 || n_values < 1)
    throw std::invalid_argument("FiniteDomain: empty element or value set");
  if (orbit_of_element.size() != n_elements)
    throw std::invalid_argument("FiniteDomain: partition size mismatch");
  const std::size_t k = n_orbits();
  std::vector<std::size_t> count(k, 0);
  for (std::size_t o : orbit_of_element) {
    if (o >= k) throw std::invalid_argument("FiniteDomain: bad orbit id");
    ++count[o];
  }
  for (std::size_t c : count)
    if (c == 0) throw std::invalid_argument("FiniteDomain: empty orbit");
}

FiniteDomain FiniteDomain::from_orbit_sizes(const std::vector<std::size_t>& sizes,
                                            std::size_t n_values) {
  FiniteDomain d;
  d.n_values = n_values;
  for (std::size_t o = 0; o < sizes.size(); ++o)
    for (std::size_t i = 0; i < sizes[o]; ++i) d.orbit_of_element.push_back(o);
  d.n_elements = d.orbit_of_element.size();
  d.validate();
  return d;
}

double Encoding::log() const { return std::log(value.get_d()); }

std::uint64_t nth_prime(std::size_t n) {
  static std::vector<std::uint64_t> primes = {2, 3, 5, 7, 11, 13};
  if (n == 0) throw std::invalid_argument("nth_prime: 1-based index");
  while (primes.size() < n) {
    std::uint64_t c = primes.back() + 2;
    for (;; c += 2) {
      bool is_prime = true;
      for (std::uint64_t p : primes) {
        if (p * p > c) break;
        if (c % p == 0) {
          is_prime = false;
          break;
        }
      }
      if (is_prime) break;
    }
    primes.push_back(c);
  }
  return primes[n - 1];
}

std::vector<std::size_t> enumerate_value_codes(const FiniteDomain& d) {
  d.validate();
  std::vector<std::size_t> codes(d.n_elements * d.n_values);
  for (std::size_t e = 0; e < d.n_elements; ++e)
    for (std::size_t v = 0; v < d.n_values; ++v)
      codes[e * d.n_values + v] = d.orbit_of_element[e] * d.n_values + v + 1;
  return codes;
}

Encoding psi_encode(const std::vector<std::size_t>& codes) {
  Encoding enc;
  for (std::size_t c : codes) {
    if (c < 1) throw std::invalid_argument("psi_encode: codes are 1-based");
    enc.value *= nth_prime(c);
  }
  return enc;
}

std::map<Encoding, std::size_t> build_orbit_encoding_dictionary(
    const FiniteDomain& d) {
  d.validate();
  const std::vector<std::size_t> codes = enumerate_value_codes(d);
  const std::size_t k = d.n_orbits();
  std::set<Encoding> seen;
  for (std::size_t o = 0; o < k; ++o) {
    std::vector<std::size_t> members;
    for (std::size_t e = 0; e < d.n_elements; ++e)
      if (d.orbit_of_element[e] == o) members.push_back(e);
    // enumerate every multiset of values over this orbit via an odometer in
    // nondecreasing value order
    std::vector<std::size_t> vals(members.size(), 0);
    for (;;) {
      std::vector<std::size_t> cs;
      for (std::size_t i = 0; i < members.size(); ++i)
        cs.push_back(codes[members[i] * d.n_values + vals[i]]);
      seen.insert(psi_encode(cs));
      std::size_t pos = members.size();
      while (pos > 0 && vals[pos - 1] + 1 == d.n_values) --pos;
      if (pos == 0) break;
      const std::size_t next = vals[pos - 1] + 1;
      for (std::size_t i = pos - 1; i < members.size(); ++i) vals[i] = next;
    }
  }
  std::map<Encoding, std::size_t> dict;
  std::size_t idx = 1;
  for (const Encoding& e : seen) dict[e] = idx++;
  return dict;
}

Encoding phi_encode(const std::vector<Encoding>& orbit_encodings,
                    const std::map<Encoding, std::size_t>& dictionary) {
  Encoding out;
  for (const Encoding& e : orbit_encodings) {
    auto it = dictionary.find(e);
    if (it == dictionary.end())
      throw std::invalid_argument(
          "phi_encode: encoding absent from the domain dictionary");
    out.value *= nth_prime(it->second);
  }
  return out;
}

Encoding g_encode(const FiniteDomain& d, const Assignment& a,
                  const std::vector<std::size_t>& codes,
                  const std::map<Encoding, std::size_t>& dictionary) {
  const std::size_t k = d.n_orbits();
  std::vector<std::vector<std::size_t>> per_orbit(k);
  for (std::size_t e = 0; e < d.n_elements; ++e)
    per_orbit[d.orbit_of_element[e]].push_back(codes[e * d.n_values + a[e]]);
  std::vector<Encoding> encs;
  encs.reserve(k);
  for (std::size_t o = 0; o < k; ++o) encs.push_back(psi_encode(per_orbit[o]));
  return phi_encode(encs, dictionary);
}

std::size_t n_assignments(const FiniteDomain& d) {
  std::size_t n = 1;
  for (std::size_t e = 0; e < d.n_elements; ++e) n *= d.n_values;
  return n;
}

Assignment assignment_from_rank(const FiniteDomain& d, std::size_t rank) {
  Assignment a(d.n_elements);
  for (std::size_t e = 0; e < d.n_elements; ++e) {
    a[e] = rank % d.n_values;
    rank /= d.n_values;
  }
  return a;
}

std::vector<std::vector<std::size_t>> class_key(const FiniteDomain& d,
                                                const Assignment& a) {
  std::vector<std::vector<std::size_t>> key(d.n_orbits());
  for (std::size_t e = 0; e < d.n_elements; ++e)
    key[d.orbit_of_element[e]].push_back(a[e]);
  for (auto& k : key) std::sort(k.begin(), k.end());
  return key;
}

std::string ExpressivityReport::summary() const {
  std::ostringstream os;
  os << (pass ? "PASS" : "FAIL") << ": " << assignments << " assignments, "
     << classes << " classes, " << collisions << " collisions"
     << (f_invariant ? "" : "; f not invariant")
     << (g_class_invariant ? "" : "; g not class-invariant");
  if (!witness.empty()) os << "; witness: " << witness;
  return os.str();
}

std::string ExpressivityReport::machine_lines() const {
  std::ostringstream os;
  os << "pass=" << (pass ? 1 : 0) << "\n"
     << "f_invariant=" << (f_invariant ? 1 : 0) << "\n"
     << "g_class_invariant=" << (g_class_invariant ? 1 : 0) << "\n"
     << "assignments=" << assignments << "\n"
     << "classes=" << classes << "\n"
     << "collisions=" << collisions << "\n";
  return os.str();
}

namespace {
std::string assignment_str(const Assignment& a) {
  std::string s = "[";
  for (std::size_t i = 0; i < a.size(); ++i)
    s += (i ? "," : "") + std::to_string(a[i]);
  return s + "]";
}
}  // namespace

ExpressivityReport verify_expressivity(const FiniteDomain& d,
                                       const std::vector<double>& f_table) {
  d.validate();
  const std::size_t total = n_assignments(d);
  if (f_table.size() != total)
    throw std::invalid_argument("verify_expressivity: f table size mismatch");
  const std::vector<std::size_t> codes = enumerate_value_codes(d);
  const auto dict = build_orbit_encoding_dictionary(d);

  ExpressivityReport rep;
  rep.assignments = total;

  struct ClassInfo {
    Encoding g;
    double f;
    std::size_t rep_rank;
  };
  std::map<std::vector<std::vector<std::size_t>>, ClassInfo> by_class;
  std::map<Encoding, std::vector<std::vector<std::size_t>>> g_to_class;

  for (std::size_t rank = 0; rank < total; ++rank) {
    const Assignment a = assignment_from_rank(d, rank);
    const auto key = class_key(d, a);
    const Encoding g = g_encode(d, a, codes, dict);
    const double fv = f_table[rank];
    auto it = by_class.find(key);
    if (it == by_class.end()) {
      by_class[key] = {g, fv, rank};
      auto git = g_to_class.find(g);
      if (git == g_to_class.end()) {
        g_to_class[g] = key;
      } else if (git->second != key) {
        ++rep.collisions;
        if (rep.witness.empty())
          rep.witness = "g collision between distinct classes at assignment " +
                        assignment_str(a);
      }
    } else {
      if (g != it->second.g) {
        rep.g_class_invariant = false;
        if (rep.witness.empty())
          rep.witness = "g differs within one class: assignments " +
                        assignment_str(assignment_from_rank(d, it->second.rep_rank)) +
                        " vs " + assignment_str(a);
      }
      if (fv != it->second.f) {
        rep.f_invariant = false;
        if (rep.witness.empty())
          rep.witness = "f differs on equivalent assignments " +
                        assignment_str(assignment_from_rank(d, it->second.rep_rank)) +
                        " vs " + assignment_str(a);
      }
    }
  }
  rep.classes = by_class.size();
  rep.pass = rep.f_invariant && rep.g_class_invariant && rep.collisions == 0;
  return rep;
}

std::vector<double> make_invariant_table(
    const FiniteDomain& d,
    const std::function<double(const std::vector<std::vector<std::size_t>>&)>& fn) {
  const std::size_t total = n_assignments(d);
  std::vector<double> table(total);
  for (std::size_t rank = 0; rank < total; ++rank)
    table[rank] = fn(class_key(d, assignment_from_rank(d, rank)));
  return table;
}

std::vector<double> random_invariant_table(const FiniteDomain& d,
                                           std::mt19937_64& rng) {
  std::map<std::vector<std::vector<std::size_t>>, double> values;
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  return make_invariant_table(d, [&](const auto& key) {
    auto it = values.find(key);
    if (it == values.end()) it = values.emplace(key, dist(rng)).first;
    return it->second;
  });
}

}  // namespace gigp::oracle
