#include <algorithm>
#include <cmath>
#include <ostream>

#include "vertexcalc/error.hpp"
#include "vertexcalc/heisenberg.hpp"
#include "vertexcalc/parallel.hpp"

namespace vertexcalc {

namespace {

constexpr double kMomentumTol = 1e-12;
constexpr double kRoundoffRel = 1e-13;

bool same_momentum(double a, double b) { return std::abs(a - b) <= kMomentumTol; }

void finish(ConvergenceReport& r, double tol) {
  r.value = {};
  for (const cplx& t : r.level_terms) r.value += t;
  const std::size_t n = r.level_terms.size();
  r.tail = 0.0;
  if (n >= 1) r.tail = std::abs(r.level_terms[n - 1]);
  if (n >= 2) r.tail = std::max(r.tail, std::abs(r.level_terms[n - 2]));
  r.converged = r.tail == 0.0 || r.tail <= tol * std::abs(r.value);
}

// sum over states k of the inner vector u (levels <= L) of u_k * outer(k).
template <typename Outer>
ConvergenceReport accumulate(const FockVector& u, int level, double tol, Outer&& outer) {
  ConvergenceReport r;
  r.level = level;
  r.level_terms.assign(static_cast<std::size_t>(level) + 1, cplx{});
  for (const auto& [parts, c] : u.terms()) {
    const cplx t = c * outer(parts);
    r.level_terms[static_cast<std::size_t>(level_of(parts))] += t;
    r.abs_sum += std::abs(t);
  }
  finish(r, tol);
  return r;
}

ConvergenceReport zero_report(int level) {
  ConvergenceReport r;
  r.level = level;
  r.momentum_ok = false;
  r.level_terms.assign(static_cast<std::size_t>(std::max(level, 0)) + 1, cplx{});
  return r;
}

bool composes(const DualVector& w4, const FockVector& w1, const FockVector& w2, const FockVector& w3) {
  return same_momentum(w4.momentum(), w1.momentum() + w2.momentum() + w3.momentum());
}

}  // namespace

ConvergenceReport product_correlator(const Intertwiner& y1, const Intertwiner& y2, const DualVector& w4,
                                     const FockVector& w1, const FockVector& w2, const FockVector& w3,
                                     const LogPoint& z1, const LogPoint& z2, int level, double tol) {
  if (level < 0) throw DomainError("negative level");
  if (!(z1.modulus() > z2.modulus())) throw RegionError("outside product region");
  if (!composes(w4, w1, w2, w3) || !same_momentum(y2.first_momentum(), w2.momentum()) ||
      !same_momentum(y2.second_momentum(), w3.momentum()) || !same_momentum(y1.first_momentum(), w1.momentum()) ||
      !same_momentum(y1.second_momentum(), y2.target_momentum()))
    return zero_report(level);
  const FockVector u = y2.apply(w2, w3, level).evaluate(z2.rotated(y2.half_turns()));
  const LogPoint x1 = z1.rotated(y1.half_turns());
  const int cap = w4.max_level();
  return accumulate(u, level, tol, [&](const Partition& k) {
    return pair_evaluated(w4, y1.apply(w1, FockVector::basis(u.momentum(), k), cap), x1);
  });
}

ConvergenceReport iterate_correlator(const Intertwiner& y4, const Intertwiner& y3, const DualVector& w4,
                                     const FockVector& w1, const FockVector& w2, const FockVector& w3,
                                     const LogPoint& z0, const LogPoint& z2, int level, double tol) {
  if (level < 0) throw DomainError("negative level");
  if (!(z2.modulus() > z0.modulus())) throw RegionError("outside iterate region");
  if (!composes(w4, w1, w2, w3) || !same_momentum(y3.first_momentum(), w1.momentum()) ||
      !same_momentum(y3.second_momentum(), w2.momentum()) || !same_momentum(y4.first_momentum(), y3.target_momentum()) ||
      !same_momentum(y4.second_momentum(), w3.momentum()))
    return zero_report(level);
  const FockVector u = y3.apply(w1, w2, level).evaluate(z0.rotated(y3.half_turns()));
  const LogPoint x2 = z2.rotated(y4.half_turns());
  const int cap = w4.max_level();
  return accumulate(u, level, tol, [&](const Partition& k) {
    return pair_evaluated(w4, y4.apply(FockVector::basis(u.momentum(), k), w3, cap), x2);
  });
}

std::string Tuple4::id() const {
  return partition_id(w4) + "|" + partition_id(w1) + "|" + partition_id(w2) + "|" + partition_id(w3);
}

std::vector<Tuple4> basis_tuples4(int max_total_level) {
  std::vector<Tuple4> out;
  const auto parts = partitions_up_to(max_total_level);
  for (const auto& a : parts)
    for (const auto& b : parts)
      for (const auto& c : parts)
        for (const auto& d : parts) {
          Tuple4 t{a, b, c, d};
          if (t.level() <= max_total_level) out.push_back(std::move(t));
        }
  std::stable_sort(out.begin(), out.end(), [](const Tuple4& x, const Tuple4& y) { return x.level() < y.level(); });
  return out;
}

double relative_deviation(cplx a, cplx b, double magnitude) {
  // Differences at the rounding level of the summed terms count as agreement.
  if (std::abs(a - b) <= kRoundoffRel * magnitude) return 0.0;
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

AssocReport associativity_check(const std::array<double, 3>& momenta, const std::vector<Tuple4>& tuples,
                                const LogPoint& z1, const LogPoint& z2, int level, double tol) {
  if (!in_associativity_region(z1, z2)) throw RegionError("outside region |z1| > |z2| > |z1-z2| > 0");
  const auto [p1, p2, p3] = momenta;
  const Intertwiner y1 = Intertwiner::base(p1, p2 + p3);
  const Intertwiner y2 = Intertwiner::base(p2, p3);
  const Intertwiner y3 = Intertwiner::base(p1, p2);
  const Intertwiner y4 = Intertwiner::base(p1 + p2, p3);
  AssocReport rep;
  rep.momenta = momenta;
  rep.z1 = z1;
  rep.z2 = z2;
  rep.z0 = LogPoint::principal(z1.value() - z2.value());
  rep.level = level;
  rep.tol = tol;
  rep.rows.resize(tuples.size());
  parallel_for(tuples.size(), [&](std::size_t i) {
    const Tuple4& t = tuples[i];
    const DualVector w4 = DualVector::basis(p1 + p2 + p3, t.w4);
    const FockVector w1 = FockVector::basis(p1, t.w1);
    const FockVector w2 = FockVector::basis(p2, t.w2);
    const FockVector w3 = FockVector::basis(p3, t.w3);
    AssocRow& row = rep.rows[i];
    row.tuple = t;
    row.product = product_correlator(y1, y2, w4, w1, w2, w3, z1, z2, level, tol);
    row.iterate = iterate_correlator(y4, y3, w4, w1, w2, w3, rep.z0, z2, level, tol);
    row.rel_dev = relative_deviation(row.product.value, row.iterate.value,
                                     std::max(row.product.abs_sum, row.iterate.abs_sum));
    row.pass = row.rel_dev <= tol;
  });
  rep.max_rel_dev = 0.0;
  for (const auto& row : rep.rows) rep.max_rel_dev = std::max(rep.max_rel_dev, row.rel_dev);
  rep.pass = std::all_of(rep.rows.begin(), rep.rows.end(), [](const AssocRow& r) { return r.pass; });
  return rep;
}

SkewReport skew_chain_check(const Intertwiner& y3, const Intertwiner& y4, const DualVector& w4, const FockVector& w1,
                            const FockVector& w2, const FockVector& w3, const LogPoint& z1, const LogPoint& z2,
                            int level, double tol, long rotation) {
  if (!in_associativity_region(z1, z2)) throw RegionError("outside region |z1| > |z2| > |z1-z2| > 0");
  const LogPoint z0 = LogPoint::principal(z1.value() - z2.value());
  SkewReport rep;
  rep.iterate = iterate_correlator(y4, y3, w4, w1, w2, w3, z0, z2, level, tol).value;

  const Intertwiner om = y4.omega(-1);
  const LogPoint x = z2.rotated(rotation);
  const FockVector u = y3.apply(w1, w2, level).evaluate(z0.rotated(y3.half_turns()));
  DualVector shifted = w4;
  cplx scale = 1.0;
  for (int j = 0; !shifted.is_zero(); ++j) {
    if (j > 0) {
      shifted = virasoro_transpose(-1, shifted);
      scale *= z2.value() / static_cast<double>(j);
    }
    const int cap = shifted.max_level();
    for (const auto& [parts, c] : u.terms()) {
      const FormalFock f = om.apply(w3, FockVector::basis(u.momentum(), parts), cap);
      rep.chain += scale * c * pair_evaluated(shifted, f, x);
    }
  }
  rep.rel_dev = relative_deviation(rep.iterate, rep.chain);
  rep.pass = rep.rel_dev <= tol;
  return rep;
}

std::map<double, cplx> exponent_samples(const Intertwiner& y, int input_level, int output_level) {
  const auto parts = partitions_up_to(input_level);
  std::vector<std::map<double, cplx>> per_pair(parts.size() * parts.size());
  parallel_for(per_pair.size(), [&](std::size_t k) {
    const FormalFock f = y.apply(FockVector::basis(y.first_momentum(), parts[k / parts.size()]),
                                 FockVector::basis(y.second_momentum(), parts[k % parts.size()]), output_level);
    for (const auto& [key, c] : f.terms) per_pair[k][key.second] += std::abs(c);
  });
  std::map<double, cplx> out;
  for (const auto& m : per_pair)
    for (const auto& [e, v] : m) out[e] += v;
  return out;
}

void to_json(nlohmann::json& j, const ConvergenceReport& r) {
  j = {{"value", {r.value.real(), r.value.imag()}},
       {"abs_sum", r.abs_sum},
       {"tail", r.tail},
       {"converged", r.converged},
       {"momentum_ok", r.momentum_ok},
       {"level", r.level}};
}

void to_json(nlohmann::json& j, const AssocReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"tuple_id", row.tuple.id()},
                    {"product", row.product},
                    {"iterate", row.iterate},
                    {"rel_dev", row.rel_dev},
                    {"pass", row.pass}});
  }
  j = {{"momenta", r.momenta}, {"z1", r.z1},   {"z2", r.z2},
       {"z0", r.z0},           {"level", r.level}, {"tol", r.tol},
       {"max_rel_dev", r.max_rel_dev}, {"pass", r.pass}, {"rows", std::move(rows)}};
}

void to_json(nlohmann::json& j, const SkewReport& r) {
  j = {{"iterate", {r.iterate.real(), r.iterate.imag()}},
       {"chain", {r.chain.real(), r.chain.imag()}},
       {"rel_dev", r.rel_dev},
       {"pass", r.pass}};
}

void write_csv(std::ostream& os, const AssocReport& r, bool header) {
  if (header) os << "p1,p2,p3,tuple_id,side,value_re,value_im,abs_sum,tail,level,converged\n";
  const auto flags = os.flags();
  const auto precision = os.precision(17);
  for (const auto& row : r.rows) {
    for (const auto& [side, rep] : {std::pair{"product", &row.product}, std::pair{"iterate", &row.iterate}}) {
      os << r.momenta[0] << ',' << r.momenta[1] << ',' << r.momenta[2] << ',' << row.tuple.id() << ',' << side << ','
         << rep->value.real() << ',' << rep->value.imag() << ',' << rep->abs_sum << ',' << rep->tail << ','
         << rep->level << ',' << (rep->converged ? "true" : "false") << '\n';
    }
  }
  os.precision(precision);
  os.flags(flags);
}

}  // namespace vertexcalc
