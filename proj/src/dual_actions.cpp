#include "vertexcalc/dual_actions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include "vertexcalc/error.hpp"
#include "vertexcalc/parallel.hpp"

namespace vertexcalc {

std::string Tuple3::id() const { return partition_id(w1) + "|" + partition_id(w2) + "|" + partition_id(w3); }

Tuple3 Tuple3::parse(const std::string& id) {
  std::vector<std::string> parts;
  std::stringstream ss(id);
  std::string item;
  while (std::getline(ss, item, '|')) parts.push_back(item);
  if (parts.size() != 3) throw DomainError("malformed tuple id: " + id);
  return {parse_partition(parts[0]), parse_partition(parts[1]), parse_partition(parts[2])};
}

std::vector<Tuple3> basis_tuples3(int max_level) {
  std::vector<Tuple3> out;
  const auto parts = partitions_up_to(max_level);
  for (const auto& a : parts)
    for (const auto& b : parts)
      for (const auto& c : parts) {
        Tuple3 t{a, b, c};
        if (t.level() <= max_level) out.push_back(std::move(t));
      }
  std::stable_sort(out.begin(), out.end(), [](const Tuple3& x, const Tuple3& y) { return x.level() < y.level(); });
  return out;
}

TruncatedFunctional::TruncatedFunctional(int level, std::array<double, 3> momenta)
    : level_(level), momenta_(momenta) {
  if (level < 0) throw DomainError("negative truncation level");
}

TruncatedFunctional TruncatedFunctional::zero(int level, std::array<double, 3> momenta) {
  return TruncatedFunctional(level, momenta);
}

TruncatedFunctional TruncatedFunctional::single(int level, std::array<double, 3> momenta, const Tuple3& t,
                                                cplx value) {
  TruncatedFunctional f(level, momenta);
  f.set(t, value);
  return f;
}

void TruncatedFunctional::set(const Tuple3& t, cplx value) {
  if (t.level() > level_) throw InsufficientTruncation("tuple above the truncation level");
  if (value == cplx{})
    values_.erase(t);
  else
    values_[t] = value;
}

cplx TruncatedFunctional::operator()(const Tuple3& t) const {
  if (t.level() > level_) throw InsufficientTruncation();
  const auto it = values_.find(t);
  return it == values_.end() ? cplx{} : it->second;
}

cplx TruncatedFunctional::evaluate(const FockVector& w1, const FockVector& w2, const FockVector& w3) const {
  cplx sum;
  for (const auto& [a, ca] : w1.terms())
    for (const auto& [b, cb] : w2.terms())
      for (const auto& [c, cc] : w3.terms()) sum += ca * cb * cc * (*this)(Tuple3{a, b, c});
  return sum;
}

TruncatedFunctional& TruncatedFunctional::operator+=(const TruncatedFunctional& o) {
  if (o.level_ != level_ || o.momenta_ != momenta_) throw DomainError("functionals on different spaces");
  for (const auto& [t, v] : o.values_) set(t, (*this)(t) + v);
  return *this;
}

TruncatedFunctional& TruncatedFunctional::operator*=(cplx c) {
  if (c == cplx{}) {
    values_.clear();
    return *this;
  }
  for (auto& [t, v] : values_) v *= c;
  return *this;
}

namespace {

struct PairTable {
  std::vector<std::pair<Partition, Partition>> pairs;
  std::vector<FockVector> images;
};

// Evaluated images y(a, z) b for all pairs (a, b) with level(a) + level(b) <= level.
PairTable pair_images(const Intertwiner& y, const LogPoint& z, int level, int inner_level) {
  PairTable table;
  const auto parts = partitions_up_to(level);
  for (const auto& a : parts)
    for (const auto& b : parts)
      if (level_of(a) + level_of(b) <= level) table.pairs.emplace_back(a, b);
  table.images.resize(table.pairs.size());
  parallel_for(table.pairs.size(), [&](std::size_t i) {
    const auto& [a, b] = table.pairs[i];
    table.images[i] = y.apply(FockVector::basis(y.first_momentum(), a), FockVector::basis(y.second_momentum(), b),
                              inner_level)
                          .evaluate(z);
  });
  return table;
}

}  // namespace

TruncatedFunctional product_functional(const std::array<double, 3>& momenta, const DualVector& w4, const LogPoint& z1,
                                       const LogPoint& z2, int level, int inner_level) {
  if (!(z1.modulus() > z2.modulus())) throw RegionError("outside product region");
  const auto [p1, p2, p3] = momenta;
  TruncatedFunctional out(level, momenta);
  if (std::abs(w4.momentum() - (p1 + p2 + p3)) > 1e-12 || w4.is_zero()) return out;
  const Intertwiner y1 = Intertwiner::base(p1, p2 + p3);
  const Intertwiner y2 = Intertwiner::base(p2, p3);
  const PairTable cols = pair_images(y2, z2, level, inner_level);

  const auto firsts = partitions_up_to(level);
  const auto inner = partitions_up_to(inner_level);
  std::map<Partition, std::size_t> index;
  for (std::size_t k = 0; k < inner.size(); ++k) index[inner[k]] = k;
  std::vector<std::vector<cplx>> rows(firsts.size(), std::vector<cplx>(inner.size()));
  const int cap = w4.max_level();
  parallel_for(firsts.size(), [&](std::size_t i) {
    const FockVector e1 = FockVector::basis(p1, firsts[i]);
    for (std::size_t k = 0; k < inner.size(); ++k)
      rows[i][k] = pair_evaluated(w4, y1.apply(e1, FockVector::basis(p2 + p3, inner[k]), cap), z1);
  });
  for (std::size_t i = 0; i < firsts.size(); ++i) {
    for (std::size_t c = 0; c < cols.pairs.size(); ++c) {
      const auto& [a, b] = cols.pairs[c];
      if (level_of(firsts[i]) + level_of(a) + level_of(b) > level) continue;
      cplx sum;
      for (const auto& [k, v] : cols.images[c].terms()) sum += rows[i][index.at(k)] * v;
      out.set(Tuple3{firsts[i], a, b}, sum);
    }
  }
  return out;
}

TruncatedFunctional iterate_functional(const std::array<double, 3>& momenta, const DualVector& w4,
                                       const LogPoint& z1, const LogPoint& z2, int level, int inner_level) {
  const LogPoint z0 = LogPoint::principal(z1.value() - z2.value());
  if (!(z2.modulus() > z0.modulus())) throw RegionError("outside iterate region");
  const auto [p1, p2, p3] = momenta;
  TruncatedFunctional out(level, momenta);
  if (std::abs(w4.momentum() - (p1 + p2 + p3)) > 1e-12 || w4.is_zero()) return out;
  const Intertwiner y3 = Intertwiner::base(p1, p2);
  const Intertwiner y4 = Intertwiner::base(p1 + p2, p3);
  const PairTable cols = pair_images(y3, z0, level, inner_level);

  const auto thirds = partitions_up_to(level);
  const auto inner = partitions_up_to(inner_level);
  std::map<Partition, std::size_t> index;
  for (std::size_t k = 0; k < inner.size(); ++k) index[inner[k]] = k;
  std::vector<std::vector<cplx>> rows(thirds.size(), std::vector<cplx>(inner.size()));
  const int cap = w4.max_level();
  parallel_for(inner.size(), [&](std::size_t k) {
    const FockVector u = FockVector::basis(p1 + p2, inner[k]);
    for (std::size_t i = 0; i < thirds.size(); ++i)
      rows[i][k] = pair_evaluated(w4, y4.apply(u, FockVector::basis(p3, thirds[i]), cap), z2);
  });
  for (std::size_t c = 0; c < cols.pairs.size(); ++c) {
    const auto& [a, b] = cols.pairs[c];
    for (std::size_t i = 0; i < thirds.size(); ++i) {
      if (level_of(a) + level_of(b) + level_of(thirds[i]) > level) continue;
      cplx sum;
      for (const auto& [k, v] : cols.images[c].terms()) sum += v * rows[i][index.at(k)];
      out.set(Tuple3{a, b, thirds[i]}, sum);
    }
  }
  return out;
}

AlgebraElement::AlgebraElement(FockVector v) : v_(std::move(v)) {
  if (v_.momentum() != 0.0 && !v_.is_zero()) throw DomainError("algebra elements live in the vacuum module");
  int lvl = -1;
  for (const auto& [parts, c] : v_.terms()) {
    if (lvl >= 0 && level_of(parts) != lvl) throw DomainError("algebra element must be homogeneous");
    lvl = level_of(parts);
  }
  weight_ = std::max(lvl, 0);
}

AlgebraElement AlgebraElement::vacuum() { return AlgebraElement(FockVector::lowest(0.0)); }
AlgebraElement AlgebraElement::omega() { return AlgebraElement(FockVector::basis(0.0, {1, 1}, 0.5)); }
AlgebraElement AlgebraElement::boson() { return AlgebraElement(FockVector::basis(0.0, {1})); }

std::string AlgebraElement::name() const {
  if (v_.terms().size() == 1) {
    const auto& [parts, c] = *v_.terms().begin();
    if (parts.empty() && c == cplx{1.0}) return "vacuum";
    if (parts == Partition{1, 1} && c == cplx{0.5}) return "omega";
    if (parts == Partition{1} && c == cplx{1.0}) return "a(-1)";
  }
  std::ostringstream os;
  bool first = true;
  for (const auto& [parts, c] : v_.terms()) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i)" << partition_id(parts);
  }
  return os.str();
}

cplx TauSeries::at(const Cell& c, const Tuple3& t) const {
  const auto ci = std::find(cells.begin(), cells.end(), c);
  const auto ti = std::find(tuples.begin(), tuples.end(), t);
  if (ci == cells.end() || ti == tuples.end()) throw DomainError("cell or tuple not evaluated");
  return values[static_cast<std::size_t>(ci - cells.begin())][static_cast<std::size_t>(ti - tuples.begin())];
}

TruncatedFunctional TauSeries::functional_at(const Cell& c, int level, const std::array<double, 3>& momenta) const {
  TruncatedFunctional f(level, momenta);
  for (const auto& t : tuples) f.set(t, at(c, t));
  return f;
}

namespace {

// e^{-x0^{-1} L(1)} and (-x0^{-2})^{L(0)} applied to v: sum_j coeff_j x0^{shift_j} L(1)^j v.
struct Insertion {
  FockVector u;
  int weight = 0;
  double coeff = 0.0;
  int shift = 0;
};

std::vector<Insertion> conjugated(const AlgebraElement& v) {
  std::vector<Insertion> out;
  const int k = v.weight();
  FockVector cur = v.vector();
  double fact = 1.0;
  for (int j = 0; j <= k && !cur.is_zero(); ++j) {
    if (j > 0) {
      cur = virasoro(1, cur);
      fact *= j;
    }
    if (cur.is_zero()) break;
    out.push_back({cur, k - j, (k % 2 == 0 ? 1.0 : -1.0) / fact, j - 2 * k});
  }
  return out;
}

class TauEngine {
 public:
  TauEngine(const AlgebraElement& v, const TruncatedFunctional& lam, const LogPoint& z1, const LogPoint& z2,
            std::array<DeltaProductExpr, 3> sides, int terms)
      : lam_(lam),
        z1_(z1),
        z2_(z2),
        sides_(sides),
        terms_(terms),
        k_(v.weight()),
        ins_(conjugated(v)),
        vertex_{Intertwiner::vertex(lam.momenta()[0]), Intertwiner::vertex(lam.momenta()[1]),
                Intertwiner::vertex(lam.momenta()[2])} {}

  cplx cell(const Tuple3& t, const Cell& c) const {
    if (lam_.is_zero()) return {};
    cplx sum;
    const auto& p = lam_.momenta();
    for (const auto& in : ins_) {
      const int cap1 = c.s + in.weight + level_of(t.w1);
      if (cap1 >= 0) {
        for (const auto& [key, coef] : vertex_[0].apply(in.u, FockVector::basis(p[0], t.w1), cap1).terms) {
          const int b = exponent(key.second);
          const cplx d = delta(0, {c.r - in.shift, c.s - b, c.t});
          if (d != cplx{}) sum += in.coeff * coef * d * lam_(Tuple3{key.first, t.w2, t.w3});
        }
      }
      const int cap2 = c.t + in.weight + level_of(t.w2);
      if (cap2 >= 0) {
        for (const auto& [key, coef] : vertex_[1].apply(in.u, FockVector::basis(p[1], t.w2), cap2).terms) {
          const int b = exponent(key.second);
          const cplx d = delta(1, {c.r - in.shift, c.s, c.t - b});
          if (d != cplx{}) sum += in.coeff * coef * d * lam_(Tuple3{t.w1, key.first, t.w3});
        }
      }
      const int cap3 = level_of(t.w3) - k_ - c.r;
      if (cap3 >= 0) {
        for (const auto& [key, coef] : vertex_[2].apply(in.u, FockVector::basis(p[2], t.w3), cap3).terms) {
          const int a = in.shift - exponent(key.second);
          const cplx d = delta(2, {c.r - a, c.s, c.t});
          if (d != cplx{}) sum += in.coeff * coef * d * lam_(Tuple3{t.w1, t.w2, key.first});
        }
      }
    }
    return sum;
  }

  int weight() const { return k_; }

 private:
  static int exponent(double e) {
    const double r = std::round(e);
    if (std::abs(r - e) > 1e-9) throw DomainError("non-integral vertex operator exponent");
    return static_cast<int>(r);
  }

  cplx delta(int slot, const Cell& c) const {
    {
      const std::lock_guard lock(mutex_);
      const auto it = memo_[slot].find(c);
      if (it != memo_[slot].end()) return it->second;
    }
    const cplx v = side_coefficient(sides_[slot], c, z1_, z2_, terms_, false).value;
    const std::lock_guard lock(mutex_);
    memo_[slot].emplace(c, v);
    return v;
  }

  const TruncatedFunctional& lam_;
  LogPoint z1_, z2_;
  std::array<DeltaProductExpr, 3> sides_;
  int terms_;
  int k_;
  std::vector<Insertion> ins_;
  std::array<Intertwiner, 3> vertex_;
  mutable std::mutex mutex_;
  mutable std::array<std::map<Cell, cplx>, 3> memo_;
};

std::array<DeltaProductExpr, 3> tau_sides(Side side) {
  return {DeltaProductExpr::lookup(Identity::PoleZ1, side), DeltaProductExpr::lookup(Identity::PoleZ2, side),
          DeltaProductExpr::lookup(Identity::PoleOrigin, side)};
}

TauSeries run(const TauEngine& engine, const Grid& grid, const std::vector<Tuple3>& tuples) {
  TauSeries out;
  out.cells = grid.cells();
  out.tuples = tuples;
  out.values.assign(out.cells.size(), std::vector<cplx>(tuples.size()));
  parallel_for(tuples.size(), [&](std::size_t i) {
    for (std::size_t c = 0; c < out.cells.size(); ++c) out.values[c][i] = engine.cell(tuples[i], out.cells[c]);
  });
  return out;
}

void require_region(const LogPoint& z1, const LogPoint& z2) {
  if (!in_associativity_region(z1, z2)) throw RegionError("outside region |z1| > |z2| > |z1-z2| > 0");
}

}  // namespace

TauSeries tau1_apply(const AlgebraElement& v, const TruncatedFunctional& lam, const LogPoint& z1, const LogPoint& z2,
                     const Grid& grid, const std::vector<Tuple3>& tuples, int terms) {
  if (!side_region_ok(Side::Left, z1, z2)) throw RegionError("wrong region for this expansion");
  const TauEngine engine(v, lam, z1, z2, tau_sides(Side::Left), terms);
  return run(engine, grid, tuples);
}

TauSeries tau2_apply(const AlgebraElement& v, const TruncatedFunctional& lam, const LogPoint& z0, const LogPoint& z2,
                     const Grid& grid, const std::vector<Tuple3>& tuples, int terms) {
  const LogPoint z1 = LogPoint::principal(z0.value() + z2.value());
  if (!side_region_ok(Side::Right, z1, z2)) throw RegionError("wrong region for this expansion");
  const TauEngine engine(v, lam, z1, z2, tau_sides(Side::Right), terms);
  return run(engine, grid, tuples);
}

double cell_deviation(cplx a, cplx b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

TauReport check_tau_equality(const AlgebraElement& v, const TruncatedFunctional& lam, const LogPoint& z1,
                             const LogPoint& z2, const Grid& grid, const std::vector<Tuple3>& tuples, double tol,
                             int terms) {
  require_region(z1, z2);
  const LogPoint z0 = LogPoint::principal(z1.value() - z2.value());
  const TauSeries a = tau1_apply(v, lam, z1, z2, grid, tuples, terms);
  const TauSeries b = tau2_apply(v, lam, z0, z2, grid, tuples, terms);
  TauReport rep;
  rep.tol = tol;
  for (std::size_t c = 0; c < a.cells.size(); ++c) {
    for (std::size_t i = 0; i < tuples.size(); ++i) {
      TauRow row{a.cells[c], tuples[i].id(), a.values[c][i], b.values[c][i], 0.0};
      row.dev = cell_deviation(row.tau1, row.tau2);
      rep.max_dev = std::max(rep.max_dev, row.dev);
      rep.rows.push_back(std::move(row));
    }
  }
  rep.pass = rep.max_dev <= tol;
  return rep;
}

TruncatedFunctional lprime0_apply(const TruncatedFunctional& lam, const LogPoint& z1, const LogPoint& z2, int terms) {
  if (!side_region_ok(Side::Left, z1, z2)) throw RegionError("wrong region for this expansion");
  const int level = std::max(lam.level() - 1, 0);
  TruncatedFunctional out(level, lam.momenta());
  if (lam.level() < 1 || lam.is_zero()) return out;
  const TauEngine engine(AlgebraElement::omega(), lam, z1, z2, tau_sides(Side::Left), terms);
  const auto tuples = basis_tuples3(level);
  std::vector<cplx> values(tuples.size());
  parallel_for(tuples.size(), [&](std::size_t i) { values[i] = engine.cell(tuples[i], {-2, -1, -1}); });
  for (std::size_t i = 0; i < tuples.size(); ++i) out.set(tuples[i], values[i]);
  return out;
}

CompatReport compatibility_check(const TruncatedFunctional& lam, const LogPoint& z1, const LogPoint& z2,
                                 const std::vector<AlgebraElement>& vs, const Grid& grid,
                                 const std::vector<Tuple3>& tuples, double tol, int terms) {
  require_region(z1, z2);
  const DeltaProductExpr g1 = DeltaProductExpr::lookup(Identity::FullSum, Side::Left);
  const auto cells = grid.cells();
  CompatReport rep;
  rep.tol = tol;
  for (const auto& v : vs) {
    const TauEngine engine(v, lam, z1, z2, tau_sides(Side::Left), terms);
    const int top = grid.r_hi - grid.s_lo - grid.t_lo - 2;
    std::vector<TruncationRow> trunc(tuples.size());
    std::vector<std::vector<CompatRow>> rows(tuples.size());
    parallel_for(tuples.size(), [&](std::size_t i) {
      const Tuple3& t = tuples[i];
      const int bottom = t.level() - engine.weight() - lam.level();
      // Coefficients of the x^{r'} x1^{-1} x2^{-1} slice from the bottom up.
      std::vector<cplx> slice;
      double biggest = 0.0;
      for (int r = bottom; r <= top; ++r) {
        slice.push_back(engine.cell(t, {r, -1, -1}));
        biggest = std::max(biggest, std::abs(slice.back()));
      }
      const double zero_tol = tol * std::max(1.0, biggest);
      TruncationRow& tr = trunc[i];
      tr.v = v.name();
      tr.tuple_id = t.id();
      tr.bottom = bottom;
      tr.lowest_nonzero = top + 1;
      for (std::size_t k = 0; k < slice.size(); ++k) {
        if (std::abs(slice[k]) > zero_tol) {
          tr.lowest_nonzero = bottom + static_cast<int>(k);
          break;
        }
      }
      tr.ok = tr.lowest_nonzero > bottom;
      for (const Cell& c : cells) {
        CompatRow row;
        row.v = v.name();
        row.cell = c;
        row.tuple_id = t.id();
        row.lhs = engine.cell(t, c);
        for (int r = bottom; r <= c.r - c.s - c.t - 2; ++r) {
          const cplx y = slice[static_cast<std::size_t>(r - bottom)];
          if (y == cplx{}) continue;
          row.rhs += side_coefficient(g1, {c.r - r, c.s, c.t}, z1, z2, terms, false).value * y;
        }
        row.dev = cell_deviation(row.lhs, row.rhs);
        rows[i].push_back(std::move(row));
      }
    });
    for (std::size_t i = 0; i < tuples.size(); ++i) {
      rep.truncation_ok = rep.truncation_ok && trunc[i].ok;
      rep.truncation.push_back(std::move(trunc[i]));
      for (auto& row : rows[i]) {
        rep.max_dev = std::max(rep.max_dev, row.dev);
        rep.rows.push_back(std::move(row));
      }
    }
  }
  rep.pass = rep.truncation_ok && rep.max_dev <= tol;
  return rep;
}

void to_json(nlohmann::json& j, const TruncatedFunctional& f) {
  nlohmann::json values = nlohmann::json::object();
  for (const auto& [t, v] : f.values()) values[t.id()] = {v.real(), v.imag()};
  j = {{"level", f.level()}, {"momenta", f.momenta()}, {"values", std::move(values)}};
}

void to_json(nlohmann::json& j, const TauReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"r", row.cell.r},
                    {"s", row.cell.s},
                    {"t", row.cell.t},
                    {"tuple_id", row.tuple_id},
                    {"tau1", {row.tau1.real(), row.tau1.imag()}},
                    {"tau2", {row.tau2.real(), row.tau2.imag()}},
                    {"dev", row.dev}});
  }
  j = {{"max_dev", r.max_dev}, {"tol", r.tol}, {"pass", r.pass}, {"rows", std::move(rows)}};
}

void to_json(nlohmann::json& j, const CompatReport& r) {
  nlohmann::json trunc = nlohmann::json::array();
  for (const auto& t : r.truncation) {
    trunc.push_back({{"v", t.v},
                     {"tuple_id", t.tuple_id},
                     {"bottom", t.bottom},
                     {"lowest_nonzero", t.lowest_nonzero},
                     {"ok", t.ok}});
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"v", row.v},
                    {"r", row.cell.r},
                    {"s", row.cell.s},
                    {"t", row.cell.t},
                    {"tuple_id", row.tuple_id},
                    {"lhs", {row.lhs.real(), row.lhs.imag()}},
                    {"rhs", {row.rhs.real(), row.rhs.imag()}},
                    {"dev", row.dev}});
  }
  j = {{"truncation", std::move(trunc)}, {"truncation_ok", r.truncation_ok},
       {"max_dev", r.max_dev},           {"tol", r.tol},
       {"pass", r.pass},                 {"rows", std::move(rows)}};
}

}  // namespace vertexcalc
