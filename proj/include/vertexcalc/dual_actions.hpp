#pragma once

#include <array>
#include <compare>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "vertexcalc/delta_calculus.hpp"
#include "vertexcalc/heisenberg.hpp"

namespace vertexcalc {

// Basis tuple of W1 (x) W2 (x) W3 by partitions.
struct Tuple3 {
  Partition w1, w2, w3;

  int level() const { return level_of(w1) + level_of(w2) + level_of(w3); }
  std::string id() const;  // "[2,1]|[]|[1]"
  static Tuple3 parse(const std::string& id);
  friend auto operator<=>(const Tuple3&, const Tuple3&) = default;
};

std::vector<Tuple3> basis_tuples3(int max_level);

// Functional on W1 (x) W2 (x) W3 known on every basis tuple of total level <= L;
// absent entries are 0.
class TruncatedFunctional {
 public:
  TruncatedFunctional(int level, std::array<double, 3> momenta);

  static TruncatedFunctional zero(int level, std::array<double, 3> momenta);
  static TruncatedFunctional single(int level, std::array<double, 3> momenta, const Tuple3& t, cplx value = 1.0);

  int level() const noexcept { return level_; }
  const std::array<double, 3>& momenta() const noexcept { return momenta_; }
  const std::map<Tuple3, cplx>& values() const noexcept { return values_; }
  bool is_zero() const noexcept { return values_.empty(); }

  void set(const Tuple3& t, cplx value);
  cplx operator()(const Tuple3& t) const;  // throws InsufficientTruncation above L
  cplx evaluate(const FockVector& w1, const FockVector& w2, const FockVector& w3) const;

  TruncatedFunctional& operator+=(const TruncatedFunctional& o);
  TruncatedFunctional& operator*=(cplx c);

 private:
  int level_;
  std::array<double, 3> momenta_;
  std::map<Tuple3, cplx> values_;
};

// lambda(w1 (x) w2 (x) w3) = <w4', Y1(w1, z1) Y2(w2, z2) w3>, inner sums to inner_level.
TruncatedFunctional product_functional(const std::array<double, 3>& momenta, const DualVector& w4, const LogPoint& z1,
                                       const LogPoint& z2, int level, int inner_level);

// The same correlator summed as the iterate <w4', Y4(Y3(w1, z1 - z2) w2, z2) w3>.
TruncatedFunctional iterate_functional(const std::array<double, 3>& momenta, const DualVector& w4,
                                       const LogPoint& z1, const LogPoint& z2, int level, int inner_level);

// Homogeneous element of the vacuum module.
class AlgebraElement {
 public:
  explicit AlgebraElement(FockVector v);

  static AlgebraElement vacuum();
  static AlgebraElement omega();  // 1/2 a_{-1}^2 |0>
  static AlgebraElement boson();  // a_{-1} |0>

  const FockVector& vector() const noexcept { return v_; }
  int weight() const noexcept { return weight_; }
  std::string name() const;

 private:
  FockVector v_;
  int weight_ = 0;
};

inline constexpr int kTauTerms = 800;

// Cell values of a tau action on a list of tuples.
struct TauSeries {
  std::vector<Cell> cells;
  std::vector<Tuple3> tuples;
  std::vector<std::vector<cplx>> values;  // [cell][tuple]

  cplx at(const Cell& c, const Tuple3& t) const;
  TruncatedFunctional functional_at(const Cell& c, int level, const std::array<double, 3>& momenta) const;
};

// Delta-factor series times lambda with v inserted in each slot, three terms.
TauSeries tau1_apply(const AlgebraElement& v, const TruncatedFunctional& lam, const LogPoint& z1, const LogPoint& z2,
                     const Grid& grid, const std::vector<Tuple3>& tuples, int terms = kTauTerms);

// Same with the iterate-side delta factors; z0 plays z1 - z2.
TauSeries tau2_apply(const AlgebraElement& v, const TruncatedFunctional& lam, const LogPoint& z0, const LogPoint& z2,
                     const Grid& grid, const std::vector<Tuple3>& tuples, int terms = kTauTerms);

// |a - b| / max(1, |a|, |b|).
double cell_deviation(cplx a, cplx b);

struct TauRow {
  Cell cell;
  std::string tuple_id;
  cplx tau1;
  cplx tau2;
  double dev = 0.0;
};

struct TauReport {
  std::vector<TauRow> rows;
  double max_dev = 0.0;
  double tol = 0.0;
  bool pass = false;
};

TauReport check_tau_equality(const AlgebraElement& v, const TruncatedFunctional& lam, const LogPoint& z1,
                             const LogPoint& z2, const Grid& grid, const std::vector<Tuple3>& tuples, double tol,
                             int terms = kTauTerms);

// Weight operator on functionals: the x0^{-2} x1^{-1} x2^{-1} cell of tau1(omega), on tuples up to L - 1.
TruncatedFunctional lprime0_apply(const TruncatedFunctional& lam, const LogPoint& z1, const LogPoint& z2,
                                  int terms = kTauTerms);

struct TruncationRow {
  std::string v;
  std::string tuple_id;
  int bottom = 0;            // lowest computable x-exponent
  int lowest_nonzero = 0;    // lowest exponent with a nonzero coefficient
  bool ok = false;           // nothing nonzero at the bottom
};

struct CompatRow {
  std::string v;
  Cell cell;
  std::string tuple_id;
  cplx lhs;
  cplx rhs;
  double dev = 0.0;
};

struct CompatReport {
  std::vector<TruncationRow> truncation;
  std::vector<CompatRow> rows;
  double max_dev = 0.0;
  double tol = 0.0;
  bool truncation_ok = true;
  bool pass = false;
};

CompatReport compatibility_check(const TruncatedFunctional& lam, const LogPoint& z1, const LogPoint& z2,
                                 const std::vector<AlgebraElement>& vs, const Grid& grid,
                                 const std::vector<Tuple3>& tuples, double tol, int terms = kTauTerms);

void to_json(nlohmann::json& j, const TruncatedFunctional& f);
void to_json(nlohmann::json& j, const TauReport& r);
void to_json(nlohmann::json& j, const CompatReport& r);

}  // namespace vertexcalc
