#pragma once

#include <array>
#include <map>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vertexcalc/branch_arith.hpp"

namespace vertexcalc {

// Nonincreasing positive parts; {2,1} is a_{-2} a_{-1}.
using Partition = std::vector<int>;

int level_of(const Partition& p);
std::vector<Partition> partitions_of(int n);
std::vector<Partition> partitions_up_to(int level);
std::string partition_id(const Partition& p);  // "[2,1]"
Partition parse_partition(const std::string& id);
int multiplicity(const Partition& p, int part);
Partition with_part(Partition p, int part);
Partition without_part(Partition p, int part);  // removes one copy; part must be present

struct FockState {
  double p = 0.0;
  Partition parts;

  double weight() const;
  int level() const { return level_of(parts); }
};

double weight(const FockState& s);

// Combination of monomial states a_{-parts}|p>.
class FockVector {
 public:
  using Terms = std::map<Partition, cplx>;

  explicit FockVector(double p = 0.0) : p_(p) {}
  static FockVector basis(double p, Partition parts, cplx c = 1.0);
  static FockVector lowest(double p) { return basis(p, {}); }

  double momentum() const noexcept { return p_; }
  const Terms& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  cplx coeff(const Partition& parts) const;
  int max_level() const;

  void add(const Partition& parts, cplx c);
  FockVector& operator+=(const FockVector& o);
  FockVector& operator*=(cplx c);
  friend FockVector operator+(FockVector a, const FockVector& b) { return a += b; }
  friend FockVector operator*(cplx c, FockVector v) { return v *= c; }

 private:
  double p_;
  Terms terms_;
};

// Element of the contragredient module, in the basis dual to the monomials.
class DualVector {
 public:
  using Terms = std::map<Partition, cplx>;

  explicit DualVector(double p = 0.0) : p_(p) {}
  static DualVector basis(double p, Partition parts, cplx c = 1.0);
  static DualVector lowest(double p) { return basis(p, {}); }

  double momentum() const noexcept { return p_; }
  const Terms& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  int max_level() const;

  void add(const Partition& parts, cplx c);
  DualVector& operator+=(const DualVector& o);
  DualVector& operator*=(cplx c);

  cplx pair(const FockVector& w) const;

 private:
  double p_;
  Terms terms_;
};

// Weight-n component.
FockVector grade_project(const FockVector& w, double n);

// a_n, with a_0 acting as the momentum.
FockVector mode(int n, const FockVector& w);
DualVector mode_transpose(int n, const DualVector& d);

// L(n) = 1/2 sum_m :a_{n-m} a_m:.
FockVector virasoro(int n, const FockVector& w);
DualVector virasoro_transpose(int n, const DualVector& d);

// sum_{j <= order} x^j L(-1)^j / j! w.
FockVector exp_l_minus1(cplx x, const FockVector& w, int order);

// Formal output sum_i c_i x^{e_i} e_{lambda_i} of an intertwining operator.
struct FormalFock {
  double p = 0.0;
  std::map<std::pair<Partition, double>, cplx> terms;

  void add(const Partition& parts, double exponent, cplx c);
  FockVector evaluate(const LogPoint& x) const;
  FockVector evaluate_level(const LogPoint& x, int level) const;
};

// <d, f(x)> without materializing the evaluated vector.
cplx pair_evaluated(const DualVector& d, const FormalFock& f, const LogPoint& x);

class Intertwiner {
 public:
  struct Node;

  // Y(w_a, x) w_b : F_{pa} x F_{pb} -> F_{pa+pb}, lowest-to-lowest coefficient 1.
  static Intertwiner base(double pa, double pb);
  // Vertex operator of the vacuum module on F_p.
  static Intertwiner vertex(double p) { return base(0.0, p); }

  // variant -1: e^{xL(-1)} Y(w_b, e^{-pi i} x) w_a; variant 0 uses e^{pi i}.
  Intertwiner omega(int variant) const;
  Intertwiner rotated(long k) const;

  double first_momentum() const noexcept;
  double second_momentum() const noexcept;
  double target_momentum() const noexcept { return first_momentum() + second_momentum(); }
  long half_turns() const noexcept { return half_turns_; }
  std::string describe() const;

  // Y(w_a, x) w_b up to output level cap, in the unrotated variable.
  FormalFock apply(const FockVector& wa, const FockVector& wb, int cap) const;

 private:
  explicit Intertwiner(std::shared_ptr<const Node> node, long k = 0) : node_(std::move(node)), half_turns_(k) {}
  std::shared_ptr<const Node> node_;
  long half_turns_ = 0;
};

struct MatrixCoeff {
  cplx value;
  bool momentum_ok = true;
};

// <w', Y(w1, x) w2>; momentum mismatch gives exact 0 with the flag cleared.
MatrixCoeff intertwiner_matrix_coeff(const Intertwiner& y, const DualVector& wprime, const FockVector& w1,
                                     const FockVector& w2, const LogPoint& x, int level);

struct ConvergenceReport {
  cplx value;
  double abs_sum = 0.0;
  double tail = 0.0;  // largest of the last two level contributions
  bool converged = true;
  bool momentum_ok = true;
  int level = 0;
  std::vector<cplx> level_terms;
};

// sum_{n <= L} <w4', Y1(w1, z1) P_n Y2(w2, z2) w3>.
ConvergenceReport product_correlator(const Intertwiner& y1, const Intertwiner& y2, const DualVector& w4,
                                     const FockVector& w1, const FockVector& w2, const FockVector& w3,
                                     const LogPoint& z1, const LogPoint& z2, int level, double tol);

// sum_{n <= L} <w4', Y4(P_n Y3(w1, z0) w2, z2) w3>.
ConvergenceReport iterate_correlator(const Intertwiner& y4, const Intertwiner& y3, const DualVector& w4,
                                     const FockVector& w1, const FockVector& w2, const FockVector& w3,
                                     const LogPoint& z0, const LogPoint& z2, int level, double tol);

// Basis tuple (w4', w1, w2, w3) by partitions.
struct Tuple4 {
  Partition w4, w1, w2, w3;
  int level() const { return level_of(w4) + level_of(w1) + level_of(w2) + level_of(w3); }
  std::string id() const;
};

std::vector<Tuple4> basis_tuples4(int max_total_level);

struct AssocRow {
  Tuple4 tuple;
  ConvergenceReport product;
  ConvergenceReport iterate;
  double rel_dev = 0.0;
  bool pass = false;
};

struct AssocReport {
  std::array<double, 3> momenta{};
  LogPoint z1, z2, z0;
  int level = 0;
  double tol = 0.0;
  std::vector<AssocRow> rows;
  double max_rel_dev = 0.0;
  bool pass = false;
};

// Product at (z1, z2) against iterate at (principal(z1 - z2), z2) for each tuple.
AssocReport associativity_check(const std::array<double, 3>& momenta, const std::vector<Tuple4>& tuples,
                                const LogPoint& z1, const LogPoint& z2, int level, double tol);

struct SkewReport {
  cplx iterate;
  cplx chain;
  double rel_dev = 0.0;
  bool pass = false;
};

// Iterate at (z1 - z2, z2) against sum_j z2^j/j! <(L(-1)^T)^j w4', Omega_{-1}(Y4)(w3, e^{rotation*pi i} z2) Y3(w1, z1-z2) w2>.
SkewReport skew_chain_check(const Intertwiner& y3, const Intertwiner& y4, const DualVector& w4, const FockVector& w1,
                            const FockVector& w2, const FockVector& w3, const LogPoint& z1, const LogPoint& z2,
                            int level, double tol, long rotation = 1);

// Exponents with nonzero coefficient, summed modulus per exponent.
std::map<double, cplx> exponent_samples(const Intertwiner& y, int input_level, int output_level);

// |a - b| / max(|a|, |b|); zero when the difference is at rounding level of magnitude.
double relative_deviation(cplx a, cplx b, double magnitude = 0.0);

void to_json(nlohmann::json& j, const ConvergenceReport& r);
void to_json(nlohmann::json& j, const AssocReport& r);
void to_json(nlohmann::json& j, const SkewReport& r);

// One row per tuple and side: p1,p2,p3,tuple_id,side,value_re,value_im,abs_sum,tail,level,converged.
void write_csv(std::ostream& os, const AssocReport& r, bool header = true);

}  // namespace vertexcalc
