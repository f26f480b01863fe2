#pragma once

#include <complex>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace vertexcalc {

using cplx = std::complex<double>;

inline constexpr double kExponentTol = 1e-12;
inline constexpr double kPruneTol = 1e-15;

// Rounds to a nearby rational with small denominator when within kExponentTol.
double snap_exponent(double x);
bool exponents_equal(double a, double b);

// m(m-1)...(m-l+1)/l!; zero for l < 0.
double binomial_coeff(double m, int l);

class ExponentTuple {
 public:
  ExponentTuple() = default;
  ExponentTuple(std::initializer_list<std::pair<const std::string, double>> init);
  explicit ExponentTuple(std::map<std::string, double> exps);

  double operator[](const std::string& var) const;
  void set(const std::string& var, double e);
  const std::map<std::string, double>& entries() const noexcept { return exps_; }

 private:
  std::map<std::string, double> exps_;
};

// Exponent range a series tracks in one variable. A sharp bound is also a
// bound of the untruncated support: nothing lies beyond it.
struct WindowRange {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_sharp = true;
  bool hi_sharp = false;

  bool contains(double e) const { return e >= lo - kExponentTol && e <= hi + kExponentTol; }
  bool empty() const { return lo > hi + kExponentTol; }
};

struct ExponentLess {
  bool operator()(const std::vector<double>& a, const std::vector<double>& b) const;
};

class CoeffSeries {
 public:
  using Key = std::vector<double>;
  using TermMap = std::map<Key, cplx, ExponentLess>;

  CoeffSeries() = default;
  CoeffSeries(std::vector<std::string> vars, const std::map<std::string, WindowRange>& window);

  static CoeffSeries monomial(std::vector<std::string> vars, const std::map<std::string, WindowRange>& window,
                              const ExponentTuple& e, cplx c = 1.0);

  const std::vector<std::string>& vars() const noexcept { return vars_; }
  const WindowRange& window(const std::string& var) const;
  const std::vector<WindowRange>& windows() const noexcept { return windows_; }
  const TermMap& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }
  std::size_t var_index(const std::string& var) const;

  Key key_of(const ExponentTuple& e) const;
  ExponentTuple tuple_of(const Key& k) const;
  bool tracks(const Key& k) const;

  // Accumulates c at e; e must lie inside the window.
  void add_term(const ExponentTuple& e, cplx c);
  void add_key(const Key& k, cplx c);

  cplx coeff(const ExponentTuple& e) const;

  void set_window(const std::string& var, WindowRange w);

  friend bool operator==(const CoeffSeries& a, const CoeffSeries& b);

 private:
  std::vector<std::string> vars_;
  std::vector<WindowRange> windows_;
  TermMap terms_;
};

struct Operand {
  std::optional<std::string> var;  // empty: the unit

  static Operand unit() { return {}; }
  static Operand variable(std::string name) { return Operand{std::move(name)}; }
  friend bool operator==(const Operand&, const Operand&) = default;
};

struct ExpansionConvention {
  Operand dominant;
  Operand subordinate;
};

// (a*u + b*v)^r expanded in nonnegative powers of the subordinate operand.
CoeffSeries iota_expand(cplx a, const Operand& u, cplx b, const Operand& v, double r, const ExpansionConvention& conv,
                        const std::vector<std::string>& vars, const std::map<std::string, WindowRange>& window);

CoeffSeries mul(const CoeffSeries& s, const CoeffSeries& t);
CoeffSeries res(const CoeffSeries& s, const std::string& var);

void to_json(nlohmann::json& j, const CoeffSeries& s);
void from_json(const nlohmann::json& j, CoeffSeries& s);

}  // namespace vertexcalc
