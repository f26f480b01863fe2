#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vertexcalc/branch_arith.hpp"

namespace vertexcalc {

struct ExpTerm {
  double m = 0.0;
  cplx a;
};

// Finite sum of a_i z^{m_i} with strictly increasing m_i and nonzero a_i.
class RealExpSeries {
 public:
  RealExpSeries() = default;
  explicit RealExpSeries(std::vector<ExpTerm> terms);

  const std::vector<ExpTerm>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  cplx operator()(const LogPoint& z) const;

 private:
  std::vector<ExpTerm> terms_;
};

// Function of one multivalued variable, valid on inner < |z| < outer.
struct Sampler {
  std::function<cplx(const LogPoint&)> f;
  double inner = 0.0;
  double outer = std::numeric_limits<double>::infinity();

  Sampler(std::function<cplx(const LogPoint&)> fn, double in = 1e-12,
          double out = std::numeric_limits<double>::infinity());
};

// Geometric radii r0 * ratio^k crossed with a fixed set of arguments.
struct RadiiSchedule {
  double r0 = 0.5;
  double ratio = 0.7;
  int steps = 8;
  std::vector<double> args = {0.3, 1.7, 3.1, 4.5, 5.9};

  std::vector<LogPoint> points() const;
  RadiiSchedule refined() const;  // twice as many radii over the same span
};

inline constexpr double kExpandableResidual = 1e-6;

RealExpSeries leading_extract(const Sampler& f, std::vector<double> lattice, double tol = 1e-10,
                              const RadiiSchedule& schedule = {});

cplx res_z(const RealExpSeries& s);

// Exponent classes mod 1, each represented in [0, 1).
std::vector<double> exponent_support(const std::vector<double>& exponents, double tol = 1e-9, std::size_t cap = 64);
std::vector<double> exponent_support(const std::map<double, cplx>& samples, double tol = 1e-9, std::size_t cap = 64);

struct ProbePoint {
  LogPoint z1;
  LogPoint z2;
};

// Probes with |z2| > |z1 - z2| > 0 and |z1| > |z2|.
std::vector<ProbePoint> default_probes();

struct FitTerm {
  double r = 0.0;
  double s = 0.0;
  std::vector<cplx> taylor;
};

struct ExpansionFit {
  std::vector<FitTerm> terms;
  int n_witness = 0;
  bool witness_ok = true;
  double delta = 0.0;
  double residual = 0.0;
  double condition = 1.0;
};

struct FitOptions {
  int degree = 8;                // upper bound; the fit uses the lowest degree meeting residual_tol
  double residual_tol = 1e-10;   // relative least-squares residual
  double weight_sum = 0.0;       // wt w1 + wt w2
  std::optional<int> n_witness;  // caller-supplied N; minimal consistent N otherwise
  double drop_tol = 1e-10;       // relative size below which a term counts as absent
  double max_condition = 1e10;
};

using Sampler2 = std::function<cplx(const LogPoint&, const LogPoint&)>;

// Fits sum_i z2^{r_i} (z1-z2)^{delta - r_i} f_i((z1-z2)/z2) with f_i polynomials.
// Candidates must be pairwise distinct mod 1.
ExpansionFit fit_product_expansion(const Sampler2& correlator, double delta, const std::vector<double>& candidates,
                                   const std::vector<ProbePoint>& probes, const FitOptions& opts = {});

void to_json(nlohmann::json& j, const RealExpSeries& s);
void to_json(nlohmann::json& j, const ExpansionFit& fit);

}  // namespace vertexcalc
