#pragma once

#include <complex>
#include <map>
#include <string>

#include <json.hpp>

namespace vertexcalc {

using cplx = std::complex<double>;

class CoeffSeries;

// e^{i*pi*h}; exact for h a multiple of 1/2.
cplx half_turn_phase(double h);

// A nonzero complex number carried by a chosen logarithm.
// The logarithm is log|z| + i*arg + i*pi*half_turns with arg in [0, 2pi).
class LogPoint {
 public:
  LogPoint() = default;  // represents 1

  static LogPoint principal(cplx z);
  static LogPoint from_parts(double log_re, double arg, long half_turns = 0);

  double log_re() const noexcept { return log_re_; }
  double arg() const noexcept { return arg_; }
  long half_turns() const noexcept { return half_turns_; }

  cplx log() const;
  cplx value() const;
  double modulus() const;

  LogPoint rotated(long k) const;
  cplx pow(double n) const;

  std::string provenance() const;

  friend bool operator==(const LogPoint&, const LogPoint&) = default;

 private:
  LogPoint(double log_re, double arg, long half_turns) : log_re_(log_re), arg_(arg), half_turns_(half_turns) {}

  double log_re_ = 0.0;
  double arg_ = 0.0;
  long half_turns_ = 0;
};

inline LogPoint principal(cplx z) { return LogPoint::principal(z); }
inline LogPoint rotate(const LogPoint& p, long k) { return p.rotated(k); }
inline cplx power(const LogPoint& p, double n) { return p.pow(n); }

// |z1| > |z2| > |z1 - z2| > 0, where both product and iterate converge.
bool in_associativity_region(const LogPoint& z1, const LogPoint& z2);

struct SubstituteDiagnostics {
  double tail_estimate = 0.0;
  std::size_t terms_used = 0;
};

struct SubstituteResult {
  cplx value;
  SubstituteDiagnostics diagnostics;
};

// Evaluates a series at the assigned points, summing tracked terms whose
// exponent in each variable is at most the given order.
SubstituteResult substitute(const CoeffSeries& s, const std::map<std::string, LogPoint>& assignment,
                            const std::map<std::string, double>& order = {});

void to_json(nlohmann::json& j, const LogPoint& p);
void from_json(const nlohmann::json& j, LogPoint& p);

}  // namespace vertexcalc
