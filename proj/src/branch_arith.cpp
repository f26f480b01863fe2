#include "vertexcalc/branch_arith.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "vertexcalc/error.hpp"
#include "vertexcalc/formal_series.hpp"

namespace vertexcalc {

cplx half_turn_phase(double h) {
  double r = std::fmod(h, 2.0);
  if (r < 0) r += 2.0;
  const double twice = 2.0 * r;
  if (twice == std::round(twice)) {
    switch (static_cast<int>(twice)) {
      case 0:
      case 4: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      case 3: return {0.0, -1.0};
      default: break;
    }
  }
  const double angle = std::numbers::pi * r;
  return {std::cos(angle), std::sin(angle)};
}

LogPoint LogPoint::principal(cplx z) {
  if (z == cplx{}) throw DomainError("zero has no logarithm");
  double a = std::arg(z);
  if (a < 0) a += 2.0 * std::numbers::pi;
  if (a >= 2.0 * std::numbers::pi) a = 0.0;
  return LogPoint(std::log(std::abs(z)), a, 0);
}

LogPoint LogPoint::from_parts(double log_re, double arg, long half_turns) {
  if (!std::isfinite(log_re) || !std::isfinite(arg)) throw DomainError("logarithm must be finite");
  return LogPoint(log_re, arg, half_turns);
}

cplx LogPoint::log() const { return {log_re_, arg_ + std::numbers::pi * static_cast<double>(half_turns_)}; }

cplx LogPoint::value() const { return pow(1.0); }

double LogPoint::modulus() const { return std::exp(log_re_); }

LogPoint LogPoint::rotated(long k) const { return LogPoint(log_re_, arg_, half_turns_ + k); }

cplx LogPoint::pow(double n) const {
  if (n == 0.0) return 1.0;
  const cplx base = std::exp(cplx(n * log_re_, n * arg_));
  if (half_turns_ == 0) return base;
  return base * half_turn_phase(n * static_cast<double>(half_turns_));
}

std::string LogPoint::provenance() const {
  return half_turns_ == 0 ? "principal" : "rotated(" + std::to_string(half_turns_) + ")";
}

bool in_associativity_region(const LogPoint& z1, const LogPoint& z2) {
  const double a1 = z1.modulus();
  const double a2 = z2.modulus();
  const double a3 = std::abs(z1.value() - z2.value());
  return a1 > a2 && a2 > a3 && a3 > 0.0;
}

SubstituteResult substitute(const CoeffSeries& s, const std::map<std::string, LogPoint>& assignment,
                            const std::map<std::string, double>& order) {
  std::vector<const LogPoint*> points;
  for (const auto& v : s.vars()) {
    const auto it = assignment.find(v);
    if (it == assignment.end()) throw DomainError("no assignment for variable " + v);
    points.push_back(&it->second);
  }
  std::vector<double> caps(s.vars().size(), std::numeric_limits<double>::infinity());
  for (const auto& [v, cap] : order) {
    const std::size_t i = s.var_index(v);
    if (s.windows()[i].hi < cap - kExponentTol) throw UntrackedExponent("window smaller than requested order");
    caps[i] = cap;
  }

  std::map<double, cplx> blocks;
  std::size_t used = 0;
  for (const auto& [k, c] : s.terms()) {
    bool keep = true;
    double total = 0.0;
    cplx term = c;
    for (std::size_t i = 0; i < k.size() && keep; ++i) {
      if (k[i] > caps[i] + kExponentTol) keep = false;
      total += k[i];
      term *= points[i]->pow(k[i]);
    }
    if (!keep) continue;
    blocks[snap_exponent(total)] += term;
    ++used;
  }
  SubstituteResult out{cplx{}, {}};
  for (const auto& [total, block] : blocks) out.value += block;
  if (!blocks.empty()) out.diagnostics.tail_estimate = std::abs(blocks.rbegin()->second);
  out.diagnostics.terms_used = used;
  return out;
}

void to_json(nlohmann::json& j, const LogPoint& p) {
  j = {{"log_re", p.log_re()}, {"log_im", p.arg()}, {"half_turns", p.half_turns()}};
}

void from_json(const nlohmann::json& j, LogPoint& p) {
  p = LogPoint::from_parts(j.at("log_re").get<double>(), j.at("log_im").get<double>(),
                           j.value("half_turns", 0L));
}

}  // namespace vertexcalc
