#include "vertexcalc/formal_series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vertexcalc/error.hpp"

namespace vertexcalc {

double snap_exponent(double x) {
  if (!std::isfinite(x)) throw DomainError("exponent must be finite");
  for (int q = 1; q <= 64; ++q) {
    const double num = std::round(x * q);
    const double candidate = num / q;
    if (std::abs(x - candidate) < kExponentTol) return candidate == 0.0 ? 0.0 : candidate;
  }
  return x;
}

bool exponents_equal(double a, double b) { return std::abs(a - b) < kExponentTol; }

double binomial_coeff(double m, int l) {
  if (l < 0) return 0.0;
  double out = 1.0;
  for (int i = 0; i < l; ++i) out *= (m - i) / (i + 1);
  return out;
}

ExponentTuple::ExponentTuple(std::initializer_list<std::pair<const std::string, double>> init) {
  for (const auto& [var, e] : init) set(var, e);
}

ExponentTuple::ExponentTuple(std::map<std::string, double> exps) {
  for (const auto& [var, e] : exps) set(var, e);
}

double ExponentTuple::operator[](const std::string& var) const {
  const auto it = exps_.find(var);
  return it == exps_.end() ? 0.0 : it->second;
}

void ExponentTuple::set(const std::string& var, double e) { exps_[var] = snap_exponent(e); }

bool ExponentLess::operator()(const std::vector<double>& a, const std::vector<double>& b) const {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] < b[i] - kExponentTol) return true;
    if (a[i] > b[i] + kExponentTol) return false;
  }
  return a.size() < b.size();
}

CoeffSeries::CoeffSeries(std::vector<std::string> vars, const std::map<std::string, WindowRange>& window)
    : vars_(std::move(vars)) {
  std::vector<std::string> sorted = vars_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("duplicate variable in alphabet");
  }
  for (const auto& v : vars_) {
    const auto it = window.find(v);
    if (it == window.end()) throw DomainError("missing window for variable " + v);
    windows_.push_back(it->second);
  }
  for (const auto& [v, w] : window) {
    if (std::find(vars_.begin(), vars_.end(), v) == vars_.end()) {
      throw DomainError("window names variable outside the alphabet: " + v);
    }
  }
}

CoeffSeries CoeffSeries::monomial(std::vector<std::string> vars, const std::map<std::string, WindowRange>& window,
                                  const ExponentTuple& e, cplx c) {
  CoeffSeries s(std::move(vars), window);
  s.add_term(e, c);
  // A single in-window term is the whole support.
  if (!s.is_zero()) {
    for (std::size_t i = 0; i < s.vars_.size(); ++i) {
      s.windows_[i].lo_sharp = true;
      s.windows_[i].hi_sharp = true;
    }
  }
  return s;
}

std::size_t CoeffSeries::var_index(const std::string& var) const {
  const auto it = std::find(vars_.begin(), vars_.end(), var);
  if (it == vars_.end()) throw DomainError("variable not in alphabet: " + var);
  return static_cast<std::size_t>(it - vars_.begin());
}

const WindowRange& CoeffSeries::window(const std::string& var) const { return windows_[var_index(var)]; }

void CoeffSeries::set_window(const std::string& var, WindowRange w) {
  const std::size_t i = var_index(var);
  windows_[i] = w;
  std::erase_if(terms_, [&](const auto& kv) { return !w.contains(kv.first[i]); });
}

CoeffSeries::Key CoeffSeries::key_of(const ExponentTuple& e) const {
  for (const auto& [var, x] : e.entries()) {
    if (std::find(vars_.begin(), vars_.end(), var) == vars_.end()) {
      throw DomainError("variable not in alphabet: " + var);
    }
  }
  Key k(vars_.size());
  for (std::size_t i = 0; i < vars_.size(); ++i) k[i] = e[vars_[i]];
  return k;
}

ExponentTuple CoeffSeries::tuple_of(const Key& k) const {
  ExponentTuple e;
  for (std::size_t i = 0; i < vars_.size(); ++i) e.set(vars_[i], k[i]);
  return e;
}

bool CoeffSeries::tracks(const Key& k) const {
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (!windows_[i].contains(k[i])) return false;
  }
  return true;
}

void CoeffSeries::add_key(const Key& k, cplx c) {
  if (!tracks(k)) throw UntrackedExponent();
  Key snapped(k.size());
  std::transform(k.begin(), k.end(), snapped.begin(), snap_exponent);
  auto [it, inserted] = terms_.try_emplace(snapped, c);
  if (!inserted) it->second += c;
  if (std::abs(it->second) < kPruneTol) terms_.erase(it);
}

void CoeffSeries::add_term(const ExponentTuple& e, cplx c) { add_key(key_of(e), c); }

cplx CoeffSeries::coeff(const ExponentTuple& e) const {
  const Key k = key_of(e);
  if (!tracks(k)) throw UntrackedExponent();
  const auto it = terms_.find(k);
  return it == terms_.end() ? cplx{} : it->second;
}

bool operator==(const CoeffSeries& a, const CoeffSeries& b) {
  if (a.vars_ != b.vars_ || a.windows_.size() != b.windows_.size()) return false;
  for (std::size_t i = 0; i < a.windows_.size(); ++i) {
    const auto& wa = a.windows_[i];
    const auto& wb = b.windows_[i];
    if (!exponents_equal(wa.lo, wb.lo) || !exponents_equal(wa.hi, wb.hi)) return false;
  }
  if (a.terms_.size() != b.terms_.size()) return false;
  for (const auto& [k, c] : a.terms_) {
    const auto it = b.terms_.find(k);
    if (it == b.terms_.end() || it->second != c) return false;
  }
  return true;
}

namespace {

cplx int_pow(cplx a, long n) {
  if (n < 0) return 1.0 / int_pow(a, -n);
  cplx out = 1.0;
  cplx base = a;
  while (n > 0) {
    if (n & 1) out *= base;
    base *= base;
    n >>= 1;
  }
  return out;
}

cplx real_pow(cplx a, double e) {
  if (e == std::round(e) && std::abs(e) < 1e9) return int_pow(a, static_cast<long>(e));
  if (a == cplx{}) throw DomainError("zero raised to a non-integer power");
  return std::pow(a, e);
}

bool is_nonneg_integer(double r) { return r >= 0 && r == std::round(r); }

}  // namespace

CoeffSeries iota_expand(cplx a, const Operand& u, cplx b, const Operand& v, double r, const ExpansionConvention& conv,
                        const std::vector<std::string>& vars, const std::map<std::string, WindowRange>& window) {
  if (conv.dominant == conv.subordinate) throw DomainError("expansion convention needs distinct terms");
  if (u == v) throw DomainError("binomial terms must differ");
  const bool sub_is_v = conv.subordinate == v && conv.dominant == u;
  const bool sub_is_u = conv.subordinate == u && conv.dominant == v;
  if (!sub_is_v && !sub_is_u) throw DomainError("subordinate term does not appear in the binomial");
  const Operand& dom = sub_is_v ? u : v;
  const Operand& sub = sub_is_v ? v : u;
  const cplx a_dom = sub_is_v ? a : b;
  const cplx b_sub = sub_is_v ? b : a;
  if (!dom.var && !sub.var) throw DomainError("binomial has no formal variable");

  CoeffSeries out(vars, window);
  const bool finite = is_nonneg_integer(r);
  const auto dom_win = dom.var ? std::optional<WindowRange>(out.window(*dom.var)) : std::nullopt;
  const auto sub_win = sub.var ? std::optional<WindowRange>(out.window(*sub.var)) : std::nullopt;

  for (long l = 0;; ++l) {
    if (finite && l > static_cast<long>(r)) break;
    const double dom_exp = r - static_cast<double>(l);
    if (sub_win && l > sub_win->hi + kExponentTol) break;
    if (dom_win && dom_exp < dom_win->lo - kExponentTol) break;
    ExponentTuple e;
    if (dom.var) e.set(*dom.var, dom_exp);
    if (sub.var) e.set(*sub.var, static_cast<double>(l));
    const cplx c = binomial_coeff(r, static_cast<int>(l)) * real_pow(a_dom, dom_exp) * int_pow(b_sub, l);
    const auto k = out.key_of(e);
    if (out.tracks(k)) out.add_key(k, c);
  }

  for (const auto& name : vars) {
    WindowRange w = out.window(name);
    double sup_lo = 0.0;
    double sup_hi = 0.0;
    bool lo_bounded = true;
    bool hi_bounded = true;
    if (dom.var && *dom.var == name) {
      sup_hi = r;
      lo_bounded = finite;
      sup_lo = 0.0;
    } else if (sub.var && *sub.var == name) {
      sup_lo = 0.0;
      hi_bounded = finite;
      sup_hi = r;
    }
    w.lo_sharp = lo_bounded && w.lo <= sup_lo + kExponentTol;
    w.hi_sharp = hi_bounded && w.hi >= sup_hi - kExponentTol;
    out.set_window(name, w);
  }
  return out;
}

namespace {

WindowRange product_window(const WindowRange& s, const WindowRange& t) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double lo = s.lo + t.lo;
  double hi = s.hi + t.hi;
  if (!s.lo_sharp) lo = t.hi_sharp ? std::max(lo, s.lo + t.hi) : inf;
  if (!t.lo_sharp) lo = s.hi_sharp ? std::max(lo, t.lo + s.hi) : inf;
  if (!s.hi_sharp) hi = t.lo_sharp ? std::min(hi, s.hi + t.lo) : -inf;
  if (!t.hi_sharp) hi = s.lo_sharp ? std::min(hi, t.hi + s.lo) : -inf;
  WindowRange w;
  w.lo = lo;
  w.hi = hi;
  w.lo_sharp = s.lo_sharp && t.lo_sharp;
  w.hi_sharp = s.hi_sharp && t.hi_sharp;
  return w;
}

}  // namespace

CoeffSeries mul(const CoeffSeries& s, const CoeffSeries& t) {
  if (s.vars() != t.vars()) throw DomainError("alphabet mismatch");
  std::map<std::string, WindowRange> window;
  for (std::size_t i = 0; i < s.vars().size(); ++i) {
    window[s.vars()[i]] = product_window(s.windows()[i], t.windows()[i]);
  }
  CoeffSeries out(s.vars(), window);
  CoeffSeries::Key k(s.vars().size());
  for (const auto& [ka, ca] : s.terms()) {
    for (const auto& [kb, cb] : t.terms()) {
      for (std::size_t i = 0; i < k.size(); ++i) k[i] = ka[i] + kb[i];
      if (out.tracks(k)) out.add_key(k, ca * cb);
    }
  }
  return out;
}

CoeffSeries res(const CoeffSeries& s, const std::string& var) {
  const std::size_t idx = s.var_index(var);
  if (!s.windows()[idx].contains(-1.0)) throw UntrackedExponent();
  std::vector<std::string> vars;
  std::map<std::string, WindowRange> window;
  for (std::size_t i = 0; i < s.vars().size(); ++i) {
    if (i == idx) continue;
    vars.push_back(s.vars()[i]);
    window[s.vars()[i]] = s.windows()[i];
  }
  CoeffSeries out(vars, window);
  for (const auto& [k, c] : s.terms()) {
    if (!exponents_equal(k[idx], -1.0)) continue;
    CoeffSeries::Key rest;
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (i != idx) rest.push_back(k[i]);
    }
    out.add_key(rest, c);
  }
  return out;
}

void to_json(nlohmann::json& j, const CoeffSeries& s) {
  j = nlohmann::json::object();
  j["vars"] = s.vars();
  nlohmann::json window = nlohmann::json::object();
  nlohmann::json sharp = nlohmann::json::object();
  for (std::size_t i = 0; i < s.vars().size(); ++i) {
    const auto& w = s.windows()[i];
    window[s.vars()[i]] = {w.lo, w.hi};
    sharp[s.vars()[i]] = {w.lo_sharp, w.hi_sharp};
  }
  j["window"] = window;
  j["sharp"] = sharp;
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [k, c] : s.terms()) {
    nlohmann::json exp = nlohmann::json::object();
    for (std::size_t i = 0; i < k.size(); ++i) exp[s.vars()[i]] = k[i];
    terms.push_back({{"exp", exp}, {"re", c.real()}, {"im", c.imag()}});
  }
  j["terms"] = terms;
}

void from_json(const nlohmann::json& j, CoeffSeries& s) {
  const auto vars = j.at("vars").get<std::vector<std::string>>();
  std::map<std::string, WindowRange> window;
  for (const auto& [name, range] : j.at("window").items()) {
    WindowRange w;
    w.lo = range.at(0).get<double>();
    w.hi = range.at(1).get<double>();
    if (j.contains("sharp") && j["sharp"].contains(name)) {
      w.lo_sharp = j["sharp"][name].at(0).get<bool>();
      w.hi_sharp = j["sharp"][name].at(1).get<bool>();
    }
    window[name] = w;
  }
  CoeffSeries out(vars, window);
  for (const auto& term : j.at("terms")) {
    ExponentTuple e;
    for (const auto& [name, x] : term.at("exp").items()) e.set(name, x.get<double>());
    out.add_term(e, cplx(term.at("re").get<double>(), term.value("im", 0.0)));
  }
  s = std::move(out);
}

}  // namespace vertexcalc
