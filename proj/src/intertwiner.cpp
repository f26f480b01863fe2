#include <cmath>
#include <mutex>
#include <sstream>
#include <tuple>

#include "vertexcalc/error.hpp"
#include "vertexcalc/formal_series.hpp"
#include "vertexcalc/heisenberg.hpp"

namespace vertexcalc {

namespace {

constexpr double kMomentumTol = 1e-12;

bool same_momentum(double a, double b) { return std::abs(a - b) <= kMomentumTol; }

double binom_int(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

struct Intertwiner::Node {
  virtual ~Node() = default;
  virtual double first() const = 0;
  virtual double second() const = 0;
  virtual FormalFock apply(const FockVector& wa, const FockVector& wb, int cap) const = 0;
  virtual std::string describe() const = 0;
};

namespace {

using StateMap = std::map<Partition, cplx>;

// Normal-ordered exponential realization and its descendants.
class BaseNode final : public Intertwiner::Node {
 public:
  BaseNode(double pa, double pb) : pa_(pa), pb_(pb) {}

  double first() const override { return pa_; }
  double second() const override { return pb_; }
  std::string describe() const override {
    std::ostringstream os;
    os << "Y[" << pa_ << "," << pb_ << "]";
    return os.str();
  }

  FormalFock apply(const FockVector& wa, const FockVector& wb, int cap) const override {
    FormalFock out;
    out.p = pa_ + pb_;
    if (wa.is_zero() || wb.is_zero() || cap < 0) return out;
    if (!same_momentum(wa.momentum(), pa_) || !same_momentum(wb.momentum(), pb_))
      throw DomainError("momentum mismatch");
    for (const auto& [lam, ca] : wa.terms()) {
      for (const auto& [nu, cb] : wb.terms()) {
        const double shift = pa_ * pb_ - level_of(lam) - level_of(nu);
        for (const auto& [o, c] : state(lam, nu, cap)) out.add(o, shift + level_of(o), ca * cb * c);
      }
    }
    return out;
  }

 private:
  using Key = std::tuple<Partition, Partition, int>;

  // Output of Y(a_{-lam}|pa>, x) a_{-nu}|pb> up to level cap; the exponent of each
  // output state is pa*pb + |out| - |lam| - |nu|.
  const StateMap& state(const Partition& lam, const Partition& nu, int cap) const {
    Key key{lam, nu, cap};
    {
      const std::lock_guard lock(mutex_);
      const auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    StateMap computed = lam.empty() ? lowest(nu, cap) : descendant(lam, nu, cap);
    const std::lock_guard lock(mutex_);
    return cache_.emplace(std::move(key), std::move(computed)).first->second;
  }

  StateMap lowest(const Partition& nu, int cap) const {
    StateMap out;
    if (cap < 0) return out;
    std::vector<std::pair<int, int>> groups;  // (part, multiplicity)
    for (int part : nu) {
      if (groups.empty() || groups.back().first != part) groups.emplace_back(part, 0);
      ++groups.back().second;
    }
    // E^+ keeps j copies of each part; E^- creates rho.
    Partition kept;
    auto rec = [&](auto&& self, std::size_t g, int size, cplx coeff) -> void {
      if (g == groups.size()) {
        for (const auto& [rho, c] : creation(cap - size)) {
          Partition o = kept;
          for (int part : rho) o = with_part(o, part);
          out[o] += coeff * c;
        }
        return;
      }
      const auto [part, m] = groups[g];
      for (int j = 0; j <= m && size + j * part <= cap; ++j) {
        const int dropped = m - j;
        if (dropped > 0 && pa_ == 0.0) continue;
        const cplx c = coeff * binom_int(m, j) * std::pow(-pa_, dropped);
        for (int i = 0; i < j; ++i) kept.push_back(part);
        self(self, g + 1, size + j * part, c);
        kept.resize(kept.size() - j);
      }
    };
    rec(rec, 0, 0, 1.0);
    return out;
  }

  // Coefficients of exp(sum_n pa a_{-n} x^n / n) up to level cap.
  const std::vector<std::pair<Partition, double>>& creation(int cap) const {
    {
      const std::lock_guard lock(mutex_);
      const auto it = creation_.find(cap);
      if (it != creation_.end()) return it->second;
    }
    std::vector<std::pair<Partition, double>> rows;
    for (const auto& rho : (pa_ == 0.0 ? std::vector<Partition>{{}} : partitions_up_to(cap))) {
      double c = 1.0;
      std::size_t i = 0;
      while (i < rho.size()) {
        std::size_t j = i;
        while (j < rho.size() && rho[j] == rho[i]) ++j;
        const int m = static_cast<int>(j - i);
        c *= std::pow(pa_ / rho[i], m) / factorial(m);
        i = j;
      }
      rows.emplace_back(rho, c);
    }
    const std::lock_guard lock(mutex_);
    return creation_.emplace(cap, std::move(rows)).first->second;
  }

  // Y(a_{-n} w, x) = sum_j C(n+j-1, j) [x^j a_{-n-j} Y(w, x) - (-1)^n x^{-n-j} Y(w, x) a_j].
  StateMap descendant(const Partition& lam, const Partition& nu, int cap) const {
    StateMap out;
    const int n = lam.front();
    const Partition rest(lam.begin() + 1, lam.end());
    for (int j = 0; n + j <= cap; ++j) {
      const double c = binom_int(n + j - 1, j);
      for (const auto& [o, v] : state(rest, nu, cap - n - j)) out[with_part(o, n + j)] += c * v;
    }
    const double sign = (n % 2 == 0) ? -1.0 : 1.0;
    if (pb_ != 0.0) {
      for (const auto& [o, v] : state(rest, nu, cap)) out[o] += sign * pb_ * v;
    }
    int prev = 0;
    for (int part : nu) {
      if (part == prev) continue;
      prev = part;
      const double c = sign * binom_int(n + part - 1, part) * part * multiplicity(nu, part);
      for (const auto& [o, v] : state(rest, without_part(nu, part), cap)) out[o] += c * v;
    }
    for (auto it = out.begin(); it != out.end();) it = it->second == cplx{} ? out.erase(it) : std::next(it);
    return out;
  }

  double pa_;
  double pb_;
  mutable std::mutex mutex_;
  mutable std::map<Key, StateMap> cache_;
  mutable std::map<int, std::vector<std::pair<Partition, double>>> creation_;
};

// Omega_{-1}(Y)(u, x) w = e^{x L(-1)} Y(w, e^{-pi i} x) u; variant 0 rotates by +1.
class OmegaNode final : public Intertwiner::Node {
 public:
  OmegaNode(std::shared_ptr<const Intertwiner::Node> inner, int variant, long inner_turns)
      : inner_(std::move(inner)), variant_(variant), inner_turns_(inner_turns) {}

  double first() const override { return inner_->second(); }
  double second() const override { return inner_->first(); }
  std::string describe() const override {
    std::string in = inner_->describe();
    if (inner_turns_ != 0) in += "@" + std::to_string(inner_turns_);
    return "Omega" + std::to_string(variant_) + "(" + in + ")";
  }

  FormalFock apply(const FockVector& u, const FockVector& w, int cap) const override {
    const FormalFock swapped = inner_->apply(w, u, cap);
    const double turns = static_cast<double>(inner_turns_ + (variant_ == -1 ? -1 : 1));
    // One e^{x L(-1)} chain per exponent of x.
    std::map<double, FockVector> by_exponent;
    for (const auto& [key, c] : swapped.terms) {
      const auto& [parts, e] = key;
      by_exponent.try_emplace(e, swapped.p).first->second.add(parts, c * half_turn_phase(turns * e));
    }
    FormalFock out;
    out.p = swapped.p;
    for (auto& [e, cur] : by_exponent) {
      for (int j = 0; !cur.is_zero(); ++j) {
        if (j > 0) {
          const FockVector raised = virasoro(-1, cur);
          FockVector next(swapped.p);
          for (const auto& [o, v] : raised.terms())
            if (level_of(o) <= cap) next.add(o, v / static_cast<double>(j));
          cur = std::move(next);
        }
        for (const auto& [o, v] : cur.terms()) out.add(o, e + j, v);
      }
    }
    return out;
  }

 private:
  std::shared_ptr<const Intertwiner::Node> inner_;
  int variant_;
  long inner_turns_;
};

}  // namespace

Intertwiner Intertwiner::base(double pa, double pb) {
  if (!std::isfinite(pa) || !std::isfinite(pb)) throw DomainError("momenta must be finite");
  return Intertwiner(std::make_shared<BaseNode>(pa, pb));
}

Intertwiner Intertwiner::omega(int variant) const {
  if (variant != -1 && variant != 0) throw DomainError("omega variant must be -1 or 0");
  return Intertwiner(std::make_shared<OmegaNode>(node_, variant, half_turns_));
}

Intertwiner Intertwiner::rotated(long k) const { return Intertwiner(node_, half_turns_ + k); }

double Intertwiner::first_momentum() const noexcept { return node_->first(); }
double Intertwiner::second_momentum() const noexcept { return node_->second(); }

std::string Intertwiner::describe() const {
  return half_turns_ == 0 ? node_->describe() : node_->describe() + "@" + std::to_string(half_turns_);
}

FormalFock Intertwiner::apply(const FockVector& wa, const FockVector& wb, int cap) const {
  return node_->apply(wa, wb, cap);
}

MatrixCoeff intertwiner_matrix_coeff(const Intertwiner& y, const DualVector& wprime, const FockVector& w1,
                                     const FockVector& w2, const LogPoint& x, int level) {
  if (w1.max_level() > level || w2.max_level() > level || wprime.max_level() > level)
    throw InsufficientTruncation("input level exceeds the truncation level");
  if (!same_momentum(w1.momentum(), y.first_momentum()) || !same_momentum(w2.momentum(), y.second_momentum()) ||
      !same_momentum(wprime.momentum(), w1.momentum() + w2.momentum()))
    return {cplx{}, false};
  const FormalFock f = y.apply(w1, w2, wprime.max_level());
  const LogPoint xr = x.rotated(y.half_turns());
  cplx sum;
  for (const auto& [key, c] : f.terms) {
    const auto it = wprime.terms().find(key.first);
    if (it != wprime.terms().end()) sum += it->second * c * xr.pow(key.second);
  }
  return {sum, true};
}

}  // namespace vertexcalc
