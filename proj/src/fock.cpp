#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "vertexcalc/error.hpp"
#include "vertexcalc/formal_series.hpp"
#include "vertexcalc/heisenberg.hpp"

namespace vertexcalc {

int level_of(const Partition& p) {
  int n = 0;
  for (int part : p) n += part;
  return n;
}

std::vector<Partition> partitions_of(int n) {
  std::vector<Partition> out;
  if (n < 0) return out;
  Partition cur;
  std::function<void(int, int)> rec = [&](int remaining, int max_part) {
    if (remaining == 0) {
      out.push_back(cur);
      return;
    }
    for (int k = std::min(remaining, max_part); k >= 1; --k) {
      cur.push_back(k);
      rec(remaining - k, k);
      cur.pop_back();
    }
  };
  rec(n, n);
  return out;
}

std::vector<Partition> partitions_up_to(int level) {
  std::vector<Partition> out;
  for (int n = 0; n <= level; ++n) {
    auto ps = partitions_of(n);
    out.insert(out.end(), ps.begin(), ps.end());
  }
  return out;
}

std::string partition_id(const Partition& p) {
  std::string s = "[";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(p[i]);
  }
  return s + "]";
}

Partition parse_partition(const std::string& id) {
  if (id.size() < 2 || id.front() != '[' || id.back() != ']') throw DomainError("malformed partition: " + id);
  Partition out;
  std::stringstream ss(id.substr(1, id.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int part = 0;
    try {
      part = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw DomainError("malformed partition: " + id);
    }
    if (used != item.size() || part <= 0) throw DomainError("malformed partition: " + id);
    out.push_back(part);
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

int multiplicity(const Partition& p, int part) { return static_cast<int>(std::count(p.begin(), p.end(), part)); }

Partition with_part(Partition p, int part) {
  p.insert(std::upper_bound(p.begin(), p.end(), part, std::greater<>()), part);
  return p;
}

Partition without_part(Partition p, int part) {
  const auto it = std::find(p.begin(), p.end(), part);
  if (it == p.end()) throw DomainError("part not present");
  p.erase(it);
  return p;
}

double FockState::weight() const { return 0.5 * p * p + level(); }

double weight(const FockState& s) { return s.weight(); }

FockVector FockVector::basis(double p, Partition parts, cplx c) {
  std::sort(parts.begin(), parts.end(), std::greater<>());
  FockVector v(p);
  v.add(parts, c);
  return v;
}

cplx FockVector::coeff(const Partition& parts) const {
  const auto it = terms_.find(parts);
  return it == terms_.end() ? cplx{} : it->second;
}

int FockVector::max_level() const {
  int m = 0;
  for (const auto& [parts, c] : terms_) m = std::max(m, level_of(parts));
  return m;
}

void FockVector::add(const Partition& parts, cplx c) {
  if (c == cplx{}) return;
  auto [it, inserted] = terms_.emplace(parts, c);
  if (!inserted) {
    it->second += c;
    if (it->second == cplx{}) terms_.erase(it);
  }
}

FockVector& FockVector::operator+=(const FockVector& o) {
  if (o.is_zero()) return *this;
  if (!is_zero() && p_ != o.p_) throw DomainError("momentum mismatch");
  p_ = o.p_;
  for (const auto& [parts, c] : o.terms_) add(parts, c);
  return *this;
}

FockVector& FockVector::operator*=(cplx c) {
  if (c == cplx{}) {
    terms_.clear();
    return *this;
  }
  for (auto& [parts, v] : terms_) v *= c;
  return *this;
}

DualVector DualVector::basis(double p, Partition parts, cplx c) {
  std::sort(parts.begin(), parts.end(), std::greater<>());
  DualVector v(p);
  v.add(parts, c);
  return v;
}

int DualVector::max_level() const {
  int m = 0;
  for (const auto& [parts, c] : terms_) m = std::max(m, level_of(parts));
  return m;
}

void DualVector::add(const Partition& parts, cplx c) {
  if (c == cplx{}) return;
  auto [it, inserted] = terms_.emplace(parts, c);
  if (!inserted) {
    it->second += c;
    if (it->second == cplx{}) terms_.erase(it);
  }
}

DualVector& DualVector::operator+=(const DualVector& o) {
  if (o.is_zero()) return *this;
  if (!is_zero() && p_ != o.p_) throw DomainError("momentum mismatch");
  p_ = o.p_;
  for (const auto& [parts, c] : o.terms_) add(parts, c);
  return *this;
}

DualVector& DualVector::operator*=(cplx c) {
  if (c == cplx{}) {
    terms_.clear();
    return *this;
  }
  for (auto& [parts, v] : terms_) v *= c;
  return *this;
}

cplx DualVector::pair(const FockVector& w) const {
  if (w.momentum() != p_) return {};
  cplx sum;
  for (const auto& [parts, c] : terms_) sum += c * w.coeff(parts);
  return sum;
}

FockVector grade_project(const FockVector& w, double n) {
  FockVector out(w.momentum());
  const double base = 0.5 * w.momentum() * w.momentum();
  for (const auto& [parts, c] : w.terms())
    if (std::abs(base + level_of(parts) - n) < 1e-9) out.add(parts, c);
  return out;
}

FockVector mode(int n, const FockVector& w) {
  FockVector out(w.momentum());
  if (n == 0) return w.momentum() * FockVector(w);
  for (const auto& [parts, c] : w.terms()) {
    if (n < 0) {
      out.add(with_part(parts, -n), c);
    } else {
      const int m = multiplicity(parts, n);
      if (m > 0) out.add(without_part(parts, n), c * static_cast<double>(n * m));
    }
  }
  return out;
}

DualVector mode_transpose(int n, const DualVector& d) {
  DualVector out(d.momentum());
  if (n == 0) {
    out += d;
    out *= d.momentum();
    return out;
  }
  for (const auto& [parts, c] : d.terms()) {
    if (n < 0) {
      if (multiplicity(parts, -n) > 0) out.add(without_part(parts, -n), c);
    } else {
      out.add(with_part(parts, n), c * static_cast<double>(n * (multiplicity(parts, n) + 1)));
    }
  }
  return out;
}

FockVector virasoro(int n, const FockVector& w) {
  FockVector out(w.momentum());
  const int h = std::max(w.max_level(), 0) + std::abs(n);
  for (int i = n - h; i <= h; ++i) {
    const int j = n - i;
    if (j < n - h || j > h) continue;
    const int hi = std::max(i, j);
    const int lo = std::min(i, j);
    FockVector part = mode(lo, mode(hi, w));
    out += 0.5 * part;
  }
  return out;
}

DualVector virasoro_transpose(int n, const DualVector& d) {
  DualVector out(d.momentum());
  const int h = std::max(d.max_level() + std::max(n, 0), 0) + std::abs(n);
  for (int i = n - h; i <= h; ++i) {
    const int j = n - i;
    if (j < n - h || j > h) continue;
    const int hi = std::max(i, j);
    const int lo = std::min(i, j);
    DualVector part = mode_transpose(hi, mode_transpose(lo, d));
    part *= 0.5;
    out += part;
  }
  return out;
}

FockVector exp_l_minus1(cplx x, const FockVector& w, int order) {
  FockVector out = w;
  FockVector cur = w;
  cplx scale = 1.0;
  for (int j = 1; j <= order; ++j) {
    cur = virasoro(-1, cur);
    scale *= x / static_cast<double>(j);
    out += scale * FockVector(cur);
  }
  return out;
}

void FormalFock::add(const Partition& parts, double exponent, cplx c) {
  if (c == cplx{}) return;
  terms[{parts, snap_exponent(exponent)}] += c;
}

cplx pair_evaluated(const DualVector& d, const FormalFock& f, const LogPoint& x) {
  if (std::abs(d.momentum() - f.p) > 1e-12) return {};
  cplx sum;
  for (const auto& [key, c] : f.terms) {
    const auto it = d.terms().find(key.first);
    if (it != d.terms().end()) sum += it->second * c * x.pow(key.second);
  }
  return sum;
}

FockVector FormalFock::evaluate(const LogPoint& x) const {
  FockVector out(p);
  for (const auto& [key, c] : terms) out.add(key.first, c * x.pow(key.second));
  return out;
}

FockVector FormalFock::evaluate_level(const LogPoint& x, int level) const {
  FockVector out(p);
  for (const auto& [key, c] : terms)
    if (level_of(key.first) == level) out.add(key.first, c * x.pow(key.second));
  return out;
}

}  // namespace vertexcalc
