#include "vertexcalc/delta_calculus.hpp"

#include <cmath>
#include <optional>

#include "vertexcalc/error.hpp"

namespace vertexcalc {

namespace {

using lcplx = std::complex<long double>;

constexpr int kBinomialTable = 1024;

const std::vector<std::vector<long double>>& pascal() {
  static const auto table = [] {
    std::vector<std::vector<long double>> rows(kBinomialTable);
    for (int n = 0; n < kBinomialTable; ++n) {
      rows[n].assign(n + 1, 1.0L);
      for (int k = 1; k < n; ++k) rows[n][k] = rows[n - 1][k - 1] + rows[n - 1][k];
    }
    return rows;
  }();
  return table;
}

// C(n, k) for integer n of either sign.
long double binom(long n, long k) {
  if (k < 0) return 0.0L;
  if (n < 0) {
    const long double mag = binom(k - n - 1, k);
    return (k % 2 == 0) ? mag : -mag;
  }
  if (k > n) return 0.0L;
  if (n < kBinomialTable) return pascal()[n][k];
  return std::round(std::exp(std::lgamma(static_cast<long double>(n) + 1) - std::lgamma(static_cast<long double>(k) + 1) -
                             std::lgamma(static_cast<long double>(n - k) + 1)));
}

lcplx ipow(lcplx a, long n) {
  if (n < 0) return 1.0L / ipow(a, -n);
  lcplx out = 1.0L;
  while (n > 0) {
    if (n & 1) out *= a;
    a *= a;
    n >>= 1;
  }
  return out;
}

long double sign_pow(int sign, long e) { return (sign < 0 && (e % 2 != 0)) ? -1.0L : 1.0L; }

constexpr int kSymbols = 6;
int sym(Slot s) { return static_cast<int>(s); }

struct Affine {
  std::array<long, 4> c{};  // coefficients of (n, k, m, l)
  long c0 = 0;
};

// Exponent of every symbol as an affine function of the summation indices.
std::array<Affine, kSymbols> exponent_forms(const DeltaProductExpr& expr) {
  std::array<Affine, kSymbols> out{};
  for (int f = 0; f < 2; ++f) {
    const auto& fac = expr.factors()[f];
    const int a = 2 * f;      // n or m
    const int b = 2 * f + 1;  // k or l
    auto& p = out[sym(fac.scale)];
    p.c[a] -= 1;
    p.c0 -= 1;
    auto& u = out[sym(fac.lead)];
    u.c[a] += 1;
    u.c[b] -= 1;
    auto& v = out[sym(fac.trail)];
    v.c[b] += 1;
  }
  return out;
}

long det3(const std::array<std::array<long, 3>, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Solution family of the three exponent constraints, parameterized by one
// free nonnegative index.
struct Plan {
  int free = -1;
  std::array<int, 3> others{};
  long det = 0;
  std::array<long, 3> base{};   // det * others at phi = 0
  std::array<long, 3> slope{};  // det * d(others)/d(phi)
  std::array<Affine, kSymbols> forms{};
};

Plan make_plan(const DeltaProductExpr& expr, const Cell& cell) {
  Plan plan;
  plan.forms = exponent_forms(expr);
  const std::array<Slot, 3> formal = {Slot::Y, Slot::X1, Slot::X2};
  const std::array<long, 3> target = {-cell.r, cell.s, cell.t};
  for (int free : {1, 3}) {
    std::array<int, 3> others{};
    int j = 0;
    for (int i = 0; i < 4; ++i) {
      if (i != free) others[j++] = i;
    }
    std::array<std::array<long, 3>, 3> a{};
    std::array<long, 3> rhs{};
    std::array<long, 3> rhs_slope{};
    for (int row = 0; row < 3; ++row) {
      const auto& form = plan.forms[sym(formal[row])];
      for (int col = 0; col < 3; ++col) a[row][col] = form.c[others[col]];
      rhs[row] = target[row] - form.c0;
      rhs_slope[row] = -form.c[free];
    }
    const long d = det3(a);
    if (d == 0) continue;
    plan.free = free;
    plan.others = others;
    plan.det = d;
    for (int col = 0; col < 3; ++col) {
      auto replaced = a;
      auto replaced_slope = a;
      for (int row = 0; row < 3; ++row) {
        replaced[row][col] = rhs[row];
        replaced_slope[row][col] = rhs_slope[row];
      }
      plan.base[col] = det3(replaced);
      plan.slope[col] = det3(replaced_slope);
    }
    return plan;
  }
  throw DomainError("unsupported delta product shape: " + expr.tag());
}

struct Numbers {
  std::array<lcplx, kSymbols> value{};
};

Numbers numbers_for(const LogPoint& z1, const LogPoint& z2) {
  Numbers num;
  const cplx a = z1.value();
  const cplx b = z2.value();
  num.value[sym(Slot::Z1)] = lcplx(a.real(), a.imag());
  num.value[sym(Slot::Z2)] = lcplx(b.real(), b.imag());
  num.value[sym(Slot::Z3)] = lcplx(a.real(), a.imag()) - lcplx(b.real(), b.imag());
  return num;
}

template <typename Visitor>
void enumerate(const DeltaProductExpr& expr, const Cell& cell, const Numbers& num, int terms, Visitor&& visit) {
  const Plan plan = make_plan(expr, cell);
  std::array<long, 4> idx{};
  for (long phi = 0; phi < terms; ++phi) {
    idx[plan.free] = phi;
    bool integral = true;
    for (int c = 0; c < 3; ++c) {
      const long numer = plan.base[c] + plan.slope[c] * phi;
      if (numer % plan.det != 0) {
        integral = false;
        break;
      }
      idx[plan.others[c]] = numer / plan.det;
    }
    if (!integral || idx[1] < 0 || idx[3] < 0) {
      visit(lcplx{}, false);
      continue;
    }
    long double coeff = 1.0L;
    for (int f = 0; f < 2 && coeff != 0.0L; ++f) {
      const auto& fac = expr.factors()[f];
      const long n = idx[2 * f];
      const long k = idx[2 * f + 1];
      coeff *= binom(n, k);
      coeff *= sign_pow(fac.scale_sign, -n) * sign_pow(fac.lead_sign, n - k) * sign_pow(fac.trail_sign, k);
    }
    if (coeff == 0.0L) {
      visit(lcplx{}, false);
      continue;
    }
    lcplx term = coeff;
    for (Slot s : {Slot::Z1, Slot::Z2, Slot::Z3}) {
      const auto& form = plan.forms[sym(s)];
      long e = form.c0;
      for (int i = 0; i < 4; ++i) e += form.c[i] * idx[i];
      if (e != 0) term *= ipow(num.value[sym(s)], e);
    }
    visit(term, true);
  }
}

cplx to_cplx(lcplx z) { return {static_cast<double>(z.real()), static_cast<double>(z.imag())}; }

lcplx to_l(cplx z) { return {z.real(), z.imag()}; }

void check_distinct(const LogPoint& z1, const LogPoint& z2) {
  if (std::abs(z1.value() - z2.value()) <= 1e-300) throw PoleError();
}

// Residue of y^{r-1}(y-z1)^{-s-1}(y-z2)^{-t-1} at y = a, where the pole
// factor is (y-a)^{-d-1} and the rest is b^{e1}(y-c)^{e2} after shifting.
lcplx residue_at_simple(long d, lcplx a, long e_first, lcplx c, long e_second) {
  // (1/d!) d^d/dy^d [ y^{e_first} (y - c)^{e_second} ] at y = a
  if (d < 0) return 0.0L;
  lcplx sum = 0.0L;
  for (long j = 0; j <= d; ++j) {
    sum += binom(e_first, j) * ipow(a, e_first - j) * binom(e_second, d - j) * ipow(a - c, e_second - d + j);
  }
  return sum;
}

lcplx residue_origin(int r, int s, int t, lcplx z1, lcplx z2) {
  if (r > 0) return 0.0L;
  const long q = -r;
  const long a = -s - 1;
  const long b = -t - 1;
  lcplx sum = 0.0L;
  for (long j = 0; j <= q; ++j) {
    sum += binom(a, j) * ipow(-z1, a - j) * binom(b, q - j) * ipow(-z2, b - q + j);
  }
  return sum;
}

}  // namespace

std::string DeltaFactor::to_string() const {
  auto name = [](Slot s) -> std::string {
    switch (s) {
      case Slot::Y: return "x0^-1";
      case Slot::X1: return "x1";
      case Slot::X2: return "x2";
      case Slot::Z1: return "z1";
      case Slot::Z2: return "z2";
      case Slot::Z3: return "(z1-z2)";
    }
    return "?";
  };
  std::string num = (lead_sign < 0 ? "-" : "") + name(lead) + (trail_sign < 0 ? " - " : " + ") + name(trail);
  std::string den = (scale_sign < 0 ? "-" : "") + name(scale);
  return name(scale) + "^-1 delta((" + num + ")/(" + den + "))";
}

DeltaProductExpr DeltaProductExpr::lookup(Identity id, Side side) {
  using S = Slot;
  auto f = [](S p, int sg, S u, int al, S v, int be) { return DeltaFactor{p, sg, u, al, v, be}; };
  const bool left = side == Side::Left;
  switch (id) {
    case Identity::FullSum:
      return left ? DeltaProductExpr(id, side, {f(S::X1, 1, S::Y, 1, S::Z1, -1), f(S::X2, 1, S::Y, 1, S::Z2, -1)})
                  : DeltaProductExpr(id, side, {f(S::X2, 1, S::Y, 1, S::Z2, -1), f(S::X1, 1, S::X2, 1, S::Z3, -1)});
    case Identity::PoleZ1:
      return left ? DeltaProductExpr(id, side, {f(S::Z1, 1, S::Y, 1, S::X1, -1), f(S::X2, 1, S::Y, 1, S::Z2, -1)})
                  : DeltaProductExpr(id, side, {f(S::Z2, 1, S::Y, 1, S::X2, -1), f(S::Z3, 1, S::X2, 1, S::X1, -1)});
    case Identity::PoleOrigin:
      return left ? DeltaProductExpr(id, side, {f(S::X1, -1, S::Z1, 1, S::Y, -1), f(S::X2, -1, S::Z2, 1, S::Y, -1)})
                  : DeltaProductExpr(id, side, {f(S::X2, -1, S::Z2, 1, S::Y, -1), f(S::X1, 1, S::X2, 1, S::Z3, -1)});
    case Identity::PoleZ2:
      return left ? DeltaProductExpr(id, side, {f(S::X1, -1, S::Z1, 1, S::Y, -1), f(S::Z2, 1, S::Y, 1, S::X2, -1)})
                  : DeltaProductExpr(id, side, {f(S::Z2, 1, S::Y, 1, S::X2, -1), f(S::X1, -1, S::Z3, 1, S::X2, -1)});
  }
  throw DomainError("malformed identity tag");
}

Identity parse_identity(std::string_view tag) {
  if (tag.starts_with("14.")) tag.remove_prefix(3);
  if (tag == "8") return Identity::FullSum;
  if (tag == "9") return Identity::PoleZ1;
  if (tag == "10") return Identity::PoleOrigin;
  if (tag == "11") return Identity::PoleZ2;
  throw DomainError("malformed identity tag: " + std::string(tag));
}

std::string identity_name(Identity id) { return "14." + std::to_string(static_cast<int>(id)); }

std::string side_name(Side side) { return side == Side::Left ? "L" : "R"; }

DeltaProductExpr DeltaProductExpr::parse(std::string_view tag) {
  if (tag.empty()) throw DomainError("malformed tag");
  const char last = tag.back();
  if (last != 'L' && last != 'R') throw DomainError("malformed tag: " + std::string(tag));
  tag.remove_suffix(1);
  return lookup(parse_identity(tag), last == 'L' ? Side::Left : Side::Right);
}

std::string DeltaProductExpr::tag() const { return identity_name(id_) + side_name(side_); }

std::string DeltaProductExpr::to_string() const {
  return factors_[0].to_string() + " * " + factors_[1].to_string();
}

std::vector<Cell> Grid::cells() const {
  std::vector<Cell> out;
  for (int r = r_lo; r <= r_hi; ++r)
    for (int s = s_lo; s <= s_hi; ++s)
      for (int t = t_lo; t <= t_hi; ++t) out.push_back({r, s, t});
  return out;
}

bool side_region_ok(Side side, const LogPoint& z1, const LogPoint& z2) {
  const double a1 = z1.modulus();
  const double a2 = z2.modulus();
  const double a3 = std::abs(z1.value() - z2.value());
  return side == Side::Left ? (a1 > a2 && a2 > 0.0) : (a2 > a3 && a3 > 0.0);
}

PartialSum side_coefficient(const DeltaProductExpr& expr, const Cell& cell, const LogPoint& z1, const LogPoint& z2,
                            int terms, bool enforce_region) {
  if (enforce_region && !side_region_ok(expr.side(), z1, z2)) throw RegionError("wrong region for this expansion");
  const Numbers num = numbers_for(z1, z2);
  lcplx sum = 0.0L;
  PartialSum out;
  enumerate(expr, cell, num, terms, [&](lcplx term, bool valid) {
    ++out.terms_used;
    if (!valid) return;
    sum += term;
    ++out.nonzero_terms;
    out.last_term = static_cast<double>(std::abs(term));
  });
  out.value = to_cplx(sum);
  return out;
}

std::vector<cplx> side_summands(const DeltaProductExpr& expr, const Cell& cell, const LogPoint& z1, const LogPoint& z2,
                                int terms) {
  std::vector<cplx> out;
  enumerate(expr, cell, numbers_for(z1, z2), terms, [&](lcplx term, bool) { out.push_back(to_cplx(term)); });
  return out;
}

cplx coeff_series_product_region(int r, int s, int t, const LogPoint& z1, const LogPoint& z2, int terms) {
  if (!side_region_ok(Side::Left, z1, z2)) throw RegionError("wrong region for this expansion");
  if (s < 0) return 0.0;
  const lcplx a = to_l(z1.value());
  const lcplx b = to_l(z2.value());
  lcplx sum = 0.0L;
  for (long l = 0; l < terms; ++l) {
    const long e = static_cast<long>(r) - t - 2 - l;
    sum += binom(-t - 1, l) * sign_pow(-1, l) * ipow(b, l) * binom(e, s) * ipow(a, e - s);
  }
  return to_cplx(sum);
}

cplx coeff_series_iterate_region(int r, int s, int t, const LogPoint& z1, const LogPoint& z2, int terms) {
  if (!side_region_ok(Side::Right, z1, z2)) throw RegionError("wrong region for this expansion");
  if (s < 0) return 0.0;
  const lcplx b = to_l(z2.value());
  const lcplx d = to_l(z1.value()) - b;
  lcplx sum = 0.0L;
  for (long k = 0; k < terms; ++k) {
    const long e = k - t - 1;
    sum += binom(r - 1, k) * ipow(b, r - 1 - k) * binom(e, s) * ipow(d, e - s);
  }
  return to_cplx(sum);
}

cplx closed_form_coeff(int r, int s, int t, const LogPoint& z1, const LogPoint& z2) {
  check_distinct(z1, z2);
  const lcplx a = to_l(z1.value());
  const lcplx b = to_l(z2.value());
  return to_cplx(residue_at_simple(s, a, r - 1, b, -t - 1));
}

cplx closed_form_coeff(Identity id, const Cell& cell, const LogPoint& z1, const LogPoint& z2) {
  check_distinct(z1, z2);
  const lcplx a = to_l(z1.value());
  const lcplx b = to_l(z2.value());
  const auto at_z1 = [&] { return residue_at_simple(cell.s, a, cell.r - 1, b, -cell.t - 1); };
  const auto at_z2 = [&] { return residue_at_simple(cell.t, b, cell.r - 1, a, -cell.s - 1); };
  const auto at_0 = [&] { return residue_origin(cell.r, cell.s, cell.t, a, b); };
  switch (id) {
    case Identity::FullSum: return to_cplx(at_z1() + at_z2() + at_0());
    case Identity::PoleZ1: return to_cplx(at_z1());
    case Identity::PoleOrigin: return to_cplx(at_0());
    case Identity::PoleZ2: return to_cplx(at_z2());
  }
  throw DomainError("malformed identity tag");
}

CoeffSeries expand_side(const DeltaProductExpr& expr, const LogPoint& z1, const LogPoint& z2, const Grid& grid,
                        const std::map<std::string, WindowRange>& window, int terms) {
  CoeffSeries out({"x0", "x1", "x2"}, window);
  for (const Cell& c : grid.cells()) {
    const ExponentTuple e{{"x0", c.r}, {"x1", c.s}, {"x2", c.t}};
    const auto key = out.key_of(e);
    if (!out.tracks(key)) throw UntrackedExponent();
    out.add_key(key, side_coefficient(expr, c, z1, z2, terms, false).value);
  }
  return out;
}

}  // namespace vertexcalc
