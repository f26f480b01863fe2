#pragma once

#include <array>
#include <compare>
#include <complex>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vertexcalc/branch_arith.hpp"
#include "vertexcalc/formal_series.hpp"

namespace vertexcalc {

enum class Identity { FullSum = 8, PoleZ1 = 9, PoleOrigin = 10, PoleZ2 = 11 };
enum class Side { Left, Right };

// Symbols occurring in delta arguments. Y stands for x0^{-1}; Z3 for z1 - z2.
enum class Slot { Y, X1, X2, Z1, Z2, Z3 };

// P^{-1} delta((a*U + b*V) / (sigma*P)), expanded in nonnegative powers of V.
struct DeltaFactor {
  Slot scale;
  int scale_sign;
  Slot lead;
  int lead_sign;
  Slot trail;
  int trail_sign;

  std::string to_string() const;
};

class DeltaProductExpr {
 public:
  static DeltaProductExpr lookup(Identity id, Side side);
  static DeltaProductExpr parse(std::string_view tag);  // "14.9L", "14.10R", ...

  Identity identity() const noexcept { return id_; }
  Side side() const noexcept { return side_; }
  const std::array<DeltaFactor, 2>& factors() const noexcept { return factors_; }
  std::string tag() const;
  std::string to_string() const;

 private:
  DeltaProductExpr(Identity id, Side side, std::array<DeltaFactor, 2> f) : id_(id), side_(side), factors_(f) {}

  Identity id_;
  Side side_;
  std::array<DeltaFactor, 2> factors_;
};

Identity parse_identity(std::string_view tag);  // "14.9" or "9"
std::string identity_name(Identity id);
std::string side_name(Side side);

// Coefficient position: exponents of x0, x1, x2.
struct Cell {
  int r = 0;
  int s = 0;
  int t = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct Grid {
  int r_lo = -3, r_hi = 3;
  int s_lo = -3, s_hi = 3;
  int t_lo = -3, t_hi = 3;

  static Grid cube(int half) { return {-half, half, -half, half, -half, half}; }
  std::vector<Cell> cells() const;
};

struct PartialSum {
  cplx value;
  int terms_used = 0;     // free-index steps taken
  int nonzero_terms = 0;  // summands that contributed
  double last_term = 0.0; // modulus of the final summand
};

// Whether the side's expansion converges at (z1, z2).
bool side_region_ok(Side side, const LogPoint& z1, const LogPoint& z2);

// Partial sum of the side's coefficient at the cell, over `terms` steps of the free index.
PartialSum side_coefficient(const DeltaProductExpr& expr, const Cell& cell, const LogPoint& z1, const LogPoint& z2,
                            int terms, bool enforce_region = true);

// Every summand of the same partial sum, in enumeration order.
std::vector<cplx> side_summands(const DeltaProductExpr& expr, const Cell& cell, const LogPoint& z1, const LogPoint& z2,
                                int terms);

cplx coeff_series_product_region(int r, int s, int t, const LogPoint& z1, const LogPoint& z2, int terms);
cplx coeff_series_iterate_region(int r, int s, int t, const LogPoint& z1, const LogPoint& z2, int terms);

// (1/s!) d^s/dz1^s ((z1 - z2)^{-t-1} z1^{r-1}).
cplx closed_form_coeff(int r, int s, int t, const LogPoint& z1, const LogPoint& z2);
cplx closed_form_coeff(Identity id, const Cell& cell, const LogPoint& z1, const LogPoint& z2);

CoeffSeries expand_side(const DeltaProductExpr& expr, const LogPoint& z1, const LogPoint& z2, const Grid& grid,
                        const std::map<std::string, WindowRange>& window, int terms);

struct CoeffReportRow {
  Cell cell;
  Side side = Side::Left;
  cplx value;
  cplx closed;
  double abs_err = 0.0;
  double rel_err = 0.0;
  int terms = 0;
  bool converged = false;
  std::string note;
};

struct CoeffReport {
  Identity id = Identity::PoleZ1;
  LogPoint z1;
  LogPoint z2;
  int terms = 0;
  double tol = 0.0;
  std::vector<CoeffReportRow> rows;

  bool verified() const;
  double max_abs_err(Side side) const;
  double max_rel_err(Side side) const;
  std::size_t failures() const;
};

CoeffReport verify_identity(Identity id, const LogPoint& z1, const LogPoint& z2, const Grid& grid, int terms,
                            double tol);

void to_json(nlohmann::json& j, const CoeffReport& r);
void write_csv(std::ostream& os, const CoeffReport& r, bool header = true);
void write_csv_header(std::ostream& os);

}  // namespace vertexcalc
