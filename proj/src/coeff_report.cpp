#include <algorithm>
#include <cmath>
#include <iomanip>

#include "vertexcalc/delta_calculus.hpp"
#include "vertexcalc/error.hpp"
#include "vertexcalc/parallel.hpp"

namespace vertexcalc {

bool CoeffReport::verified() const { return failures() == 0; }

double CoeffReport::max_abs_err(Side side) const {
  double worst = 0.0;
  for (const auto& row : rows)
    if (row.side == side) worst = std::max(worst, row.abs_err);
  return worst;
}

double CoeffReport::max_rel_err(Side side) const {
  double worst = 0.0;
  for (const auto& row : rows)
    if (row.side == side) worst = std::max(worst, row.rel_err);
  return worst;
}

std::size_t CoeffReport::failures() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.converged; }));
}

CoeffReport verify_identity(Identity id, const LogPoint& z1, const LogPoint& z2, const Grid& grid, int terms,
                            double tol) {
  CoeffReport report;
  report.id = id;
  report.z1 = z1;
  report.z2 = z2;
  report.terms = terms;
  report.tol = tol;
  const auto cells = grid.cells();
  const std::array<DeltaProductExpr, 2> sides = {DeltaProductExpr::lookup(id, Side::Left),
                                                 DeltaProductExpr::lookup(id, Side::Right)};
  report.rows.resize(2 * cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    const Cell& cell = cells[i];
    const cplx closed = closed_form_coeff(id, cell, z1, z2);
    for (std::size_t j = 0; j < 2; ++j) {
      const auto& expr = sides[j];
      const bool region = side_region_ok(expr.side(), z1, z2);
      const PartialSum sum = side_coefficient(expr, cell, z1, z2, terms, false);
      CoeffReportRow& row = report.rows[2 * i + j];
      row.cell = cell;
      row.side = expr.side();
      row.value = sum.value;
      row.closed = closed;
      row.abs_err = std::abs(sum.value - closed);
      row.rel_err = std::abs(closed) > 0.0 ? row.abs_err / std::abs(closed) : row.abs_err;
      row.terms = sum.terms_used;
      row.converged = region && std::isfinite(row.abs_err) && row.abs_err <= tol;
      if (!region) row.note = "region violated";
    }
  });
  return report;
}

void to_json(nlohmann::json& j, const CoeffReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json e = {{"r", row.cell.r},
                        {"s", row.cell.s},
                        {"t", row.cell.t},
                        {"side", side_name(row.side)},
                        {"value", {row.value.real(), row.value.imag()}},
                        {"closed", {row.closed.real(), row.closed.imag()}},
                        {"abs_err", row.abs_err},
                        {"rel_err", row.rel_err},
                        {"terms", row.terms},
                        {"converged", row.converged}};
    if (!row.note.empty()) e["note"] = row.note;
    rows.push_back(std::move(e));
  }
  j = {{"identity", identity_name(r.id)},
       {"z1", r.z1},
       {"z2", r.z2},
       {"terms", r.terms},
       {"tol", r.tol},
       {"verified", r.verified()},
       {"failures", r.failures()},
       {"max_abs_err", {{"L", r.max_abs_err(Side::Left)}, {"R", r.max_abs_err(Side::Right)}}},
       {"rows", std::move(rows)}};
}

void write_csv_header(std::ostream& os) {
  os << "r,s,t,side,value_re,value_im,closed_re,closed_im,abs_err,terms,converged\n";
}

void write_csv(std::ostream& os, const CoeffReport& r, bool header) {
  if (header) write_csv_header(os);
  const auto flags = os.flags();
  os << std::setprecision(17);
  for (const auto& row : r.rows) {
    os << row.cell.r << ',' << row.cell.s << ',' << row.cell.t << ',' << side_name(row.side) << ','
       << row.value.real() << ',' << row.value.imag() << ',' << row.closed.real() << ',' << row.closed.imag() << ','
       << row.abs_err << ',' << row.terms << ',' << (row.converged ? "true" : "false") << '\n';
  }
  os.flags(flags);
}

}  // namespace vertexcalc
