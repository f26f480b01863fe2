// One PASS/FAIL line per acceptance criterion; `--criterion N` runs a single one.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "vertexcalc/delta_calculus.hpp"
#include "vertexcalc/dual_actions.hpp"
#include "vertexcalc/error.hpp"
#include "vertexcalc/expansion_analysis.hpp"
#include "vertexcalc/heisenberg.hpp"

using namespace vertexcalc;

namespace {

// Pinned tolerances and budgets.
constexpr double kDeltaAbsTol = 1e-8;
constexpr int kDeltaTerms = 400;
constexpr double kDeltaSeconds = 10.0;
constexpr int kPlantTrials = 100;
constexpr double kPlantCoeffTol = 1e-6;
constexpr double kOmegaTol = 1e-10;
constexpr int kOmegaLevel = 10;
constexpr int kOmegaInputLevel = 3;
constexpr double kAssocTol = 1e-6;
constexpr int kAssocLevel = 12;
constexpr int kAssocTupleLevel = 2;
constexpr double kAssocSeconds = 60.0;
constexpr double kFitExponentTol = 1e-9;
constexpr double kTauTol = 1e-6;
constexpr double kReductionTol = 1e-12;
constexpr int kTauLambdaLevel = 8;
constexpr int kTauInnerLevel = 12;
constexpr std::size_t kMaxSupport = 2;
constexpr int kSupportInputLevel = 4;
constexpr int kSupportOutputLevel = 16;
constexpr double kCutoffFactor = 2.0;
constexpr double kRoundoff = 1e-13;

const LogPoint kZ1 = principal(1.0);
const LogPoint kZ2 = principal(0.9);
const std::array<std::array<double, 3>, 2> kAssocMomenta = {{{1, 1, 0}, {0.5, 0.5, 1}}};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

Outcome delta_identities() {
  const auto t0 = std::chrono::steady_clock::now();
  bool all = true;
  std::string detail;
  for (Identity id : {Identity::FullSum, Identity::PoleZ1, Identity::PoleOrigin, Identity::PoleZ2}) {
    const auto rep = verify_identity(id, kZ1, kZ2, Grid::cube(3), kDeltaTerms, kDeltaAbsTol);
    all = all && rep.verified();
    detail += identity_name(id) + " L=" + fmt(rep.max_abs_err(Side::Left)) + " R=" + fmt(rep.max_abs_err(Side::Right)) +
              " (rel " + fmt(std::max(rep.max_rel_err(Side::Left), rep.max_rel_err(Side::Right))) + ", " +
              std::to_string(rep.failures()) + " cells over) ";
  }
  const double t = seconds_since(t0);
  detail += "time " + fmt(t) + "s";
  return {all && t <= kDeltaSeconds, detail};
}

Outcome plant_and_recover() {
  std::mt19937 rng(1405);
  std::vector<double> lattice;
  for (int k = -8; k <= 8; ++k) lattice.push_back(0.25 * k);
  std::uniform_int_distribution<int> count(1, 6);
  std::uniform_real_distribution<double> log_mod(std::log(0.1), std::log(10.0));
  std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);
  int exact = 0;
  double worst_coeff = 0.0, worst_res = 0.0;
  for (int trial = 0; trial < kPlantTrials; ++trial) {
    auto shuffled = lattice;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::vector<double> exps(shuffled.begin(), shuffled.begin() + count(rng));
    std::sort(exps.begin(), exps.end());
    std::vector<ExpTerm> terms;
    for (double m : exps) terms.push_back({m, std::polar(std::exp(log_mod(rng)), phase(rng))});
    const RealExpSeries planted(terms);
    RealExpSeries found;
    try {
      found = leading_extract(Sampler([&](const LogPoint& z) { return planted(z); }), lattice);
    } catch (const Error&) {
      continue;
    }
    bool same = found.size() == planted.size();
    for (std::size_t k = 0; same && k < found.size(); ++k) {
      same = found.terms()[k].m == planted.terms()[k].m;
      worst_coeff = std::max(worst_coeff, std::abs(found.terms()[k].a - planted.terms()[k].a));
    }
    worst_res = std::max(worst_res, std::abs(res_z(found) - res_z(planted)));
    if (same) ++exact;
  }
  return {exact == kPlantTrials && worst_coeff <= kPlantCoeffTol && worst_res <= kPlantCoeffTol,
          std::to_string(exact) + "/" + std::to_string(kPlantTrials) + " exponent sets exact, max coeff err " +
              fmt(worst_coeff) + ", max Res_z err " + fmt(worst_res)};
}

Outcome omega_involution() {
  double worst = 0.0;
  std::size_t compared = 0;
  for (double pa : {0.0, 0.5, 1.0})
    for (double pb : {0.0, 0.5, 1.0}) {
      const auto y = Intertwiner::base(pa, pb);
      const auto back = y.omega(-1).omega(0);
      for (const auto& a : partitions_up_to(kOmegaInputLevel))
        for (const auto& b : partitions_up_to(kOmegaInputLevel)) {
          const auto wa = FockVector::basis(pa, a), wb = FockVector::basis(pb, b);
          const auto f = y.apply(wa, wb, kOmegaLevel);
          const auto g = back.apply(wa, wb, kOmegaLevel);
          for (const auto& [k, c] : f.terms) {
            const auto it = g.terms.find(k);
            worst = std::max(worst, std::abs(c - (it == g.terms.end() ? cplx{} : it->second)));
            ++compared;
          }
          for (const auto& [k, c] : g.terms)
            if (!f.terms.count(k)) worst = std::max(worst, std::abs(c));
        }
    }
  return {worst <= kOmegaTol, std::to_string(compared) + " coefficients, max deviation " + fmt(worst)};
}

Outcome associativity() {
  const auto t0 = std::chrono::steady_clock::now();
  bool all = true;
  std::string detail;
  for (const auto& m : kAssocMomenta) {
    const auto rep = associativity_check(m, basis_tuples4(kAssocTupleLevel), kZ1, kZ2, kAssocLevel, kAssocTol);
    all = all && rep.pass;
    std::size_t passed = 0;
    for (const auto& row : rep.rows) passed += row.pass ? 1 : 0;
    detail += "(" + fmt(m[0]) + "," + fmt(m[1]) + "," + fmt(m[2]) + ") " + std::to_string(passed) + "/" +
              std::to_string(rep.rows.size()) + " tuples, max rel dev " + fmt(rep.max_rel_dev) + "; ";
  }
  const double t = seconds_since(t0);
  detail += "time " + fmt(t) + "s";
  return {all && t <= kAssocSeconds, detail};
}

Outcome expansion_fit() {
  const double p1 = 1, p2 = 1, p3 = 0;
  const auto y1 = Intertwiner::base(p1, p2 + p3), y2 = Intertwiner::base(p2, p3);
  auto corr = [&](const LogPoint& z1, const LogPoint& z2) {
    return product_correlator(y1, y2, DualVector::lowest(p1 + p2 + p3), FockVector::lowest(p1), FockVector::lowest(p2),
                              FockVector::lowest(p3), z1, z2, 24, 1e-12)
        .value;
  };
  const double delta = p1 * p2 + p1 * p3 + p2 * p3;
  std::vector<double> candidates;
  for (double shift : {0.0, 0.25, 0.5, 0.75}) candidates.push_back(delta - p1 * p2 - shift);
  FitOptions opts;
  opts.weight_sum = (p1 * p1 + p2 * p2) / 2;
  const auto fit = fit_product_expansion(corr, delta, candidates, default_probes(), opts);
  if (fit.terms.size() != 1) return {false, std::to_string(fit.terms.size()) + " terms fitted"};
  const auto& t = fit.terms[0];
  const double err = std::abs(t.s - p1 * p2);
  return {err <= kFitExponentTol && t.r + t.s == fit.delta,
          "r=" + fmt(t.r) + " s=" + fmt(t.s) + " (err " + fmt(err) + "), r+s-delta=" + fmt(t.r + t.s - fit.delta) +
              ", residual " + fmt(fit.residual)};
}

Outcome tau_equality() {
  const std::array<double, 3> momenta = {1, 1, 0};
  const auto lam = product_functional(momenta, DualVector::lowest(2), kZ1, kZ2, kTauLambdaLevel, kTauInnerLevel);
  const Grid grid = Grid::cube(1);
  const auto tuples = basis_tuples3(2);

  // Vacuum: each side is its delta sum times lambda.
  const auto s1 = tau1_apply(AlgebraElement::vacuum(), lam, kZ1, kZ2, grid, tuples);
  const auto s2 = tau2_apply(AlgebraElement::vacuum(), lam, principal(kZ1.value() - kZ2.value()), kZ2, grid, tuples);
  double reduction = 0.0;
  for (std::size_t c = 0; c < s1.cells.size(); ++c) {
    cplx left, right;
    double left_scale = 0.0, right_scale = 0.0;
    for (Identity id : {Identity::PoleZ1, Identity::PoleOrigin, Identity::PoleZ2}) {
      const cplx l = side_coefficient(DeltaProductExpr::lookup(id, Side::Left), s1.cells[c], kZ1, kZ2, kTauTerms).value;
      const cplx r = side_coefficient(DeltaProductExpr::lookup(id, Side::Right), s1.cells[c], kZ1, kZ2, kTauTerms).value;
      left += l;
      right += r;
      left_scale += std::abs(l);
      right_scale += std::abs(r);
    }
    // The sides nearly cancel; rounding is measured against their sizes.
    for (std::size_t i = 0; i < tuples.size(); ++i) {
      const double lam_abs = std::abs(lam(tuples[i]));
      reduction = std::max(reduction, std::abs(s1.values[c][i] - left * lam(tuples[i])) /
                                          std::max(1.0, left_scale * lam_abs));
      reduction = std::max(reduction, std::abs(s2.values[c][i] - right * lam(tuples[i])) /
                                          std::max(1.0, right_scale * lam_abs));
    }
  }
  const auto vac = check_tau_equality(AlgebraElement::vacuum(), lam, kZ1, kZ2, grid, tuples, kTauTol);
  const auto omega = check_tau_equality(AlgebraElement::omega(), lam, kZ1, kZ2, grid, tuples, kTauTol);
  return {reduction <= kReductionTol && vac.pass && omega.pass,
          "vacuum reduction dev " + fmt(reduction) + ", vacuum max dev " + fmt(vac.max_dev) + ", omega max dev " +
              fmt(omega.max_dev) + " over " + std::to_string(omega.rows.size()) + " cells"};
}

Outcome exponent_support_bound() {
  std::size_t worst = 0, tested = 0;
  for (double pa : {0.0, 0.5, 1.0})
    for (double pb : {0.0, 0.5, 1.0}) {
      const auto y = Intertwiner::base(pa, pb);
      for (const auto& op : {y, y.rotated(1), y.omega(-1), y.omega(0)}) {
        const auto support = exponent_support(exponent_samples(op, kSupportInputLevel, kSupportOutputLevel));
        worst = std::max(worst, support.size());
        ++tested;
      }
    }
  return {worst <= kMaxSupport,
          std::to_string(tested) + " intertwiners, largest support " + std::to_string(worst) + " classes"};
}

Outcome level_cutoff() {
  const std::vector<int> levels = {8, 10, 12, 14, 16};
  std::size_t series = 0, satisfied = 0;
  double worst_factor = std::numeric_limits<double>::infinity();
  for (const auto& m : kAssocMomenta) {
    const auto tuples = basis_tuples4(kAssocTupleLevel);
    std::vector<AssocReport> reps;
    for (int level : levels) reps.push_back(associativity_check(m, tuples, kZ1, kZ2, level, kAssocTol));
    for (std::size_t i = 0; i < tuples.size(); ++i) {
      for (bool product : {true, false}) {
        auto pick = [&](std::size_t k) -> const ConvergenceReport& {
          return product ? reps[k].rows[i].product : reps[k].rows[i].iterate;
        };
        const double floor = kRoundoff * std::max(1.0, pick(levels.size() - 1).abs_sum);
        bool ok = true;
        for (std::size_t k = 0; k + 2 < levels.size(); ++k) {
          const double d0 = std::abs(pick(k).value - pick(k + 1).value);
          const double d1 = std::abs(pick(k + 1).value - pick(k + 2).value);
          if (d1 <= floor) continue;
          const double factor = d0 / d1;
          worst_factor = std::min(worst_factor, factor);
          ok = ok && factor >= kCutoffFactor;
        }
        ++series;
        satisfied += ok ? 1 : 0;
      }
    }
  }
  return {satisfied == series, std::to_string(satisfied) + "/" + std::to_string(series) +
                                   " series decay by >= 2 per +2 levels, smallest factor " + fmt(worst_factor)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-8)")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"delta identities", delta_identities},
      {"expansion uniqueness", plant_and_recover},
      {"omega involution", omega_involution},
      {"associativity", associativity},
      {"convergence and extension fit", expansion_fit},
      {"tau equality", tau_equality},
      {"exponent support", exponent_support_bound},
      {"level cutoff decay", level_cutoff},
  };
  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (only != 0 && static_cast<int>(k) + 1 != only) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << "criterion " << k + 1 << " (" << criteria[k].first << "): " << (o.pass ? "PASS" : "FAIL") << "  "
              << o.detail << std::endl;
  }
  return all ? 0 : 1;
}
