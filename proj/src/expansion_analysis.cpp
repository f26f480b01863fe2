#include "vertexcalc/expansion_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "vertexcalc/error.hpp"
#include "vertexcalc/formal_series.hpp"

namespace vertexcalc {

namespace {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Coefficients below this fraction of the largest one count as absent.
constexpr double kPresenceRel = 1e-7;

struct LstsqResult {
  Vector x;
  double condition = 1.0;
  double residual = 0.0;  // relative 2-norm
};

// Least squares with row and column equilibration.
LstsqResult solve_scaled(const Matrix& a, const Vector& b) {
  Matrix scaled = a;
  Vector rhs = b;
  for (Eigen::Index i = 0; i < scaled.rows(); ++i) {
    const double m = scaled.row(i).cwiseAbs().maxCoeff();
    if (m > 0.0) {
      scaled.row(i) /= m;
      rhs(i) /= m;
    }
  }
  Eigen::VectorXd col(scaled.cols());
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    col(j) = scaled.col(j).norm();
    if (col(j) > 0.0) scaled.col(j) /= col(j);
  }
  Eigen::JacobiSVD<Matrix> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  LstsqResult out;
  out.condition = sv.size() == 0 ? 1.0 : (sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                                                  : std::numeric_limits<double>::infinity());
  Vector y = svd.solve(rhs);
  out.x = y;
  for (Eigen::Index j = 0; j < y.size(); ++j) out.x(j) = col(j) > 0.0 ? y(j) / col(j) : cplx{};
  const double bn = b.norm();
  out.residual = bn > 0.0 ? (a * out.x - b).norm() / bn : 0.0;
  return out;
}

std::vector<double> unique_sorted(std::vector<double> v) {
  for (double& x : v) x = snap_exponent(x);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end(), [](double a, double b) { return exponents_equal(a, b); }), v.end());
  return v;
}

}  // namespace

RealExpSeries::RealExpSeries(std::vector<ExpTerm> terms) : terms_(std::move(terms)) {
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (terms_[i].a == cplx{}) throw DomainError("zero coefficient in exponent series");
    if (i > 0 && !(terms_[i].m > terms_[i - 1].m + kExponentTol))
      throw DomainError("exponents must be strictly increasing");
  }
}

cplx RealExpSeries::operator()(const LogPoint& z) const {
  cplx sum;
  for (const auto& t : terms_) sum += t.a * z.pow(t.m);
  return sum;
}

Sampler::Sampler(std::function<cplx(const LogPoint&)> fn, double in, double out)
    : f(std::move(fn)), inner(in), outer(out) {
  if (!(inner > 0.0)) throw DomainError("sampling annulus needs a positive inner radius");
  if (!(outer > inner)) throw DomainError("empty sampling annulus");
}

std::vector<LogPoint> RadiiSchedule::points() const {
  if (steps < 1 || !(r0 > 0.0) || !(ratio > 0.0 && ratio < 1.0)) throw DomainError("malformed radii schedule");
  std::vector<LogPoint> out;
  for (int k = 0; k < steps; ++k) {
    const double lr = std::log(r0) + k * std::log(ratio);
    for (double a : args) out.push_back(LogPoint::from_parts(lr, a, 0));
  }
  return out;
}

RadiiSchedule RadiiSchedule::refined() const {
  RadiiSchedule s = *this;
  s.ratio = std::sqrt(ratio);
  s.steps = 2 * steps - 1;
  return s;
}

RealExpSeries leading_extract(const Sampler& f, std::vector<double> lattice, double tol,
                              const RadiiSchedule& schedule) {
  lattice = unique_sorted(std::move(lattice));
  const auto pts = schedule.points();
  const double r_max = schedule.r0;
  const double r_min = schedule.r0 * std::pow(schedule.ratio, schedule.steps - 1);
  if (r_min < f.inner || r_max > f.outer) throw DomainError("radii schedule leaves the sampling annulus");

  Vector b(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) b(static_cast<Eigen::Index>(i)) = f.f(pts[i]);
  if (b.cwiseAbs().maxCoeff() == 0.0) return {};
  if (lattice.empty()) throw NotExpandable();

  auto design = [&](const std::vector<double>& exps) {
    Matrix a(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(exps.size()));
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = 0; j < exps.size(); ++j)
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pts[i].pow(exps[j]);
    return a;
  };

  const LstsqResult full = solve_scaled(design(lattice), b);
  const double biggest = full.x.cwiseAbs().maxCoeff();
  std::vector<double> present;
  for (std::size_t j = 0; j < lattice.size(); ++j) {
    if (std::abs(full.x(static_cast<Eigen::Index>(j))) > std::max(tol, kPresenceRel * biggest))
      present.push_back(lattice[j]);
  }
  if (present.empty()) throw NotExpandable();
  // The full solve is noisy; prune on the better-conditioned refits until nothing changes.
  LstsqResult refit = solve_scaled(design(present), b);
  for (;;) {
    const double top = refit.x.cwiseAbs().maxCoeff();
    std::vector<double> kept;
    for (std::size_t j = 0; j < present.size(); ++j) {
      if (std::abs(refit.x(static_cast<Eigen::Index>(j))) > std::max(tol, kPresenceRel * top)) kept.push_back(present[j]);
    }
    if (kept.size() == present.size() || kept.empty()) break;
    present = std::move(kept);
    refit = solve_scaled(design(present), b);
  }
  if (!(refit.residual <= kExpandableResidual)) throw NotExpandable();

  std::vector<ExpTerm> terms;
  for (std::size_t j = 0; j < present.size(); ++j) terms.push_back({present[j], refit.x(static_cast<Eigen::Index>(j))});
  return RealExpSeries(std::move(terms));
}

cplx res_z(const RealExpSeries& s) {
  for (const auto& t : s.terms())
    if (exponents_equal(t.m, -1.0)) return t.a;
  return {};
}

std::vector<double> exponent_support(const std::vector<double>& exponents, double tol, std::size_t cap) {
  std::vector<double> classes;
  for (double m : exponents) {
    double frac = m - std::floor(m);
    if (frac > 1.0 - tol) frac = 0.0;
    classes.push_back(frac);
  }
  std::sort(classes.begin(), classes.end());
  std::vector<double> out;
  for (double c : classes) {
    if (out.empty() || c - out.back() > tol) out.push_back(snap_exponent(c));
    if (out.size() > cap) throw DomainError("support not finite at this cutoff");
  }
  return out;
}

std::vector<double> exponent_support(const std::map<double, cplx>& samples, double tol, std::size_t cap) {
  std::vector<double> exps;
  for (const auto& [m, a] : samples)
    if (std::abs(a) > kPruneTol) exps.push_back(m);
  return exponent_support(exps, tol, cap);
}

std::vector<ProbePoint> default_probes() {
  std::vector<ProbePoint> out;
  for (double mod2 : {0.8, 1.25})
    for (int ia = 0; ia < 5; ++ia) {
      const double arg2 = 0.5 + 0.25 * ia;
      const LogPoint z2 = LogPoint::from_parts(std::log(mod2), arg2, 0);
      for (double zr : {0.1, 0.2, 0.3})
        for (int iz = 0; iz < 5; ++iz) {
          const double zeta_arg = -1.2 + 0.6 * iz;
          const cplx zeta = std::polar(zr, zeta_arg);
          out.push_back({LogPoint::principal(z2.value() * (1.0 + zeta)), z2});
        }
    }
  return out;
}

ExpansionFit fit_product_expansion(const Sampler2& correlator, double delta, const std::vector<double>& candidates,
                                   const std::vector<ProbePoint>& probes, const FitOptions& opts) {
  if (opts.degree < 0) throw DomainError("negative Taylor degree");
  if (probes.empty()) throw DomainError("no probe points");
  std::vector<LogPoint> z3;
  std::vector<cplx> zeta;
  for (const auto& p : probes) {
    const cplx d = p.z1.value() - p.z2.value();
    if (!(p.z2.modulus() > std::abs(d) && std::abs(d) > 0.0)) throw RegionError("probe outside |z2| > |z1-z2| > 0");
    z3.push_back(LogPoint::principal(d));
    zeta.push_back(d / p.z2.value());
  }
  ExpansionFit fit;
  fit.delta = delta;

  Vector b(static_cast<Eigen::Index>(probes.size()));
  for (std::size_t i = 0; i < probes.size(); ++i) b(static_cast<Eigen::Index>(i)) = correlator(probes[i].z1, probes[i].z2);

  auto finish_witness = [&] {
    if (fit.terms.empty()) {
      fit.n_witness = opts.n_witness.value_or(0);
      fit.witness_ok = true;
      return;
    }
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& t : fit.terms) lowest = std::min(lowest, opts.weight_sum + t.s);
    fit.n_witness = opts.n_witness.value_or(static_cast<int>(std::ceil(lowest - kExponentTol)) - 1);
    fit.witness_ok = lowest > fit.n_witness;
  };

  if (b.cwiseAbs().maxCoeff() == 0.0) {
    finish_witness();
    return fit;
  }

  std::vector<double> rs = unique_sorted(candidates);
  if (rs.empty()) throw DomainError("no candidate exponents");
  for (std::size_t i = 0; i < rs.size(); ++i)
    for (std::size_t j = i + 1; j < rs.size(); ++j) {
      const double gap = rs[j] - rs[i];
      if (std::abs(gap - std::round(gap)) < kExponentTol)
        throw FitUnreliable("candidates differ by an integer", std::numeric_limits<double>::infinity());
    }

  auto run = [&](const std::vector<double>& exps, int degree) {
    const int width = degree + 1;
    Matrix a(static_cast<Eigen::Index>(probes.size()), static_cast<Eigen::Index>(exps.size() * width));
    for (std::size_t i = 0; i < probes.size(); ++i) {
      for (std::size_t c = 0; c < exps.size(); ++c) {
        cplx base = probes[i].z2.pow(exps[c]) * z3[i].pow(delta - exps[c]);
        for (int d = 0; d < width; ++d) {
          a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c * width + d)) = base;
          base *= zeta[i];
        }
      }
    }
    return solve_scaled(a, b);
  };

  // Lowest Taylor degree that reproduces the samples; higher degrees only cost conditioning.
  LstsqResult res;
  int degree = -1;
  for (int d = 0; d <= opts.degree; ++d) {
    LstsqResult trial = run(rs, d);
    if (trial.condition > opts.max_condition) {
      if (degree < 0 || res.residual > opts.residual_tol) throw FitUnreliable("fit unreliable", trial.condition);
      break;
    }
    res = std::move(trial);
    degree = d;
    if (res.residual <= opts.residual_tol) break;
  }
  const int width = degree + 1;

  const double biggest = res.x.cwiseAbs().maxCoeff();
  const double noise = std::max(opts.drop_tol, 100.0 * res.condition * std::numeric_limits<double>::epsilon());
  std::vector<double> kept;
  for (std::size_t c = 0; c < rs.size(); ++c) {
    const double block = res.x.segment(static_cast<Eigen::Index>(c * width), width).cwiseAbs().maxCoeff();
    if (block > noise * biggest) kept.push_back(rs[c]);
  }
  if (kept.size() != rs.size()) res = run(kept, degree);

  fit.residual = res.residual;
  fit.condition = res.condition;
  for (std::size_t c = 0; c < kept.size(); ++c) {
    FitTerm t{kept[c], snap_exponent(delta - kept[c]), {}};
    for (int d = 0; d < width; ++d) t.taylor.push_back(res.x(static_cast<Eigen::Index>(c * width + d)));
    fit.terms.push_back(std::move(t));
  }
  finish_witness();
  return fit;
}

void to_json(nlohmann::json& j, const RealExpSeries& s) {
  j = nlohmann::json::array();
  for (const auto& t : s.terms()) j.push_back({{"m", t.m}, {"a", {t.a.real(), t.a.imag()}}});
}

void to_json(nlohmann::json& j, const ExpansionFit& fit) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : fit.terms) {
    nlohmann::json taylor = nlohmann::json::array();
    for (const cplx& c : t.taylor) taylor.push_back({c.real(), c.imag()});
    terms.push_back({{"r", t.r}, {"s", t.s}, {"taylor", std::move(taylor)}});
  }
  j = {{"terms", std::move(terms)},
       {"residual", fit.residual},
       {"delta", fit.delta},
       {"n_witness", fit.n_witness},
       {"witness_ok", fit.witness_ok},
       {"condition", fit.condition}};
}

}  // namespace vertexcalc
