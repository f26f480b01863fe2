#include "vertexcalc/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vertexcalc/delta_calculus.hpp"
#include "vertexcalc/dual_actions.hpp"
#include "vertexcalc/error.hpp"
#include "vertexcalc/expansion_analysis.hpp"
#include "vertexcalc/heisenberg.hpp"

namespace vertexcalc::cli {

namespace {

double parse_real(std::string_view text) {
  const std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw DomainError("not a number: " + s);
  }
  if (used != s.size()) throw DomainError("not a number: " + s);
  return v;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace

cplx parse_complex(std::string_view text) {
  if (text.empty()) throw DomainError("empty complex number");
  if (text.back() != 'i') return {parse_real(text), 0.0};
  const std::string_view body = text.substr(0, text.size() - 1);
  // Split at the last sign that is not a leading sign or part of an exponent.
  std::size_t split = std::string_view::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  auto imag_of = [](std::string_view s) {
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    return parse_real(s);
  };
  if (split == std::string_view::npos) return {0.0, imag_of(body)};
  return {parse_real(body.substr(0, split)), imag_of(body.substr(split))};
}

LogPoint parse_point(std::string_view text) {
  const auto at = text.find('@');
  if (at == std::string_view::npos) return LogPoint::principal(parse_complex(text));
  const double turns = parse_real(text.substr(at + 1));
  if (turns != std::round(turns)) throw DomainError("half-turn count must be an integer");
  return LogPoint::principal(parse_complex(text.substr(0, at))).rotated(static_cast<long>(turns));
}

std::array<double, 3> parse_momenta(std::string_view text) {
  std::array<double, 3> p{};
  std::size_t start = 0;
  for (int k = 0; k < 3; ++k) {
    const auto comma = text.find(',', start);
    if ((k < 2) == (comma == std::string_view::npos)) throw DomainError("momenta must be a,b,c");
    p[static_cast<std::size_t>(k)] = parse_real(text.substr(start, comma - start));
    start = comma + 1;
  }
  return p;
}

namespace {

struct Common {
  std::string z1, z2;
  std::string out_path;
};

void emit(const nlohmann::json& j, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write " + path);
  f << j.dump(2) << '\n';
}

LogPoint point_flag(const std::string& text, const char* name) {
  try {
    return parse_point(text);
  } catch (const DomainError& e) {
    throw UsageError(std::string(name) + ": " + e.what());
  }
}

std::array<double, 3> momenta_flag(const std::string& text) {
  try {
    return parse_momenta(text);
  } catch (const DomainError& e) {
    throw UsageError(std::string("--p: ") + e.what());
  }
}

// verify-delta

struct DeltaArgs {
  Common io;
  std::vector<std::string> ids;
  int grid = 3;
  int terms = 400;
  double tol = 1e-8;
  std::string csv;
};

int cmd_verify_delta(const DeltaArgs& a, std::ostream& out) {
  const LogPoint z1 = point_flag(a.io.z1, "--z1");
  const LogPoint z2 = point_flag(a.io.z2, "--z2");
  std::vector<Identity> ids;
  for (const auto& tag : a.ids) {
    if (tag == "all") {
      ids.insert(ids.end(), {Identity::FullSum, Identity::PoleZ1, Identity::PoleOrigin, Identity::PoleZ2});
      continue;
    }
    try {
      ids.push_back(parse_identity(tag));
    } catch (const DomainError& e) {
      throw UsageError(std::string("--id: ") + e.what());
    }
  }
  if (ids.empty()) ids = {Identity::FullSum, Identity::PoleZ1, Identity::PoleOrigin, Identity::PoleZ2};

  std::ofstream csv;
  if (!a.csv.empty()) {
    csv.open(a.csv);
    if (!csv) throw UsageError("cannot write " + a.csv);
    write_csv_header(csv);
  }
  nlohmann::json reports = nlohmann::json::array();
  bool all = true;
  for (Identity id : ids) {
    const CoeffReport rep = verify_identity(id, z1, z2, Grid::cube(a.grid), a.terms, a.tol);
    all = all && rep.verified();
    if (csv.is_open()) write_csv(csv, rep, false);
    reports.push_back(rep);
  }
  emit({{"command", "verify-delta"}, {"pass", all}, {"reports", std::move(reports)}}, a.io.out_path, out);
  return all ? kExitOk : kExitFailed;
}

// assoc

struct AssocArgs {
  Common io;
  std::string p;
  std::string config;
  std::string csv;
  std::optional<std::array<double, 3>> config_momenta;
  int level = 12;
  int tuple_level = 0;
  double tol = 1e-6;
  // Set when the flag was given explicitly; explicit flags win over the config file.
  bool level_flag = false, tuple_level_flag = false, tol_flag = false;
};

// Model file: {"momenta": [p1, p2, p3], "level": L, "tuple_level": n, "tol": t, "normalization": 1}.
void apply_model_config(AssocArgs& a) {
  std::ifstream f(a.config);
  if (!f) throw UsageError("cannot read " + a.config);
  try {
    const auto j = nlohmann::json::parse(f);
    if (j.contains("normalization") && j.at("normalization").get<double>() != 1.0)
      throw UsageError("only the unit lowest-weight normalization is supported");
    if (j.contains("momenta")) {
      const auto m = j.at("momenta").get<std::vector<double>>();
      if (m.size() != 3) throw UsageError("config momenta must have three entries");
      a.config_momenta = std::array<double, 3>{m[0], m[1], m[2]};
    }
    if (!a.level_flag && j.contains("level")) a.level = j.at("level").get<int>();
    if (!a.tuple_level_flag && j.contains("tuple_level")) a.tuple_level = j.at("tuple_level").get<int>();
    if (!a.tol_flag && j.contains("tol")) a.tol = j.at("tol").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed config: ") + e.what());
  }
  if (a.level < 0 || a.tuple_level < 0 || !(a.tol > 0.0)) throw UsageError("config violates L >= 0, tol > 0");
}

int cmd_assoc(AssocArgs a, std::ostream& out) {
  if (!a.config.empty()) apply_model_config(a);
  if (a.p.empty() && !a.config_momenta) throw UsageError("--p is required");
  const auto momenta = a.p.empty() ? *a.config_momenta : momenta_flag(a.p);
  const LogPoint z1 = point_flag(a.io.z1, "--z1");
  const LogPoint z2 = point_flag(a.io.z2, "--z2");
  const AssocReport rep = associativity_check(momenta, basis_tuples4(a.tuple_level), z1, z2, a.level, a.tol);
  if (!a.csv.empty()) {
    std::ofstream csv(a.csv);
    if (!csv) throw UsageError("cannot write " + a.csv);
    write_csv(csv, rep);
  }
  nlohmann::json j = rep;
  j["command"] = "assoc";
  emit(j, a.io.out_path, out);
  return rep.pass ? kExitOk : kExitFailed;
}

// fit

struct FitArgs {
  Common io;
  std::string p = "1,1,0";
  std::string planted;
  std::vector<double> candidates;
  int level = 24;
  int degree = 8;
  double tol = 1e-8;
};

cplx json_complex(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

int fit_planted_series(const nlohmann::json& doc, const FitArgs& a, std::ostream& out) {
  std::vector<ExpTerm> terms;
  for (const auto& t : doc.at("series")) terms.push_back({t.at("m").get<double>(), json_complex(t.at("a"))});
  const RealExpSeries planted(terms);
  const auto lattice = doc.at("lattice").get<std::vector<double>>();
  const Sampler sampler([planted](const LogPoint& z) { return planted(z); });
  const RealExpSeries found = leading_extract(sampler, lattice);
  bool exponents_ok = found.size() == planted.size();
  double coeff_err = 0.0;
  for (std::size_t k = 0; exponents_ok && k < found.size(); ++k) {
    exponents_ok = found.terms()[k].m == planted.terms()[k].m;
    coeff_err = std::max(coeff_err, std::abs(found.terms()[k].a - planted.terms()[k].a));
  }
  const bool pass = exponents_ok && coeff_err <= 1e-6;
  const cplx res = res_z(found);
  emit({{"command", "fit"},
        {"mode", "planted-series"},
        {"planted", planted},
        {"recovered", found},
        {"res_z", {res.real(), res.imag()}},
        {"exponents_ok", exponents_ok},
        {"coeff_err", coeff_err},
        {"tol", a.tol},
        {"pass", pass}},
       a.io.out_path, out);
  return pass ? kExitOk : kExitFailed;
}

int fit_planted_expansion(const nlohmann::json& doc, const FitArgs& a, std::ostream& out) {
  const double delta = doc.at("delta").get<double>();
  std::vector<FitTerm> planted;
  for (const auto& t : doc.at("terms")) {
    FitTerm term{t.at("r").get<double>(), delta - t.at("r").get<double>(), {}};
    for (const auto& c : t.at("taylor")) term.taylor.push_back(json_complex(c));
    planted.push_back(std::move(term));
  }
  auto correlator = [&planted, delta](const LogPoint& z1, const LogPoint& z2) {
    const LogPoint z3 = LogPoint::principal(z1.value() - z2.value());
    const cplx zeta = (z1.value() - z2.value()) / z2.value();
    cplx sum;
    for (const auto& t : planted) {
      cplx poly, pw = 1.0;
      for (const cplx& c : t.taylor) {
        poly += c * pw;
        pw *= zeta;
      }
      sum += z2.pow(t.r) * z3.pow(delta - t.r) * poly;
    }
    return sum;
  };
  std::vector<double> candidates = a.candidates;
  if (candidates.empty()) candidates = doc.at("candidates").get<std::vector<double>>();
  FitOptions opts;
  opts.degree = a.degree;
  opts.residual_tol = a.tol;
  const ExpansionFit fit = fit_product_expansion(correlator, delta, candidates, default_probes(), opts);

  bool exponents_ok = fit.terms.size() == planted.size();
  double coeff_err = 0.0;
  for (std::size_t k = 0; exponents_ok && k < fit.terms.size(); ++k) {
    exponents_ok = std::abs(fit.terms[k].r - planted[k].r) <= 1e-9;
    for (std::size_t d = 0; d < fit.terms[k].taylor.size(); ++d) {
      const cplx want = d < planted[k].taylor.size() ? planted[k].taylor[d] : cplx{};
      coeff_err = std::max(coeff_err, std::abs(fit.terms[k].taylor[d] - want));
    }
  }
  const bool pass = exponents_ok && coeff_err <= 1e-6 && fit.residual <= a.tol;
  emit({{"command", "fit"},
        {"mode", "planted-expansion"},
        {"fit", fit},
        {"exponents_ok", exponents_ok},
        {"coeff_err", coeff_err},
        {"tol", a.tol},
        {"pass", pass}},
       a.io.out_path, out);
  return pass ? kExitOk : kExitFailed;
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
  if (!a.planted.empty()) {
    std::ifstream f(a.planted);
    if (!f) throw UsageError("cannot read " + a.planted);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(f);
      if (doc.contains("series")) return fit_planted_series(doc, a, out);
      return fit_planted_expansion(doc, a, out);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(std::string("malformed planted file: ") + e.what());
    }
  }
  const auto [p1, p2, p3] = momenta_flag(a.p);
  const Intertwiner y1 = Intertwiner::base(p1, p2 + p3);
  const Intertwiner y2 = Intertwiner::base(p2, p3);
  const DualVector w4 = DualVector::lowest(p1 + p2 + p3);
  const FockVector w1 = FockVector::lowest(p1), w2 = FockVector::lowest(p2), w3 = FockVector::lowest(p3);
  const double delta = ((p1 + p2 + p3) * (p1 + p2 + p3) - p1 * p1 - p2 * p2 - p3 * p3) / 2.0;
  std::vector<double> candidates = a.candidates;
  if (candidates.empty())
    for (double shift : {0.0, 0.25, 0.5, 0.75}) candidates.push_back(delta - p1 * p2 - shift);
  const int level = a.level;
  auto correlator = [&](const LogPoint& z1, const LogPoint& z2) {
    return product_correlator(y1, y2, w4, w1, w2, w3, z1, z2, level, a.tol).value;
  };
  FitOptions opts;
  opts.degree = a.degree;
  opts.residual_tol = a.tol;
  opts.weight_sum = (p1 * p1 + p2 * p2) / 2.0;
  const ExpansionFit fit = fit_product_expansion(correlator, delta, candidates, default_probes(), opts);
  const bool pass = fit.residual <= a.tol && fit.witness_ok;
  emit({{"command", "fit"},
        {"mode", "correlator"},
        {"momenta", {p1, p2, p3}},
        {"level", level},
        {"candidates_r", candidates},
        {"fit", fit},
        {"tol", a.tol},
        {"pass", pass}},
       a.io.out_path, out);
  return pass ? kExitOk : kExitFailed;
}

// tau

struct TauArgs {
  Common io;
  std::string p = "1,1,0";
  std::vector<std::string> vs = {"omega"};
  std::string lambda = "product";
  int level = 8;
  int inner = 12;
  int compat_inner = 18;
  int grid = 1;
  int tuple_level = 2;
  int terms = kTauTerms;
  double tol = 1e-6;
  bool skip_compat = false;
};

AlgebraElement element_flag(const std::string& name) {
  if (name == "vacuum") return AlgebraElement::vacuum();
  if (name == "omega") return AlgebraElement::omega();
  if (name == "boson") return AlgebraElement::boson();
  throw UsageError("--v must be vacuum, omega or boson");
}

int cmd_tau(const TauArgs& a, std::ostream& out) {
  const auto momenta = momenta_flag(a.p);
  const LogPoint z1 = point_flag(a.io.z1, "--z1");
  const LogPoint z2 = point_flag(a.io.z2, "--z2");
  std::vector<AlgebraElement> vs;
  for (const auto& name : a.vs) vs.push_back(element_flag(name));
  const DualVector w4 = DualVector::lowest(momenta[0] + momenta[1] + momenta[2]);
  const auto build = a.lambda == "iterate" ? iterate_functional : product_functional;
  const TruncatedFunctional lam = build(momenta, w4, z1, z2, a.level, a.inner);
  const Grid grid = Grid::cube(a.grid);
  const auto tuples = basis_tuples3(a.tuple_level);

  bool pass = true;
  nlohmann::json equality = nlohmann::json::array();
  for (const auto& v : vs) {
    const TauReport rep = check_tau_equality(v, lam, z1, z2, grid, tuples, a.tol, a.terms);
    pass = pass && rep.pass;
    nlohmann::json j = rep;
    j["v"] = v.name();
    equality.push_back(std::move(j));
  }
  nlohmann::json report = {{"command", "tau"},
                           {"momenta", momenta},
                           {"lambda", {{"kind", a.lambda}, {"level", a.level}, {"inner_level", a.inner}}},
                           {"equality", std::move(equality)}};
  if (!a.skip_compat) {
    // The iterate sum converges geometrically in |z1 - z2| / |z2|, so it is the accurate correlator here.
    const TruncatedFunctional exact = iterate_functional(momenta, w4, z1, z2, a.level, a.compat_inner);
    const CompatReport rep = compatibility_check(exact, z1, z2, vs, grid, tuples, a.tol, a.terms);
    pass = pass && rep.pass;
    report["compatibility"] = rep;
    report["compatibility"]["inner_level"] = a.compat_inner;
  }
  report["pass"] = pass;
  emit(report, a.io.out_path, out);
  return pass ? kExitOk : kExitFailed;
}

void add_points(CLI::App* sub, Common& io) {
  sub->add_option("--z1", io.z1, "first point: a+bi or mag@halfturns")->required();
  sub->add_option("--z2", io.z2, "second point: a+bi or mag@halfturns")->required();
  sub->add_option("--out", io.out_path, "write the JSON report here instead of stdout");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Formal delta calculus and free boson intertwiner checks", "vertexcalc"};
  app.require_subcommand(1);

  DeltaArgs delta;
  auto* vd = app.add_subcommand("verify-delta", "compare region-wise delta product series with closed forms");
  add_points(vd, delta.io);
  vd->add_option("--id", delta.ids, "identity tag (14.8 ... 14.11, or all); repeatable");
  vd->add_option("--grid", delta.grid, "half-width of the cube of cells")->check(CLI::NonNegativeNumber);
  vd->add_option("--terms", delta.terms, "partial-sum length")->check(CLI::PositiveNumber);
  vd->add_option("--tol", delta.tol, "absolute tolerance")->check(CLI::PositiveNumber);
  vd->add_option("--csv", delta.csv, "also write rows as CSV");

  AssocArgs assoc;
  auto* as = app.add_subcommand("assoc", "product against iterate correlators on basis tuples");
  add_points(as, assoc.io);
  as->add_option("--p", assoc.p, "momenta p1,p2,p3");
  as->add_option("--config", assoc.config, "JSON model file with momenta, level, tuple_level, tol");
  as->add_option("--csv", assoc.csv, "also write rows as CSV");
  auto* as_level = as->add_option("--level", assoc.level, "intermediate level cutoff")->check(CLI::NonNegativeNumber);
  auto* as_tuple = as->add_option("--tuple-level", assoc.tuple_level, "max total level of basis tuples")
                       ->check(CLI::NonNegativeNumber);
  auto* as_tol = as->add_option("--tol", assoc.tol, "relative tolerance")->check(CLI::PositiveNumber);

  FitArgs fit;
  auto* ft = app.add_subcommand("fit", "fit the expansion of a product correlator near z1 = z2");
  ft->add_option("--p", fit.p, "momenta p1,p2,p3");
  ft->add_option("--planted", fit.planted, "JSON file with a synthetic expansion to recover");
  ft->add_option("--candidates", fit.candidates, "candidate z2 exponents")->delimiter(',');
  ft->add_option("--level", fit.level, "correlator level cutoff")->check(CLI::NonNegativeNumber);
  ft->add_option("--degree", fit.degree, "max Taylor degree per term")->check(CLI::NonNegativeNumber);
  ft->add_option("--tol", fit.tol, "residual tolerance")->check(CLI::PositiveNumber);
  ft->add_option("--out", fit.io.out_path, "write the JSON report here instead of stdout");

  TauArgs tau;
  auto* tu = app.add_subcommand("tau", "tau actions on a correlator functional");
  add_points(tu, tau.io);
  tu->add_option("--p", tau.p, "momenta p1,p2,p3");
  tu->add_option("--v", tau.vs, "vacuum, omega or boson; repeatable");
  tu->add_option("--lambda", tau.lambda, "correlator summation for the functional")
      ->check(CLI::IsMember({"product", "iterate"}));
  tu->add_option("--level", tau.level, "functional truncation level")->check(CLI::NonNegativeNumber);
  tu->add_option("--inner", tau.inner, "inner level cutoff of the functional")->check(CLI::NonNegativeNumber);
  tu->add_option("--compat-inner", tau.compat_inner, "inner level cutoff for the compatibility functional")
      ->check(CLI::NonNegativeNumber);
  tu->add_option("--grid", tau.grid, "half-width of the cube of cells")->check(CLI::NonNegativeNumber);
  tu->add_option("--tuple-level", tau.tuple_level, "max total level of probe tuples")
      ->check(CLI::NonNegativeNumber);
  tu->add_option("--terms", tau.terms, "delta series length")->check(CLI::PositiveNumber);
  tu->add_option("--tol", tau.tol, "cell tolerance")->check(CLI::PositiveNumber);
  tu->add_flag("--no-compat", tau.skip_compat, "skip the compatibility condition");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (vd->parsed()) return cmd_verify_delta(delta, out);
    if (as->parsed()) {
      assoc.level_flag = as_level->count() > 0;
      assoc.tuple_level_flag = as_tuple->count() > 0;
      assoc.tol_flag = as_tol->count() > 0;
      return cmd_assoc(assoc, out);
    }
    if (ft->parsed()) return cmd_fit(fit, out);
    return cmd_tau(tau, out);
  } catch (const UsageError& e) {
    err << e.what() << '\n';
    return kExitUsage;
  } catch (const FitUnreliable& e) {
    out << nlohmann::json{{"pass", false}, {"error", e.what()}, {"condition", e.condition()}}.dump(2) << '\n';
    return kExitFailed;
  } catch (const RegionError& e) {
    out << nlohmann::json{{"pass", false}, {"error", e.what()}, {"kind", "region"}}.dump(2) << '\n';
    return kExitFailed;
  } catch (const Error& e) {
    out << nlohmann::json{{"pass", false}, {"error", e.what()}}.dump(2) << '\n';
    return kExitFailed;
  }
}

}  // namespace vertexcalc::cli
