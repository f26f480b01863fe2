#include <doctest.h>

#include <random>

#include "vertexcalc/error.hpp"
#include "vertexcalc/formal_series.hpp"

using namespace vertexcalc;

namespace {

std::map<std::string, WindowRange> win(std::initializer_list<std::pair<const std::string, WindowRange>> w) {
  return std::map<std::string, WindowRange>(w);
}

CoeffSeries geometric(const std::string& var, int lo, int hi) {
  CoeffSeries s({var}, win({{var, {double(lo), double(hi)}}}));
  for (int n = lo; n <= hi; ++n) s.add_term({{var, double(n)}}, 1.0);
  return s;
}

}  // namespace

TEST_SUITE("formal_series") {
  TEST_CASE("binomial coefficients") {
    CHECK(binomial_coeff(3, 1) == doctest::Approx(3));
    CHECK(binomial_coeff(-1, 2) == doctest::Approx(1));
    CHECK(binomial_coeff(0.5, 2) == doctest::Approx(-0.125));
    CHECK(binomial_coeff(2, 5) == 0.0);
    CHECK(binomial_coeff(2, -1) == 0.0);
  }

  TEST_CASE("binomial coefficients satisfy Pascal's rule") {
    for (double m : {-2.5, -1.0, 0.25, 3.0, 7.5})
      for (int l = 1; l < 12; ++l)
        CHECK(binomial_coeff(m + 1, l) == doctest::Approx(binomial_coeff(m, l) + binomial_coeff(m, l - 1)));
  }

  TEST_CASE("exponent snapping") {
    CHECK(snap_exponent(0.5 + 1e-14) == 0.5);
    CHECK(snap_exponent(1.0 / 3.0 + 1e-13) == doctest::Approx(1.0 / 3.0).epsilon(1e-16));
    CHECK(snap_exponent(0.123456789) == 0.123456789);
    CHECK_THROWS_AS(snap_exponent(std::numeric_limits<double>::infinity()), DomainError);
  }

  TEST_CASE("geometric expansion of (x1 - x2)^-1") {
    const auto w = win({{"x1", {-5, 0}}, {"x2", {0, 4}}});
    const auto s = iota_expand(1, Operand::variable("x1"), -1, Operand::variable("x2"), -1,
                               {Operand::variable("x1"), Operand::variable("x2")}, {"x1", "x2"}, w);
    CHECK(s.size() == 5);
    for (int l = 0; l <= 4; ++l) CHECK(s.coeff({{"x1", -1.0 - l}, {"x2", double(l)}}) == cplx(1.0));
  }

  TEST_CASE("finite binomial square") {
    const auto w = win({{"x1", {-10, 10}}, {"x2", {-10, 10}}});
    const auto s = iota_expand(1, Operand::variable("x1"), -1, Operand::variable("x2"), 2,
                               {Operand::variable("x1"), Operand::variable("x2")}, {"x1", "x2"}, w);
    CHECK(s.size() == 3);
    CHECK(s.coeff({{"x1", 2.0}, {"x2", 0.0}}) == cplx(1.0));
    CHECK(s.coeff({{"x1", 1.0}, {"x2", 1.0}}) == cplx(-2.0));
    CHECK(s.coeff({{"x1", 0.0}, {"x2", 2.0}}) == cplx(1.0));
  }

  TEST_CASE("numeric dominant term gives convergent partial sums") {
    const auto s = iota_expand(2, Operand::unit(), -1, Operand::variable("x2"), -1,
                               {Operand::unit(), Operand::variable("x2")}, {"x2"}, win({{"x2", {0, 50}}}));
    cplx sum;
    for (const auto& [k, c] : s.terms()) sum += c;
    CHECK(std::abs(sum - 1.0) < 1e-14);
  }

  TEST_CASE("swapping the convention changes the expansion") {
    const auto w = win({{"x1", {-10, 10}}, {"x2", {-10, 10}}});
    const auto a = iota_expand(1, Operand::variable("x1"), -1, Operand::variable("x2"), -1,
                               {Operand::variable("x1"), Operand::variable("x2")}, {"x1", "x2"}, w);
    const auto b = iota_expand(1, Operand::variable("x1"), -1, Operand::variable("x2"), -1,
                               {Operand::variable("x2"), Operand::variable("x1")}, {"x1", "x2"}, w);
    CHECK(a.coeff({{"x1", -1.0}, {"x2", 0.0}}) == cplx(1.0));
    CHECK(b.coeff({{"x1", -1.0}, {"x2", 0.0}}) == cplx(0.0));
    CHECK(b.coeff({{"x1", 0.0}, {"x2", -1.0}}) == cplx(-1.0));
  }

  TEST_CASE("coefficients of the expanded (x1 - x2)^-1") {
    const auto w = win({{"x1", {-6, 0}}, {"x2", {0, 5}}});
    const auto s = iota_expand(1, Operand::variable("x1"), -1, Operand::variable("x2"), -1,
                               {Operand::variable("x1"), Operand::variable("x2")}, {"x1", "x2"}, w);
    CHECK(s.coeff({{"x1", -3.0}, {"x2", 2.0}}) == cplx(1.0));
    CHECK_THROWS_AS(s.coeff({{"x1", 1.0}, {"x2", 0.0}}), UntrackedExponent);
  }

  TEST_CASE("coefficient lookups") {
    const auto d = geometric("x", -10, 10);
    CHECK(d.coeff({{"x", 7.0}}) == cplx(1.0));
    const CoeffSeries zero({"x"}, win({{"x", {-3, 3}}}));
    CHECK(zero.coeff({{"x", 1.0}}) == cplx(0.0));
  }

  TEST_CASE("multiplication") {
    const CoeffSeries zero({"x1"}, win({{"x1", {-5, 5}}}));
    CHECK(mul(geometric("x1", -5, 5), zero).is_zero());

    const auto inv = CoeffSeries::monomial({"x1"}, win({{"x1", {-2, 2}}}), {{"x1", -1.0}});
    const auto one = CoeffSeries::monomial({"x1"}, win({{"x1", {-2, 2}}}), {{"x1", 1.0}});
    const auto unit = mul(inv, one);
    CHECK(unit.size() == 1);
    CHECK(unit.coeff({{"x1", 0.0}}) == cplx(1.0));

    const auto g = geometric("x2", 0, 3);
    CHECK(mul(g, g).coeff({{"x2", 2.0}}) == cplx(3.0));
  }

  TEST_CASE("stored product coefficients are never truncation-polluted") {
    // Windows clipped on both sides: only exponents whose every contribution is tracked survive.
    auto a = geometric("x", -3, 3);
    auto b = geometric("x", -3, 3);
    a.set_window("x", {-3, 3, false, false});
    b.set_window("x", {-3, 3, false, false});
    const auto p = mul(a, b);
    for (const auto& [k, c] : p.terms()) {
      int count = 0;
      for (int i = -3; i <= 3; ++i)
        if (k[0] - i >= -3 && k[0] - i <= 3) ++count;
      CHECK(c == cplx(count));
    }
  }

  TEST_CASE("multiplication is commutative and associative on random series") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    auto random_series = [&] {
      CoeffSeries s({"x", "y"}, win({{"x", {-4, 4}}, {"y", {0, 6}}}));
      for (int i = 0; i < 6; ++i)
        s.add_term({{"x", double(int(u(rng) * 3))}, {"y", double(int((u(rng) + 1) * 2))}}, {u(rng), u(rng)});
      return s;
    };
    for (int trial = 0; trial < 10; ++trial) {
      const auto a = random_series(), b = random_series(), c = random_series();
      const auto ab = mul(a, b), ba = mul(b, a);
      CHECK(ab.size() == ba.size());
      for (const auto& [k, v] : ab.terms()) CHECK(std::abs(v - ba.terms().at(k)) < 1e-14);
      const auto l = mul(mul(a, b), c), r = mul(a, mul(b, c));
      for (const auto& [k, v] : l.terms()) CHECK(std::abs(v - r.coeff(l.tuple_of(k))) < 1e-13);
    }
  }

  TEST_CASE("residues") {
    const auto r = res(geometric("x", -3, 3), "x");
    CHECK(r.vars().empty());
    CHECK(r.size() == 1);
    CHECK(r.terms().begin()->second == cplx(1.0));

    const auto w = win({{"x", {-4, 4}}, {"t", {0, 2}}});
    const auto s = CoeffSeries::monomial({"x", "t"}, w, {{"x", 2.0}, {"t", 1.0}});
    CHECK(res(s, "x").is_zero());
    CHECK_THROWS_AS(res(CoeffSeries::monomial({"x"}, win({{"x", {0, 3}}}), {{"x", 1.0}}), "x"), UntrackedExponent);
  }

  TEST_CASE("residue of (x - y)^-1 times y") {
    const auto w = win({{"x", {-8, 0}}, {"y", {0, 8}}});
    const auto inv = iota_expand(1, Operand::variable("x"), -1, Operand::variable("y"), -1,
                                 {Operand::variable("x"), Operand::variable("y")}, {"x", "y"}, w);
    const auto y = CoeffSeries::monomial({"x", "y"}, w, {{"x", 0.0}, {"y", 1.0}});
    const auto r = res(mul(inv, y), "x");
    CHECK(r.coeff({{"y", 0.0}}) == cplx(0.0));
    CHECK(r.coeff({{"y", 1.0}}) == cplx(1.0));
  }

  TEST_CASE("series round-trip through JSON") {
    auto s = geometric("x", -2, 2);
    s.add_term({{"x", 0.5}}, {2.0, -1.0});
    const nlohmann::json j = s;
    CHECK(j.at("sharp").at("x").size() == 2);
    CHECK(j.get<CoeffSeries>() == s);
  }

  TEST_CASE("window contract") {
    CoeffSeries s({"x"}, win({{"x", {0, 3}}}));
    CHECK_THROWS_AS(s.add_term({{"x", 5.0}}, 1.0), UntrackedExponent);
    CHECK_THROWS_AS(CoeffSeries({"x", "x"}, win({{"x", {0, 1}}})), DomainError);
    CHECK_THROWS_AS(CoeffSeries({"x"}, win({})), DomainError);
  }
}
