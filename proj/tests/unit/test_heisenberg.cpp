#include <doctest.h>

#include <complex>
#include <numbers>
#include <sstream>

#include "vertexcalc/error.hpp"
#include "vertexcalc/expansion_analysis.hpp"
#include "vertexcalc/heisenberg.hpp"

using namespace vertexcalc;

namespace {

const LogPoint kOne = principal(1.0);
const LogPoint kNear = principal(0.9);

cplx matrix(const Intertwiner& y, const DualVector& d, const FockVector& a, const FockVector& b, const LogPoint& x,
            int level = 10) {
  return intertwiner_matrix_coeff(y, d, a, b, x, level).value;
}

// Largest coefficient difference between two formal outputs.
double formal_distance(const FormalFock& f, const FormalFock& g) {
  double worst = 0.0;
  for (const auto& [k, c] : f.terms) {
    const auto it = g.terms.find(k);
    worst = std::max(worst, std::abs(c - (it == g.terms.end() ? cplx{} : it->second)));
  }
  for (const auto& [k, c] : g.terms)
    if (!f.terms.count(k)) worst = std::max(worst, std::abs(c));
  return worst;
}

double vector_distance(const FockVector& a, const FockVector& b) {
  double worst = 0.0;
  for (const auto& [k, c] : a.terms()) worst = std::max(worst, std::abs(c - b.coeff(k)));
  for (const auto& [k, c] : b.terms()) worst = std::max(worst, std::abs(c - a.coeff(k)));
  return worst;
}

}  // namespace

TEST_SUITE("heisenberg") {
  TEST_CASE("partitions") {
    CHECK(partitions_of(4).size() == 5);
    CHECK(partitions_up_to(5).size() == 1 + 1 + 2 + 3 + 5 + 7);
    CHECK(partition_id({2, 1, 1}) == "[2,1,1]");
    CHECK(parse_partition("[3,1]") == Partition{3, 1});
    CHECK(parse_partition("[]").empty());
    CHECK(multiplicity({2, 1, 1}, 1) == 2);
    CHECK(with_part({3, 1}, 2) == Partition{3, 2, 1});
    CHECK(without_part({3, 2, 1}, 2) == Partition{3, 1});
  }

  TEST_CASE("weights") {
    CHECK(weight(FockState{0.0, {}}) == 0.0);
    CHECK(weight(FockState{1.0, {}}) == 0.5);
    CHECK(weight(FockState{1.0, {2, 1}}) == 3.5);
  }

  TEST_CASE("grade projection") {
    const auto low = FockVector::lowest(1.0);
    CHECK(vector_distance(grade_project(low, 0.5), low) == 0.0);
    CHECK(grade_project(low, 1.5).is_zero());
    const auto sum = FockVector::basis(1.0, {2}, 3.0) + FockVector::basis(1.0, {1}, -1.0);
    CHECK(vector_distance(grade_project(sum, 2.5), FockVector::basis(1.0, {2}, 3.0)) == 0.0);
    CHECK(vector_distance(grade_project(sum, 1.5), FockVector::basis(1.0, {1}, -1.0)) == 0.0);
  }

  TEST_CASE("modes satisfy the Heisenberg relation [a_m, a_n] = m delta_{m+n,0}") {
    for (const auto& parts : partitions_up_to(4)) {
      const auto w = FockVector::basis(0.5, parts);
      for (int m = -3; m <= 3; ++m)
        for (int n = -3; n <= 3; ++n) {
          FockVector comm = mode(m, mode(n, w));
          comm += cplx(-1.0) * mode(n, mode(m, w));
          FockVector expect(0.5);
          if (m + n == 0) expect = cplx(m) * w;
          CHECK(vector_distance(comm, expect) < 1e-12);
        }
    }
  }

  TEST_CASE("Virasoro action") {
    for (const auto& parts : partitions_up_to(5)) {
      const auto w = FockVector::basis(0.7, parts);
      const double wt = weight(FockState{0.7, parts});
      CHECK(vector_distance(virasoro(0, w), cplx(wt) * w) < 1e-12);
      for (int s : {-1, 1}) {
        // [L(0), L(s)] = -s L(s)
        FockVector comm = virasoro(0, virasoro(s, w));
        comm += cplx(-1.0) * virasoro(s, virasoro(0, w));
        CHECK(vector_distance(comm, cplx(-s) * virasoro(s, w)) < 1e-11);
      }
      // [L(1), L(-1)] = 2 L(0)
      FockVector comm = virasoro(1, virasoro(-1, w));
      comm += cplx(-1.0) * virasoro(-1, virasoro(1, w));
      CHECK(vector_distance(comm, cplx(2 * wt) * w) < 1e-11);
    }
  }

  TEST_CASE("transposes are adjoint under the pairing") {
    for (const auto& a : partitions_up_to(4))
      for (const auto& b : partitions_up_to(4)) {
        const auto d = DualVector::basis(1.0, a);
        const auto w = FockVector::basis(1.0, b);
        for (int n = -2; n <= 2; ++n) {
          CHECK(std::abs(d.pair(mode(n, w)) - mode_transpose(n, d).pair(w)) < 1e-12);
          CHECK(std::abs(d.pair(virasoro(n, w)) - virasoro_transpose(n, d).pair(w)) < 1e-12);
        }
      }
  }

  TEST_CASE("graded pairing") {
    CHECK(DualVector::basis(1.0, {2}).pair(FockVector::basis(1.0, {1, 1})) == cplx(0.0));
    CHECK(DualVector::basis(1.0, {2}).pair(FockVector::basis(1.0, {2}, 4.0)) == cplx(4.0));
    CHECK(DualVector::lowest(1.0).pair(FockVector::lowest(0.5)) == cplx(0.0));
  }

  TEST_CASE("translation exponential") {
    const auto w = FockVector::basis(1.0, {1});
    const auto e = exp_l_minus1(0.3, w, 6);
    CHECK(vector_distance(grade_project(e, 1.5), w) == 0.0);
    CHECK(vector_distance(grade_project(e, 2.5), cplx(0.3) * virasoro(-1, w)) < 1e-14);
  }

  TEST_CASE("matrix coefficient normalization") {
    CHECK(std::abs(matrix(Intertwiner::base(1, 0), DualVector::lowest(1), FockVector::lowest(1), FockVector::lowest(0),
                          kOne) -
                   1.0) < 1e-14);
    CHECK(std::abs(matrix(Intertwiner::base(1, 1), DualVector::lowest(2), FockVector::lowest(1), FockVector::lowest(1),
                          principal(2.0)) -
                   2.0) < 1e-14);
    const auto bad = intertwiner_matrix_coeff(Intertwiner::base(1, 1), DualVector::lowest(1.5), FockVector::lowest(1),
                                              FockVector::lowest(1), kOne, 4);
    CHECK(bad.value == cplx(0.0));
    CHECK_FALSE(bad.momentum_ok);
    CHECK_THROWS_AS(intertwiner_matrix_coeff(Intertwiner::base(1, 1), DualVector::lowest(2),
                                             FockVector::basis(1, {3}), FockVector::lowest(1), kOne, 2),
                    InsufficientTruncation);
  }

  TEST_CASE("rotation multiplies by the exponent phase") {
    const auto y = Intertwiner::base(0.5, 0.5);
    const LogPoint x = principal({0.6, 0.2});
    const cplx plain = matrix(y, DualVector::lowest(1), FockVector::lowest(0.5), FockVector::lowest(0.5), x);
    const cplx turned = matrix(y.rotated(1), DualVector::lowest(1), FockVector::lowest(0.5), FockVector::lowest(0.5), x);
    CHECK(std::abs(turned - plain * half_turn_phase(0.25)) < 1e-14);
  }

  TEST_CASE("vertex operator of the vacuum module") {
    // Y(1, x) = identity; Y(a_{-1}1, x) = sum_n a_n x^{-n-1}.
    const auto y = Intertwiner::vertex(0.8);
    const auto w = FockVector::basis(0.8, {2, 1});
    const auto id = y.apply(FockVector::lowest(0), w, 6).evaluate(principal(0.37));
    CHECK(vector_distance(id, w) < 1e-14);
    const LogPoint x = principal(0.6);
    const auto field = y.apply(FockVector::basis(0, {1}), w, 6).evaluate(x);
    FockVector expect(0.8);
    for (int n = -6; n <= 3; ++n) expect += x.pow(-n - 1) * mode(n, w);
    FockVector capped(0.8);
    for (int level = 0; level <= 6; ++level) capped += grade_project(expect, 0.32 + level);
    CHECK(vector_distance(field, capped) < 1e-12);
  }

  TEST_CASE("L(-1)-derivative property") {
    const auto y = Intertwiner::base(0.5, 1.0);
    const double x0 = 0.8, h = 1e-5;
    for (const auto& a : partitions_up_to(2))
      for (const auto& b : partitions_up_to(2)) {
        const auto w1 = FockVector::basis(0.5, a);
        const auto w2 = FockVector::basis(1.0, b);
        for (const auto& c : partitions_up_to(4)) {
          const auto d = DualVector::basis(1.5, c);
          const cplx fd = (matrix(y, d, w1, w2, principal(x0 + h), 12) - matrix(y, d, w1, w2, principal(x0 - h), 12)) / (2 * h);
          const cplx exact = matrix(y, d, virasoro(-1, w1), w2, principal(x0), 12);
          CHECK(std::abs(fd - exact) <= 1e-5 * std::max(1.0, std::abs(exact)));
        }
      }
  }

  TEST_CASE("exponent support is one class per intertwiner") {
    for (double pa : {0.0, 0.5, 1.0})
      for (double pb : {0.0, 0.5, 1.0}) {
        const auto support = exponent_support(exponent_samples(Intertwiner::base(pa, pb), 2, 8));
        REQUIRE(support.size() == 1);
        const double frac = pa * pb - std::floor(pa * pb);
        CHECK(support[0] == doctest::Approx(frac));
      }
  }

  TEST_CASE("Omega variants are mutually inverse") {
    for (double pa : {0.0, 0.5, 1.0})
      for (double pb : {0.0, 0.5, 1.0}) {
        const auto y = Intertwiner::base(pa, pb);
        const auto back = y.omega(-1).omega(0);
        CHECK(back.first_momentum() == pa);
        CHECK(back.second_momentum() == pb);
        for (const auto& a : partitions_up_to(2))
          for (const auto& b : partitions_up_to(2)) {
            const auto wa = FockVector::basis(pa, a), wb = FockVector::basis(pb, b);
            CHECK(formal_distance(y.apply(wa, wb, 10), back.apply(wa, wb, 10)) < 1e-10);
          }
      }
  }

  TEST_CASE("Omega on the lowest-weight coefficient is a phase") {
    const auto y = Intertwiner::base(0.5, 1.0);
    const cplx direct = matrix(y, DualVector::lowest(1.5), FockVector::lowest(0.5), FockVector::lowest(1.0), kOne);
    const cplx swapped =
        matrix(y.omega(-1), DualVector::lowest(1.5), FockVector::lowest(1.0), FockVector::lowest(0.5), kOne);
    CHECK(std::abs(swapped - direct * half_turn_phase(-0.5)) < 1e-12);
  }

  TEST_CASE("skew symmetry with the vacuum is translation") {
    const auto y = Intertwiner::vertex(1.0);
    const auto w = FockVector::basis(1.0, {2, 1});
    const cplx x = 0.3;
    const auto skew = y.omega(-1).apply(w, FockVector::lowest(0), 8).evaluate(principal(x));
    // Output levels stop at 8; w sits at level 3.
    CHECK(vector_distance(skew, exp_l_minus1(x, w, 5)) < 1e-12);
  }

  TEST_CASE("product and iterate correlators") {
    const auto y1 = Intertwiner::base(1, 1), y2 = Intertwiner::base(1, 0);
    const auto y3 = Intertwiner::base(1, 1), y4 = Intertwiner::base(2, 0);
    const auto w1 = FockVector::lowest(1), w2 = FockVector::lowest(1), w3 = FockVector::lowest(0);
    const auto prod = product_correlator(y1, y2, DualVector::lowest(2), w1, w2, w3, kOne, kNear, 12, 1e-6);
    CHECK(std::abs(prod.value - 0.1) < 1e-6);
    CHECK(prod.converged);
    const auto iter = iterate_correlator(y4, y3, DualVector::lowest(2), w1, w2, w3, principal(0.1), kNear, 12, 1e-6);
    CHECK(std::abs(iter.value - 0.1) < 1e-6);
    CHECK(iter.level_terms.size() == 13);

    const auto off = product_correlator(y1, y2, DualVector::lowest(3), w1, w2, w3, kOne, kNear, 12, 1e-6);
    CHECK(off.value == cplx(0.0));
    CHECK_FALSE(off.momentum_ok);
    CHECK_THROWS_AS(product_correlator(y1, y2, DualVector::lowest(2), w1, w2, w3, kNear, kOne, 12, 1e-6), RegionError);
    CHECK_THROWS_AS(iterate_correlator(y4, y3, DualVector::lowest(2), w1, w2, w3, kNear, kNear, 12, 1e-6), RegionError);
  }

  TEST_CASE("iterate side converges geometrically in the level") {
    const auto y3 = Intertwiner::base(0.5, 0.5), y4 = Intertwiner::base(1.0, 1.0);
    const auto d = DualVector::basis(2.0, {1});
    const auto w1 = FockVector::basis(0.5, {1}), w2 = FockVector::lowest(0.5), w3 = FockVector::lowest(1.0);
    std::vector<cplx> values;
    for (int level = 6; level <= 16; level += 2)
      values.push_back(iterate_correlator(y4, y3, d, w1, w2, w3, principal(0.1), kNear, level, 1e-12).value);
    for (std::size_t k = 2; k < values.size(); ++k) {
      const double prev = std::abs(values[k - 1] - values[k - 2]);
      const double next = std::abs(values[k] - values[k - 1]);
      CHECK((next <= prev / 10 || next < 1e-15));
    }
  }

  TEST_CASE("associativity on the lowest-weight tuple") {
    const auto rep = associativity_check({1, 1, 0}, basis_tuples4(0), kOne, kNear, 12, 1e-6);
    CHECK(rep.pass);
    CHECK(rep.rows.size() == 1);
    CHECK_THROWS_AS(associativity_check({1, 1, 0}, basis_tuples4(0), principal(2.0), principal(1.0), 12, 1e-6),
                    RegionError);
  }

  TEST_CASE("associativity deviation shrinks with the level") {
    const std::vector<Tuple4> tuples = {Tuple4{{}, {}, {1, 1}, {}}};
    double prev = std::numeric_limits<double>::infinity();
    for (int level : {8, 12, 16}) {
      const auto rep = associativity_check({0.5, 0.5, 1}, tuples, kOne, kNear, level, 1e-6);
      CHECK(rep.max_rel_dev < prev);
      prev = rep.max_rel_dev;
    }
  }

  TEST_CASE("basis tuples") {
    const auto tuples = basis_tuples4(2);
    CHECK(tuples.front().level() == 0);
    // Weak compositions of level <= 2 into four slots, with two partitions of 2.
    CHECK(tuples.size() == 1 + 4 + (4 * 2 + 6));
    for (const auto& t : tuples) CHECK(t.level() <= 2);
  }

  TEST_CASE("skew chain") {
    const auto ok = skew_chain_check(Intertwiner::base(1, 1), Intertwiner::base(2, 0), DualVector::lowest(2),
                                     FockVector::lowest(1), FockVector::lowest(1), FockVector::lowest(0), kOne, kNear,
                                     12, 1e-6);
    CHECK(ok.pass);
    const auto y3 = Intertwiner::base(0.5, 0.5), y4 = Intertwiner::base(1, 0.5);
    const auto d = DualVector::basis(1.5, {1});
    const auto w1 = FockVector::basis(0.5, {1}), w2 = FockVector::lowest(0.5), w3 = FockVector::basis(0.5, {2});
    const auto right = skew_chain_check(y3, y4, d, w1, w2, w3, kOne, kNear, 12, 1e-6, 1);
    const auto wrong = skew_chain_check(y3, y4, d, w1, w2, w3, kOne, kNear, 12, 1e-6, -1);
    CHECK(right.pass);
    CHECK_FALSE(wrong.pass);
    CHECK(std::abs(wrong.chain + right.chain) < 1e-8 * std::abs(right.chain));
  }

  TEST_CASE("skew chain with vacuum third input is translation covariance") {
    const auto rep = skew_chain_check(Intertwiner::base(0.5, 0.5), Intertwiner::base(1, 0), DualVector::basis(1, {2}),
                                      FockVector::basis(0.5, {1}), FockVector::lowest(0.5), FockVector::lowest(0), kOne,
                                      kNear, 12, 1e-6);
    CHECK(rep.pass);
  }

  TEST_CASE("report output") {
    const auto rep = associativity_check({1, 1, 0}, basis_tuples4(0), kOne, kNear, 4, 1e-6);
    const nlohmann::json j = rep;
    CHECK(j.at("rows").at(0).at("tuple_id") == "[]|[]|[]|[]");
    std::ostringstream csv;
    write_csv(csv, rep);
    const std::string text = csv.str();
    CHECK(text.substr(0, text.find('\n')) == "p1,p2,p3,tuple_id,side,value_re,value_im,abs_sum,tail,level,converged");
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  }
}
