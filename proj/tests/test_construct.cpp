#include <doctest.h>

#include <fstream>
#include <random>

#include "formulads/construct.hpp"
#include "formulads/errors.hpp"
#include "formulads/oracle.hpp"

using namespace formulads;
using QM = Matrix<Rational>;

namespace {
QM q(std::initializer_list<std::initializer_list<long>> rows) {
  QM m(rows.size(), rows.begin()->size(), Rational(0));
  std::size_t i = 0;
  for (auto r : rows) {
    std::size_t j = 0;
    for (long v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

Construction<Rational> build_q(const std::string& text, std::vector<QM> inputs) {
  return build(RationalRing{}, parse(text), inputs);
}
}  // namespace

TEST_CASE("input gate layout") {
  auto c = build_q("A:1x1; A", {q({{2}})});
  CHECK(c.N == q({{1, 2}, {0, -1}}));
  CHECK(c.I == std::vector<std::size_t>{0});
  CHECK(c.J == std::vector<std::size_t>{1});
  CHECK(oracle::inv_exact(c.N) == c.N);
}

TEST_CASE("inverse gate layout") {
  auto c = build_q("A:1x1; inv(A)", {q({{2}})});
  CHECK(c.N == q({{1, 2, 0}, {0, -1, -1}, {1, 0, 0}}));
  CHECK(c.I == std::vector<std::size_t>{2});
  CHECK(c.J == std::vector<std::size_t>{2});
  CHECK(oracle::inv_exact(c.N)(2, 2) == Rational(1, 2));
  REQUIRE(c.inversions.size() == 1);
  CHECK(c.inversions[0].path == "root");
}

TEST_CASE("multiply gate layout") {
  auto c = build_q("A:1x1; B:1x1; A*B", {q({{2}}), q({{3}})});
  CHECK(c.N == q({{1, 2, 0, 0}, {0, -1, -1, 0}, {0, 0, 1, 3}, {0, 0, 0, -1}}));
  CHECK(c.I == std::vector<std::size_t>{0});
  CHECK(c.J == std::vector<std::size_t>{3});
  CHECK(oracle::inv_exact(c.N)(0, 3) == 6);
}

TEST_CASE("locate_input") {
  auto a = build_q("A:1x1; A", {q({{2}})});
  CHECK(locate_input(a, 0).row == 0);
  CHECK(locate_input(a, 0).col == 1);
  auto ab = build_q("A:1x1; B:1x1; A*B", {q({{2}}), q({{3}})});
  CHECK(locate_input(ab, 0).row == 0);
  CHECK(locate_input(ab, 0).col == 1);
  CHECK(locate_input(ab, 1).row == 2);
  CHECK(locate_input(ab, 1).col == 3);
  CHECK_THROWS_AS(locate_input(ab, 2), UnknownLeaf);
}

TEST_CASE("hat construction determinants") {
  auto a = build_q("A:1x1; A", {q({{2}})});
  auto ha = build_hat(RationalRing{}, a);
  CHECK(ha.Nhat.rows() == 3);
  CHECK(oracle::det_cofactor(ha.Nhat) == -2);
  CHECK(oracle::det_cofactor(a.N) == -1);

  auto ab = build_q("A:1x1; B:1x1; A*B", {q({{2}}), q({{3}})});
  auto hab = build_hat(RationalRing{}, ab);
  CHECK(oracle::det_bareiss(hab.Nhat) / oracle::det_bareiss(ab.N) == 6);

  auto wide = build_q("A:1x2; A", {q({{1, 2}})});
  CHECK_THROWS_AS(build_hat(RationalRing{}, wide), NonSquareOutput);
}

TEST_CASE("every leaf block holds its input verbatim") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<long> val(-5, 5);
  for (int trial = 0; trial < 100; ++trial) {
    Formula f = random_formula(rng, GeneratorParams{});
    auto leaves = enumerate_leaves(f);
    std::vector<QM> in;
    for (const auto& l : leaves) {
      QM m(l.shape.rows, l.shape.cols, Rational(0));
      for (std::size_t i = 0; i < m.rows(); ++i)
        for (auto& v : m.row(i)) v = val(rng);
      in.push_back(m);
    }
    auto c = build(RationalRing{}, f, in);
    CHECK(c.N.rows() == c.N.cols());
    for (const auto& l : leaves) {
      const LeafBlock& lb = locate_input(c, l.id);
      for (std::size_t i = 0; i < lb.shape.rows; ++i)
        for (std::size_t j = 0; j < lb.shape.cols; ++j) CHECK(c.N(lb.row + i, lb.col + j) == in[l.id](i, j));
    }
  }
}

TEST_CASE("norm budget") {
  auto b1 = norm_budget(1, Rational(2));
  CHECK(b1.bound_Ninv == 8000);
  CHECK(b1.bound_IJ == 2);
  auto b2 = norm_budget(2, Rational(4));
  CHECK(b2.bound_rowblock == 400);
}

TEST_CASE("construction serializes to the golden JSON") {
  auto c = build_q("A:1x1; B:1x1; inv(A)*B", {q({{2}}), q({{3}})});
  std::ifstream in(std::string(GOLDEN_DIR) + "/inv_mul.json");
  REQUIRE(in);
  nlohmann::json golden;
  in >> golden;
  CHECK(to_json(RationalRing{}, c) == golden);
}
