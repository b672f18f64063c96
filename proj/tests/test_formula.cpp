#include <doctest.h>

#include <random>

#include "formulads/errors.hpp"
#include "formulads/formula.hpp"

using namespace formulads;

TEST_CASE("parse builds the expected tree") {
  Formula f = parse("A:1x1; B:1x1; inv(A)");
  CHECK(f.root()->kind == GateKind::Inv);
  CHECK(f.root()->lhs->kind == GateKind::Input);
  CHECK(f.root()->lhs->name == "A");

  Formula g = parse("A:2x2; B:2x2; C:2x2; (A+B)*C");
  CHECK(g.root()->kind == GateKind::Mul);
  CHECK(g.root()->lhs->kind == GateKind::Add);
  CHECK(g.root()->rhs->name == "C");
  CHECK(g.gate_count() == 5);
}

TEST_CASE("syntax errors") {
  CHECK_THROWS_AS(parse("A:1x1; A+*A"), SyntaxError);
  CHECK_THROWS_AS(parse("A:1x1; (A"), SyntaxError);
  CHECK_THROWS_AS(parse("A:1x1; A B"), SyntaxError);
  CHECK_THROWS_AS(parse("A:0x1; A"), SyntaxError);
  CHECK_THROWS_AS(parse("A:1x1; A:2x2; A"), SyntaxError);
}

TEST_CASE("undeclared inputs") {
  CHECK_THROWS_AS(check_dims(parse("A:1x1; A+B")), UndeclaredInput);
  Formula f = parse("A*B", Shape{3, 3});
  CHECK(check_dims(f).output == Shape{3, 3});
}

TEST_CASE("check_dims shapes and errors") {
  CHECK(check_dims(parse("A:2x3; B:3x4; A*B")).output == Shape{2, 4});
  CHECK_THROWS_AS(check_dims(parse("A:2x3; B:3x2; A+B")), DimensionMismatch);
  CHECK_THROWS_AS(check_dims(parse("A:2x3; inv(A)")), NonSquareInversion);
  try {
    check_dims(parse("A:2x2; B:3x3; C:2x2; C*(A-B)"));
    FAIL("expected DimensionMismatch");
  } catch (const DimensionMismatch& e) {
    CHECK(e.path() == "root/rhs");
  }
}

TEST_CASE("enumerate_leaves follows left-to-right order") {
  auto leaves = enumerate_leaves(parse("(A+B)*A", Shape{2, 2}));
  REQUIRE(leaves.size() == 3);
  CHECK(leaves[0].id == 0);
  CHECK(leaves[0].name == "A");
  CHECK(leaves[1].name == "B");
  CHECK(leaves[2].name == "A");
  CHECK(enumerate_leaves(parse("A:1x1; inv(A)")).size() == 1);
  CHECK(enumerate_leaves(parse("A:1x1; A")).size() == 1);
}

TEST_CASE("pretty print round-trips through the parser") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    Formula f = random_formula(rng, GeneratorParams{});
    Formula g = parse(pretty_print(f));
    CHECK(same_tree(f.root(), g.root()));
    CHECK(f.dims() == g.dims());
    CHECK(pretty_print(g) == pretty_print(f));
  }
}

TEST_CASE("generated formulas respect bounds") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    GeneratorParams p{1 + static_cast<std::size_t>(trial % 6), 4, static_cast<std::size_t>(trial % 3)};
    Formula f = random_formula(rng, p);
    CHECK(f.gate_count() <= p.max_gates);
    DimCheck dc = check_dims(f);
    if (p.output_side) CHECK(dc.output == Shape{p.output_side, p.output_side});
    for (const auto& [name, shape] : f.dims()) {
      CHECK(shape.rows <= std::max<std::size_t>(4, p.output_side));
      CHECK(shape.cols <= std::max<std::size_t>(4, p.output_side));
    }
  }
}

TEST_CASE("gate counts") {
  Formula f = parse("A:2x2; inv(A*A) - A");
  CHECK(f.leaf_count() == 3);
  CHECK(f.inversion_count() == 1);
  CHECK(f.gate_count() == 6);
}
