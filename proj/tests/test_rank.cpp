#include <doctest.h>

#include <random>

#include "formulads/errors.hpp"
#include "formulads/oracle.hpp"
#include "formulads/rank.hpp"

using namespace formulads;
using UM = Matrix<std::uint64_t>;

namespace {
UM diag(std::initializer_list<std::uint64_t> d) {
  UM m(d.size(), d.size(), 0);
  std::size_t i = 0;
  for (auto v : d) m(i, i) = v, ++i;
  return m;
}
std::vector<FieldElem> vec(std::initializer_list<std::int64_t> xs, std::uint64_t p) {
  std::vector<FieldElem> out;
  for (auto x : xs) out.push_back(FieldElem::from_int(x, p));
  return out;
}
}  // namespace

TEST_CASE("field determinant rank-1 update") {
  FieldDetState st(diag({1, 1}), 7);
  fp_det_rank1(st, vec({1, 0}, 7), vec({1, 0}, 7));
  CHECK(st.det().residue() == 2);
  CHECK(st.inverse() == diag({4, 1}));

  FieldDetState bad(diag({1, 1}), 7);
  CHECK_THROWS_AS(fp_det_rank1(bad, vec({-1, 0}, 7), vec({1, 0}, 7)), ZeroDeterminant);
  CHECK(bad.det().residue() == 1);
  CHECK_THROWS_AS(FieldDetState(UM(2, 2, 0), 7), SingularMatrix);
}

TEST_CASE("field determinant follows elimination under random updates") {
  const std::uint64_t p = kMersenne61;
  std::mt19937_64 rng(13);
  UM z(6, 6, 0);
  for (std::size_t i = 0; i < 6; ++i)
    for (auto& v : z.row(i)) v = rng() % p;
  FieldDetState st(z, p);
  for (int k = 0; k < 30; ++k) {
    std::vector<FieldElem> u, v;
    for (int i = 0; i < 6; ++i) {
      u.push_back(FieldElem(rng() % p, p));
      v.push_back(FieldElem(rng() % p, p));
    }
    fp_det_rank1(st, u, v);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 6; ++j) z(i, j) = addmod(z(i, j), mulmod(u[i].residue(), v[j].residue(), p), p);
    CHECK(st.det().residue() == oracle::det_mod_p(z, p));
  }
}

TEST_CASE("rank tracker initial rank") {
  Formula f = parse("A:2x2; A");
  RankState zero(f, {UM(2, 2, 0)});
  CHECK(zero.rank() == 0);
  CHECK(zero.defect() == 2);
  RankState full(f, {diag({1, 1})});
  CHECK(full.rank() == 2);
  CHECK(full.defect() == 0);
  RankState one(f, {diag({1, 0})});
  CHECK(one.rank() == 1);
  CHECK_THROWS_AS(RankState(f, {UM(2, 2, 0)}, 15), ConfigError);
}

TEST_CASE("rank tracker updates") {
  RankState st(parse("A:2x2; A"), {UM(2, 2, 0)});
  CHECK(st.update(0, 0, 0, 1) == 1);
  CHECK(st.update(0, 1, 1, 1) == 2);
  CHECK(st.update(0, 1, 1, 0) == 1);
  CHECK(st.value(0, 0, 0) == 1);
}

TEST_CASE("rank of composite formulas matches elimination") {
  const std::uint64_t p = kMersenne61;
  std::mt19937_64 rng(21);
  Formula f = parse("A*B + C", Shape{4, 4});
  std::vector<UM> in(3, UM(4, 4, 0));
  RankState st(f, in, p, 5);
  CHECK(st.rank() == 0);
  std::uniform_int_distribution<std::size_t> leaf(0, 2), idx(0, 3);
  std::size_t prev = st.rank();
  for (int step = 0; step < 60; ++step) {
    std::size_t l = leaf(rng), i = idx(rng), j = idx(rng);
    std::uint64_t v = rng() % 3;
    in[l](i, j) = v;
    std::size_t r = st.update(l, i, j, v);
    CHECK(r == oracle::rank_elimination_mod_p(oracle::eval_mod_p(f, in, p), p));
    CHECK((r > prev ? r - prev : prev - r) <= 1);
    prev = r;
  }
}

TEST_CASE("rank through an inversion") {
  const std::uint64_t p = 1000003;
  Formula f = parse("A*inv(B)", Shape{3, 3});
  std::vector<UM> in{UM(3, 3, 0), diag({1, 2, 3})};
  RankState st(f, in, p, 9);
  CHECK(st.rank() == 0);
  in[0](1, 2) = 5;
  CHECK(st.update(0, 1, 2, 5) == 1);
  CHECK_THROWS_AS(st.update(1, 0, 0, 0), SingularInversion);
  CHECK(st.rank() == 1);
  in[1](0, 1) = 4;
  CHECK(st.update(1, 0, 1, 4) == oracle::rank_elimination_mod_p(oracle::eval_mod_p(f, in, p), p));
}
