#include <doctest.h>

#include <random>

#include "formulads/errors.hpp"
#include "formulads/matching.hpp"
#include "formulads/oracle.hpp"

using namespace formulads;
using U = GraphUpdate;

TEST_CASE("fresh states") {
  CHECK(TutteState(4).matching_size() == 0);
  CHECK(TutteState(1).matching_size() == 0);
  CHECK_THROWS_AS(TutteState(4, 15), ConfigError);
}

TEST_CASE("small graphs") {
  TutteState a(4, kMersenne61, 1);
  CHECK(a.apply(U::insert(0, 1)) == 1);

  TutteState tri(4, kMersenne61, 2);
  tri.apply(U::insert(0, 1));
  tri.apply(U::insert(1, 2));
  CHECK(tri.apply(U::insert(0, 2)) == 1);
  CHECK(tri.apply(U::insert(2, 3)) == 2);

  TutteState off(4, kMersenne61, 3);
  off.apply(U::insert(0, 1));
  CHECK(off.apply(U::off(1)) == 0);
  CHECK(off.apply(U::on(1)) == 1);
}

TEST_CASE("matchings of standard graphs") {
  TutteState lines(8, kMersenne61, 4);
  for (std::size_t i = 0; i < 8; i += 2) lines.apply(U::insert(i, i + 1));
  CHECK(lines.matching_size() == 4);

  TutteState k4(4, kMersenne61, 5);
  for (std::size_t u = 0; u < 4; ++u)
    for (std::size_t v = u + 1; v < 4; ++v) k4.apply(U::insert(u, v));
  CHECK(k4.matching_size() == 2);
  CHECK(k4.tutte_rank() == 4);
}

TEST_CASE("merging contracts vertices") {
  TutteState st(4, kMersenne61, 6);
  st.apply(U::insert(0, 1));
  st.apply(U::insert(2, 3));
  CHECK(st.matching_size() == 2);
  // {0,2} becomes one vertex adjacent to 1 and 3
  CHECK(st.apply(U::merge(0, 2)) == 1);
  CHECK_FALSE(st.is_representative(2));
  CHECK(st.representative(2) == 0);
  CHECK_THROWS_AS(st.apply(U::insert(2, 1)), InvalidVertex);
  CHECK_THROWS_AS(st.apply(U::insert(1, 1)), InvalidVertex);
  CHECK_THROWS_AS(st.apply(U::on(9)), InvalidVertex);
}

TEST_CASE("update stream parsing") {
  CHECK(parse_graph_update("ins 1 2").kind == U::Kind::Insert);
  CHECK(parse_graph_update("del 1 2").kind == U::Kind::Remove);
  CHECK(parse_graph_update("off 3").u == 3);
  CHECK(parse_graph_update("merge 0 4").v == 4);
  CHECK(to_string(parse_graph_update("on 2")) == "on 2");
  CHECK_THROWS_AS(parse_graph_update("jump 1"), ConfigError);
  CHECK_THROWS_AS(parse_graph_update("ins 1"), ConfigError);
}

TEST_CASE("random update streams match brute force") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = 7;
    TutteState st(n, kMersenne61, seed);
    oracle::Graph g(n);
    std::uniform_int_distribution<std::size_t> vtx(0, n - 1);
    std::uniform_int_distribution<int> op(0, 9);
    for (int step = 0; step < 60; ++step) {
      std::size_t u = vtx(rng), v = vtx(rng);
      if (!st.is_representative(u) || !st.is_representative(v) || u == v) continue;
      int o = op(rng);
      if (o < 5) {
        st.apply(U::insert(u, v));
        g.insert(u, v);
      } else if (o < 7) {
        st.apply(U::remove(u, v));
        g.remove(u, v);
      } else if (o < 8) {
        st.apply(U::off(u));
        g.active[u] = false;
      } else if (o < 9) {
        st.apply(U::on(u));
        g.active[u] = true;
      } else {
        st.apply(U::merge(u, v));
        g.merge(u, v);
      }
      CHECK(st.matching_size() == oracle::max_matching_bruteforce(g));
      CHECK(st.tutte_rank() % 2 == 0);
    }
  }
}
