#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "formulads/rank.hpp"

namespace formulads {

struct GraphUpdate {
  enum class Kind { Insert, Remove, On, Off, Merge };
  Kind kind;
  std::size_t u = 0;
  std::size_t v = 0;  // unused by On/Off

  static GraphUpdate insert(std::size_t a, std::size_t b) { return {Kind::Insert, a, b}; }
  static GraphUpdate remove(std::size_t a, std::size_t b) { return {Kind::Remove, a, b}; }
  static GraphUpdate on(std::size_t a) { return {Kind::On, a, 0}; }
  static GraphUpdate off(std::size_t a) { return {Kind::Off, a, 0}; }
  static GraphUpdate merge(std::size_t a, std::size_t b) { return {Kind::Merge, a, b}; }
};

// "ins u v", "del u v", "on v", "off v", "merge u v"
GraphUpdate parse_graph_update(const std::string& line);
std::string to_string(const GraphUpdate& up);

// Maximum matching size as rank(I1 T I2) / 2 for the random Tutte matrix T.
class TutteState {
 public:
  TutteState(std::size_t n, std::uint64_t p = kMersenne61, std::uint64_t seed = 0);

  std::size_t apply(const GraphUpdate& up);
  std::size_t matching_size() const;
  std::size_t tutte_rank() const { return rank_.rank(); }
  std::size_t n() const { return n_; }
  const RankState& rank_state() const { return rank_; }

  bool is_on(std::size_t v) const { return on_.at(v); }
  bool is_representative(std::size_t v) const { return rep_.at(v) == v; }
  bool has_edge(std::size_t u, std::size_t v) const;
  std::size_t representative(std::size_t v) const { return rep_.at(v); }

 private:
  static constexpr std::size_t kI1 = 0, kT = 1, kI2 = 2;

  void check_live(std::size_t v) const;
  std::uint64_t variable(std::size_t u, std::size_t v);
  void set(std::size_t leaf, std::size_t i, std::size_t j, std::uint64_t value);
  std::vector<std::size_t> members(std::size_t r) const;

  std::size_t n_;
  std::uint64_t p_;
  std::mt19937_64 rng_;
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> x_;  // memoized edge variables
  std::vector<bool> on_;
  std::vector<std::size_t> rep_;
  RankState rank_;
};

}  // namespace formulads
