#include "formulads/matching.hpp"

#include <sstream>

#include "formulads/errors.hpp"

namespace formulads {

namespace {

RankState make_rank(std::size_t n, std::uint64_t p, std::uint64_t seed) {
  if (n == 0) throw ConfigError("matching needs at least one vertex");
  if (!is_prime(p) || p < 3 || p >= (std::uint64_t{1} << 63))
    throw ConfigError("modulus must be an odd prime below 2^63");
  std::string d = std::to_string(n) + "x" + std::to_string(n);
  Formula f = parse("I1:" + d + "; T:" + d + "; I2:" + d + "; I1*T*I2");
  Matrix<std::uint64_t> eye(n, n, 0), zero(n, n, 0);
  for (std::size_t i = 0; i < n; ++i) eye(i, i) = 1;
  return RankState(f, {eye, zero, eye}, p, seed);
}

}  // namespace

GraphUpdate parse_graph_update(const std::string& line) {
  std::istringstream in(line);
  std::string op;
  long a = -1, b = -1;
  in >> op >> a;
  auto need_two = [&]() {
    if (!(in >> b) || b < 0) throw ConfigError("expected two vertices in '" + line + "'");
  };
  if (a < 0) throw ConfigError("expected a vertex in '" + line + "'");
  auto ua = static_cast<std::size_t>(a);
  GraphUpdate up{GraphUpdate::Kind::On, ua, 0};
  if (op == "ins") {
    need_two();
    up = GraphUpdate::insert(ua, static_cast<std::size_t>(b));
  } else if (op == "del") {
    need_two();
    up = GraphUpdate::remove(ua, static_cast<std::size_t>(b));
  } else if (op == "on") {
    up = GraphUpdate::on(ua);
  } else if (op == "off") {
    up = GraphUpdate::off(ua);
  } else if (op == "merge") {
    need_two();
    up = GraphUpdate::merge(ua, static_cast<std::size_t>(b));
  } else {
    throw ConfigError("unknown graph op '" + op + "'");
  }
  std::string rest;
  if (in >> rest) throw ConfigError("trailing tokens in '" + line + "'");
  return up;
}

std::string to_string(const GraphUpdate& up) {
  switch (up.kind) {
    case GraphUpdate::Kind::Insert: return "ins " + std::to_string(up.u) + " " + std::to_string(up.v);
    case GraphUpdate::Kind::Remove: return "del " + std::to_string(up.u) + " " + std::to_string(up.v);
    case GraphUpdate::Kind::On: return "on " + std::to_string(up.u);
    case GraphUpdate::Kind::Off: return "off " + std::to_string(up.u);
    case GraphUpdate::Kind::Merge: return "merge " + std::to_string(up.u) + " " + std::to_string(up.v);
  }
  return "?";
}

TutteState::TutteState(std::size_t n, std::uint64_t p, std::uint64_t seed)
    : n_(n), p_(p), rng_(seed ^ 0x9e3779b97f4a7c15ULL), on_(n, true), rep_(n), rank_(make_rank(n, p, seed)) {
  for (std::size_t v = 0; v < n; ++v) rep_[v] = v;
}

void TutteState::check_live(std::size_t v) const {
  if (v >= n_) throw InvalidVertex(std::to_string(v) + " out of range");
  if (rep_[v] != v) throw InvalidVertex(std::to_string(v) + " was merged away");
}

std::uint64_t TutteState::variable(std::size_t u, std::size_t v) {
  auto key = std::make_pair(std::min(u, v), std::max(u, v));
  auto it = x_.find(key);
  if (it != x_.end()) return it->second;
  std::uniform_int_distribution<std::uint64_t> dist(1, p_ - 1);
  std::uint64_t x = dist(rng_);
  x_.emplace(key, x);
  return x;
}

void TutteState::set(std::size_t leaf, std::size_t i, std::size_t j, std::uint64_t value) {
  if (rank_.value(leaf, i, j) != value) rank_.update(leaf, i, j, value);
}

std::vector<std::size_t> TutteState::members(std::size_t r) const {
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < n_; ++x)
    if (rep_[x] == r) out.push_back(x);
  return out;
}

bool TutteState::has_edge(std::size_t u, std::size_t v) const {
  if (u >= n_ || v >= n_ || u == v) return false;
  return rank_.value(kT, std::min(u, v), std::max(u, v)) != 0;
}

std::size_t TutteState::apply(const GraphUpdate& up) {
  using K = GraphUpdate::Kind;
  switch (up.kind) {
    case K::Insert:
    case K::Remove: {
      check_live(up.u);
      check_live(up.v);
      if (up.u == up.v) throw InvalidVertex("self loop");
      std::size_t a = std::min(up.u, up.v), b = std::max(up.u, up.v);
      if (up.kind == K::Insert) {
        std::uint64_t x = variable(a, b);
        set(kT, a, b, x);
        set(kT, b, a, p_ - x);
      } else {
        set(kT, a, b, 0);
        set(kT, b, a, 0);
      }
      break;
    }
    case K::On:
    case K::Off: {
      check_live(up.u);
      bool want = up.kind == K::On;
      if (on_[up.u] == want) break;
      for (std::size_t x : members(up.u)) {
        set(kI1, up.u, x, want ? 1 : 0);
        set(kI2, x, up.u, want ? 1 : 0);
      }
      on_[up.u] = want;
      break;
    }
    case K::Merge: {
      check_live(up.u);
      check_live(up.v);
      if (up.u == up.v) throw InvalidVertex("cannot merge a vertex with itself");
      auto moved = members(up.v);
      if (on_[up.u])
        for (std::size_t x : moved) {
          set(kI1, up.u, x, 1);
          set(kI2, x, up.u, 1);
        }
      for (std::size_t x : moved) {
        set(kI1, up.v, x, 0);
        set(kI2, x, up.v, 0);
        rep_[x] = up.u;
      }
      break;
    }
  }
  return matching_size();
}

std::size_t TutteState::matching_size() const {
  std::size_t r = rank_.rank();
  if (r % 2) throw InternalError("odd rank " + std::to_string(r) + " for a skew-symmetric matrix");
  return r / 2;
}

}  // namespace formulads
