#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "formulads/construct.hpp"
#include "formulads/formula.hpp"
#include "formulads/matrix.hpp"
#include "formulads/scalars.hpp"

namespace formulads {

struct EntryDelta {
  std::size_t row;
  std::size_t col;
  std::uint64_t delta;  // residue mod p
};

// Exact inverse and determinant over Z_p under low-rank updates.
class FieldDetState {
 public:
  FieldDetState() = default;
  FieldDetState(Matrix<std::uint64_t> z, std::uint64_t p);  // throws SingularMatrix

  std::size_t n() const { return z_.rows(); }
  std::uint64_t modulus() const { return p_; }
  FieldElem det() const { return FieldElem(det_, p_); }
  const Matrix<std::uint64_t>& matrix() const { return z_; }
  const Matrix<std::uint64_t>& inverse() const { return zinv_; }

  // 1 + v^T Z^-1 u for Z + u v^T; throws ZeroDeterminant (state unchanged)
  // when it vanishes, otherwise applies Sherman-Morrison and returns it.
  FieldElem update_rank1(const std::vector<FieldElem>& u, const std::vector<FieldElem>& v);

  // Z(i,j) += delta
  std::uint64_t probe_entry(std::size_t i, std::size_t j, std::uint64_t delta) const;
  void apply_entry(std::size_t i, std::size_t j, std::uint64_t delta, std::uint64_t factor);
  bool try_update_entry(std::size_t i, std::size_t j, std::uint64_t delta);

  // Several entry changes at once: det(I + V^T Z^-1 U) and the Woodbury step.
  std::uint64_t probe_entries(const std::vector<EntryDelta>& d) const;
  void apply_entries(const std::vector<EntryDelta>& d, std::uint64_t factor);

 private:
  Matrix<std::uint64_t> core(const std::vector<EntryDelta>& d) const;

  Matrix<std::uint64_t> z_;
  Matrix<std::uint64_t> zinv_;
  std::uint64_t det_ = 1;
  std::uint64_t p_ = 0;
};

FieldElem fp_det_rank1(FieldDetState& st, const std::vector<FieldElem>& u, const std::vector<FieldElem>& v);

struct RankStats {
  std::size_t updates = 0;
  std::size_t increments = 0;  // k <- k+1
  std::size_t decrements = 0;  // k <- k-1
  std::size_t reverted = 0;    // updates that hit det(g) = 0 first
  std::size_t toggles = 0;     // I_k diagonal toggles applied
};

// rank(f) = n - k, with k the least defect for which det(P f Q + R_k) != 0.
class RankState {
 public:
  RankState(const Formula& f, std::vector<Matrix<std::uint64_t>> inputs,
            std::uint64_t p = kMersenne61, std::uint64_t seed = 0);

  std::size_t rank() const { return n_ - k_; }
  std::size_t defect() const { return k_; }
  std::size_t n() const { return n_; }
  std::uint64_t modulus() const { return p_; }
  const RankStats& stats() const { return stats_; }

  // Sets input `leaf` of f at (i, j) to value (mod p); returns the new rank.
  std::size_t update(std::size_t leaf, std::size_t i, std::size_t j, std::uint64_t value);
  std::uint64_t value(std::size_t leaf, std::size_t i, std::size_t j) const { return inputs_.at(leaf).at(i, j); }

  const Formula& embedding() const { return g_; }
  // Inputs of g in leaf order: P, f's leaves, Q, R_k.
  std::vector<Matrix<std::uint64_t>> embedding_inputs() const;
  const std::vector<Matrix<std::uint64_t>>& inputs() const { return inputs_; }
  // det(g) = det(N^) / det(N)
  FieldElem det_g() const;
  std::size_t construction_size() const { return n_state_.n(); }

  nlohmann::json snapshot_json() const;

 private:
  bool try_apply(std::size_t r, std::size_t c, std::uint64_t delta);
  bool try_toggle(std::size_t t, bool on);

  std::size_t n_;
  std::size_t k_ = 0;
  std::uint64_t p_;
  Formula g_;
  std::vector<Matrix<std::uint64_t>> inputs_;
  Matrix<std::uint64_t> X_, Y_;
  std::vector<LeafBlock> blocks_;  // leaf blocks of g's construction
  FieldDetState n_state_;
  FieldDetState hat_state_;
  RankStats stats_;
};

}  // namespace formulads
