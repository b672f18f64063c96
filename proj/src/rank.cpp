#include "formulads/rank.hpp"

#include <random>

#include "formulads/errors.hpp"
#include "formulads/ring.hpp"

namespace formulads {

namespace {

using UMatrix = Matrix<std::uint64_t>;

// Gauss-Jordan mod p; returns false when singular.
bool invert_mod(const UMatrix& a, std::uint64_t p, UMatrix& inv, std::uint64_t& det) {
  std::size_t n = a.rows();
  UMatrix m = a;
  inv = UMatrix(n, n, 0);
  for (std::size_t i = 0; i < n; ++i) inv(i, i) = 1;
  det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && m(piv, c) == 0) ++piv;
    if (piv == n) {
      det = 0;
      return false;
    }
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(m(piv, j), m(c, j));
        std::swap(inv(piv, j), inv(c, j));
      }
      det = det == 0 ? 0 : p - det;
    }
    det = mulmod(det, m(c, c), p);
    std::uint64_t s = invmod(m(c, c), p);
    for (std::size_t j = 0; j < n; ++j) {
      if (m(c, j)) m(c, j) = mulmod(m(c, j), s, p);
      if (inv(c, j)) inv(c, j) = mulmod(inv(c, j), s, p);
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m(r, c) == 0) continue;
      std::uint64_t f = m(r, c);
      for (std::size_t j = 0; j < n; ++j) {
        if (m(c, j)) m(r, j) = submod(m(r, j), mulmod(f, m(c, j), p), p);
        if (inv(c, j)) inv(r, j) = submod(inv(r, j), mulmod(f, inv(c, j), p), p);
      }
    }
  }
  return true;
}

std::uint64_t det_small(UMatrix m, std::uint64_t p) {
  std::size_t n = m.rows();
  std::uint64_t det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && m(piv, c) == 0) ++piv;
    if (piv == n) return 0;
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(piv, j), m(c, j));
      det = p - det;
    }
    det = mulmod(det, m(c, c), p);
    std::uint64_t s = invmod(m(c, c), p);
    for (std::size_t r = c + 1; r < n; ++r) {
      if (m(r, c) == 0) continue;
      std::uint64_t f = mulmod(m(r, c), s, p);
      for (std::size_t j = c; j < n; ++j) m(r, j) = submod(m(r, j), mulmod(f, m(c, j), p), p);
    }
  }
  return det;
}

}  // namespace

FieldDetState::FieldDetState(Matrix<std::uint64_t> z, std::uint64_t p) : z_(std::move(z)), p_(p) {
  if (!z_.square()) throw std::invalid_argument("FieldDetState: not square");
  if (!invert_mod(z_, p_, zinv_, det_)) throw SingularMatrix();
}

std::uint64_t FieldDetState::probe_entry(std::size_t i, std::size_t j, std::uint64_t delta) const {
  return addmod(1, mulmod(delta % p_, zinv_(j, i), p_), p_);
}

void FieldDetState::apply_entry(std::size_t i, std::size_t j, std::uint64_t delta, std::uint64_t factor) {
  std::size_t n = this->n();
  std::uint64_t g = mulmod(delta % p_, invmod(factor, p_), p_);
  std::vector<std::uint64_t> col(n), row(zinv_.row(j).begin(), zinv_.row(j).end());
  for (std::size_t r = 0; r < n; ++r) col[r] = mulmod(zinv_(r, i), g, p_);
  for (std::size_t r = 0; r < n; ++r) {
    std::uint64_t cr = col[r];
    if (cr == 0) continue;
    auto dst = zinv_.row(r);
    for (std::size_t c = 0; c < n; ++c)
      if (row[c]) dst[c] = submod(dst[c], mulmod(cr, row[c], p_), p_);
  }
  z_(i, j) = addmod(z_(i, j), delta % p_, p_);
  det_ = mulmod(det_, factor, p_);
}

bool FieldDetState::try_update_entry(std::size_t i, std::size_t j, std::uint64_t delta) {
  std::uint64_t c = probe_entry(i, j, delta);
  if (c == 0) return false;
  apply_entry(i, j, delta, c);
  return true;
}

FieldElem FieldDetState::update_rank1(const std::vector<FieldElem>& u, const std::vector<FieldElem>& v) {
  std::size_t n = this->n();
  if (u.size() != n || v.size() != n) throw std::invalid_argument("update_rank1: length mismatch");
  // w = Z^-1 u, y = v^T Z^-1
  std::vector<std::uint64_t> w(n, 0), y(n, 0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t q = 0; q < n; ++q) {
      if (u[q].residue()) w[r] = addmod(w[r], mulmod(zinv_(r, q), u[q].residue(), p_), p_);
      if (v[q].residue()) y[r] = addmod(y[r], mulmod(v[q].residue(), zinv_(q, r), p_), p_);
    }
  std::uint64_t c = 1;
  for (std::size_t q = 0; q < n; ++q) c = addmod(c, mulmod(v[q].residue(), w[q], p_), p_);
  if (c == 0) throw ZeroDeterminant();
  std::uint64_t cinv = invmod(c, p_);
  for (std::size_t r = 0; r < n; ++r) {
    if (w[r] == 0) continue;
    std::uint64_t s = mulmod(w[r], cinv, p_);
    for (std::size_t q = 0; q < n; ++q)
      if (y[q]) zinv_(r, q) = submod(zinv_(r, q), mulmod(s, y[q], p_), p_);
  }
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t q = 0; q < n; ++q)
      if (u[r].residue() && v[q].residue())
        z_(r, q) = addmod(z_(r, q), mulmod(u[r].residue(), v[q].residue(), p_), p_);
  det_ = mulmod(det_, c, p_);
  return FieldElem(c, p_);
}

Matrix<std::uint64_t> FieldDetState::core(const std::vector<EntryDelta>& d) const {
  std::size_t m = d.size();
  UMatrix D(m, m, 0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      D(a, b) = addmod(a == b ? 1 : 0, mulmod(d[b].delta % p_, zinv_(d[a].col, d[b].row), p_), p_);
  return D;
}

std::uint64_t FieldDetState::probe_entries(const std::vector<EntryDelta>& d) const {
  if (d.empty()) return 1;
  return det_small(core(d), p_);
}

void FieldDetState::apply_entries(const std::vector<EntryDelta>& d, std::uint64_t factor) {
  if (d.empty()) return;
  std::size_t n = this->n(), m = d.size();
  UMatrix Dinv;
  std::uint64_t unused = 0;
  if (!invert_mod(core(d), p_, Dinv, unused)) throw ZeroDeterminant();
  // W = Z^-1 U (n x m), Y = V^T Z^-1 (m x n)
  UMatrix W(n, m, 0), Y(m, n, 0);
  for (std::size_t b = 0; b < m; ++b)
    for (std::size_t r = 0; r < n; ++r) W(r, b) = mulmod(zinv_(r, d[b].row), d[b].delta % p_, p_);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t c = 0; c < n; ++c) Y(a, c) = zinv_(d[a].col, c);
  UMatrix G(n, m, 0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) G(r, b) = addmod(G(r, b), mulmod(W(r, a), Dinv(a, b), p_), p_);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t a = 0; a < m; ++a) {
      if (G(r, a) == 0) continue;
      for (std::size_t c = 0; c < n; ++c)
        if (Y(a, c)) zinv_(r, c) = submod(zinv_(r, c), mulmod(G(r, a), Y(a, c), p_), p_);
    }
  for (const auto& e : d) z_(e.row, e.col) = addmod(z_(e.row, e.col), e.delta % p_, p_);
  det_ = mulmod(det_, factor, p_);
}

FieldElem fp_det_rank1(FieldDetState& st, const std::vector<FieldElem>& u, const std::vector<FieldElem>& v) {
  return st.update_rank1(u, v);
}

// ---- RankState -----------------------------------------------------------------

namespace {

std::string fresh_name(const DimTable& dims, const std::string& base) {
  std::string name = base;
  for (int i = 0; dims.count(name); ++i) name = base + std::to_string(i);
  return name;
}

struct Embedding {
  Formula g;
  std::string p, q, r;
};

Embedding make_embedding(const Formula& f, std::size_t n) {
  DimTable dims = f.dims();
  std::string p = fresh_name(dims, "Pemb");
  dims[p] = Shape{3 * n, n};
  std::string q = fresh_name(dims, "Qemb");
  dims[q] = Shape{n, 3 * n};
  std::string r = fresh_name(dims, "Remb");
  dims[r] = Shape{3 * n, 3 * n};
  NodePtr root = make_binary(
      GateKind::Add,
      make_binary(GateKind::Mul, make_binary(GateKind::Mul, make_input(p), f.root()), make_input(q)),
      make_input(r));
  return Embedding{Formula(root, dims), p, q, r};
}

}  // namespace

RankState::RankState(const Formula& f, std::vector<Matrix<std::uint64_t>> inputs, std::uint64_t p,
                     std::uint64_t seed)
    : n_(0), p_(p), g_(f), inputs_(std::move(inputs)) {
  if (!is_prime(p_) || p_ < 3 || p_ >= (std::uint64_t{1} << 63))
    throw ConfigError("modulus must be an odd prime below 2^63");
  DimCheck dc = check_dims(f);
  if (dc.output.rows != dc.output.cols) throw NonSquareOutput();
  n_ = dc.output.rows;
  auto leaves = enumerate_leaves(f);
  if (leaves.size() != inputs_.size()) throw std::invalid_argument("one input per leaf required");
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    if (inputs_[l].rows() != leaves[l].shape.rows || inputs_[l].cols() != leaves[l].shape.cols)
      throw DimensionMismatch("leaf " + leaves[l].name);
  }
  for (auto& m : inputs_)
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (auto& v : m.row(i)) v %= p_;

  Embedding emb = make_embedding(f, n_);
  g_ = emb.g;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> dist(0, p_ - 1);
  X_ = UMatrix(n_, n_, 0);
  Y_ = UMatrix(n_, n_, 0);
  for (auto* m : {&X_, &Y_})
    for (std::size_t i = 0; i < n_; ++i)
      for (auto& v : m->row(i)) v = dist(rng);

  // start from k = n, where g is invertible with high probability
  k_ = n_;
  PrimeFieldRing ring{p_};
  std::vector<Matrix<FieldElem>> g_inputs;
  for (const auto& m : embedding_inputs())
    g_inputs.push_back(map_matrix(m, [&](std::uint64_t v) { return FieldElem(v, p_); }, ring.zero()));
  auto cons = build(ring, g_, g_inputs);
  auto hat = build_hat(ring, cons);
  blocks_ = cons.leaf_blocks;
  auto raw = [](const Matrix<FieldElem>& m) {
    return map_matrix(m, [](const FieldElem& e) { return e.residue(); }, std::uint64_t{0});
  };
  try {
    n_state_ = FieldDetState(raw(cons.N), p_);
  } catch (const SingularMatrix&) {
    throw SingularInversion("root");
  }
  try {
    hat_state_ = FieldDetState(raw(hat.Nhat), p_);
  } catch (const SingularMatrix&) {
    throw InternalError("embedding with k = n is singular");
  }

  // smallest k: clear diagonal entries k..n-1 of I_k in one block step
  const LeafBlock& rb = blocks_.back();
  for (std::size_t k = 0; k < n_; ++k) {
    std::vector<EntryDelta> d;
    for (std::size_t t = k; t < n_; ++t) d.push_back({rb.row + 2 * n_ + t, rb.col + 2 * n_ + t, p_ - 1});
    std::uint64_t fh = hat_state_.probe_entries(d);
    if (fh == 0) continue;
    std::uint64_t fn = n_state_.probe_entries(d);
    if (fn == 0) continue;
    n_state_.apply_entries(d, fn);
    hat_state_.apply_entries(d, fh);
    k_ = k;
    break;
  }
}

std::vector<Matrix<std::uint64_t>> RankState::embedding_inputs() const {
  std::vector<UMatrix> out;
  UMatrix P(3 * n_, n_, 0), Q(n_, 3 * n_, 0), R(3 * n_, 3 * n_, 0);
  for (std::size_t i = 0; i < n_; ++i) {
    P(i, i) = 1;
    Q(i, i) = 1;
  }
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) {
      R(i, n_ + j) = X_(i, j);
      R(n_ + i, j) = Y_(i, j);
    }
  for (std::size_t t = 0; t < n_; ++t) {
    R(n_ + t, 2 * n_ + t) = 1;
    R(2 * n_ + t, n_ + t) = 1;
    if (t < k_) R(2 * n_ + t, 2 * n_ + t) = 1;
  }
  out.push_back(P);
  for (const auto& m : inputs_) out.push_back(m);
  out.push_back(Q);
  out.push_back(R);
  return out;
}

FieldElem RankState::det_g() const { return hat_state_.det() / n_state_.det(); }

bool RankState::try_apply(std::size_t r, std::size_t c, std::uint64_t delta) {
  std::uint64_t fn = n_state_.probe_entry(r, c, delta);
  if (fn == 0) throw SingularInversion("update makes an inversion gate singular");
  std::uint64_t fh = hat_state_.probe_entry(r, c, delta);
  if (fh == 0) return false;
  n_state_.apply_entry(r, c, delta, fn);
  hat_state_.apply_entry(r, c, delta, fh);
  return true;
}

bool RankState::try_toggle(std::size_t t, bool on) {
  const LeafBlock& rb = blocks_.back();
  std::size_t pos = 2 * n_ + t;
  bool ok = try_apply(rb.row + pos, rb.col + pos, on ? 1 : p_ - 1);
  if (ok) ++stats_.toggles;
  return ok;
}

std::size_t RankState::update(std::size_t leaf, std::size_t i, std::size_t j, std::uint64_t value) {
  if (leaf >= inputs_.size()) throw UnknownLeaf(leaf);
  auto& m = inputs_[leaf];
  if (i >= m.rows() || j >= m.cols()) throw std::out_of_range("entry outside input");
  value %= p_;
  std::uint64_t delta = submod(value, m(i, j), p_);
  ++stats_.updates;
  if (delta == 0) return rank();
  const LeafBlock& lb = blocks_.at(leaf + 1);
  std::size_t r = lb.row + i, c = lb.col + j;
  if (!try_apply(r, c, delta)) {
    // rank drops: add the (k+1)-th one to I_k, then re-apply
    ++stats_.reverted;
    for (;;) {
      if (k_ == n_) throw InternalError("cannot restore a nonzero determinant");
      if (!try_toggle(k_, true)) throw InternalError("adding a one to I_k left det(g) = 0");
      ++k_;
      ++stats_.increments;
      if (try_apply(r, c, delta)) break;
    }
  } else if (k_ > 0) {
    if (try_toggle(k_ - 1, false)) {
      --k_;
      ++stats_.decrements;
    }
  }
  m(i, j) = value;
  return rank();
}

nlohmann::json RankState::snapshot_json() const {
  return {{"rank", rank()},
          {"k", k_},
          {"n", n_},
          {"updates", stats_.updates},
          {"increments", stats_.increments},
          {"decrements", stats_.decrements},
          {"reverted", stats_.reverted},
          {"toggles", stats_.toggles}};
}

}  // namespace formulads
