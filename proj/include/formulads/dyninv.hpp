#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "formulads/errors.hpp"
#include "formulads/matrix.hpp"
#include "formulads/ring.hpp"

namespace formulads {

// Gauss-Jordan with partial pivoting in the ring's arithmetic. Exact for
// exact rings; throws SingularMatrix when a pivot falls under the ring's
// singularity tolerance.
template <class Ring>
Matrix<typename Ring::value_type> approx_inverse(const Ring& ring,
                                                 const Matrix<typename Ring::value_type>& z) {
  using T = typename Ring::value_type;
  if (!z.square()) throw std::invalid_argument("approx_inverse: not square");
  std::size_t n = z.rows();
  Matrix<T> m = z;
  Matrix<T> inv = identity(ring, n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = n;
    double best = -1;
    for (std::size_t r = c; r < n; ++r) {
      if (ring.is_zero(m(r, c))) continue;
      double mag = ring.magnitude(m(r, c));
      if (piv == n || mag > best) {
        best = mag;
        piv = r;
      }
    }
    if (piv == n) throw SingularMatrix();
    double scale = 0;
    for (std::size_t j = c; j < n; ++j) scale = std::max(scale, ring.magnitude(m(piv, j)));
    if (ring.negligible(m(piv, c), scale)) throw SingularMatrix();
    if (piv != c)
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(m(piv, j), m(c, j));
        std::swap(inv(piv, j), inv(c, j));
      }
    T s = ring.one() / m(c, c);
    for (std::size_t j = c + 1; j < n; ++j)
      if (!ring.is_zero(m(c, j))) m(c, j) = m(c, j) * s;
    for (std::size_t j = 0; j < n; ++j)
      if (!ring.is_zero(inv(c, j))) inv(c, j) = inv(c, j) * s;
    m(c, c) = ring.one();
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || ring.is_zero(m(r, c))) continue;
      T f = m(r, c);
      for (std::size_t j = c + 1; j < n; ++j)
        if (!ring.is_zero(m(c, j))) m(r, j) -= f * m(c, j);
      for (std::size_t j = 0; j < n; ++j)
        if (!ring.is_zero(inv(c, j))) inv(r, j) -= f * inv(c, j);
      m(r, c) = ring.zero();
    }
  }
  return inv;
}

struct EngineSnapshot {
  std::string kind;
  std::size_t n = 0;
  std::size_t updates_since_reset = 0;
  double ledger = 0;  // (k+1) eps' bound on the maintained inverse's backward error
  std::size_t pairs = 0;
  std::size_t buffer_fill = 0;
  std::size_t resets = 0;
  std::size_t flushes = 0;
};

namespace detail {

// D^-1 for the small Woodbury core, translating singularity to SingularUpdate.
template <class Ring>
Matrix<typename Ring::value_type> core_inverse(const Ring& ring, const Matrix<typename Ring::value_type>& d) {
  try {
    return approx_inverse(ring, d);
  } catch (const SingularMatrix&) {
    throw SingularUpdate();
  }
}

template <class Ring>
Matrix<typename Ring::value_type> transpose_times(const Ring& ring, const Matrix<typename Ring::value_type>& v,
                                                  const Matrix<typename Ring::value_type>& a) {
  // v^T a
  auto out = zeros(ring, v.cols(), a.cols());
  for (std::size_t k = 0; k < v.rows(); ++k)
    for (std::size_t i = 0; i < v.cols(); ++i) {
      if (ring.is_zero(v(k, i))) continue;
      for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) += v(k, i) * a(k, j);
    }
  return out;
}

template <class Ring>
void add_outer(const Ring& ring, Matrix<typename Ring::value_type>& z, const Matrix<typename Ring::value_type>& u,
               const Matrix<typename Ring::value_type>& v) {
  // z += u v^T
  for (std::size_t i = 0; i < u.rows(); ++i)
    for (std::size_t c = 0; c < u.cols(); ++c) {
      if (ring.is_zero(u(i, c))) continue;
      for (std::size_t j = 0; j < v.rows(); ++j)
        if (!ring.is_zero(v(j, c))) z(i, j) += u(i, c) * v(j, c);
    }
}

}  // namespace detail

// Explicit dense inverse with Sherman-Morrison-Woodbury updates and a full
// recomputation from the tracked true matrix every n updates.
template <class Ring>
class WoodburyState {
 public:
  using T = typename Ring::value_type;

  WoodburyState(Ring ring, Matrix<T> z, double eps_step = 0.0)
      : ring_(std::move(ring)), z_(std::move(z)), eps_step_(eps_step) {
    zinv_ = approx_inverse(ring_, z_);
  }

  std::size_t n() const { return z_.rows(); }
  const Matrix<T>& matrix() const { return z_; }
  const Matrix<T>& inverse() const { return zinv_; }
  const Ring& ring() const { return ring_; }
  double ledger() const { return static_cast<double>(k_ + 1) * eps_step_; }

  T query(std::size_t i, std::size_t j) const { return zinv_.at(i, j); }

  void update_entry(std::size_t i, std::size_t j, const T& delta) {
    if (i >= n() || j >= n()) throw std::out_of_range("update index out of range");
    T w = delta * zinv_(j, i);
    T d = ring_.one() + w;
    if (ring_.negligible(d, std::max(1.0, ring_.magnitude(w)))) throw SingularUpdate();
    T g = delta / d;
    std::vector<T> col(n(), ring_.zero()), row(zinv_.row(j).begin(), zinv_.row(j).end());
    for (std::size_t r = 0; r < n(); ++r) col[r] = zinv_(r, i) * g;
    subtract_outer(col, row);
    z_(i, j) += delta;
    after_update();
  }

  void update_rank1(const std::vector<T>& u, const std::vector<T>& v) {
    Matrix<T> U(n(), 1, ring_.zero()), V(n(), 1, ring_.zero());
    for (std::size_t i = 0; i < n(); ++i) {
      U(i, 0) = u.at(i);
      V(i, 0) = v.at(i);
    }
    update(U, V);
  }

  // Z <- Z + U V^T
  void update(const Matrix<T>& U, const Matrix<T>& V) {
    if (U.rows() != n() || V.rows() != n() || U.cols() != V.cols())
      throw std::invalid_argument("update shape mismatch");
    std::size_t m = U.cols();
    auto W = multiply(ring_, zinv_, U);                         // n x m
    auto Y = detail::transpose_times(ring_, V, zinv_);          // m x n
    auto D = detail::transpose_times(ring_, V, W);              // m x m
    for (std::size_t a = 0; a < m; ++a) D(a, a) += ring_.one();
    Matrix<T> Dinv;
    if (m == 1) {
      double scale = std::max(1.0, ring_.magnitude(D(0, 0) - ring_.one()));
      if (ring_.negligible(D(0, 0), scale)) throw SingularUpdate();
      Dinv = Matrix<T>(1, 1, ring_.one() / D(0, 0));
    } else {
      Dinv = detail::core_inverse(ring_, D);
    }
    auto G = multiply(ring_, W, Dinv);  // n x m
    for (std::size_t r = 0; r < n(); ++r)
      for (std::size_t a = 0; a < m; ++a) {
        if (ring_.is_zero(G(r, a))) continue;
        for (std::size_t c = 0; c < n(); ++c)
          if (!ring_.is_zero(Y(a, c))) zinv_(r, c) -= G(r, a) * Y(a, c);
      }
    detail::add_outer(ring_, z_, U, V);
    after_update();
  }

  EngineSnapshot snapshot() const {
    return EngineSnapshot{"explicit", n(), k_, ledger(), 0, 0, resets_, 0};
  }

 private:
  void subtract_outer(const std::vector<T>& col, const std::vector<T>& row) {
    for (std::size_t r = 0; r < n(); ++r) {
      if (ring_.is_zero(col[r])) continue;
      for (std::size_t c = 0; c < n(); ++c)
        if (!ring_.is_zero(row[c])) zinv_(r, c) -= col[r] * row[c];
    }
  }

  void after_update() {
    if (++k_ >= n()) {
      zinv_ = approx_inverse(ring_, z_);
      k_ = 0;
      ++resets_;
    }
  }

  Ring ring_;
  Matrix<T> z_;
  Matrix<T> zinv_;
  double eps_step_ = 0;
  std::size_t k_ = 0;
  std::size_t resets_ = 0;
};

inline std::size_t ceil_pow(std::size_t n, double e) {
  double v = std::pow(static_cast<double>(n), e);
  auto r = static_cast<std::size_t>(std::ceil(v - 1e-12));
  return r == 0 ? 1 : r;
}

// Lazy engine: base inverse plus a list of low-rank corrections, folded into
// the base every ceil(n^(mu-nu)) updates and rebuilt from scratch every n.
template <class Ring>
class LazyState {
 public:
  using T = typename Ring::value_type;

  LazyState(Ring ring, Matrix<T> z, double mu, double nu, double eps_step = 0.0)
      : ring_(std::move(ring)), z_(std::move(z)), mu_(mu), nu_(nu), eps_step_(eps_step) {
    if (!(nu >= 0 && nu <= mu && mu <= 1)) throw std::invalid_argument("need 0 <= nu <= mu <= 1");
    minv_ = approx_inverse(ring_, z_);
    flush_every_ = ceil_pow(n(), mu_ - nu_);
    max_cols_ = ceil_pow(n(), nu_);
  }

  std::size_t n() const { return z_.rows(); }
  std::size_t flush_every() const { return flush_every_; }
  std::size_t max_columns() const { return max_cols_; }
  std::size_t pair_count() const { return pairs_.size(); }
  const Matrix<T>& matrix() const { return z_; }
  const Matrix<T>& base_inverse() const { return minv_; }
  double ledger() const { return static_cast<double>(k_ + 1) * eps_step_; }

  T query(std::size_t i, std::size_t j) const {
    if (i >= n() || j >= n()) throw std::out_of_range("query index out of range");
    T v = minv_(i, j);
    for (const auto& [L, R] : pairs_)
      for (std::size_t b = 0; b < L.cols(); ++b)
        if (!ring_.is_zero(L(i, b)) && !ring_.is_zero(R(b, j))) v -= L(i, b) * R(b, j);
    return v;
  }

  std::vector<T> query_row(std::size_t i) const {
    std::vector<T> row(minv_.row(i).begin(), minv_.row(i).end());
    for (const auto& [L, R] : pairs_)
      for (std::size_t b = 0; b < L.cols(); ++b) {
        if (ring_.is_zero(L(i, b))) continue;
        for (std::size_t j = 0; j < n(); ++j)
          if (!ring_.is_zero(R(b, j))) row[j] -= L(i, b) * R(b, j);
      }
    return row;
  }

  void update_entry(std::size_t i, std::size_t j, const T& delta) {
    if (i >= n() || j >= n()) throw std::out_of_range("update index out of range");
    Matrix<T> U(n(), 1, ring_.zero()), V(n(), 1, ring_.zero());
    U(i, 0) = delta;
    V(j, 0) = ring_.one();
    update_columns(U, V);
  }

  // Z <- Z + U V^T where every column of V has at most one nonzero.
  void update_columns(const Matrix<T>& U, const Matrix<T>& V) {
    std::size_t c = U.cols();
    if (U.rows() != n() || V.rows() != n() || V.cols() != c)
      throw std::invalid_argument("update shape mismatch");
    if (c > max_cols_) throw std::invalid_argument("too many columns for this engine");
    std::vector<std::size_t> vrow(c, n());
    for (std::size_t b = 0; b < c; ++b)
      for (std::size_t r = 0; r < n(); ++r) {
        if (ring_.is_zero(V(r, b))) continue;
        if (vrow[b] != n()) throw std::invalid_argument("V column with more than one nonzero");
        vrow[b] = r;
      }
    // L = Z~^-1 U through the implicit representation
    Matrix<T> L = zeros(ring_, n(), c);
    for (std::size_t b = 0; b < c; ++b) {
      for (std::size_t q = 0; q < n(); ++q) {
        if (ring_.is_zero(U(q, b))) continue;
        for (std::size_t r = 0; r < n(); ++r)
          if (!ring_.is_zero(minv_(r, q))) L(r, b) += minv_(r, q) * U(q, b);
      }
      for (const auto& [Lp, Rp] : pairs_)
        for (std::size_t a = 0; a < Lp.cols(); ++a) {
          T ru = ring_.zero();
          for (std::size_t q = 0; q < n(); ++q)
            if (!ring_.is_zero(U(q, b)) && !ring_.is_zero(Rp(a, q))) ru += Rp(a, q) * U(q, b);
          if (ring_.is_zero(ru)) continue;
          for (std::size_t r = 0; r < n(); ++r)
            if (!ring_.is_zero(Lp(r, a))) L(r, b) -= Lp(r, a) * ru;
        }
    }
    // V^T Z~^-1, one implicit row per column of V
    Matrix<T> VZ = zeros(ring_, c, n());
    for (std::size_t a = 0; a < c; ++a) {
      if (vrow[a] == n()) continue;
      auto row = query_row(vrow[a]);
      const T& s = V(vrow[a], a);
      for (std::size_t j = 0; j < n(); ++j)
        if (!ring_.is_zero(row[j])) VZ(a, j) = s * row[j];
    }
    Matrix<T> D = identity(ring_, c);
    double scale = 1.0;
    for (std::size_t a = 0; a < c; ++a) {
      if (vrow[a] == n()) continue;
      for (std::size_t b = 0; b < c; ++b) {
        T t = V(vrow[a], a) * L(vrow[a], b);
        scale = std::max(scale, ring_.magnitude(t));
        D(a, b) += t;
      }
    }
    Matrix<T> Dinv;
    if (c == 1) {
      if (ring_.negligible(D(0, 0), scale)) throw SingularUpdate();
      Dinv = Matrix<T>(1, 1, ring_.one() / D(0, 0));
    } else {
      Dinv = detail::core_inverse(ring_, D);
    }
    Matrix<T> R = multiply(ring_, Dinv, VZ);
    pairs_.emplace_back(std::move(L), std::move(R));
    pendU_.push_back(U);
    pendV_.push_back(V);
    detail::add_outer(ring_, z_, U, V);
    ++k_;
    if (k_ >= n()) {
      reset();
    } else if (pairs_.size() >= flush_every_) {
      flush();
    }
  }

  EngineSnapshot snapshot() const {
    return EngineSnapshot{"lazy", n(), k_, ledger(), pairs_.size(), 0, resets_, flushes_};
  }

 private:
  // One Woodbury step from the base with all pending columns stacked.
  void flush() {
    std::size_t total = 0;
    for (const auto& u : pendU_) total += u.cols();
    Matrix<T> U = zeros(ring_, n(), total), V = zeros(ring_, n(), total);
    std::size_t off = 0;
    for (std::size_t p = 0; p < pendU_.size(); ++p) {
      for (std::size_t b = 0; b < pendU_[p].cols(); ++b)
        for (std::size_t r = 0; r < n(); ++r) {
          U(r, off + b) = pendU_[p](r, b);
          V(r, off + b) = pendV_[p](r, b);
        }
      off += pendU_[p].cols();
    }
    auto W = multiply(ring_, minv_, U);
    auto Y = detail::transpose_times(ring_, V, minv_);
    auto D = detail::transpose_times(ring_, V, W);
    for (std::size_t a = 0; a < total; ++a) D(a, a) += ring_.one();
    Matrix<T> Dinv;
    try {
      Dinv = approx_inverse(ring_, D);
    } catch (const SingularMatrix&) {
      reset();  // cannot happen in exact arithmetic; recover from the true matrix
      return;
    }
    auto G = multiply(ring_, W, Dinv);
    for (std::size_t r = 0; r < n(); ++r)
      for (std::size_t a = 0; a < total; ++a) {
        if (ring_.is_zero(G(r, a))) continue;
        for (std::size_t j = 0; j < n(); ++j)
          if (!ring_.is_zero(Y(a, j))) minv_(r, j) -= G(r, a) * Y(a, j);
      }
    pairs_.clear();
    pendU_.clear();
    pendV_.clear();
    ++flushes_;
  }

  void reset() {
    minv_ = approx_inverse(ring_, z_);
    pairs_.clear();
    pendU_.clear();
    pendV_.clear();
    k_ = 0;
    ++resets_;
  }

  Ring ring_;
  Matrix<T> z_;
  Matrix<T> minv_;
  double mu_, nu_;
  double eps_step_ = 0;
  std::size_t flush_every_ = 1;
  std::size_t max_cols_ = 1;
  std::vector<std::pair<Matrix<T>, Matrix<T>>> pairs_;
  std::vector<Matrix<T>> pendU_, pendV_;
  std::size_t k_ = 0;
  std::size_t resets_ = 0;
  std::size_t flushes_ = 0;
};

// Entry updates are buffered in U, V (n x K, K = ceil(n^nu)); the value is
// M^-1 - M^-1 U C^-1 V^T M^-1 with C = I + V^T M^-1 U tracked explicitly.
template <class Ring>
class TwoLevelState {
 public:
  using T = typename Ring::value_type;

  TwoLevelState(Ring ring, Matrix<T> z, double mu, double nu, double eps_step = 0.0)
      : ring_(ring),
        base_(ring, z, mu, nu, eps_step),
        z_(std::move(z)),
        K_(ceil_pow(z_.rows(), nu)),
        U_(zeros(ring, z_.rows(), K_)),
        V_(zeros(ring, z_.rows(), K_)),
        ctrack_(ring, identity(ring, K_), eps_step) {}

  std::size_t n() const { return z_.rows(); }
  std::size_t buffer_columns() const { return K_; }
  std::size_t buffer_fill() const { return fill_; }
  const Matrix<T>& matrix() const { return z_; }
  const Matrix<T>& U() const { return U_; }
  const Matrix<T>& V() const { return V_; }
  const WoodburyState<Ring>& c_tracker() const { return ctrack_; }
  const LazyState<Ring>& base() const { return base_; }
  double ledger() const { return base_.ledger() + ctrack_.ledger(); }

  T query(std::size_t i, std::size_t j) const {
    if (i >= n() || j >= n()) throw std::out_of_range("query index out of range");
    T v = base_.query(i, j);
    if (fill_ == 0) return v;
    const auto& cinv = ctrack_.inverse();
    std::vector<T> x(fill_, ring_.zero()), y(fill_, ring_.zero());
    for (std::size_t b = 0; b < fill_; ++b) x[b] = delta_[b] * base_.query(i, irow_[b]);
    for (std::size_t a = 0; a < fill_; ++a) y[a] = base_.query(jcol_[a], j);
    for (std::size_t b = 0; b < fill_; ++b) {
      if (ring_.is_zero(x[b])) continue;
      T acc = ring_.zero();
      for (std::size_t a = 0; a < fill_; ++a)
        if (!ring_.is_zero(y[a])) acc += cinv(b, a) * y[a];
      v -= x[b] * acc;
    }
    return v;
  }

  void update_entry(std::size_t i, std::size_t j, const T& delta) {
    if (i >= n() || j >= n()) throw std::out_of_range("update index out of range");
    std::size_t k = fill_;
    // one rank-2 step: row k gains r, column k gains c (both against the base)
    Matrix<T> Uc = zeros(ring_, K_, 2), Vc = zeros(ring_, K_, 2);
    for (std::size_t b = 0; b < k; ++b) Vc(b, 0) = delta_[b] * base_.query(j, irow_[b]);
    Vc(k, 0) = delta * base_.query(j, i);
    Uc(k, 0) = ring_.one();
    for (std::size_t a = 0; a < k; ++a) Uc(a, 1) = delta * base_.query(jcol_[a], i);
    Vc(k, 1) = ring_.one();
    ctrack_.update(Uc, Vc);
    U_(i, k) = delta;
    V_(j, k) = ring_.one();
    irow_.push_back(i);
    jcol_.push_back(j);
    delta_.push_back(delta);
    z_(i, j) += delta;
    if (++fill_ == K_) flush();
  }

  EngineSnapshot snapshot() const {
    auto b = base_.snapshot();
    return EngineSnapshot{"twolevel", n(), b.updates_since_reset, ledger(), b.pairs, fill_, b.resets, flushes_};
  }

 private:
  void flush() {
    base_.update_columns(U_, V_);
    U_ = zeros(ring_, n(), K_);
    V_ = zeros(ring_, n(), K_);
    irow_.clear();
    jcol_.clear();
    delta_.clear();
    ctrack_ = WoodburyState<Ring>(ring_, identity(ring_, K_), 0.0);
    fill_ = 0;
    ++flushes_;
  }

  Ring ring_;
  LazyState<Ring> base_;
  Matrix<T> z_;
  std::size_t K_;
  Matrix<T> U_, V_;
  std::vector<std::size_t> irow_, jcol_;
  std::vector<T> delta_;
  WoodburyState<Ring> ctrack_;
  std::size_t fill_ = 0;
  std::size_t flushes_ = 0;
};

enum class EngineKind { Explicit, Lazy, TwoLevel };

std::string to_string(EngineKind kind);
EngineKind parse_engine_kind(const std::string& text);

struct EngineParams {
  EngineKind kind = EngineKind::Explicit;
  double mu = 0.528;
  double nu = 0.0;
  double eps_step = 0.0;
};

// Query-fast exponents for the lazy engine, the fast-update constants for
// the two-level engine.
inline EngineParams default_params(EngineKind kind) {
  switch (kind) {
    case EngineKind::Explicit: return {kind, 0.0, 0.0, 0.0};
    case EngineKind::Lazy: return {kind, 0.528, 0.0, 0.0};
    case EngineKind::TwoLevel: return {kind, 0.86118267, 0.54294416, 0.0};
  }
  return {};
}

// Value-semantic wrapper over the three engines; copying snapshots the state.
template <class Ring>
class InverseEngine {
 public:
  using T = typename Ring::value_type;

  InverseEngine(Ring ring, Matrix<T> z, const EngineParams& p) : v_(make(std::move(ring), std::move(z), p)) {}

  std::size_t n() const { return std::visit([](const auto& e) { return e.n(); }, v_); }
  const Matrix<T>& matrix() const {
    return std::visit([](const auto& e) -> const Matrix<T>& { return e.matrix(); }, v_);
  }
  T query(std::size_t i, std::size_t j) const {
    return std::visit([&](const auto& e) { return e.query(i, j); }, v_);
  }
  void update_entry(std::size_t i, std::size_t j, const T& delta) {
    std::visit([&](auto& e) { e.update_entry(i, j, delta); }, v_);
  }
  EngineSnapshot snapshot() const {
    return std::visit([](const auto& e) { return e.snapshot(); }, v_);
  }
  double ledger() const { return std::visit([](const auto& e) { return e.ledger(); }, v_); }

 private:
  using Variant = std::variant<WoodburyState<Ring>, LazyState<Ring>, TwoLevelState<Ring>>;

  static Variant make(Ring ring, Matrix<T> z, const EngineParams& p) {
    switch (p.kind) {
      case EngineKind::Explicit: return WoodburyState<Ring>(std::move(ring), std::move(z), p.eps_step);
      case EngineKind::Lazy: return LazyState<Ring>(std::move(ring), std::move(z), p.mu, p.nu, p.eps_step);
      case EngineKind::TwoLevel: return TwoLevelState<Ring>(std::move(ring), std::move(z), p.mu, p.nu, p.eps_step);
    }
    throw std::invalid_argument("unknown engine kind");
  }

  Variant v_;
};

// Working fractional bits for the certified policy.
unsigned certified_frac_bits(double kappa, std::size_t t_max, double eps);

}  // namespace formulads
