#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include <json.hpp>

#include "formulads/construct.hpp"
#include "formulads/dyninv.hpp"
#include "formulads/errors.hpp"
#include "formulads/formula.hpp"
#include "formulads/ring.hpp"

namespace formulads {

struct SignedLogDet {
  int sign = 1;         // -1, 0, +1
  double log_abs = 0;   // ln|det|, meaningless when sign == 0

  double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }

  friend SignedLogDet operator*(const SignedLogDet& a, const SignedLogDet& b) {
    if (a.sign == 0 || b.sign == 0) return {0, 0};
    return {a.sign * b.sign, a.log_abs + b.log_abs};
  }
  friend SignedLogDet operator/(const SignedLogDet& a, const SignedLogDet& b) {
    if (b.sign == 0) throw std::domain_error("division by a zero determinant");
    if (a.sign == 0) return {0, 0};
    return {a.sign * b.sign, a.log_abs - b.log_abs};
  }
  friend bool operator==(const SignedLogDet&, const SignedLogDet&) = default;
};

// ln|x| without overflow for the big-number scalars
inline double log_abs(const Rational& q) {
  long en = 0, ed = 0;
  double dn = mpz_get_d_2exp(&en, q.get_num_mpz_t());
  double dd = mpz_get_d_2exp(&ed, q.get_den_mpz_t());
  return std::log(std::fabs(dn)) - std::log(dd) + static_cast<double>(en - ed) * std::log(2.0);
}
inline double log_abs(const FixedPoint& x) {
  long e = 0;
  double d = mpz_get_d_2exp(&e, x.mantissa().get_mpz_t());
  return std::log(std::fabs(d)) + static_cast<double>(e - static_cast<long>(x.frac_bits())) * std::log(2.0);
}
inline double log_abs(double x) { return std::log(std::fabs(x)); }

inline int sign_of(const Rational& q) { return sgn(q); }
inline int sign_of(const FixedPoint& x) { return x.sign(); }
inline int sign_of(double x) { return (x > 0) - (x < 0); }

template <class Ring>
SignedLogDet to_signed_log(const Ring& ring, const typename Ring::value_type& v) {
  if (ring.is_zero(v)) return {0, 0};
  return {sign_of(v), log_abs(v)};
}

// Householder QR: det = (-1)^(reflections) * prod R_ii.
template <class Ring>
SignedLogDet signed_logdet_qr(const Ring& ring, const Matrix<typename Ring::value_type>& a) {
  static_assert(Ring::has_sqrt, "Householder QR needs square roots");
  using T = typename Ring::value_type;
  if (!a.square()) throw std::invalid_argument("signed_logdet_qr: not square");
  std::size_t n = a.rows();
  Matrix<T> r = a;
  double scale = std::max(1.0, frobenius(ring, a));
  int reflections = 0;
  SignedLogDet out{1, 0.0};
  std::vector<T> v(n, ring.zero());
  for (std::size_t k = 0; k < n; ++k) {
    T sigma = ring.zero();
    for (std::size_t i = k + 1; i < n; ++i)
      if (!ring.is_zero(r(i, k))) sigma += r(i, k) * r(i, k);
    if (!ring.is_zero(sigma)) {
      T x0 = r(k, k);
      T norm = ring.sqrt(x0 * x0 + sigma);
      T alpha = sign_of(x0) >= 0 ? -norm : norm;
      v[k] = x0 - alpha;
      for (std::size_t i = k + 1; i < n; ++i) v[i] = r(i, k);
      T vtv = v[k] * v[k] + sigma;
      T two = ring.from_int(2);
      for (std::size_t j = k; j < n; ++j) {
        T s = ring.zero();
        for (std::size_t i = k; i < n; ++i)
          if (!ring.is_zero(v[i])) s += v[i] * r(i, j);
        if (ring.is_zero(s)) continue;
        T f = two * s / vtv;
        for (std::size_t i = k; i < n; ++i)
          if (!ring.is_zero(v[i])) r(i, j) -= f * v[i];
      }
      r(k, k) = alpha;
      for (std::size_t i = k + 1; i < n; ++i) r(i, k) = ring.zero();
      ++reflections;
    }
    if (ring.negligible(r(k, k), scale)) throw SingularMatrix();
    out = out * to_signed_log(ring, r(k, k));
  }
  if (reflections % 2) out.sign = -out.sign;
  return out;
}

// Plain elimination for exact rings.
template <class Ring>
SignedLogDet signed_logdet_exact(const Ring& ring, const Matrix<typename Ring::value_type>& a) {
  using T = typename Ring::value_type;
  std::size_t n = a.rows();
  Matrix<T> m = a;
  SignedLogDet out{1, 0.0};
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && ring.is_zero(m(piv, c))) ++piv;
    if (piv == n) throw SingularMatrix();
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(piv, j), m(c, j));
      out.sign = -out.sign;
    }
    out = out * to_signed_log(ring, m(c, c));
    for (std::size_t r = c + 1; r < n; ++r) {
      if (ring.is_zero(m(r, c))) continue;
      T f = m(r, c) / m(c, c);
      for (std::size_t j = c; j < n; ++j)
        if (!ring.is_zero(m(c, j))) m(r, j) -= f * m(c, j);
    }
  }
  return out;
}

template <class Ring>
SignedLogDet signed_logdet(const Ring& ring, const Matrix<typename Ring::value_type>& a) {
  if constexpr (Ring::exact)
    return signed_logdet_exact(ring, a);
  else
    return signed_logdet_qr(ring, a);
}

struct DetTrackerOptions {
  EngineParams engine = default_params(EngineKind::Explicit);
  double eps = 1e-3;
  std::size_t t_max = 16;
};

// Maintains det f = det(N^) / det(N) under entry updates of the inputs.
template <class Ring>
class DetTracker {
 public:
  using T = typename Ring::value_type;

  DetTracker(Ring ring, Formula f, std::vector<Matrix<Rational>> inputs, DetTrackerOptions opt = {})
      : ring_(std::move(ring)), f_(std::move(f)), inputs_(std::move(inputs)), opt_(opt) {
    std::vector<Matrix<T>> converted;
    for (const auto& m : inputs_) converted.push_back(convert(ring_, m));
    cons_ = build(ring_, f_, converted);
    if (cons_.output.rows != cons_.output.cols) throw NonSquareOutput();
    auto hat = build_hat(ring_, cons_);
    if (!Ring::exact) opt_.engine.eps_step = opt_.eps / (2.0 * static_cast<double>(std::max<std::size_t>(opt_.t_max, 1)));
    start(cons_.N, hat.Nhat);
  }

  SignedLogDet current() const { return ld_hat_ / ld_n_; }
  double current_det() const { return current().value(); }
  SignedLogDet log_det_N() const { return ld_n_; }
  SignedLogDet log_det_Nhat() const { return ld_hat_; }
  std::size_t undo_depth() const { return undo_.size(); }
  std::size_t restarts() const { return restarts_; }
  const Construction<T>& construction() const { return cons_; }
  const std::vector<Matrix<Rational>>& inputs() const { return inputs_; }
  const InverseEngine<Ring>& engine_N() const { return *inv_n_; }
  const InverseEngine<Ring>& engine_Nhat() const { return *inv_hat_; }

  SignedLogDet update(std::size_t leaf, std::size_t i, std::size_t j, const Rational& delta) {
    const LeafBlock& lb = locate_input(cons_, leaf);
    if (i >= lb.shape.rows || j >= lb.shape.cols) throw std::out_of_range("entry outside input");
    std::size_t r = lb.row + i, c = lb.col + j;
    T d = ring_.from_rational(delta);
    // N + d e_r e_c^T: 1 + v^T N^-1 u = 1 + d (N^-1)_{c,r}; N^ is padded with zeros
    T w1 = d * inv_n_->query(c, r);
    T w2 = d * inv_hat_->query(c, r);
    T d1 = ring_.one() + w1;
    T d2 = ring_.one() + w2;
    if (ring_.negligible(d1, std::max(1.0, ring_.magnitude(w1))) ||
        ring_.negligible(d2, std::max(1.0, ring_.magnitude(w2))))
      throw SingularUpdate();
    undo_.push_back(Record{*inv_n_, *inv_hat_, ld_n_, ld_hat_, leaf, i, j, delta, since_restart_});
    try {
      inv_n_->update_entry(r, c, d);
      inv_hat_->update_entry(r, c, d);
    } catch (...) {
      restore(undo_.back());
      undo_.pop_back();
      throw;
    }
    ld_n_ = ld_n_ * to_signed_log(ring_, d1);
    ld_hat_ = ld_hat_ * to_signed_log(ring_, d2);
    inputs_[leaf](i, j) += delta;
    cons_.N(r, c) += d;
    if (++since_restart_ >= cons_.size()) {
      Matrix<T> n_now = inv_n_->matrix(), hat_now = inv_hat_->matrix();
      start(n_now, hat_now);
      ++restarts_;
    }
    return current();
  }

  SignedLogDet revert() {
    if (undo_.empty()) throw EmptyUndoLog();
    Record rec = std::move(undo_.back());
    undo_.pop_back();
    const LeafBlock& lb = locate_input(cons_, rec.leaf);
    cons_.N(lb.row + rec.i, lb.col + rec.j) -= ring_.from_rational(rec.delta);
    inputs_[rec.leaf](rec.i, rec.j) -= rec.delta;
    restore(rec);
    return current();
  }

  nlohmann::json snapshot_json() const {
    auto s = inv_n_->snapshot();
    auto h = inv_hat_->snapshot();
    SignedLogDet d = current();
    return {{"sign", d.sign},         {"log_abs", d.log_abs},     {"undo_depth", undo_.size()},
            {"ledger_N", s.ledger},   {"ledger_Nhat", h.ledger}, {"restarts", restarts_},
            {"engine", s.kind}};
  }

 private:
  struct Record {
    InverseEngine<Ring> inv_n, inv_hat;
    SignedLogDet ld_n, ld_hat;
    std::size_t leaf, i, j;
    Rational delta;
    std::size_t since_restart;
  };

  void start(const Matrix<T>& n_mat, const Matrix<T>& hat_mat) {
    ld_n_ = signed_logdet(ring_, n_mat);
    ld_hat_ = signed_logdet(ring_, hat_mat);
    inv_n_.emplace(ring_, n_mat, opt_.engine);
    inv_hat_.emplace(ring_, hat_mat, opt_.engine);
    since_restart_ = 0;
  }

  void restore(const Record& rec) {
    inv_n_.emplace(rec.inv_n);
    inv_hat_.emplace(rec.inv_hat);
    ld_n_ = rec.ld_n;
    ld_hat_ = rec.ld_hat;
    since_restart_ = rec.since_restart;
  }

  Ring ring_;
  Formula f_;
  std::vector<Matrix<Rational>> inputs_;
  DetTrackerOptions opt_;
  Construction<T> cons_;
  std::optional<InverseEngine<Ring>> inv_n_, inv_hat_;
  SignedLogDet ld_n_, ld_hat_;
  std::vector<Record> undo_;
  std::size_t since_restart_ = 0;
  std::size_t restarts_ = 0;
};

// Fixed-point ring sized by the certified policy, with kappa measured as the
// largest Frobenius norm among N, N^ and their inverses.
FixedRing certified_fixed_ring(const Formula& f, const std::vector<Matrix<Rational>>& inputs,
                               std::size_t t_max, double eps);

}  // namespace formulads
