#include "formulads/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "formulads/errors.hpp"

namespace formulads::oracle {

QMatrix identity_q(std::size_t n) {
  QMatrix m(n, n, Rational(0));
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

QMatrix mul_q(const QMatrix& a, const QMatrix& b) {
  QMatrix out(a.rows(), b.cols(), Rational(0));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (sgn(a(i, k)) == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += a(i, k) * b(k, j);
    }
  return out;
}

// Gauss-Jordan on [A | I]; first nonzero pivot, zero entries skipped.
QMatrix inv_exact(const QMatrix& a) {
  if (!a.square()) throw std::invalid_argument("inv_exact: not square");
  std::size_t n = a.rows();
  QMatrix m = a;
  QMatrix inv = identity_q(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && sgn(m(piv, c)) == 0) ++piv;
    if (piv == n) throw SingularMatrix();
    if (piv != c)
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(m(piv, j), m(c, j));
        std::swap(inv(piv, j), inv(c, j));
      }
    Rational s = 1 / m(c, c);
    for (std::size_t j = 0; j < n; ++j) {
      if (sgn(m(c, j))) m(c, j) *= s;
      if (sgn(inv(c, j))) inv(c, j) *= s;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || sgn(m(r, c)) == 0) continue;
      Rational factor = m(r, c);
      for (std::size_t j = 0; j < n; ++j) {
        if (sgn(m(c, j))) m(r, j) -= factor * m(c, j);
        if (sgn(inv(c, j))) inv(r, j) -= factor * inv(c, j);
      }
    }
  }
  return inv;
}

namespace {

QMatrix add_q(const QMatrix& a, const QMatrix& b, int sign) {
  QMatrix out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (sign > 0)
        out(i, j) += b(i, j);
      else
        out(i, j) -= b(i, j);
    }
  return out;
}

struct ExactEval {
  const std::vector<QMatrix>& inputs;
  std::vector<QMatrix>* inv_inputs;
  std::size_t next = 0;

  QMatrix run(const NodePtr& node, const std::string& path) {
    const Node& n = *node;
    switch (n.kind) {
      case GateKind::Input:
        if (next >= inputs.size()) throw std::invalid_argument("too few inputs");
        return inputs[next++];
      case GateKind::Inv: {
        QMatrix c = run(n.lhs, path + "/inv");
        if (!c.square()) throw NonSquareInversion(path);
        if (inv_inputs) inv_inputs->push_back(c);
        try {
          return inv_exact(c);
        } catch (const SingularMatrix&) {
          throw SingularInversion(path);
        }
      }
      case GateKind::Add:
      case GateKind::Sub: {
        QMatrix l = run(n.lhs, path + "/lhs");
        QMatrix r = run(n.rhs, path + "/rhs");
        if (l.rows() != r.rows() || l.cols() != r.cols()) throw DimensionMismatch(path);
        return add_q(l, r, n.kind == GateKind::Add ? 1 : -1);
      }
      case GateKind::Mul: {
        QMatrix l = run(n.lhs, path + "/lhs");
        QMatrix r = run(n.rhs, path + "/rhs");
        if (l.cols() != r.rows()) throw DimensionMismatch(path);
        return mul_q(l, r);
      }
    }
    throw std::logic_error("unknown gate");
  }
};

}  // namespace

QMatrix eval_exact(const Formula& f, const std::vector<QMatrix>& inputs) {
  ExactEval ev{inputs, nullptr};
  return ev.run(f.root(), "root");
}

QMatrix eval_exact(const Formula& f, const std::vector<QMatrix>& inputs,
                   std::vector<QMatrix>& inversion_inputs) {
  inversion_inputs.clear();
  ExactEval ev{inputs, &inversion_inputs};
  return ev.run(f.root(), "root");
}

// ---- mod p -----------------------------------------------------------------

namespace {

using UMatrix = Matrix<std::uint64_t>;

std::uint64_t mm(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % p);
}

std::uint64_t pw(std::uint64_t a, std::uint64_t e, std::uint64_t p) {
  std::uint64_t r = 1;
  while (e) {
    if (e & 1) r = mm(r, a, p);
    a = mm(a, a, p);
    e >>= 1;
  }
  return r;
}

bool inv_mod_p(const UMatrix& a, std::uint64_t p, UMatrix& out) {
  std::size_t n = a.rows();
  UMatrix m = a;
  out = UMatrix(n, n, 0);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && m(piv, c) == 0) ++piv;
    if (piv == n) return false;
    for (std::size_t j = 0; j < n; ++j) {
      std::swap(m(piv, j), m(c, j));
      std::swap(out(piv, j), out(c, j));
    }
    std::uint64_t s = pw(m(c, c), p - 2, p);
    for (std::size_t j = 0; j < n; ++j) {
      m(c, j) = mm(m(c, j), s, p);
      out(c, j) = mm(out(c, j), s, p);
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || m(r, c) == 0) continue;
      std::uint64_t fct = p - m(r, c);
      for (std::size_t j = 0; j < n; ++j) {
        m(r, j) = (m(r, j) + mm(fct, m(c, j), p)) % p;
        out(r, j) = (out(r, j) + mm(fct, out(c, j), p)) % p;
      }
    }
  }
  return true;
}

struct ModEval {
  const std::vector<UMatrix>& inputs;
  std::uint64_t p;
  std::size_t next = 0;

  UMatrix run(const NodePtr& node, const std::string& path) {
    const Node& n = *node;
    switch (n.kind) {
      case GateKind::Input: return inputs.at(next++);
      case GateKind::Inv: {
        UMatrix c = run(n.lhs, path + "/inv");
        UMatrix out;
        if (!inv_mod_p(c, p, out)) throw SingularInversion(path);
        return out;
      }
      case GateKind::Add:
      case GateKind::Sub: {
        UMatrix l = run(n.lhs, path + "/lhs");
        UMatrix r = run(n.rhs, path + "/rhs");
        for (std::size_t i = 0; i < l.rows(); ++i)
          for (std::size_t j = 0; j < l.cols(); ++j)
            l(i, j) = n.kind == GateKind::Add ? (l(i, j) + r(i, j)) % p : (l(i, j) + p - r(i, j)) % p;
        return l;
      }
      case GateKind::Mul: {
        UMatrix l = run(n.lhs, path + "/lhs");
        UMatrix r = run(n.rhs, path + "/rhs");
        UMatrix out(l.rows(), r.cols(), 0);
        for (std::size_t i = 0; i < l.rows(); ++i)
          for (std::size_t k = 0; k < l.cols(); ++k)
            for (std::size_t j = 0; j < r.cols(); ++j)
              out(i, j) = (out(i, j) + mm(l(i, k), r(k, j), p)) % p;
        return out;
      }
    }
    throw std::logic_error("unknown gate");
  }
};

}  // namespace

Matrix<std::uint64_t> eval_mod_p(const Formula& f, const std::vector<Matrix<std::uint64_t>>& inputs,
                                 std::uint64_t p) {
  ModEval ev{inputs, p};
  return ev.run(f.root(), "root");
}

std::size_t rank_elimination_mod_p(const Matrix<std::uint64_t>& a, std::uint64_t p) {
  UMatrix m = a;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < m.cols() && rank < m.rows(); ++c) {
    std::size_t piv = rank;
    while (piv < m.rows() && m(piv, c) % p == 0) ++piv;
    if (piv == m.rows()) continue;
    for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(piv, j), m(rank, j));
    std::uint64_t s = pw(m(rank, c) % p, p - 2, p);
    for (std::size_t r = rank + 1; r < m.rows(); ++r) {
      if (m(r, c) % p == 0) continue;
      std::uint64_t fct = mm(m(r, c) % p, s, p);
      for (std::size_t j = c; j < m.cols(); ++j)
        m(r, j) = (m(r, j) % p + p - mm(fct, m(rank, j) % p, p)) % p;
    }
    ++rank;
  }
  return rank;
}

std::uint64_t det_mod_p(const Matrix<std::uint64_t>& a, std::uint64_t p) {
  UMatrix m = a;
  std::size_t n = m.rows();
  std::uint64_t det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && m(piv, c) % p == 0) ++piv;
    if (piv == n) return 0;
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(piv, j), m(c, j));
      det = (p - det) % p;
    }
    det = mm(det, m(c, c) % p, p);
    std::uint64_t s = pw(m(c, c) % p, p - 2, p);
    for (std::size_t r = c + 1; r < n; ++r) {
      if (m(r, c) % p == 0) continue;
      std::uint64_t fct = mm(m(r, c) % p, s, p);
      for (std::size_t j = c; j < n; ++j) m(r, j) = (m(r, j) % p + p - mm(fct, m(c, j) % p, p)) % p;
    }
  }
  return det;
}

// ---- determinants -------------------------------------------------------------

// Rows are scaled to integers, then fraction-free elimination with exact
// division by the previous pivot.
Rational det_bareiss(const QMatrix& a) {
  if (!a.square()) throw std::invalid_argument("det_bareiss: not square");
  std::size_t n = a.rows();
  if (n == 0) return Rational(1);
  Matrix<BigInt> m(n, n, BigInt(0));
  BigInt scale = 1;
  for (std::size_t i = 0; i < n; ++i) {
    BigInt l = 1;
    for (std::size_t j = 0; j < n; ++j) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), a(i, j).get_den_mpz_t());
    for (std::size_t j = 0; j < n; ++j) m(i, j) = a(i, j).get_num() * (l / a(i, j).get_den());
    scale *= l;
  }
  int sign = 1;
  BigInt prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m(k, k) == 0) {
      std::size_t piv = k + 1;
      while (piv < n && m(piv, k) == 0) ++piv;
      if (piv == n) return Rational(0);
      for (std::size_t j = 0; j < n; ++j) std::swap(m(piv, j), m(k, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) {
        BigInt t = m(i, j) * m(k, k) - m(i, k) * m(k, j);
        mpz_divexact(m(i, j).get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
      }
    prev = m(k, k);
  }
  Rational det(m(n - 1, n - 1) * sign, scale);
  det.canonicalize();
  return det;
}

namespace {
Rational cofactor_rec(const QMatrix& a, std::vector<std::size_t>& cols, std::size_t row) {
  if (row == a.rows()) return Rational(1);
  Rational total = 0;
  int sign = 1;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    std::size_t c = cols[k];
    if (sgn(a(row, c)) != 0) {
      cols.erase(cols.begin() + static_cast<long>(k));
      Rational sub = cofactor_rec(a, cols, row + 1);
      cols.insert(cols.begin() + static_cast<long>(k), c);
      if (sign > 0)
        total += a(row, c) * sub;
      else
        total -= a(row, c) * sub;
    }
    sign = -sign;
  }
  return total;
}
}  // namespace

Rational det_cofactor(const QMatrix& a) {
  if (!a.square()) throw std::invalid_argument("det_cofactor: not square");
  if (a.rows() > 8) throw TooLarge("cofactor expansion beyond 8x8");
  std::vector<std::size_t> cols(a.cols());
  std::iota(cols.begin(), cols.end(), 0);
  return cofactor_rec(a, cols, 0);
}

double frobenius_q(const QMatrix& a) {
  double s = 0;
  for (const auto& v : a.data()) {
    double d = v.get_d();
    s += d * d;
  }
  return std::sqrt(s);
}

// ---- matching ------------------------------------------------------------------

Graph::Graph(std::size_t vertices) : n(vertices), active(vertices, true), rep(vertices) {
  std::iota(rep.begin(), rep.end(), 0);
}

void Graph::insert(std::size_t u, std::size_t v) { edges.insert({std::min(u, v), std::max(u, v)}); }

void Graph::remove(std::size_t u, std::size_t v) { edges.erase({std::min(u, v), std::max(u, v)}); }

void Graph::merge(std::size_t u, std::size_t v) {
  std::size_t ru = find(u), rv = find(v);
  for (auto& r : rep)
    if (r == rv) r = ru;
}

std::size_t Graph::find(std::size_t v) const { return rep.at(v); }

std::set<std::pair<std::size_t, std::size_t>> Graph::quotient_edges() const {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (auto [a, b] : edges) {
    std::size_t ra = rep[a], rb = rep[b];
    if (ra == rb || !active[ra] || !active[rb]) continue;
    out.insert({std::min(ra, rb), std::max(ra, rb)});
  }
  return out;
}

std::size_t max_matching_bruteforce(const Graph& g) {
  if (g.n > 12) throw TooLarge("brute-force matching beyond 12 vertices");
  std::vector<unsigned> adj(g.n, 0);
  for (auto [a, b] : g.quotient_edges()) {
    adj[a] |= 1u << b;
    adj[b] |= 1u << a;
  }
  std::vector<int> memo(std::size_t{1} << g.n, -1);
  // best matching inside vertex set mask
  auto solve = [&](auto&& self, unsigned mask) -> int {
    if (mask == 0) return 0;
    int& slot = memo[mask];
    if (slot >= 0) return slot;
    unsigned v = static_cast<unsigned>(__builtin_ctz(mask));
    unsigned rest = mask & ~(1u << v);
    int best = self(self, rest);
    for (unsigned nb = adj[v] & rest; nb; nb &= nb - 1) {
      unsigned u = static_cast<unsigned>(__builtin_ctz(nb));
      best = std::max(best, 1 + self(self, rest & ~(1u << u)));
    }
    return slot = best;
  };
  unsigned all = g.n == 0 ? 0u : (g.n == 32 ? ~0u : ((1u << g.n) - 1));
  return static_cast<std::size_t>(solve(solve, all));
}

// ---- perturbation bounds ---------------------------------------------------------

double sigma_max_power(const Matrix<double>& m) {
  std::size_t n = m.cols();
  std::size_t rows = m.rows();
  // B = M^T M
  Matrix<double> b(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < rows; ++k) s += m(k, i) * m(k, j);
      b(i, j) = s;
    }
  bool all_zero = std::all_of(b.data().begin(), b.data().end(), [](double x) { return x == 0.0; });
  if (all_zero) return 0.0;
  std::vector<double> v(n), w(n);
  // fixed, non-symmetric start so no eigenvector is missed by construction
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.37 * static_cast<double>(i) + 0.11 * static_cast<double>(i * i);
  auto normalize = [](std::vector<double>& x) {
    double s = 0;
    for (double t : x) s += t * t;
    s = std::sqrt(s);
    for (double& t : x) t /= s;
  };
  normalize(v);
  double lambda = 0;
  std::size_t cap = 10 * n * n;
  for (std::size_t it = 0; it < cap; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < n; ++j) s += b(i, j) * v[j];
      w[i] = s;
    }
    double rq = 0;
    for (std::size_t i = 0; i < n; ++i) rq += v[i] * w[i];
    double norm = 0;
    for (double t : w) norm += t * t;
    norm = std::sqrt(norm);
    if (norm == 0) return 0.0;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
    if (it > 0 && std::fabs(rq - lambda) <= 1e-9 * std::fabs(rq)) return std::sqrt(rq);
    lambda = rq;
  }
  throw Error("power iteration did not converge");
}

PerturbationBounds det_perturbation_bounds(const QMatrix& a, const QMatrix& x, double eps) {
  std::size_t n = a.rows();
  if (n < 2 || !a.square() || x.rows() != n || x.cols() != n)
    throw std::invalid_argument("perturbation bounds need square n >= 2 inputs");
  if (!(eps >= 0 && eps <= 1)) throw std::invalid_argument("eps must lie in [0, 1]");
  QMatrix ainv = inv_exact(a);
  QMatrix ax = mul_q(ainv, x);
  Matrix<double> axd(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) axd(i, j) = ax(i, j).get_d();
  PerturbationBounds out;
  out.sigma_max = sigma_max_power(axd);
  out.epshat = out.sigma_max == 0 ? 0.0 : eps / (static_cast<double>(n * n) * out.sigma_max);
  out.epshat_exact = Rational(out.epshat);
  Rational trace = 0;
  for (std::size_t i = 0; i < n; ++i) trace += ax(i, i);
  Rational e(eps);
  Rational slack = e * e / Rational(static_cast<long>(n));
  Rational d = abs(det_bareiss(a));
  Rational mid = 1 + out.epshat_exact * trace;
  out.lower_exact = d * (mid - slack);
  out.upper_exact = d * (mid + slack);
  out.lower = out.lower_exact.get_d();
  out.upper = out.upper_exact.get_d();
  return out;
}

}  // namespace formulads::oracle
