#pragma once

// Naive exact reference implementations. Nothing here is shared with the
// engines they are used to check.

#include <cstddef>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "formulads/formula.hpp"
#include "formulads/matrix.hpp"
#include "formulads/scalars.hpp"

namespace formulads::oracle {

using QMatrix = Matrix<Rational>;

QMatrix eval_exact(const Formula& f, const std::vector<QMatrix>& inputs);

// Same evaluation, also returning the value fed to each inversion gate
// (post-order, matching the construction's registry order).
QMatrix eval_exact(const Formula& f, const std::vector<QMatrix>& inputs,
                   std::vector<QMatrix>& inversion_inputs);

// Evaluation over Z_p; throws SingularInversion.
Matrix<std::uint64_t> eval_mod_p(const Formula& f, const std::vector<Matrix<std::uint64_t>>& inputs,
                                 std::uint64_t p);

Rational det_bareiss(const QMatrix& a);
Rational det_cofactor(const QMatrix& a);  // n <= 8
QMatrix inv_exact(const QMatrix& a);      // throws SingularMatrix
std::size_t rank_elimination_mod_p(const Matrix<std::uint64_t>& a, std::uint64_t p);
std::uint64_t det_mod_p(const Matrix<std::uint64_t>& a, std::uint64_t p);

QMatrix identity_q(std::size_t n);
QMatrix mul_q(const QMatrix& a, const QMatrix& b);

struct Graph {
  std::size_t n = 0;
  std::vector<bool> active;
  std::set<std::pair<std::size_t, std::size_t>> edges;  // original vertices, first < second
  std::vector<std::size_t> rep;                         // merge map, rep[v] == v for representatives

  explicit Graph(std::size_t vertices = 0);
  void insert(std::size_t u, std::size_t v);
  void remove(std::size_t u, std::size_t v);
  // class of v joins u's class
  void merge(std::size_t u, std::size_t v);
  std::size_t find(std::size_t v) const;
  // quotient edges between distinct active representatives
  std::set<std::pair<std::size_t, std::size_t>> quotient_edges() const;
};

std::size_t max_matching_bruteforce(const Graph& g);  // throws TooLarge for n > 12

struct PerturbationBounds {
  double lower = 0;
  double upper = 0;
  double epshat = 0;
  double sigma_max = 0;
  Rational epshat_exact;  // the double epshat, as an exact rational
  Rational lower_exact;
  Rational upper_exact;
};

// |det A| (1 + epshat tr(A^-1 X) -+ eps^2/n), epshat = eps / (n^2 sigma_max(A^-1 X))
PerturbationBounds det_perturbation_bounds(const QMatrix& a, const QMatrix& x, double eps);

// sigma_max by power iteration on M^T M, relative tolerance 1e-9, 10 n^2 iterations
double sigma_max_power(const Matrix<double>& m);

double frobenius_q(const QMatrix& a);

}  // namespace formulads::oracle
