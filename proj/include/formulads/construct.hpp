#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "formulads/errors.hpp"
#include "formulads/formula.hpp"
#include "formulads/matrix.hpp"
#include "formulads/ring.hpp"

namespace formulads {

struct LeafBlock {
  std::size_t leaf = 0;
  std::string name;
  std::size_t row = 0;  // offset of the input's top-left entry inside N
  std::size_t col = 0;
  Shape shape;
};

// Window of N holding an inversion gate's child block N' plus its I', J'.
struct InversionRecord {
  std::string path;
  std::size_t offset = 0;
  std::size_t size = 0;
  std::vector<std::size_t> I;  // absolute indices into N
  std::vector<std::size_t> J;
};

template <class T>
struct Construction {
  Matrix<T> N;
  std::vector<std::size_t> I;
  std::vector<std::size_t> J;
  std::vector<LeafBlock> leaf_blocks;
  std::vector<InversionRecord> inversions;
  std::size_t gates = 0;
  Shape output;

  std::size_t size() const { return N.rows(); }
};

template <class T>
struct HatConstruction {
  Matrix<T> Nhat;
  std::size_t base = 0;  // side of N
};

namespace detail {

template <class T>
struct Partial {
  Matrix<T> N;
  std::vector<std::size_t> I, J;
  std::vector<LeafBlock> leaves;
  std::vector<InversionRecord> inversions;
};

template <class T>
void shift_into(Partial<T>& dst, Partial<T>&& src, std::size_t off) {
  for (std::size_t i = 0; i < src.N.rows(); ++i)
    for (std::size_t j = 0; j < src.N.cols(); ++j) dst.N(off + i, off + j) = std::move(src.N(i, j));
  for (auto& lb : src.leaves) {
    lb.row += off;
    lb.col += off;
    dst.leaves.push_back(std::move(lb));
  }
  for (auto& rec : src.inversions) {
    rec.offset += off;
    for (auto& x : rec.I) x += off;
    for (auto& x : rec.J) x += off;
    dst.inversions.push_back(std::move(rec));
  }
}

template <class Ring>
class Builder {
 public:
  using T = typename Ring::value_type;

  Builder(const Ring& ring, const DimCheck& dims, std::span<const Matrix<T>> inputs)
      : ring_(ring), dims_(dims), inputs_(inputs) {}

  Partial<T> build(const NodePtr& node, const std::string& path) {
    const Node& n = *node;
    switch (n.kind) {
      case GateKind::Input: return input(n);
      case GateKind::Inv: return inverse(n, path);
      case GateKind::Add:
      case GateKind::Sub: return add(n, path);
      case GateKind::Mul: return mul(n, path);
    }
    throw std::logic_error("unknown gate");
  }

  std::size_t consumed() const { return next_leaf_; }

 private:
  Shape shape_of(const Node& n) const { return dims_.shapes.at(&n); }

  // [[I_n, A], [0, -I_m]]
  Partial<T> input(const Node& n) {
    if (next_leaf_ >= inputs_.size()) throw std::invalid_argument("too few leaf inputs");
    const Matrix<T>& a = inputs_[next_leaf_];
    Shape s = shape_of(n);
    if (a.rows() != s.rows || a.cols() != s.cols) throw DimensionMismatch("leaf " + n.name);
    std::size_t side = s.rows + s.cols;
    Partial<T> p{zeros(ring_, side, side), {}, {}, {}, {}};
    for (std::size_t i = 0; i < s.rows; ++i) {
      p.N(i, i) = ring_.one();
      for (std::size_t j = 0; j < s.cols; ++j) p.N(i, s.rows + j) = a(i, j);
      p.I.push_back(i);
    }
    for (std::size_t j = 0; j < s.cols; ++j) {
      p.N(s.rows + j, s.rows + j) = -ring_.one();
      p.J.push_back(s.rows + j);
    }
    p.leaves.push_back(LeafBlock{next_leaf_, n.name, 0, s.rows, s});
    ++next_leaf_;
    return p;
  }

  // [[N', -I_{.,J'}], [I_{I',.}, 0]]
  Partial<T> inverse(const Node& n, const std::string& path) {
    Partial<T> c = build(n.lhs, path + "/inv");
    std::size_t s = c.N.rows();
    std::size_t w = c.I.size();
    Partial<T> p{zeros(ring_, s + w, s + w), {}, {}, {}, {}};
    InversionRecord rec{path, 0, s, c.I, c.J};
    std::vector<std::size_t> ci = c.I, cj = c.J;
    shift_into(p, std::move(c), 0);
    for (std::size_t t = 0; t < w; ++t) {
      p.N(cj[t], s + t) = -ring_.one();
      p.N(s + t, ci[t]) = ring_.one();
      p.I.push_back(s + t);
      p.J.push_back(s + t);
    }
    p.inversions.push_back(std::move(rec));
    return p;
  }

  // Row blocks (n_L, n_R, n_w, m_w), column blocks (n_L, n_R, m_w, n_w):
  // [[L, 0, I_{.,J_L}, 0], [0, R, +-I_{.,J_R}, 0], [I_{I_L,.}, I_{I_R,.}, 0, I], [0, 0, I, 0]]
  Partial<T> add(const Node& n, const std::string& path) {
    Partial<T> l = build(n.lhs, path + "/lhs");
    Partial<T> r = build(n.rhs, path + "/rhs");
    Shape out = shape_of(n);
    std::size_t nl = l.N.rows(), nr = r.N.rows();
    std::size_t nw = out.rows, mw = out.cols;
    std::size_t total = nl + nr + nw + mw;
    std::vector<std::size_t> il = l.I, jl = l.J, ir = r.I, jr = r.J;
    Partial<T> p{zeros(ring_, total, total), {}, {}, {}, {}};
    shift_into(p, std::move(l), 0);
    shift_into(p, std::move(r), nl);
    std::size_t row3 = nl + nr, row4 = nl + nr + nw;
    std::size_t col3 = nl + nr, col4 = nl + nr + mw;
    T sign = n.kind == GateKind::Sub ? -ring_.one() : ring_.one();
    for (std::size_t t = 0; t < mw; ++t) {
      p.N(jl[t], col3 + t) = ring_.one();
      p.N(nl + jr[t], col3 + t) = sign;
      p.N(row4 + t, col3 + t) = ring_.one();
    }
    for (std::size_t t = 0; t < nw; ++t) {
      p.N(row3 + t, il[t]) = ring_.one();
      p.N(row3 + t, nl + ir[t]) = ring_.one();
      p.N(row3 + t, col4 + t) = ring_.one();
    }
    // N^-1 has the same block partition transposed: its last row block has
    // n_w rows, its last column block m_w columns.
    for (std::size_t t = 0; t < nw; ++t) p.I.push_back(nl + nr + mw + t);
    for (std::size_t t = 0; t < mw; ++t) p.J.push_back(nl + nr + nw + t);
    return p;
  }

  // [[L, -I_{.,J_L} I_{I_R,.}], [0, R]]
  Partial<T> mul(const Node& n, const std::string& path) {
    Partial<T> l = build(n.lhs, path + "/lhs");
    Partial<T> r = build(n.rhs, path + "/rhs");
    std::size_t nl = l.N.rows(), nr = r.N.rows();
    std::vector<std::size_t> il = l.I, jl = l.J, ir = r.I, jr = r.J;
    Partial<T> p{zeros(ring_, nl + nr, nl + nr), {}, {}, {}, {}};
    shift_into(p, std::move(l), 0);
    shift_into(p, std::move(r), nl);
    for (std::size_t t = 0; t < jl.size(); ++t) p.N(jl[t], nl + ir[t]) = -ring_.one();
    p.I = il;
    for (std::size_t x : jr) p.J.push_back(nl + x);
    return p;
  }

  const Ring& ring_;
  const DimCheck& dims_;
  std::span<const Matrix<T>> inputs_;
  std::size_t next_leaf_ = 0;
};

}  // namespace detail

// inputs: one matrix per leaf, in enumerate_leaves order.
template <class Ring>
Construction<typename Ring::value_type> build(const Ring& ring, const Formula& f,
                                              std::span<const Matrix<typename Ring::value_type>> inputs) {
  DimCheck dims = check_dims(f);
  detail::Builder<Ring> b(ring, dims, inputs);
  auto p = b.build(f.root(), "root");
  if (b.consumed() != inputs.size()) throw std::invalid_argument("too many leaf inputs");
  Construction<typename Ring::value_type> c;
  c.N = std::move(p.N);
  c.I = std::move(p.I);
  c.J = std::move(p.J);
  c.leaf_blocks = std::move(p.leaves);
  c.inversions = std::move(p.inversions);
  c.gates = f.gate_count();
  c.output = dims.output;
  return c;
}

template <class Ring>
Construction<typename Ring::value_type> build(const Ring& ring, const Formula& f,
                                              const std::vector<Matrix<typename Ring::value_type>>& inputs) {
  return build(ring, f, std::span<const Matrix<typename Ring::value_type>>(inputs));
}

// [[N, -I_{.,J}], [I_{I,.}, 0]]
template <class Ring>
HatConstruction<typename Ring::value_type> build_hat(const Ring& ring,
                                                     const Construction<typename Ring::value_type>& c) {
  if (c.I.size() != c.J.size()) throw NonSquareOutput();
  std::size_t n = c.size(), w = c.I.size();
  HatConstruction<typename Ring::value_type> h{zeros(ring, n + w, n + w), n};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h.Nhat(i, j) = c.N(i, j);
  for (std::size_t t = 0; t < w; ++t) {
    h.Nhat(c.J[t], n + t) = -ring.one();
    h.Nhat(n + t, c.I[t]) = ring.one();
  }
  return h;
}

template <class T>
const LeafBlock& locate_input(const Construction<T>& c, std::size_t leaf) {
  if (leaf >= c.leaf_blocks.size()) throw UnknownLeaf(leaf);
  return c.leaf_blocks[leaf];
}

// (N^-1)_{I,J}
template <class T>
Matrix<T> select_block(const Matrix<T>& inv, const std::vector<std::size_t>& I,
                       const std::vector<std::size_t>& J) {
  Matrix<T> out(I.size(), J.size(), inv(0, 0));
  for (std::size_t a = 0; a < I.size(); ++a)
    for (std::size_t b = 0; b < J.size(); ++b) out(a, b) = inv(I[a], J[b]);
  return out;
}

struct NormBudget {
  Rational kappa;
  Rational bound_N;       // kappa^s
  Rational bound_N_alt;   // 2 s kappa
  Rational bound_Ninv;    // (10 kappa)^(2s+1)
  Rational bound_rowblock;  // (5 kappa)^s
  Rational bound_IJ;      // kappa^s
};

NormBudget norm_budget(std::size_t s, const Rational& kappa);

template <class Ring>
nlohmann::json to_json(const Ring& ring, const Construction<typename Ring::value_type>& c) {
  nlohmann::json j;
  j["size"] = c.size();
  j["gates"] = c.gates;
  j["output"] = {c.output.rows, c.output.cols};
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < c.N.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t k = 0; k < c.N.cols(); ++k) row.push_back(ring.format(c.N(i, k)));
    rows.push_back(std::move(row));
  }
  j["N"] = std::move(rows);
  j["I"] = c.I;
  j["J"] = c.J;
  nlohmann::json leaves = nlohmann::json::array();
  for (const auto& lb : c.leaf_blocks)
    leaves.push_back({{"leaf", lb.leaf}, {"name", lb.name}, {"row", lb.row}, {"col", lb.col},
                      {"rows", lb.shape.rows}, {"cols", lb.shape.cols}});
  j["leaves"] = std::move(leaves);
  nlohmann::json invs = nlohmann::json::array();
  for (const auto& r : c.inversions)
    invs.push_back({{"path", r.path}, {"offset", r.offset}, {"size", r.size}, {"I", r.I}, {"J", r.J}});
  j["inversions"] = std::move(invs);
  return j;
}

}  // namespace formulads
