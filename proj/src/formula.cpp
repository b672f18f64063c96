#include "formulads/formula.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "formulads/errors.hpp"

namespace formulads {

NodePtr make_input(std::string name) {
  return std::make_shared<const Node>(Node{GateKind::Input, std::move(name), nullptr, nullptr});
}

NodePtr make_binary(GateKind kind, NodePtr lhs, NodePtr rhs) {
  return std::make_shared<const Node>(Node{kind, {}, std::move(lhs), std::move(rhs)});
}

NodePtr make_inv(NodePtr child) {
  return std::make_shared<const Node>(Node{GateKind::Inv, {}, std::move(child), nullptr});
}

Formula::Formula(NodePtr root, DimTable dims) : root_(std::move(root)), dims_(std::move(dims)) {}

namespace {

template <class F>
void visit(const NodePtr& n, F&& f) {
  f(*n);
  if (n->lhs) visit(n->lhs, f);
  if (n->rhs) visit(n->rhs, f);
}

}  // namespace

std::size_t Formula::gate_count() const {
  std::size_t s = 0;
  visit(root_, [&](const Node&) { ++s; });
  return s;
}

std::size_t Formula::leaf_count() const {
  std::size_t s = 0;
  visit(root_, [&](const Node& n) { s += n.kind == GateKind::Input; });
  return s;
}

std::size_t Formula::inversion_count() const {
  std::size_t s = 0;
  visit(root_, [&](const Node& n) { s += n.kind == GateKind::Inv; });
  return s;
}

// ---- parser ----------------------------------------------------------------

namespace {

class Parser {
 public:
  Parser(std::string_view text, const Shape* fallback) : text_(text), fallback_(fallback) {}

  Formula run() {
    DimTable dims;
    for (;;) {
      skip_ws();
      std::size_t save = pos_;
      if (!ident_start()) break;
      std::string name = ident();
      skip_ws();
      if (peek() != ':') {
        pos_ = save;
        break;
      }
      ++pos_;
      if (name == "inv") throw SyntaxError(save, "'inv' is reserved");
      std::size_t r = integer();
      skip_ws();
      expect('x');
      std::size_t c = integer();
      skip_ws();
      expect(';');
      if (r == 0 || c == 0) throw SyntaxError(save, "zero dimension for " + name);
      auto [it, fresh] = dims.emplace(name, Shape{r, c});
      if (!fresh && !(it->second == Shape{r, c}))
        throw SyntaxError(save, "conflicting declarations of " + name);
    }
    NodePtr root = expr();
    skip_ws();
    if (pos_ != text_.size()) throw SyntaxError(pos_, "unexpected trailing input");
    for (const auto& name : used_) {
      if (dims.count(name)) continue;
      if (!fallback_) throw UndeclaredInput(name);
      dims.emplace(name, *fallback_);
    }
    return Formula(root, std::move(dims));
  }

 private:
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool ident_start() const { return std::isalpha(static_cast<unsigned char>(peek())); }

  std::string ident() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  std::size_t integer() {
    skip_ws();
    std::size_t start = pos_;
    std::size_t v = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      v = v * 10 + static_cast<std::size_t>(text_[pos_] - '0');
      if (v > 1000000) throw SyntaxError(start, "dimension too large");
      ++pos_;
    }
    if (pos_ == start) throw SyntaxError(pos_, "expected integer");
    return v;
  }

  void expect(char ch) {
    skip_ws();
    if (peek() != ch) throw SyntaxError(pos_, std::string("expected '") + ch + "'");
    ++pos_;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      skip_ws();
      char ch = peek();
      if (ch != '+' && ch != '-') return lhs;
      ++pos_;
      lhs = make_binary(ch == '+' ? GateKind::Add : GateKind::Sub, lhs, term());
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      skip_ws();
      if (peek() != '*') return lhs;
      ++pos_;
      lhs = make_binary(GateKind::Mul, lhs, factor());
    }
  }

  NodePtr factor() {
    skip_ws();
    if (peek() == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (!ident_start()) throw SyntaxError(pos_, "expected operand");
    std::size_t start = pos_;
    std::string name = ident();
    if (name == "inv") {
      skip_ws();
      if (peek() != '(') throw SyntaxError(start, "'inv' must be followed by '('");
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return make_inv(e);
    }
    if (std::find(used_.begin(), used_.end(), name) == used_.end()) used_.push_back(name);
    return make_input(name);
  }

  std::string_view text_;
  const Shape* fallback_;
  std::size_t pos_ = 0;
  std::vector<std::string> used_;
};

}  // namespace

Formula parse(std::string_view text) { return Parser(text, nullptr).run(); }

Formula parse(std::string_view text, Shape default_shape) {
  return Parser(text, &default_shape).run();
}

// ---- dimensions --------------------------------------------------------------

namespace {

Shape check_node(const NodePtr& n, const DimTable& dims, const std::string& path, DimCheck& out) {
  Shape s;
  switch (n->kind) {
    case GateKind::Input: {
      auto it = dims.find(n->name);
      if (it == dims.end()) throw UndeclaredInput(n->name);
      s = it->second;
      break;
    }
    case GateKind::Inv: {
      Shape c = check_node(n->lhs, dims, path + "/inv", out);
      if (c.rows != c.cols) throw NonSquareInversion(path);
      s = c;
      break;
    }
    case GateKind::Add:
    case GateKind::Sub: {
      Shape l = check_node(n->lhs, dims, path + "/lhs", out);
      Shape r = check_node(n->rhs, dims, path + "/rhs", out);
      if (!(l == r)) throw DimensionMismatch(path);
      s = l;
      break;
    }
    case GateKind::Mul: {
      Shape l = check_node(n->lhs, dims, path + "/lhs", out);
      Shape r = check_node(n->rhs, dims, path + "/rhs", out);
      if (l.cols != r.rows) throw DimensionMismatch(path);
      s = Shape{l.rows, r.cols};
      break;
    }
  }
  out.shapes[n.get()] = s;
  return s;
}

}  // namespace

DimCheck check_dims(const Formula& f, const DimTable& dims) {
  DimCheck out;
  out.output = check_node(f.root(), dims, "root", out);
  return out;
}

DimCheck check_dims(const Formula& f) { return check_dims(f, f.dims()); }

std::vector<LeafInfo> enumerate_leaves(const Formula& f) {
  std::vector<LeafInfo> leaves;
  visit(f.root(), [&](const Node& n) {
    if (n.kind != GateKind::Input) return;
    auto it = f.dims().find(n.name);
    if (it == f.dims().end()) throw UndeclaredInput(n.name);
    leaves.push_back(LeafInfo{leaves.size(), n.name, it->second});
  });
  return leaves;
}

// ---- printing ------------------------------------------------------------------

namespace {

int precedence(const Node& n) {
  switch (n.kind) {
    case GateKind::Add:
    case GateKind::Sub: return 1;
    case GateKind::Mul: return 2;
    default: return 3;
  }
}

}  // namespace

std::string expr_string(const NodePtr& node) {
  const Node& n = *node;
  switch (n.kind) {
    case GateKind::Input: return n.name;
    case GateKind::Inv: return "inv(" + expr_string(n.lhs) + ")";
    default: break;
  }
  int p = precedence(n);
  std::string l = expr_string(n.lhs);
  std::string r = expr_string(n.rhs);
  if (precedence(*n.lhs) < p) l = "(" + l + ")";
  if (precedence(*n.rhs) <= p) r = "(" + r + ")";
  const char* op = n.kind == GateKind::Add ? " + " : n.kind == GateKind::Sub ? " - " : "*";
  return l + op + r;
}

std::string pretty_print(const Formula& f) {
  std::string out;
  for (const auto& [name, s] : f.dims())
    out += name + ":" + std::to_string(s.rows) + "x" + std::to_string(s.cols) + "; ";
  return out + expr_string(f.root());
}

bool same_tree(const NodePtr& a, const NodePtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind || a->name != b->name) return false;
  return same_tree(a->lhs, b->lhs) && same_tree(a->rhs, b->rhs);
}

// ---- generator -------------------------------------------------------------------

namespace {

class Generator {
 public:
  Generator(std::mt19937_64& rng, const GeneratorParams& p) : rng_(rng), p_(p) {}

  Formula run() {
    std::size_t s = uniform(1, std::max<std::size_t>(1, p_.max_gates));
    Shape out;
    if (p_.output_side) {
      out = Shape{p_.output_side, p_.output_side};
    } else {
      out = Shape{uniform(1, p_.max_dim), uniform(1, p_.max_dim)};
      if (s == 2) out.cols = out.rows;
    }
    NodePtr root = gen(s, out, false);
    return Formula(root, dims_);
  }

 private:
  std::size_t uniform(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }

  static bool feasible(std::size_t s, Shape shape, bool under_inv) {
    if (s == 1) return true;
    if (s == 2) return shape.rows == shape.cols && !under_inv;
    return true;
  }

  NodePtr leaf(Shape shape) {
    std::vector<std::string> same;
    for (const auto& [name, sh] : dims_)
      if (sh == shape) same.push_back(name);
    if (!same.empty() && uniform(0, 2) == 0) return make_input(same[uniform(0, same.size() - 1)]);
    std::string name;
    std::size_t idx = dims_.size();
    do {
      name = std::string(1, static_cast<char>('A' + idx % 26));
      if (idx >= 26) name += std::to_string(idx / 26);
      ++idx;
    } while (dims_.count(name));
    dims_.emplace(name, shape);
    return make_input(name);
  }

  NodePtr gen(std::size_t s, Shape shape, bool under_inv) {
    if (s == 1) return leaf(shape);
    bool can_inv = shape.rows == shape.cols && !under_inv && feasible(s - 1, shape, true);
    if (s == 2) return make_inv(gen(1, shape, true));
    for (;;) {
      std::size_t choice = uniform(0, can_inv ? 3 : 2);
      if (choice == 3) return make_inv(gen(s - 1, shape, true));
      std::size_t a = uniform(1, s - 2);
      std::size_t b = s - 1 - a;
      if (choice == 2) {
        std::size_t k = uniform(1, p_.max_dim);
        Shape l{shape.rows, k}, r{k, shape.cols};
        if (!feasible(a, l, false) || !feasible(b, r, false)) continue;
        NodePtr lhs = gen(a, l, false);
        return make_binary(GateKind::Mul, lhs, gen(b, r, false));
      }
      if (!feasible(a, shape, false) || !feasible(b, shape, false)) continue;
      NodePtr lhs = gen(a, shape, false);
      return make_binary(choice == 0 ? GateKind::Add : GateKind::Sub, lhs, gen(b, shape, false));
    }
  }

  std::mt19937_64& rng_;
  GeneratorParams p_;
  DimTable dims_;
};

}  // namespace

Formula random_formula(std::mt19937_64& rng, const GeneratorParams& params) {
  return Generator(rng, params).run();
}

}  // namespace formulads
