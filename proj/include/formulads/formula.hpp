#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace formulads {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  friend bool operator==(const Shape&, const Shape&) = default;
};

using DimTable = std::map<std::string, Shape>;

enum class GateKind { Input, Add, Sub, Mul, Inv };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  GateKind kind;
  std::string name;  // Input only
  NodePtr lhs;       // Inv keeps its child here
  NodePtr rhs;
};

struct LeafInfo {
  std::size_t id;
  std::string name;
  Shape shape;
};

// Immutable matrix formula: a tree of gates plus the declared input shapes.
class Formula {
 public:
  Formula(NodePtr root, DimTable dims);

  const NodePtr& root() const { return root_; }
  const DimTable& dims() const { return dims_; }
  std::size_t gate_count() const;
  std::size_t leaf_count() const;
  std::size_t inversion_count() const;

 private:
  NodePtr root_;
  DimTable dims_;
};

NodePtr make_input(std::string name);
NodePtr make_binary(GateKind kind, NodePtr lhs, NodePtr rhs);
NodePtr make_inv(NodePtr child);

// Undeclared names get default_shape when it is given, else UndeclaredInput.
Formula parse(std::string_view text);
Formula parse(std::string_view text, Shape default_shape);

struct DimCheck {
  Shape output;
  std::unordered_map<const Node*, Shape> shapes;
};
DimCheck check_dims(const Formula& f);
DimCheck check_dims(const Formula& f, const DimTable& dims);

std::vector<LeafInfo> enumerate_leaves(const Formula& f);

// Expression text with minimal parentheses.
std::string expr_string(const NodePtr& node);
// Full program: declarations sorted by name, then the expression.
std::string pretty_print(const Formula& f);

bool same_tree(const NodePtr& a, const NodePtr& b);

struct GeneratorParams {
  std::size_t max_gates = 6;
  std::size_t max_dim = 4;
  // force a square output of this side when nonzero
  std::size_t output_side = 0;
};

// Random dimension-consistent formula; never places Inv directly above Inv.
// Invertibility of inversion children is the caller's concern.
Formula random_formula(std::mt19937_64& rng, const GeneratorParams& params);

}  // namespace formulads
