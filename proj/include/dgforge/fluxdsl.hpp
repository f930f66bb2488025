#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dgforge/error.hpp"

namespace dgforge::flux {

enum class Shape { scalar, vector3 };
enum class Side { interior, exterior };

enum class Op {
  trace,    // FieldTrace(name, side)
  normal,   // outward unit normal of the interior element
  constant,
  param,    // named parameter, bound at lowering/interpretation
  vec,      // vector3 built from three scalars
  add,
  sub,
  neg,
  scale,    // ScalarMul(scalar, any)
  cross,
  dot,
  abs,      // |scalar|
  jump,     // u- - u+
  average,  // (u- + u+) / 2
};

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
  Op op;
  std::string name;   // trace/jump/average/param
  Side side = Side::interior;
  double value = 0.0; // constant
  std::vector<Expr> args;
};

// Builder API.
Expr trace(const std::string& field, Side side);
Expr interior(const std::string& field);
Expr exterior(const std::string& field);
Expr normal();
Expr constant(double v);
Expr param(const std::string& name);
Expr vec(Expr x, Expr y, Expr z);
Expr cross(Expr a, Expr b);
Expr dot(Expr a, Expr b);
Expr abs(Expr a);
Expr jump(const std::string& field);
Expr average(const std::string& field);
Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator-(Expr a);
Expr operator*(Expr s, Expr a);
Expr operator*(double s, Expr a);

/// A field group: a scalar (one component) or a 3-vector (three components).
struct FieldGroup {
  std::string name;
  std::vector<std::string> components;

  Shape shape() const { return components.size() == 3 ? Shape::vector3 : Shape::scalar; }
};

struct FluxSpec {
  std::vector<FieldGroup> fields;
  /// One bracket expression per field group, same order as `fields`.
  std::vector<std::pair<std::string, Expr>> outputs;
  std::map<std::string, double> params;
};

class TypeError : public Error {
 public:
  TypeError(const std::string& what, const std::string& path) : Error(what + " at " + path), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Shape of expr; throws TypeError naming the offending node path (e.g. "root.add[1].cross[0]").
Shape typecheck(const Expr& expr, const std::vector<FieldGroup>& fields);

/// Checks every output against its field group and the declared field list.
void typecheck(const FluxSpec& spec);

struct Value {
  Shape shape = Shape::scalar;
  std::array<double, 3> v{0, 0, 0};
};

struct TracePair {
  Value minus, plus;
};

/// Exact recursive evaluation. Throws Error on unbound field or parameter names.
Value interpret(const Expr& expr, const std::map<std::string, TracePair>& traces, const std::array<double, 3>& normal,
                const std::map<std::string, double>& params = {});

// Lowered form: a hash-consed scalar DAG plus one output per field component.

enum class ScalarOp { trace, normal, constant, add, sub, mul, neg, abs };

struct ScalarNode {
  ScalarOp op;
  int component = 0;  // trace: index into LoweredFlux::components; normal: axis
  Side side = Side::interior;
  double value = 0.0;
  int a = -1, b = -1;
};

struct LoweredFlux {
  std::vector<std::string> components;   // flattened field components, in spec order
  std::vector<ScalarNode> nodes;         // topologically ordered
  std::vector<int> temporaries;          // shared non-leaf nodes, in evaluation order
  std::vector<int> outputs;              // node per component

  /// Arithmetic operations executed to evaluate every output once.
  int flop_count() const;
};

LoweredFlux lower(const FluxSpec& spec);

/// Evaluates the lowered DAG; minus/plus are indexed like `components`.
std::vector<double> evaluate(const LoweredFlux& lowered, const std::vector<double>& minus,
                             const std::vector<double>& plus, const std::array<double, 3>& normal);

/// Scalar statements in C-like syntax. Leaves are spelled by `leaf`, the
/// literal style by `literal`; temporaries are declared with `type`.
struct EmitStyle {
  std::string type = "double";
  std::function<std::string(double)> literal;
  std::function<std::string(int component, Side side)> trace;
  std::function<std::string(int axis)> normal;
  std::function<std::string(int component)> output;
  std::string temp_prefix = "t";
};

std::vector<std::string> emit_statements(const LoweredFlux& lowered, const EmitStyle& style);

/// Readable dump of the lowered assignments.
std::string dump(const LoweredFlux& lowered);

}  // namespace dgforge::flux
