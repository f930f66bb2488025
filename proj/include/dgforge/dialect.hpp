#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dgforge/error.hpp"

namespace dgforge::dgk {

enum class Type { i64, f32, f64 };

const char* type_name(Type t);
inline bool is_real(Type t) { return t != Type::i64; }

enum class Tok { ident, int_lit, real_lit, punct, end };

struct Token {
  Tok kind;
  std::string text;
  int line;
};

std::vector<Token> tokenize(const std::string& source);

enum class ExprKind { int_lit, real_lit, var, index, unary, binary, ternary, call, cast };

struct Expr {
  ExprKind kind;
  int line = 0;
  std::string op;      // unary/binary operator, call name
  std::int64_t ival = 0;
  double rval = 0.0;   // real literal, already rounded to the literal's type
  std::string name;    // var / index base
  std::vector<std::unique_ptr<Expr>> args;
  // Filled in by check().
  Type type = Type::i64;
  bool uniform = false;
  int symbol = -1;
};

enum class StmtKind { block, decl_shared, decl_const, decl_var, assign, for_loop, if_else, barrier };

struct Stmt {
  StmtKind kind;
  int line = 0;
  Type type = Type::i64;
  std::string name;
  bool uniform = false;                 // decl_var: uniform; for_loop: uniform bounds
  std::int64_t size = 0;                // array declarations
  std::vector<double> table;            // decl_const values (rounded to type)
  std::vector<std::int64_t> int_table;  // decl_const values for int tables
  std::string op;                       // assign: "=", "+=", "-=", "*="
  std::unique_ptr<Expr> index;          // assign to name[index]
  std::unique_ptr<Expr> value;          // decl init / assign rhs / for init / if cond
  std::unique_ptr<Expr> bound;          // for: v < bound
  std::unique_ptr<Expr> step;           // for: v += step
  std::vector<std::unique_ptr<Stmt>> body;       // block / for body / if then
  std::vector<std::unique_ptr<Stmt>> else_body;  // if else
  bool has_else = false;
  // Filled in by check().
  int symbol = -1;
  bool has_barrier = false;
};

struct Param {
  std::string name;
  Type type;
  bool global = false;
  bool is_const = false;
};

enum class SymbolKind { buffer, scalar_param, shared, const_table, local };

struct Symbol {
  std::string name;
  SymbolKind kind;
  Type type;
  bool uniform = false;
  std::int64_t size = 0;
  int param_index = -1;
  bool writable = true;
};

struct Kernel {
  std::string name;
  int lanes = 1;
  std::vector<Param> params;
  std::vector<std::unique_ptr<Stmt>> body;
  std::vector<Symbol> symbols;  // filled in by check()
};

/// Parses one kernel; throws ParseError with the source line.
Kernel parse(const std::string& source);

/// Resolves names, types and uniformity; enforces barrier placement.
void check(Kernel& kernel);

/// parse + check.
Kernel compile_dialect(const std::string& source);

}  // namespace dgforge::dgk
