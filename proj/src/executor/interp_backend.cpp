#include <chrono>
#include <cmath>
#include <cstring>
#include <map>

#include "dgforge/executor.hpp"
#include "dgforge/hash.hpp"

namespace dgforge {

namespace {

using dgk::Expr;
using dgk::ExprKind;
using dgk::Stmt;
using dgk::StmtKind;
using dgk::Symbol;
using dgk::SymbolKind;
using dgk::Type;

union Slot {
  std::int64_t i;
  double d;
  float f;
};

enum class Opc : std::uint8_t {
  li, ld, lf, mov,
  add_i, sub_i, mul_i, div_i, mod_i, neg_i, abs_i,
  add_d, sub_d, mul_d, div_d, neg_d, abs_d,
  add_f, sub_f, mul_f, div_f, neg_f, abs_f,
  lt_i, le_i, eq_i, ne_i,
  lt_d, le_d, eq_d, ne_d,
  lt_f, le_f, eq_f, ne_f,
  not_i, bool_i,
  i2d, i2f, d2f, f2d, d2i, f2i,
  load_g, load_s, load_c, store_g, store_s,
  lane, group, ngroups,
  jmp, jz, jnz, barrier, end,
};

struct Ins {
  Opc op;
  int dst = 0, a = 0, b = 0;
  std::int64_t imm = 0;
  double dimm = 0.0;
  int line = 0;
};

struct Array {
  std::string name;
  Type type;
  std::int64_t size;
};

class InterpKernel : public CompiledKernel {
 public:
  std::vector<Ins> code;
  int num_regs = 0;
  std::vector<Array> shared;                // shared arrays by id
  std::vector<Array> tables;                // const tables by id
  std::vector<std::vector<Slot>> table_data;
  std::vector<int> symbol_slot;             // symbol -> register / array id
};

class Compiler {
 public:
  Compiler(const dgk::Kernel& k, InterpKernel& out) : k_(k), out_(out) {}

  void run() {
    out_.symbol_slot.assign(k_.symbols.size(), -1);
    int regs = 0;
    for (size_t s = 0; s < k_.symbols.size(); ++s) {
      const Symbol& sym = k_.symbols[s];
      if (sym.kind == SymbolKind::local || sym.kind == SymbolKind::scalar_param) out_.symbol_slot[s] = regs++;
    }
    first_temp_ = regs;
    max_reg_ = regs;
    // Scalar params are loaded into their registers at lane start by the executor.
    for (const auto& s : k_.body) stmt(*s);
    emit({Opc::end});
    out_.num_regs = max_reg_;
  }

 private:
  int temp() {
    const int r = next_temp_++;
    max_reg_ = std::max(max_reg_, r + 1);
    return r;
  }

  int emit(Ins ins) {
    out_.code.push_back(ins);
    return static_cast<int>(out_.code.size()) - 1;
  }

  Ins make(Opc op, int dst, int a = 0, int b = 0, int line = 0) {
    Ins i{op};
    i.dst = dst;
    i.a = a;
    i.b = b;
    i.line = line;
    return i;
  }

  static int slot_index(Type t) { return t == Type::i64 ? 0 : t == Type::f64 ? 1 : 2; }

  // Converts register r of type `from` to `to`; returns the register holding the result.
  int convert(int r, Type from, Type to, int line) {
    if (from == to) return r;
    static const Opc table[3][3] = {
        {Opc::mov, Opc::i2d, Opc::i2f}, {Opc::d2i, Opc::mov, Opc::d2f}, {Opc::f2i, Opc::f2d, Opc::mov}};
    const int t = temp();
    emit(make(table[slot_index(from)][slot_index(to)], t, r, 0, line));
    return t;
  }

  Opc arith(const std::string& op, Type t) {
    const int k = slot_index(t);
    if (op == "+") return std::array{Opc::add_i, Opc::add_d, Opc::add_f}[k];
    if (op == "-") return std::array{Opc::sub_i, Opc::sub_d, Opc::sub_f}[k];
    if (op == "*") return std::array{Opc::mul_i, Opc::mul_d, Opc::mul_f}[k];
    if (op == "/") return std::array{Opc::div_i, Opc::div_d, Opc::div_f}[k];
    if (op == "%") return Opc::mod_i;
    if (op == "<") return std::array{Opc::lt_i, Opc::lt_d, Opc::lt_f}[k];
    if (op == "<=") return std::array{Opc::le_i, Opc::le_d, Opc::le_f}[k];
    if (op == "==") return std::array{Opc::eq_i, Opc::eq_d, Opc::eq_f}[k];
    if (op == "!=") return std::array{Opc::ne_i, Opc::ne_d, Opc::ne_f}[k];
    throw Error("internal: unknown operator " + op);
  }

  // Evaluates e into a register of type e.type.
  int expr(const Expr& e) {
    switch (e.kind) {
      case ExprKind::int_lit: {
        const int t = temp();
        Ins i = make(Opc::li, t, 0, 0, e.line);
        i.imm = e.ival;
        emit(i);
        return t;
      }
      case ExprKind::real_lit: {
        const int t = temp();
        Ins i = make(e.type == Type::f32 ? Opc::lf : Opc::ld, t, 0, 0, e.line);
        i.dimm = e.rval;
        emit(i);
        return t;
      }
      case ExprKind::var: return out_.symbol_slot[e.symbol];
      case ExprKind::index: {
        const int idx = expr(*e.args[0]);
        const Symbol& sym = k_.symbols[e.symbol];
        const int t = temp();
        Opc op = sym.kind == SymbolKind::buffer ? Opc::load_g : sym.kind == SymbolKind::shared ? Opc::load_s : Opc::load_c;
        const int target = sym.kind == SymbolKind::buffer ? sym.param_index : out_.symbol_slot[e.symbol];
        emit(make(op, t, target, idx, e.line));
        return t;
      }
      case ExprKind::unary: {
        const int a = expr(*e.args[0]);
        const int t = temp();
        if (e.op == "!") {
          emit(make(Opc::not_i, t, a, 0, e.line));
        } else {
          const int k = slot_index(e.type);
          emit(make(std::array{Opc::neg_i, Opc::neg_d, Opc::neg_f}[k], t, a, 0, e.line));
        }
        return t;
      }
      case ExprKind::binary: {
        if (e.op == "&&" || e.op == "||") {
          const int t = temp();
          const int a = expr(*e.args[0]);
          emit(make(Opc::bool_i, t, a, 0, e.line));
          const int jump = emit(make(e.op == "&&" ? Opc::jz : Opc::jnz, 0, t, 0, e.line));
          const int b = expr(*e.args[1]);
          emit(make(Opc::bool_i, t, b, 0, e.line));
          out_.code[jump].imm = static_cast<std::int64_t>(out_.code.size());
          return t;
        }
        const Type ta = e.args[0]->type, tb = e.args[1]->type;
        const Type common = ta == tb ? ta : (ta == Type::i64 ? tb : ta);
        int a = convert(expr(*e.args[0]), ta, common, e.line);
        int b = convert(expr(*e.args[1]), tb, common, e.line);
        std::string op = e.op;
        if (op == ">" || op == ">=") {
          std::swap(a, b);
          op = op == ">" ? "<" : "<=";
        }
        const int t = temp();
        emit(make(arith(op, common), t, a, b, e.line));
        return t;
      }
      case ExprKind::ternary: {
        const int t = temp();
        const int c = expr(*e.args[0]);
        const int jz = emit(make(Opc::jz, 0, c, 0, e.line));
        int a = convert(expr(*e.args[1]), e.args[1]->type, e.type, e.line);
        emit(make(Opc::mov, t, a, 0, e.line));
        const int jmp = emit(make(Opc::jmp, 0, 0, 0, e.line));
        out_.code[jz].imm = static_cast<std::int64_t>(out_.code.size());
        int b = convert(expr(*e.args[2]), e.args[2]->type, e.type, e.line);
        emit(make(Opc::mov, t, b, 0, e.line));
        out_.code[jmp].imm = static_cast<std::int64_t>(out_.code.size());
        return t;
      }
      case ExprKind::call: {
        const int t = temp();
        if (e.op == "lane_id") {
          emit(make(Opc::lane, t, 0, 0, e.line));
        } else if (e.op == "group_id") {
          emit(make(Opc::group, t, 0, 0, e.line));
        } else if (e.op == "num_groups") {
          emit(make(Opc::ngroups, t, 0, 0, e.line));
        } else if (e.op == "num_lanes") {
          Ins i = make(Opc::li, t, 0, 0, e.line);
          i.imm = k_.lanes;
          emit(i);
        } else {
          const int a = expr(*e.args[0]);
          emit(make(std::array{Opc::abs_i, Opc::abs_d, Opc::abs_f}[slot_index(e.type)], t, a, 0, e.line));
        }
        return t;
      }
      case ExprKind::cast: return convert(expr(*e.args[0]), e.args[0]->type, e.type, e.line);
    }
    throw Error("internal: unknown expression");
  }

  void stmt(const Stmt& s) {
    next_temp_ = first_temp_;
    switch (s.kind) {
      case StmtKind::block:
        for (const auto& c : s.body) stmt(*c);
        return;
      case StmtKind::barrier: emit(make(Opc::barrier, 0, 0, 0, s.line)); return;
      case StmtKind::decl_shared:
        out_.symbol_slot[s.symbol] = static_cast<int>(out_.shared.size());
        out_.shared.push_back({s.name, s.type, s.size});
        return;
      case StmtKind::decl_const: {
        out_.symbol_slot[s.symbol] = static_cast<int>(out_.tables.size());
        out_.tables.push_back({s.name, s.type, s.size});
        std::vector<Slot> data(s.size);
        for (std::int64_t i = 0; i < s.size; ++i) {
          if (s.type == Type::i64) data[i].i = s.int_table[i];
          else if (s.type == Type::f64) data[i].d = s.table[i];
          else data[i].f = static_cast<float>(s.table[i]);
        }
        out_.table_data.push_back(std::move(data));
        return;
      }
      case StmtKind::decl_var: {
        const int dst = out_.symbol_slot[s.symbol];
        if (s.value) {
          const int v = convert(expr(*s.value), s.value->type, s.type, s.line);
          emit(make(Opc::mov, dst, v, 0, s.line));
        } else {
          Ins i = make(Opc::li, dst, 0, 0, s.line);
          emit(i);  // zero bits are 0 for every type
        }
        return;
      }
      case StmtKind::assign: {
        const Symbol& sym = k_.symbols[s.symbol];
        const bool indexed = static_cast<bool>(s.index);
        int idx = indexed ? expr(*s.index) : -1;
        int v = convert(expr(*s.value), s.value->type, sym.type, s.line);
        if (s.op != "=") {
          int cur;
          if (indexed) {
            cur = temp();
            const bool buf = sym.kind == SymbolKind::buffer;
            emit(make(buf ? Opc::load_g : Opc::load_s, cur, buf ? sym.param_index : out_.symbol_slot[s.symbol], idx,
                      s.line));
          } else {
            cur = out_.symbol_slot[s.symbol];
          }
          const int t = temp();
          emit(make(arith(std::string(1, s.op[0]), sym.type), t, cur, v, s.line));
          v = t;
        }
        if (!indexed) {
          emit(make(Opc::mov, out_.symbol_slot[s.symbol], v, 0, s.line));
        } else if (sym.kind == SymbolKind::buffer) {
          emit(make(Opc::store_g, sym.param_index, idx, v, s.line));
        } else {
          emit(make(Opc::store_s, out_.symbol_slot[s.symbol], idx, v, s.line));
        }
        return;
      }
      case StmtKind::for_loop: {
        const int var = out_.symbol_slot[s.symbol];
        const int init = expr(*s.value);
        emit(make(Opc::mov, var, init, 0, s.line));
        const int top = static_cast<int>(out_.code.size());
        next_temp_ = first_temp_;
        const int bound = expr(*s.bound);
        const int c = temp();
        emit(make(Opc::lt_i, c, var, bound, s.line));
        const int jz = emit(make(Opc::jz, 0, c, 0, s.line));
        for (const auto& b : s.body) stmt(*b);
        next_temp_ = first_temp_;
        const int step = expr(*s.step);
        emit(make(Opc::add_i, var, var, step, s.line));
        Ins j = make(Opc::jmp, 0, 0, 0, s.line);
        j.imm = top;
        emit(j);
        out_.code[jz].imm = static_cast<std::int64_t>(out_.code.size());
        return;
      }
      case StmtKind::if_else: {
        const int c = expr(*s.value);
        const int jz = emit(make(Opc::jz, 0, c, 0, s.line));
        for (const auto& b : s.body) stmt(*b);
        if (s.has_else) {
          const int jmp = emit(make(Opc::jmp, 0, 0, 0, s.line));
          out_.code[jz].imm = static_cast<std::int64_t>(out_.code.size());
          for (const auto& b : s.else_body) stmt(*b);
          out_.code[jmp].imm = static_cast<std::int64_t>(out_.code.size());
        } else {
          out_.code[jz].imm = static_cast<std::int64_t>(out_.code.size());
        }
        return;
      }
    }
  }

  const dgk::Kernel& k_;
  InterpKernel& out_;
  int first_temp_ = 0;
  int next_temp_ = 0;
  int max_reg_ = 0;
};

struct SharedWord {
  std::uint64_t write_epoch = 0, read_epoch = 0;
  int writer = -1, reader = -1;  // reader -2: several lanes
};

class InterpBackend : public Backend {
 public:
  std::string name() const override { return "interp"; }

  KernelPtr compile(const std::string& source) override {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string hash = hex64(fnv1a64(source));
    if (auto it = cache_.find(hash); it != cache_.end()) {
      auto hit = std::make_shared<InterpKernel>(*it->second);
      hit->cache_hit = true;
      hit->compile_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return hit;
    }
    dgk::Kernel k = dgk::compile_dialect(source);
    auto kernel = std::make_shared<InterpKernel>();
    kernel->name = k.name;
    kernel->lanes = k.lanes;
    kernel->params = k.params;
    kernel->hash = hash;
    Compiler(k, *kernel).run();
    // Map scalar params to their registers.
    param_regs_[hash].clear();
    for (size_t s = 0; s < k.symbols.size(); ++s) {
      if (k.symbols[s].kind == SymbolKind::scalar_param) {
        param_regs_[hash].emplace_back(k.symbols[s].param_index, kernel->symbol_slot[s]);
      }
    }
    kernel->compile_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    cache_[hash] = kernel;
    return kernel;
  }

  bool counts_flops() const override { return true; }
  std::uint64_t flops() const override { return flops_; }
  void reset_flops() override { flops_ = 0; }

 protected:
  void execute(const CompiledKernel& base, std::int64_t groups, const std::vector<KernelArg>& args) override;

 private:
  std::map<std::string, std::shared_ptr<InterpKernel>> cache_;
  std::map<std::string, std::vector<std::pair<int, int>>> param_regs_;
  std::uint64_t flops_ = 0;
  std::uint64_t epoch_ = 0;
  std::uint64_t launch_serial_ = 0;
};

[[noreturn]] void runtime_fail(const InterpKernel& k, int line, const std::string& what) {
  throw Error("kernel " + k.name + " line " + std::to_string(line) + ": " + what);
}

void InterpBackend::execute(const CompiledKernel& base, std::int64_t groups, const std::vector<KernelArg>& args) {
  const auto& k = static_cast<const InterpKernel&>(base);
  const int lanes = k.lanes;
  const int nregs = std::max(1, k.num_regs);
  ++launch_serial_;

  struct BufView {
    void* data = nullptr;
    std::int64_t size = 0;
    ScalarType type = ScalarType::f64;
    std::vector<std::uint64_t> stamps;  // writer id per word in this launch
  };
  std::vector<BufView> bufs(args.size());
  for (size_t i = 0; i < args.size(); ++i) {
    if (const auto* b = std::get_if<BufferPtr>(&args[i])) {
      bufs[i].data = (*b)->data();
      bufs[i].size = static_cast<std::int64_t>((*b)->size());
      bufs[i].type = (*b)->type();
    }
  }
  const auto& pregs = param_regs_.at(k.hash);

  std::vector<Slot> regs(static_cast<size_t>(lanes) * nregs);
  std::vector<int> pc(lanes);
  std::vector<std::vector<Slot>> shared(k.shared.size());
  std::vector<std::vector<SharedWord>> shared_meta(k.shared.size());
  for (size_t s = 0; s < k.shared.size(); ++s) {
    shared[s].resize(k.shared[s].size);
    shared_meta[s].resize(k.shared[s].size);
  }
  std::uint64_t flops = 0;

  for (std::int64_t g = 0; g < groups; ++g) {
    std::memset(regs.data(), 0, regs.size() * sizeof(Slot));
    for (int l = 0; l < lanes; ++l) {
      Slot* r = &regs[static_cast<size_t>(l) * nregs];
      for (const auto& [param, reg] : pregs) {
        if (const auto* iv = std::get_if<std::int64_t>(&args[param])) {
          r[reg].i = *iv;
        } else {
          const double d = std::get<double>(args[param]);
          if (k.params[param].type == Type::f32) r[reg].f = static_cast<float>(d);
          else r[reg].d = d;
        }
      }
      pc[l] = 0;
    }
    const std::uint64_t group_epoch = ++epoch_;

    while (true) {
      for (int lane = 0; lane < lanes; ++lane) {
        Slot* r = &regs[static_cast<size_t>(lane) * nregs];
        int p = pc[lane];
        const std::uint64_t writer_id = (static_cast<std::uint64_t>(g) * lanes + lane) + 1;
        for (;;) {
          const Ins& in = k.code[p];
          switch (in.op) {
            case Opc::li: r[in.dst].i = in.imm; break;
            case Opc::ld: r[in.dst].d = in.dimm; break;
            case Opc::lf: r[in.dst].f = static_cast<float>(in.dimm); break;
            case Opc::mov: r[in.dst] = r[in.a]; break;
            case Opc::add_i: r[in.dst].i = r[in.a].i + r[in.b].i; break;
            case Opc::sub_i: r[in.dst].i = r[in.a].i - r[in.b].i; break;
            case Opc::mul_i: r[in.dst].i = r[in.a].i * r[in.b].i; break;
            case Opc::div_i:
              if (r[in.b].i == 0) runtime_fail(k, in.line, "integer division by zero");
              r[in.dst].i = r[in.a].i / r[in.b].i;
              break;
            case Opc::mod_i:
              if (r[in.b].i == 0) runtime_fail(k, in.line, "integer division by zero");
              r[in.dst].i = r[in.a].i % r[in.b].i;
              break;
            case Opc::neg_i: r[in.dst].i = -r[in.a].i; break;
            case Opc::abs_i: r[in.dst].i = r[in.a].i < 0 ? -r[in.a].i : r[in.a].i; break;
            case Opc::add_d: r[in.dst].d = r[in.a].d + r[in.b].d; ++flops; break;
            case Opc::sub_d: r[in.dst].d = r[in.a].d - r[in.b].d; ++flops; break;
            case Opc::mul_d: r[in.dst].d = r[in.a].d * r[in.b].d; ++flops; break;
            case Opc::div_d: r[in.dst].d = r[in.a].d / r[in.b].d; ++flops; break;
            case Opc::neg_d: r[in.dst].d = -r[in.a].d; ++flops; break;
            case Opc::abs_d: r[in.dst].d = std::fabs(r[in.a].d); ++flops; break;
            case Opc::add_f: r[in.dst].f = r[in.a].f + r[in.b].f; ++flops; break;
            case Opc::sub_f: r[in.dst].f = r[in.a].f - r[in.b].f; ++flops; break;
            case Opc::mul_f: r[in.dst].f = r[in.a].f * r[in.b].f; ++flops; break;
            case Opc::div_f: r[in.dst].f = r[in.a].f / r[in.b].f; ++flops; break;
            case Opc::neg_f: r[in.dst].f = -r[in.a].f; ++flops; break;
            case Opc::abs_f: r[in.dst].f = std::fabs(r[in.a].f); ++flops; break;
            case Opc::lt_i: r[in.dst].i = r[in.a].i < r[in.b].i; break;
            case Opc::le_i: r[in.dst].i = r[in.a].i <= r[in.b].i; break;
            case Opc::eq_i: r[in.dst].i = r[in.a].i == r[in.b].i; break;
            case Opc::ne_i: r[in.dst].i = r[in.a].i != r[in.b].i; break;
            case Opc::lt_d: r[in.dst].i = r[in.a].d < r[in.b].d; break;
            case Opc::le_d: r[in.dst].i = r[in.a].d <= r[in.b].d; break;
            case Opc::eq_d: r[in.dst].i = r[in.a].d == r[in.b].d; break;
            case Opc::ne_d: r[in.dst].i = r[in.a].d != r[in.b].d; break;
            case Opc::lt_f: r[in.dst].i = r[in.a].f < r[in.b].f; break;
            case Opc::le_f: r[in.dst].i = r[in.a].f <= r[in.b].f; break;
            case Opc::eq_f: r[in.dst].i = r[in.a].f == r[in.b].f; break;
            case Opc::ne_f: r[in.dst].i = r[in.a].f != r[in.b].f; break;
            case Opc::not_i: r[in.dst].i = r[in.a].i == 0; break;
            case Opc::bool_i: r[in.dst].i = r[in.a].i != 0; break;
            case Opc::i2d: r[in.dst].d = static_cast<double>(r[in.a].i); break;
            case Opc::i2f: r[in.dst].f = static_cast<float>(r[in.a].i); break;
            case Opc::d2f: r[in.dst].f = static_cast<float>(r[in.a].d); break;
            case Opc::f2d: r[in.dst].d = static_cast<double>(r[in.a].f); break;
            case Opc::d2i: r[in.dst].i = static_cast<std::int64_t>(r[in.a].d); break;
            case Opc::f2i: r[in.dst].i = static_cast<std::int64_t>(r[in.a].f); break;
            case Opc::load_g: {
              const BufView& b = bufs[in.a];
              const std::int64_t i = r[in.b].i;
              if (i < 0 || i >= b.size) {
                runtime_fail(k, in.line, "index " + std::to_string(i) + " out of bounds for '" + k.params[in.a].name +
                                             "' (size " + std::to_string(b.size) + ")");
              }
              switch (b.type) {
                case ScalarType::f64: r[in.dst].d = static_cast<const double*>(b.data)[i]; break;
                case ScalarType::f32: r[in.dst].f = static_cast<const float*>(b.data)[i]; break;
                case ScalarType::i64: r[in.dst].i = static_cast<const std::int64_t*>(b.data)[i]; break;
              }
              break;
            }
            case Opc::store_g: {
              BufView& b = bufs[in.dst];
              const std::int64_t i = r[in.a].i;
              if (i < 0 || i >= b.size) {
                runtime_fail(k, in.line, "index " + std::to_string(i) + " out of bounds for '" +
                                             k.params[in.dst].name + "' (size " + std::to_string(b.size) + ")");
              }
              if (b.stamps.empty()) b.stamps.assign(b.size, 0);
              if (b.stamps[i] != 0 && b.stamps[i] != writer_id) {
                runtime_fail(k, in.line, "write-write race on '" + k.params[in.dst].name + "'[" + std::to_string(i) + "]");
              }
              b.stamps[i] = writer_id;
              switch (b.type) {
                case ScalarType::f64: static_cast<double*>(b.data)[i] = r[in.b].d; break;
                case ScalarType::f32: static_cast<float*>(b.data)[i] = r[in.b].f; break;
                case ScalarType::i64: static_cast<std::int64_t*>(b.data)[i] = r[in.b].i; break;
              }
              break;
            }
            case Opc::load_s: {
              const std::int64_t i = r[in.b].i;
              if (i < 0 || i >= k.shared[in.a].size) {
                runtime_fail(k, in.line, "index " + std::to_string(i) + " out of bounds for shared '" +
                                             k.shared[in.a].name + "'");
              }
              SharedWord& m = shared_meta[in.a][i];
              if (m.write_epoch < group_epoch) {
                runtime_fail(k, in.line, "read of uninitialized shared '" + k.shared[in.a].name + "'[" +
                                             std::to_string(i) + "]");
              }
              if (m.write_epoch == epoch_ && m.writer != lane) {
                runtime_fail(k, in.line, "race: shared '" + k.shared[in.a].name + "'[" + std::to_string(i) +
                                             "] read without a barrier after another lane wrote it");
              }
              if (m.read_epoch == epoch_) {
                if (m.reader != lane) m.reader = -2;
              } else {
                m.read_epoch = epoch_;
                m.reader = lane;
              }
              r[in.dst] = shared[in.a][i];
              break;
            }
            case Opc::store_s: {
              const std::int64_t i = r[in.a].i;
              if (i < 0 || i >= k.shared[in.dst].size) {
                runtime_fail(k, in.line, "index " + std::to_string(i) + " out of bounds for shared '" +
                                             k.shared[in.dst].name + "'");
              }
              SharedWord& m = shared_meta[in.dst][i];
              if ((m.write_epoch == epoch_ && m.writer != lane) || (m.read_epoch == epoch_ && m.reader != lane)) {
                runtime_fail(k, in.line, "race: shared '" + k.shared[in.dst].name + "'[" + std::to_string(i) +
                                             "] written while another lane accesses it in the same phase");
              }
              m.write_epoch = epoch_;
              m.writer = lane;
              shared[in.dst][i] = r[in.b];
              break;
            }
            case Opc::load_c: {
              const std::int64_t i = r[in.b].i;
              if (i < 0 || i >= k.tables[in.a].size) {
                runtime_fail(k, in.line, "index " + std::to_string(i) + " out of bounds for table '" +
                                             k.tables[in.a].name + "'");
              }
              r[in.dst] = k.table_data[in.a][i];
              break;
            }
            case Opc::lane: r[in.dst].i = lane; break;
            case Opc::group: r[in.dst].i = g; break;
            case Opc::ngroups: r[in.dst].i = groups; break;
            case Opc::jmp: p = static_cast<int>(in.imm) - 1; break;
            case Opc::jz:
              if (r[in.a].i == 0) p = static_cast<int>(in.imm) - 1;
              break;
            case Opc::jnz:
              if (r[in.a].i != 0) p = static_cast<int>(in.imm) - 1;
              break;
            case Opc::barrier:
            case Opc::end: goto stopped;
          }
          ++p;
        }
      stopped:
        pc[lane] = p;
      }
      const Opc stop = k.code[pc[0]].op;
      for (int l = 1; l < lanes; ++l) {
        if (pc[l] != pc[0]) {
          runtime_fail(k, k.code[pc[l]].line, "lanes diverged at a barrier (lane 0 at line " +
                                                  std::to_string(k.code[pc[0]].line) + ", lane " + std::to_string(l) +
                                                  ")");
        }
      }
      if (stop == Opc::end) break;
      ++epoch_;
      for (int l = 0; l < lanes; ++l) ++pc[l];
    }
  }
  flops_ += flops;
}

}  // namespace

std::unique_ptr<Backend> make_interp_backend() { return std::make_unique<InterpBackend>(); }

}  // namespace dgforge
