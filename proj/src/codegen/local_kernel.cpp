#include <set>

#include "dgforge/source_writer.hpp"

namespace dgforge {

namespace {

std::string S(long long v) { return std::to_string(v); }

// Everything the local-kernel emitter needs, resolved once.
struct LocalShape {
  bool diff;
  int np, km, ps;       // volume layout
  int iw, ips;          // input width per element and padded microblock size
  int mats;             // matrices applied per field (3 for differentiation)
  int nin;              // fields read
  int ws, wi, wp, lanes;
  int rows;             // rows per pass (row partition / mixed)
  bool full_unroll;
  std::string T;
  Precision prec;
};

std::string lit(const LocalShape& s, double v) {
  std::string t = real_literal(v, s.prec);
  return t[0] == '-' ? "(" + t + ")" : t;
}

class LocalEmitter {
 public:
  LocalEmitter(const KernelPlan& plan, const ReferenceElement& refel, const MicroblockLayout& layout,
               const LocalKernelSpec& spec)
      : plan_(plan), refel_(refel), layout_(layout), spec_(spec) {
    s_.diff = plan.stage == Stage::differentiation;
    s_.np = refel.np;
    s_.km = layout.elements_per_block;
    s_.ps = layout.padded_size;
    const MicroblockLayout facial = facial_layout(layout, refel.nfp);
    s_.iw = s_.diff ? refel.np : 4 * refel.nfp;
    s_.ips = s_.diff ? layout.padded_size : facial.padded_size;
    s_.mats = s_.diff ? 3 : 1;
    s_.nin = spec.num_inputs;
    s_.ws = plan.decomposition.ws;
    s_.wi = plan.decomposition.wi;
    s_.wp = plan.decomposition.wp;
    s_.lanes = plan_lanes(plan, layout);
    s_.rows = row_partition_rows(refel.np);
    s_.full_unroll = plan.unroll && refel.order <= 5;
    s_.T = real_type(plan.precision);
    s_.prec = plan.precision;
  }

  KernelSource run() {
    const bool unroll = plan_.unroll;
    const std::string T = s_.T;
    std::vector<std::string> params;
    if (s_.diff) {
      for (int f = 0; f < spec_.num_inputs; ++f) params.push_back("global const " + T + "* u" + S(f));
      for (int o = 0; o < spec_.num_outputs; ++o) params.push_back("global " + T + "* out" + S(o));
      params.push_back("global const " + T + "* geo");
      if (!unroll) {
        params.push_back("global const " + T + "* dmat");
        params.push_back("int np");
      }
    } else {
      for (int f = 0; f < spec_.num_inputs; ++f) params.push_back("global const " + T + "* facial" + S(f));
      for (int f = 0; f < spec_.num_inputs; ++f) params.push_back("global const " + T + "* vol" + S(f));
      for (int f = 0; f < spec_.num_inputs; ++f) params.push_back("global " + T + "* out" + S(f));
      params.push_back("global const " + T + "* invj");
      if (!unroll) {
        params.push_back("global const " + T + "* lmat");
        params.push_back("int np");
        params.push_back("int nw");
      }
    }
    params.push_back("int K");

    std::string header = std::string("kernel ") + (s_.diff ? "dg_diff" : "dg_lift") + " lanes(" + S(s_.lanes) + ") (";
    for (size_t i = 0; i < params.size(); ++i) header += (i ? ", " : "") + params[i];
    header += ")";

    w_.line("// " + plan_.id());
    w_.open(header);

    const auto words = local_matrix_words(plan_.stage, refel_, spec_);
    src_ = s_.diff ? "dmat" : "lmat";
    if (unroll) {
      src_ = "mat";
      std::string table = "const " + T + " mat[" + S(words.size()) + "] = {";
      for (size_t i = 0; i < words.size(); ++i) table += (i ? ", " : "") + real_literal(words[i], s_.prec);
      w_.line(table + "};");
    }
    // Runtime strides of the matrix buffer; literal when unrolled.
    row_stride_ = unroll ? S(s_.iw) : (s_.diff ? "np" : "nw");
    mat_stride_ = unroll ? S(static_cast<long long>(s_.np) * s_.iw) : "np * " + row_stride_;
    trip_ = unroll ? S(s_.iw) : row_stride_;

    const std::int64_t onchip = estimate_onchip(plan_, layout_);
    const Storage st = plan_.storage;
    const bool staged = st == Storage::fields_in_shared || st == Storage::mixed;
    const long long sf_field = static_cast<long long>(s_.wp) * s_.wi * s_.km * s_.iw;
    if (st == Storage::matrix_in_shared) {
      w_.line("shared " + T + " sm[" + S(static_cast<long long>(s_.mats) * s_.np * s_.iw) + "];");
    } else if (st == Storage::row_partition_in_shared || st == Storage::mixed) {
      w_.line("shared " + T + " sm[" + S(static_cast<long long>(s_.mats) * s_.rows * s_.iw) + "];");
    }
    if (staged) w_.line("shared " + T + " sf[" + S(s_.nin * sf_field) + "];");

    w_.line("int lane = lane_id();");
    w_.line("int p = lane / " + S(s_.km * s_.np) + ";");
    w_.line("int e = (lane / " + S(s_.np) + ") % " + S(s_.km) + ";");
    w_.line("int i = lane % " + S(s_.np) + ";");
    w_.line("uniform int mbg = group_id() * " + S(s_.ws * s_.wi * s_.wp) + ";");

    if (st == Storage::matrix_in_shared) {
      copy_rows(0, s_.np, "sm");
      w_.line("barrier();");
    } else if (st == Storage::mixed) {
      copy_rows(0, s_.rows, "sm");
      w_.line("barrier();");
    }

    if (st == Storage::row_partition_in_shared) {
      for (int r0 = 0; r0 < s_.np; r0 += s_.rows) {
        const int r1 = std::min(s_.np, r0 + s_.rows);
        if (r0 > 0) w_.line("barrier();");
        copy_rows(r0, r1, "sm");
        w_.line("barrier();");
        sequence_loop(false, [&] {
          w_.open("if (i >= " + S(r0) + " && i < " + S(r1) + ")");
          compute([&](int mu, const std::string& j) {
            return "sm[" + S(static_cast<long long>(mu) * s_.rows * s_.iw) + " + (i - " + S(r0) + ") * " +
                   S(s_.iw) + " + " + j + "]";
          });
          w_.close();
        });
      }
    } else if (st == Storage::mixed) {
      sequence_loop(true, [&] {
        w_.open("if (i < " + S(s_.rows) + ")");
        compute([&](int mu, const std::string& j) {
          return "sm[" + S(static_cast<long long>(mu) * s_.rows * s_.iw) + " + i * " + S(s_.iw) + " + " + j + "]";
        });
        w_.close("}");
        w_.open("else");
        compute([&](int mu, const std::string& j) { return stream_matrix(mu, j); });
        w_.close();
      });
    } else {
      sequence_loop(staged, [&] {
        if (st == Storage::matrix_in_shared) {
          compute([&](int mu, const std::string& j) {
            return "sm[" + S(static_cast<long long>(mu) * s_.np * s_.iw) + " + i * " + S(s_.iw) + " + " + j + "]";
          });
        } else {
          compute([&](int mu, const std::string& j) { return stream_matrix(mu, j); });
        }
      });
    }
    w_.close();

    KernelSource out;
    out.entry = s_.diff ? "dg_diff" : "dg_lift";
    out.text = w_.str();
    out.lanes = s_.lanes;
    out.shared_bytes = onchip;
    out.registers_estimate = s_.nin * s_.mats * s_.wi + 8;
    return out;
  }

 private:
  std::string stream_matrix(int mu, const std::string& j) {
    std::string off = mu == 0 ? "" : (plan_.unroll ? S(static_cast<long long>(mu) * s_.np * s_.iw) : S(mu) + " * " + mat_stride_) + " + ";
    return src_ + "[" + off + "i * " + row_stride_ + " + " + j + "]";
  }

  // Cooperative copy of rows [r0, r1) of every matrix into sm (row-major per matrix, rows rebased).
  void copy_rows(int r0, int r1, const std::string& dst) {
    const long long per = static_cast<long long>(r1 - r0) * s_.iw;
    const long long total = per * s_.mats;
    const long long dst_mat = static_cast<long long>(plan_.storage == Storage::matrix_in_shared ? s_.np : s_.rows) * s_.iw;
    w_.open("for (int c = lane; c < " + S(total) + "; c += " + S(s_.lanes) + ")");
    w_.line("int mu = c / " + S(per) + ";");
    w_.line("int rem = c % " + S(per) + ";");
    const std::string src_index = plan_.unroll ? "mu * " + S(static_cast<long long>(s_.np) * s_.iw) + " + " +
                                                     S(static_cast<long long>(r0) * s_.iw) + " + rem"
                                               : "mu * " + mat_stride_ + " + " + S(r0) + " * " + row_stride_ +
                                                     " + (rem / " + S(s_.iw) + ") * " + row_stride_ + " + rem % " +
                                                     S(s_.iw);
    w_.line(dst + "[mu * " + S(dst_mat) + " + rem] = " + src_ + "[" + src_index + "];");
    w_.close();
  }

  // Emits the w_s loop; body() writes the per-step compute.
  template <class F>
  void sequence_loop(bool staged, F body) {
    w_.open("for (int s = 0; s < " + S(s_.ws) + "; s += 1)");
    for (int ii = 0; ii < s_.wi; ++ii) {
      w_.line("int mb" + S(ii) + " = mbg + (s * " + S(s_.wp) + " + p) * " + S(s_.wi) + " + " + S(ii) + ";");
      w_.line("int k" + S(ii) + " = mb" + S(ii) + " * " + S(s_.km) + " + e;");
      w_.line("int ok" + S(ii) + " = k" + S(ii) + " < K;");
    }
    if (staged) {
      const long long sf_field = static_cast<long long>(s_.wp) * s_.wi * s_.km * s_.iw;
      w_.line("barrier();");
      for (int ii = 0; ii < s_.wi; ++ii) {
        w_.open("if (ok" + S(ii) + ")");
        const std::string dst_base = "(p * " + S(s_.wi) + " + " + S(ii) + ") * " + S(s_.km * s_.iw) + " + e * " + S(s_.iw);
        const std::string src_base = "mb" + S(ii) + " * " + S(s_.ips) + " + e * " + S(s_.iw);
        auto copy = [&](const std::string& c) {
          for (int f = 0; f < s_.nin; ++f) {
            w_.line("sf[" + S(f * sf_field) + " + " + dst_base + " + " + c + "] = " + input_name(f) + "[" + src_base +
                    " + " + c + "];");
          }
        };
        if (s_.iw == s_.np) {
          copy("i");
        } else if (plan_.unroll) {
          for (int t = 0; t * s_.np < s_.iw; ++t) {
            const std::string c = t == 0 ? "i" : "i + " + S(t * s_.np);
            if ((t + 1) * s_.np > s_.iw) {
              w_.open("if (" + c + " < " + S(s_.iw) + ")");
              copy(c);
              w_.close();
            } else {
              copy(c);
            }
          }
        } else {
          w_.open("for (int c = i; c < " + S(s_.iw) + "; c += " + S(s_.np) + ")");
          copy("c");
          w_.close();
        }
        w_.close();
      }
      w_.line("barrier();");
    }
    staged_ = staged;
    body();
    w_.close();
  }

  std::string input_name(int f) const { return (s_.diff ? "u" : "facial") + S(f); }

  std::string input(int f, int ii, const std::string& j) const {
    if (staged_) {
      const long long sf_field = static_cast<long long>(s_.wp) * s_.wi * s_.km * s_.iw;
      return "sf[" + S(f * sf_field) + " + (p * " + S(s_.wi) + " + " + S(ii) + ") * " + S(s_.km * s_.iw) + " + e * " +
             S(s_.iw) + " + " + j + "]";
    }
    return input_name(f) + "[mb" + S(ii) + " * " + S(s_.ips) + " + e * " + S(s_.iw) + " + " + j + "]";
  }

  std::string acc(int f, int mu, int ii) const { return "a" + S(f) + "_" + S(mu) + "_" + S(ii); }

  // Dot products of matrix row i with every (field, in-line microblock), then the epilogue.
  template <class M>
  void compute(M matrix) {
    for (int ii = 0; ii < s_.wi; ++ii) {
      for (int f = 0; f < s_.nin; ++f) {
        for (int mu = 0; mu < s_.mats; ++mu) w_.line(s_.T + " " + acc(f, mu, ii) + " = " + lit(s_, 0.0) + ";");
      }
    }
    auto step = [&](const std::string& j) {
      for (int mu = 0; mu < s_.mats; ++mu) w_.line(s_.T + " m" + S(mu) + " = " + matrix(mu, j) + ";");
      for (int ii = 0; ii < s_.wi; ++ii) {
        w_.open("if (ok" + S(ii) + ")");
        for (int f = 0; f < s_.nin; ++f) {
          w_.line(s_.T + " v" + S(f) + " = " + input(f, ii, j) + ";");
          for (int mu = 0; mu < s_.mats; ++mu) w_.line(acc(f, mu, ii) + " += m" + S(mu) + " * v" + S(f) + ";");
        }
        w_.close();
      }
    };
    if (s_.full_unroll) {
      for (int j = 0; j < s_.iw; ++j) {
        w_.open("");
        step(S(j));
        w_.close();
      }
    } else {
      w_.open("for (int j = 0; j < " + trip_ + "; j += 1)");
      step("j");
      w_.close();
    }
    for (int ii = 0; ii < s_.wi; ++ii) {
      w_.open("if (ok" + S(ii) + ")");
      w_.line("int o = mb" + S(ii) + " * " + S(s_.ps) + " + e * " + S(s_.np) + " + i;");
      if (s_.diff) diff_epilogue(ii);
      else lift_epilogue(ii);
      w_.close();
    }
  }

  void diff_epilogue(int ii) {
    const std::string k = "k" + S(ii);
    std::set<int> axes;
    std::set<std::pair<int, int>> needed;
    for (const auto& t : spec_.terms) {
      axes.insert(t.axis);
      needed.insert({t.field, t.axis});
    }
    for (int nu : axes) {
      for (int mu = 0; mu < 3; ++mu) {
        w_.line(s_.T + " g" + S(mu) + S(nu) + " = geo[" + k + " * 9 + " + S(3 * mu + nu) + "];");
      }
    }
    for (const auto& [f, nu] : needed) {
      w_.line(s_.T + " d" + S(f) + "_" + S(nu) + " = g0" + S(nu) + " * " + acc(f, 0, ii) + " + g1" + S(nu) + " * " +
              acc(f, 1, ii) + " + g2" + S(nu) + " * " + acc(f, 2, ii) + ";");
    }
    for (int o = 0; o < spec_.num_outputs; ++o) {
      w_.line(s_.T + " r" + S(o) + " = " + lit(s_, 0.0) + ";");
      for (const auto& t : spec_.terms) {
        if (t.out != o) continue;
        const std::string d = "d" + S(t.field) + "_" + S(t.axis);
        if (t.coef == 1.0) w_.line("r" + S(o) + " += " + d + ";");
        else if (t.coef == -1.0) w_.line("r" + S(o) + " -= " + d + ";");
        else w_.line("r" + S(o) + " += " + lit(s_, t.coef) + " * " + d + ";");
      }
      w_.line("out" + S(o) + "[o] = r" + S(o) + ";");
    }
  }

  void lift_epilogue(int ii) {
    w_.line(s_.T + " ij = invj[k" + S(ii) + "];");
    for (int f = 0; f < s_.nin; ++f) {
      w_.line("out" + S(f) + "[o] = vol" + S(f) + "[o] + ij * " + acc(f, 0, ii) + ";");
    }
  }

  const KernelPlan& plan_;
  const ReferenceElement& refel_;
  const MicroblockLayout& layout_;
  const LocalKernelSpec& spec_;
  LocalShape s_{};
  SourceWriter w_;
  std::string src_, row_stride_, mat_stride_, trip_;
  bool staged_ = false;
};

}  // namespace

std::vector<double> local_matrix_words(Stage stage, const ReferenceElement& refel, const LocalKernelSpec& spec) {
  std::vector<double> words;
  if (stage == Stage::differentiation) {
    for (int mu = 0; mu < 3; ++mu) {
      const Matrix& m = spec.diff_override ? (*spec.diff_override)[mu] : refel.diff[mu];
      words.insert(words.end(), m.data(), m.data() + m.size());
    }
  } else {
    const Matrix& m = spec.lift_override ? *spec.lift_override : refel.lift;
    words.assign(m.data(), m.data() + m.size());
  }
  return words;
}

KernelSource generate_local_kernel(const KernelPlan& plan, const ReferenceElement& refel,
                                   const MicroblockLayout& layout, const LocalKernelSpec& spec) {
  if (plan.stage != Stage::differentiation && plan.stage != Stage::lift) {
    throw Error("generate_local_kernel needs a differentiation or lift plan");
  }
  if (plan.order != refel.order) throw Error("plan order does not match the reference element");
  const auto& d = plan.decomposition;
  if (d.ws < 1 || d.wi < 1 || d.wp < 1) throw Error("inadmissible plan " + plan.id() + ": decomposition below 1");
  if (plan.stage == Stage::differentiation) {
    for (const auto& t : spec.terms) {
      if (t.field < 0 || t.field >= spec.num_inputs || t.out < 0 || t.out >= spec.num_outputs || t.axis < 0 ||
          t.axis > 2) {
        throw Error("derivative term out of range");
      }
    }
  }
  return LocalEmitter(plan, refel, layout, spec).run();
}

}  // namespace dgforge
