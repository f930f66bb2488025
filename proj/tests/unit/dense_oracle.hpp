#pragma once

// Dense global operator: assembles du/dt = A u + b explicitly from the
// reference matrices, the mesh geometry and the flux interpreter. Neighbour
// nodes are matched by coordinates, not through the connectivity permutation.

#include <cmath>
#include <map>

#include "dgforge/physics.hpp"

namespace test {

struct DenseOperator {
  int np = 0, fields = 0, elements = 0;
  dgforge::Matrix a;
  Eigen::VectorXd b;

  int row(int k, int c, int i) const { return (k * fields + c) * np + i; }
};

// Linear flux coefficients at one face node: bracket = Fm u- + Fp u+.
inline void flux_coefficients(const dgforge::SystemDefinition& sys, const dgforge::Point& n, Eigen::MatrixXd& fm,
                              Eigen::MatrixXd& fp) {
  using namespace dgforge::flux;
  const int F = sys.num_fields();
  fm.setZero(F, F);
  fp.setZero(F, F);
  auto eval = [&](const std::vector<double>& m, const std::vector<double>& p) {
    std::map<std::string, TracePair> traces;
    size_t c = 0;
    for (const auto& g : sys.flux.fields) {
      TracePair t;
      t.minus.shape = t.plus.shape = g.shape();
      for (size_t i = 0; i < g.components.size(); ++i, ++c) {
        t.minus.v[i] = m[c];
        t.plus.v[i] = p[c];
      }
      traces[g.name] = t;
    }
    std::vector<double> out;
    for (size_t g = 0; g < sys.flux.outputs.size(); ++g) {
      Value v = interpret(sys.flux.outputs[g].second, traces, n, sys.flux.params);
      for (size_t i = 0; i < sys.flux.fields[g].components.size(); ++i) out.push_back(v.v[i]);
    }
    return out;
  };
  std::vector<double> zero(F, 0.0);
  for (int j = 0; j < F; ++j) {
    std::vector<double> e(F, 0.0);
    e[j] = 1.0;
    auto a = eval(e, zero), b = eval(zero, e);
    for (int c = 0; c < F; ++c) {
      fm(c, j) = a[c];
      fp(c, j) = b[c];
    }
  }
}

inline DenseOperator assemble_dense(const dgforge::Mesh& mesh, int order, const dgforge::SystemDefinition& sys,
                                    const dgforge::FieldFunction& data, double t) {
  using namespace dgforge;
  const auto refel = build_reference_element(order);
  const auto geo = compute_geometric_factors(mesh, refel);
  const int K = mesh.num_elements(), np = refel.np, nfp = refel.nfp, F = sys.num_fields();
  DenseOperator op;
  op.np = np;
  op.fields = F;
  op.elements = K;
  op.a.setZero(K * F * np, K * F * np);
  op.b.setZero(K * F * np);

  std::vector<Matrix> x(K);
  for (int k = 0; k < K; ++k) x[k] = physical_nodes(mesh, refel, k);

  // face -> (element, face) by matching the face node coordinates
  auto centroid = [&](int k, int f) {
    Eigen::RowVector3d c = Eigen::RowVector3d::Zero();
    for (int i : refel.face_node_index[f]) c += x[k].row(i);
    return Eigen::RowVector3d(c / nfp);
  };

  for (int k = 0; k < K; ++k) {
    const auto& g = geo.drdx[k];
    for (const auto& term : sys.volume_terms) {
      for (int mu = 0; mu < 3; ++mu) {
        const double s = term.coef * g[3 * mu + term.axis];
        for (int i = 0; i < np; ++i)
          for (int j = 0; j < np; ++j) op.a(op.row(k, term.out, i), op.row(k, term.field, j)) += s * refel.diff[mu](i, j);
      }
    }

    for (int f = 0; f < 4; ++f) {
      const Point n = geo.normal[k][f];
      Eigen::MatrixXd fm, fp;
      flux_coefficients(sys, n, fm, fp);
      const double scale = geo.surface_jacobian[k][f] / geo.jacobian[k];

      int kp = -1, fq = -1;
      const auto ck = centroid(k, f);
      for (int k2 = 0; k2 < K && kp < 0; ++k2) {
        if (k2 == k) continue;
        for (int f2 = 0; f2 < 4; ++f2) {
          if ((centroid(k2, f2) - ck).norm() < 1e-10) {
            kp = k2;
            fq = f2;
            break;
          }
        }
      }

      for (int q = 0; q < nfp; ++q) {
        const int im = refel.face_node_index[f][q];
        Eigen::MatrixXd cm = fm;   // coefficient of the interior trace
        int ip = -1;
        Eigen::VectorXd ghost = Eigen::VectorXd::Zero(F);
        if (kp >= 0) {
          for (int i2 : refel.face_node_index[fq]) {
            if ((x[kp].row(i2) - x[k].row(im)).norm() < 1e-10) ip = i2;
          }
          if (ip < 0) throw dgforge::Error("dense oracle: unmatched face node");
        } else {
          auto tag_it = mesh.boundary_tag.find({k, f});
          const std::string tag = tag_it == mesh.boundary_tag.end() ? kDefaultBoundaryTag : tag_it->second;
          const Point xq{x[k](im, 0), x[k](im, 1), x[k](im, 2)};
          // u+ = B u- + g, columns of B from unit interior traces with zero data
          Eigen::MatrixXd bmat(F, F);
          for (int j = 0; j < F; ++j) {
            std::vector<double> e(F, 0.0);
            e[j] = 1.0;
            auto gj = ghost_trace(sys, tag, e, n, xq, t, [&](const Point&, double) { return std::vector<double>(F, 0.0); });
            for (int c = 0; c < F; ++c) bmat(c, j) = gj[c];
          }
          auto g0 = ghost_trace(sys, tag, std::vector<double>(F, 0.0), n, xq, t, data);
          for (int c = 0; c < F; ++c) ghost[c] = g0[c];
          cm += fp * bmat;
        }
        for (int i = 0; i < np; ++i) {
          const double l = scale * refel.lift(i, f * nfp + q);
          if (l == 0.0) continue;
          for (int c = 0; c < F; ++c) {
            for (int j = 0; j < F; ++j) {
              op.a(op.row(k, c, i), op.row(k, j, im)) += l * cm(c, j);
              if (ip >= 0) op.a(op.row(k, c, i), op.row(kp, j, ip)) += l * fp(c, j);
            }
            if (ip < 0) op.b(op.row(k, c, i)) += l * (fp.row(c) * ghost)(0);
          }
        }
      }
    }
  }
  return op;
}

/// Dense vector in oracle order from per-field layout-order values.
inline Eigen::VectorXd to_dense(const dgforge::MicroblockLayout& layout, const std::vector<std::vector<double>>& v) {
  const int F = static_cast<int>(v.size());
  Eigen::VectorXd d(static_cast<Eigen::Index>(layout.num_elements) * F * layout.np);
  for (int k = 0; k < layout.num_elements; ++k)
    for (int c = 0; c < F; ++c)
      for (int i = 0; i < layout.np; ++i) d((k * F + c) * layout.np + i) = v[c][layout.dof_index(k, i)];
  return d;
}

}  // namespace test
