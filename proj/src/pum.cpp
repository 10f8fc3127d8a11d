#include "qcds/pum.hpp"

#include "qcds/kernels.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qcds {

namespace {

struct GeneratorData {
  double value;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

GeneratorData generator_at(const Eigen::VectorXd& x, const Patch& p,
                           const Eigen::VectorXd& scale) {
  const int dim = static_cast<int>(x.size());
  Eigen::VectorXd u(dim);
  for (int d = 0; d < dim; ++d) u[d] = (x[d] - p.center[d]) / scale[d];
  const double un = u.norm();
  const double r = un / p.radius;
  GeneratorData g;
  g.grad = Eigen::VectorXd::Zero(dim);
  g.hess = Eigen::MatrixXd::Zero(dim, dim);
  const RadialDerivs w = wendland_c2(r);
  g.value = w.value;
  const double d1r = wendland_c2_d1_over_r(r);
  if (un < 1e-14) {
    for (int d = 0; d < dim; ++d)
      g.hess(d, d) = d1r / (scale[d] * scale[d] * p.radius * p.radius);
    return g;
  }
  Eigen::VectorXd e = u / un;
  for (int d = 0; d < dim; ++d) g.grad[d] = w.d1 * e[d] / (scale[d] * p.radius);
  const double rr = p.radius * p.radius;
  for (int d = 0; d < dim; ++d)
    for (int m = 0; m < dim; ++m) {
      double t = w.d2 * e[d] * e[m];
      if (d == m) t += d1r * (1.0 - e[d] * e[m]);
      else t -= d1r * e[d] * e[m];
      g.hess(d, m) = t / (scale[d] * scale[m] * rr);
    }
  return g;
}

std::vector<ShepardEntry> shepard_from_patches(
    const Eigen::VectorXd& x, const PatchCover& cover,
    const std::vector<int>& covering) {
  const int dim = static_cast<int>(x.size());
  const int np = static_cast<int>(covering.size());
  std::vector<GeneratorData> phi(np);
  double S = 0;
  Eigen::VectorXd gS = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd hS = Eigen::MatrixXd::Zero(dim, dim);
  for (int j = 0; j < np; ++j) {
    phi[j] = generator_at(x, cover.patches[covering[j]], cover.dim_scale);
    S += phi[j].value;
    gS += phi[j].grad;
    hS += phi[j].hess;
  }
  if (S <= 0) throw std::runtime_error("point not covered by any patch");
  std::vector<ShepardEntry> out(np);
  for (int j = 0; j < np; ++j) {
    ShepardEntry& s = out[j];
    s.w = phi[j].value / S;
    s.grad = (phi[j].grad - s.w * gS) / S;
    s.hess = (phi[j].hess - s.w * hS - s.grad * gS.transpose() -
              gS * s.grad.transpose()) /
             S;
  }
  return out;
}

std::vector<int> covering_patches(const Eigen::VectorXd& x,
                                  const PatchCover& cover) {
  std::vector<int> out;
  const int dim = static_cast<int>(x.size());
  for (int j = 0; j < static_cast<int>(cover.patches.size()); ++j) {
    const Patch& p = cover.patches[j];
    double q = 0;
    for (int d = 0; d < dim; ++d) {
      double u = (x[d] - p.center[d]) / cover.dim_scale[d];
      q += u * u;
    }
    if (q <= p.radius * p.radius) out.push_back(j);
  }
  return out;
}

} // namespace

std::vector<std::pair<int, ShepardEntry>> shepard_weights(
    const Eigen::VectorXd& x, const PatchCover& cover) {
  std::vector<int> covering = covering_patches(x, cover);
  if (covering.empty()) throw std::runtime_error("uncovered point");
  std::vector<ShepardEntry> entries = shepard_from_patches(x, cover, covering);
  std::vector<std::pair<int, ShepardEntry>> out;
  out.reserve(covering.size());
  for (size_t j = 0; j < covering.size(); ++j)
    out.emplace_back(covering[j], std::move(entries[j]));
  return out;
}

struct PumSpace::NodeCoeffs {
  Eigen::MatrixXd C;
  Eigen::VectorXd b;
  double c0 = 0;
};

PumSpace::PumSpace(NodeSet nodes, PatchCover cover, double shape_scale)
    : nodes_(std::move(nodes)), cover_(std::move(cover)) {
  const int dim = nodes_.dim;
  double hbar = 0;
  for (int d = 0; d < dim; ++d)
    hbar += nodes_.bounds[d].extent() / cover_.dim_scale[d] /
            double(nodes_.shape[d] - 1);
  hbar /= dim;
  eps_ = shape_scale / hbar;

  const int npatch = static_cast<int>(cover_.patches.size());
  factors_.resize(npatch);
  std::vector<int> warned(npatch, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int j = 0; j < npatch; ++j) {
    const Patch& p = cover_.patches[j];
    const int n = static_cast<int>(p.members.size());
    Eigen::MatrixXd A(n, n);
    for (int i = 0; i < n; ++i) {
      A(i, i) = 1.0;
      for (int k = i + 1; k < n; ++k) {
        double r2 = 0;
        for (int d = 0; d < dim; ++d) {
          double u = (nodes_.coords(p.members[i], d) -
                      nodes_.coords(p.members[k], d)) /
                     cover_.dim_scale[d];
          r2 += u * u;
        }
        A(i, k) = A(k, i) = gaussian_rbf(eps_, r2).value;
      }
    }
    factors_[j].compute(A);
    // Near-flat Gaussian Gram matrices routinely run past rcond 1e-16 yet
    // still solve backward-stably; shifting the diagonal by 1e-12*|A| was
    // measured to inject O(eps^2)-amplified noise into second-derivative
    // rows. The fallback therefore only fires on genuine breakdown
    // (failed factorization, non-finite or significantly negative pivots).
    const auto& D = factors_[j].vectorD();
    bool trigger = factors_[j].info() != Eigen::Success ||
                   !D.allFinite() ||
                   D.minCoeff() < -1e-8 * D.cwiseAbs().maxCoeff();
    if (trigger) {
      const double reg = 1e-12 * A.cwiseAbs().rowwise().sum().maxCoeff();
      A.diagonal().array() += reg;
      factors_[j].compute(A);
      warned[j] = 1;
    }
  }
  for (int j = 0; j < npatch; ++j) cond_warnings_ += warned[j];

  const int n = nodes_.size();
  shepard_.resize(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int k = 0; k < n; ++k)
    shepard_[k] = shepard_from_patches(nodes_.coords.row(k).transpose(),
                                       cover_, cover_.node_to_patches[k]);
}

void PumSpace::local_block(int patch, const std::vector<NodeCoeffs>& pc,
                           Eigen::MatrixXd& out) const {
  const Patch& p = cover_.patches[patch];
  const int n = static_cast<int>(p.members.size());
  const int dim = nodes_.dim;
  Eigen::MatrixXd T(n, n);
  Eigen::VectorXd u(dim), beta(dim);
  for (int kk = 0; kk < n; ++kk) {
    const int node = p.members[kk];
    const NodeCoeffs& nc = pc[node];
    // Locate this patch in the node's covering list to reuse cached Shepard
    // data.
    const std::vector<int>& covering = cover_.node_to_patches[node];
    int pos = -1;
    for (int q = 0; q < static_cast<int>(covering.size()); ++q)
      if (covering[q] == patch) {
        pos = q;
        break;
      }
    const ShepardEntry& sh = shepard_[node][pos];
    // Leibniz expansion of the reduced operator applied to w_j * f_j.
    const double alpha = nc.c0 * sh.w + nc.b.dot(sh.grad) +
                         (nc.C.array() * sh.hess.array()).sum();
    beta = nc.b * sh.w + 2.0 * (nc.C * sh.grad);
    for (int ii = 0; ii < n; ++ii) {
      double r2 = 0;
      for (int d = 0; d < dim; ++d) {
        u[d] = (nodes_.coords(node, d) - nodes_.coords(p.members[ii], d)) /
               cover_.dim_scale[d];
        r2 += u[d] * u[d];
      }
      const GaussianDerivs g = gaussian_rbf(eps_, r2);
      double acc = alpha * g.value;
      for (int d = 0; d < dim; ++d)
        acc += beta[d] * g.c1 * u[d] / cover_.dim_scale[d];
      for (int d = 0; d < dim; ++d) {
        const double sd = cover_.dim_scale[d];
        acc += sh.w * nc.C(d, d) * (g.c2 * u[d] * u[d] + g.c1) / (sd * sd);
        for (int e = d + 1; e < dim; ++e)
          acc += 2.0 * sh.w * nc.C(d, e) * g.c2 * u[d] * u[e] /
                 (sd * cover_.dim_scale[e]);
      }
      T(kk, ii) = acc;
    }
  }
  // Rows act on nodal values through the local interpolation system.
  out = factors_[patch].solve(T.transpose()).transpose();
}

SpatialOperator PumSpace::assemble_operator(const OperatorCoeffs& coeffs,
                                            BoundaryPolicy policy,
                                            bool parallel) const {
  const int n = nodes_.size();
  const int dim = nodes_.dim;
  std::vector<NodeCoeffs> pc(n);
  for (int k = 0; k < n; ++k) {
    NodeCoeffs& nc = pc[k];
    nc.C.setZero(dim, dim);
    nc.b.setZero(dim);
    coeffs.eval(nodes_.coords.row(k).transpose(), nc.C, nc.b, nc.c0);
    if (!nc.C.allFinite() || !nc.b.allFinite() || !std::isfinite(nc.c0))
      throw std::runtime_error("non-finite operator coefficient at node " +
                               std::to_string(k));
    if (policy == BoundaryPolicy::vanishing_second_derivative &&
        nodes_.on_boundary(k)) {
      for (int d = 0; d < dim; ++d)
        if (nodes_.on_face(k, d)) {
          nc.C.row(d).setZero();
          nc.C.col(d).setZero();
        }
    }
  }

  const int npatch = static_cast<int>(cover_.patches.size());
  std::vector<std::vector<Eigen::Triplet<double>>> trip(npatch);
  auto handle_patch = [&](int j) {
    Eigen::MatrixXd X;
    local_block(j, pc, X);
    const Patch& p = cover_.patches[j];
    const int nj = static_cast<int>(p.members.size());
    trip[j].reserve(size_t(nj) * nj);
    for (int kk = 0; kk < nj; ++kk)
      for (int ii = 0; ii < nj; ++ii)
        trip[j].emplace_back(p.members[kk], p.members[ii], X(kk, ii));
  };
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int j = 0; j < npatch; ++j) handle_patch(j);
  } else {
    for (int j = 0; j < npatch; ++j) handle_patch(j);
  }

  // Fixed patch-order gather keeps the result identical for any thread count.
  std::vector<Eigen::Triplet<double>> all;
  size_t total = 0;
  for (const auto& t : trip) total += t.size();
  all.reserve(total);
  for (auto& t : trip) {
    all.insert(all.end(), t.begin(), t.end());
    t.clear();
    t.shrink_to_fit();
  }
  SpatialOperator op;
  op.description = coeffs.description;
  op.cond_warnings = cond_warnings_;
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(all.begin(), all.end());
  return op;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> PumSpace::evaluation_matrix(
    const Eigen::MatrixXd& points) const {
  const int np = static_cast<int>(points.rows());
  const int dim = nodes_.dim;
  if (points.cols() != dim) throw std::invalid_argument("point dim mismatch");
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd u(dim);
  for (int pI = 0; pI < np; ++pI) {
    Eigen::VectorXd x = points.row(pI).transpose();
    std::vector<int> covering = covering_patches(x, cover_);
    if (covering.empty())
      throw std::runtime_error("evaluation point outside the cover");
    std::vector<ShepardEntry> sh = shepard_from_patches(x, cover_, covering);
    for (size_t q = 0; q < covering.size(); ++q) {
      const Patch& p = cover_.patches[covering[q]];
      const int nj = static_cast<int>(p.members.size());
      Eigen::VectorXd phi(nj);
      for (int ii = 0; ii < nj; ++ii) {
        double r2 = 0;
        for (int d = 0; d < dim; ++d) {
          u[d] = (x[d] - nodes_.coords(p.members[ii], d)) / cover_.dim_scale[d];
          r2 += u[d] * u[d];
        }
        phi[ii] = gaussian_rbf(eps_, r2).value;
      }
      Eigen::VectorXd row = factors_[covering[q]].solve(phi);
      for (int ii = 0; ii < nj; ++ii)
        trip.emplace_back(pI, p.members[ii], sh[q].w * row[ii]);
    }
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> M(np, nodes_.size());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

} // namespace qcds
