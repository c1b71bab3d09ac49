#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nlepi/kernels.hpp"

namespace nlepi {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Uniform grid on [l1, l2] including both endpoints.
template <typename Scalar>
struct Grid {
  Scalar l1 = 0;
  Scalar l2 = 1;
  Eigen::Index n = 0;
  Scalar dx = 0;

  Scalar node(Eigen::Index i) const { return i == n - 1 ? l2 : l1 + static_cast<Scalar>(i) * dx; }
  VectorX<Scalar> nodes() const {
    VectorX<Scalar> x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = node(i);
    return x;
  }
  VectorX<Scalar> trapezoid_weights() const {
    VectorX<Scalar> w = VectorX<Scalar>::Constant(n, dx);
    w[0] = w[n - 1] = dx / 2;
    return w;
  }
  Scalar length() const { return l2 - l1; }
};

template <typename Scalar>
Grid<Scalar> grid_with_nodes(Scalar l1, Scalar l2, Eigen::Index n) {
  if (!(l1 < l2)) throw std::invalid_argument("grid: need l1 < l2");
  if (n < 3) throw std::invalid_argument("grid: need at least 3 nodes");
  return {l1, l2, n, (l2 - l1) / static_cast<Scalar>(n - 1)};
}

/// Smallest uniform grid on [l1, l2] with spacing <= dx_target.
template <typename Scalar>
Grid<Scalar> build_grid(Scalar l1, Scalar l2, Scalar dx_target) {
  if (!(l1 < l2)) throw std::invalid_argument("grid: need l1 < l2");
  if (!(dx_target > 0)) throw std::invalid_argument("grid: dx_target must be positive");
  if (l2 - l1 < 2 * dx_target)
    throw std::invalid_argument("grid: interval unresolvable (length < 2 * dx_target)");
  const Scalar ratio = (l2 - l1) / dx_target;
  const auto cells = static_cast<Eigen::Index>(std::ceil(ratio - Scalar(1e-9) * ratio));
  return grid_with_nodes(l1, l2, cells + 1);
}

struct GridOptions {
  double dx_target = 0;   // 0 selects min(sigma/20, length/200)
  long n_max = 4001;      // per component
  double dx_scale = 1;    // multiplies the chosen spacing (0.5 halves it)
};

/// Grid for an eigenvalue or steady-state computation on [l1, l2], where
/// `kernel_scale` is the narrowest kernel scale in use.
template <typename Scalar>
Grid<Scalar> make_grid(Scalar l1, Scalar l2, Scalar kernel_scale, const GridOptions& opts = {}) {
  if (!(l1 < l2)) throw std::invalid_argument("grid: need l1 < l2");
  Scalar dx = opts.dx_target > 0 ? Scalar(opts.dx_target)
                                 : std::min(kernel_scale / 20, (l2 - l1) / 200);
  dx *= Scalar(opts.dx_scale);
  const Scalar ratio = (l2 - l1) / dx;
  auto cells = static_cast<Eigen::Index>(std::ceil(ratio - Scalar(1e-9) * ratio));
  cells = std::max<Eigen::Index>(cells, 2);
  cells = std::min<Eigen::Index>(cells, std::max<long>(opts.n_max, 3) - 1);
  return grid_with_nodes(l1, l2, cells + 1);
}

/// Collocation matrix of y -> int_{l1}^{l2} J(x_i - y) f(y) dy with trapezoid
/// weights: W(i, j) = w_j J(x_i - x_j). Stored as a Toeplitz stencil plus the
/// weights; the dense form is produced on request.
template <typename Scalar>
class ConvolutionMatrix {
 public:
  ConvolutionMatrix() = default;
  ConvolutionMatrix(const KernelSpec<Scalar>& k, const Grid<Scalar>& g) : grid_(g), weights_(g.trapezoid_weights()) {
    const Scalar dx = g.dx;
    const auto reach = static_cast<Eigen::Index>(std::floor(k.support_radius() / dx)) + 1;
    const Eigen::Index K = std::min(reach, g.n - 1);
    stencil_.resize(K + 1);
    for (Eigen::Index m = 0; m <= K; ++m) stencil_[m] = k(static_cast<Scalar>(m) * dx);

    // tail[m] = sum_{m' >= m} J(m' dx), summed from the small end.
    const Eigen::Index M = std::max(reach, g.n) + 1;
    VectorX<Scalar> tail = VectorX<Scalar>::Zero(M + 2);
    for (Eigen::Index m = M; m >= 0; --m) tail[m] = tail[m + 1] + (m <= reach ? k(static_cast<Scalar>(m) * dx) : 0);
    const Scalar q = k.lattice_defect(dx);
    deficit_.resize(g.n);
    for (Eigen::Index i = 0; i < g.n; ++i) {
      const Eigen::Index right = g.n - 1 - i;
      deficit_[i] = q + dx * (tail[i + 1] + tail[right + 1]) +
                    dx / 2 * (k(static_cast<Scalar>(i) * dx) + k(static_cast<Scalar>(right) * dx));
    }
  }

  const Grid<Scalar>& grid() const { return grid_; }
  Eigen::Index size() const { return grid_.n; }
  const VectorX<Scalar>& stencil() const { return stencil_; }
  const VectorX<Scalar>& weights() const { return weights_; }

  /// 1 - (row sum), accumulated from the kernel mass that falls outside the
  /// interval, so that it is exactly zero when none does.
  const VectorX<Scalar>& deficit() const { return deficit_; }

  Scalar entry(Eigen::Index i, Eigen::Index j) const {
    const Eigen::Index m = i > j ? i - j : j - i;
    return m < stencil_.size() ? stencil_[m] * weights_[j] : Scalar(0);
  }

  MatrixX<Scalar> entries() const {
    MatrixX<Scalar> W(grid_.n, grid_.n);
    for (Eigen::Index j = 0; j < grid_.n; ++j)
      for (Eigen::Index i = 0; i < grid_.n; ++i) W(i, j) = entry(i, j);
    return W;
  }

  template <typename Derived>
  VectorX<Scalar> apply(const Eigen::MatrixBase<Derived>& f) const {
    const VectorX<Scalar> wf = weights_.cwiseProduct(f);
    return correlate(wf);
  }

  VectorX<Scalar> row_sums() const { return apply(VectorX<Scalar>::Ones(grid_.n)); }

 private:
  VectorX<Scalar> correlate(const VectorX<Scalar>& wf) const {
    const Eigen::Index n = grid_.n;
    const Eigen::Index K = stencil_.size() - 1;
    VectorX<Scalar> out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, i - K);
      const Eigen::Index hi = std::min<Eigen::Index>(n - 1, i + K);
      Scalar acc = 0;
      for (Eigen::Index j = lo; j <= hi; ++j) acc += stencil_[i > j ? i - j : j - i] * wf[j];
      out[i] = acc;
    }
    return out;
  }

  Grid<Scalar> grid_;
  VectorX<Scalar> weights_;
  VectorX<Scalar> stencil_;
  VectorX<Scalar> deficit_;
};

template <typename Scalar>
ConvolutionMatrix<Scalar> assemble_convolution(const KernelSpec<Scalar>& k, const Grid<Scalar>& g) {
  return ConvolutionMatrix<Scalar>(k, g);
}

/// The four kernels J11, J12, J21, J22 of the coupled system.
template <typename Scalar>
struct KernelSet {
  KernelSpec<Scalar> J11, J12, J21, J22;

  static KernelSet shared(const KernelSpec<Scalar>& k) { return {k, k, k, k}; }
  bool all_equal() const { return J11 == J12 && J12 == J21 && J21 == J22; }
  Scalar min_scale() const { return std::min({J11.scale, J12.scale, J21.scale, J22.scale}); }
  bool operator==(const KernelSet&) const = default;
};

/// Coefficients of
///   a11 W11 phi1 + a12 W12 phi2 - b1 phi1,
///   a21 W21 phi1 + a22 W22 phi2 - b2 phi2.
template <typename Scalar>
struct BlockCoefficients {
  Scalar a11 = 0, a12 = 1, a21 = 1, a22 = 0, b1 = 1, b2 = 1;

  /// Empty when the sign assumptions hold, otherwise a description.
  std::string violation() const {
    if (!(a12 > 0)) return "a12 must be positive";
    if (!(a21 > 0)) return "a21 must be positive";
    if (!(a11 >= 0)) return "a11 must be nonnegative";
    if (!(a22 >= 0)) return "a22 must be nonnegative";
    if (!(b1 > 0)) return "b1 must be positive";
    if (!(b2 > 0)) return "b2 must be positive";
    return {};
  }
};

template <typename Scalar>
class BlockOperator {
 public:
  BlockOperator(const BlockCoefficients<Scalar>& c, const KernelSet<Scalar>& k, const Grid<Scalar>& g)
      : grid_(g), coeffs_(c) {
    if (auto why = c.violation(); !why.empty()) throw std::invalid_argument("block operator: " + why);
    W11_ = ConvolutionMatrix<Scalar>(k.J11, g);
    W12_ = k.J12 == k.J11 ? W11_ : ConvolutionMatrix<Scalar>(k.J12, g);
    W21_ = k.J21 == k.J11 ? W11_ : ConvolutionMatrix<Scalar>(k.J21, g);
    W22_ = k.J22 == k.J11 ? W11_ : ConvolutionMatrix<Scalar>(k.J22, g);
  }

  const Grid<Scalar>& grid() const { return grid_; }
  const BlockCoefficients<Scalar>& coefficients() const { return coeffs_; }
  const ConvolutionMatrix<Scalar>& W11() const { return W11_; }
  const ConvolutionMatrix<Scalar>& W12() const { return W12_; }
  const ConvolutionMatrix<Scalar>& W21() const { return W21_; }
  const ConvolutionMatrix<Scalar>& W22() const { return W22_; }
  Eigen::Index size() const { return 2 * grid_.n; }

  /// Shift that makes the operator entrywise nonnegative with a positive diagonal.
  Scalar shift() const { return std::max(coeffs_.b1, coeffs_.b2) + 1; }

  /// Applies the operator to the stacked vector (phi1, phi2).
  template <typename Derived>
  VectorX<Scalar> apply(const Eigen::MatrixBase<Derived>& phi) const {
    const Eigen::Index n = grid_.n;
    const VectorX<Scalar> p1 = phi.head(n);
    const VectorX<Scalar> p2 = phi.tail(n);
    VectorX<Scalar> out(2 * n);
    out.head(n) = coeffs_.a11 * W11_.apply(p1) + coeffs_.a12 * W12_.apply(p2) - coeffs_.b1 * p1;
    out.tail(n) = coeffs_.a21 * W21_.apply(p1) + coeffs_.a22 * W22_.apply(p2) - coeffs_.b2 * p2;
    return out;
  }

  MatrixX<Scalar> dense() const {
    const Eigen::Index n = grid_.n;
    MatrixX<Scalar> L(2 * n, 2 * n);
    L.topLeftCorner(n, n) = coeffs_.a11 * W11_.entries();
    L.topRightCorner(n, n) = coeffs_.a12 * W12_.entries();
    L.bottomLeftCorner(n, n) = coeffs_.a21 * W21_.entries();
    L.bottomRightCorner(n, n) = coeffs_.a22 * W22_.entries();
    L.diagonal().head(n).array() -= coeffs_.b1;
    L.diagonal().tail(n).array() -= coeffs_.b2;
    return L;
  }

 private:
  Grid<Scalar> grid_;
  BlockCoefficients<Scalar> coeffs_;
  ConvolutionMatrix<Scalar> W11_, W12_, W21_, W22_;
};

template <typename Scalar>
BlockOperator<Scalar> assemble_block_operator(const BlockCoefficients<Scalar>& c, const KernelSet<Scalar>& k,
                                              const Grid<Scalar>& g) {
  return BlockOperator<Scalar>(c, k, g);
}

}  // namespace nlepi
