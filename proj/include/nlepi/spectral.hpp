#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>
#include <stdexcept>
#include <string>

#include "nlepi/discretization.hpp"
#include "nlepi/errors.hpp"

namespace nlepi {

enum class EigenMethod {
  Power,        // shifted power iteration only
  Accelerated,  // power iteration, then resolvent steps with a certified shift
};

template <typename Scalar = double>
struct EigenOptions {
  double tol = 1e-10;
  long max_iterations = 100000;
  EigenMethod method = EigenMethod::Accelerated;
  long power_steps = 50;
  VectorX<Scalar> start;  // empty: all ones
};

/// Perron root and positive eigenvector of a matrix with nonnegative
/// off-diagonal entries. `lower` and `upper` are the Collatz-Wielandt bounds
/// min_i (L phi)_i / phi_i <= lambda <= max_i (L phi)_i / phi_i at exit.
template <typename Scalar>
struct PerronPair {
  Scalar lambda = 0;
  VectorX<Scalar> vector;
  long iterations = 0;
  Scalar residual = 0;
  Scalar lower = 0;
  Scalar upper = 0;
};

/// Principal eigenpair of a discretized coupled operator. The eigenfunction
/// pair is scaled so that its largest entry is 1.
template <typename Scalar>
struct EigenResult {
  Scalar lambda_p = 0;
  VectorX<Scalar> phi1, phi2;
  long iterations = 0;
  Scalar residual = 0;
  Scalar lower = 0;
  Scalar upper = 0;
};

template <typename Scalar>
struct AsymptoticPair {
  Scalar lambda_A = 0;
  Scalar theta_A = 0;
};

namespace detail {

template <typename Scalar>
void collatz_bounds(const VectorX<Scalar>& Lphi, const VectorX<Scalar>& phi, Scalar& lo, Scalar& hi) {
  lo = std::numeric_limits<Scalar>::infinity();
  hi = -lo;
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    const Scalar r = Lphi[i] / phi[i];
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
}

// Solves (s I - L) x = b for a sequence of shifts. Compactly supported
// kernels give a banded L, which is factored sparse; denser matrices use
// dense LU.
template <typename Scalar>
class ShiftedSolver {
 public:
  explicit ShiftedSolver(const MatrixX<Scalar>& L) : L_(L) {
    const Eigen::Index n = L.rows();
    const auto nnz = static_cast<double>((L.array() != Scalar(0)).count());
    sparse_ = n >= 64 && nnz < 0.2 * static_cast<double>(n) * static_cast<double>(n);
    if (!sparse_) return;
    std::vector<Eigen::Triplet<Scalar>> t;
    t.reserve(static_cast<std::size_t>(nnz) + static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (i == j || L(i, j) != Scalar(0)) t.emplace_back(i, j, -L(i, j));
    base_.resize(n, n);
    base_.setFromTriplets(t.begin(), t.end());
    sparse_lu_.analyzePattern(base_);
  }

  // Returns false when the factorization fails.
  bool factor(Scalar s) {
    if (!sparse_) {
      MatrixX<Scalar> A = -L_;
      A.diagonal().array() += s;
      dense_lu_.compute(A);
      return true;
    }
    Eigen::SparseMatrix<Scalar> A = base_;
    for (Eigen::Index i = 0; i < A.rows(); ++i) A.coeffRef(i, i) += s;
    sparse_lu_.factorize(A);
    return sparse_lu_.info() == Eigen::Success;
  }

  VectorX<Scalar> solve(const VectorX<Scalar>& b) {
    if (sparse_) return sparse_lu_.solve(b);
    return dense_lu_.solve(b);
  }

 private:
  const MatrixX<Scalar>& L_;
  bool sparse_ = false;
  Eigen::SparseMatrix<Scalar> base_;
  Eigen::SparseLU<Eigen::SparseMatrix<Scalar>, Eigen::COLAMDOrdering<int>> sparse_lu_;
  Eigen::PartialPivLU<MatrixX<Scalar>> dense_lu_;
};

}  // namespace detail

/// Perron pair of L (off-diagonal entries >= 0). `shift` must make L + shift*I
/// entrywise nonnegative with a positive diagonal.
///
/// Iterates on a strictly positive vector and stops once the Collatz-Wielandt
/// bracket has width <= tol * max(1, |lambda|); the midpoint is returned, so
/// the max-norm residual is at most half that width. In Accelerated mode the
/// power phase is followed by resolvent steps phi <- (s I - L)^{-1} phi, with s
/// strictly above the current upper bound, hence above the Perron root, which
/// keeps the resolvent entrywise nonnegative.
template <typename Scalar>
PerronPair<Scalar> perron_pair(const MatrixX<Scalar>& L, Scalar shift, const EigenOptions<Scalar>& opts = {}) {
  const Eigen::Index n = L.rows();
  if (L.cols() != n || n == 0) throw std::invalid_argument("perron_pair: matrix must be square and nonempty");
  VectorX<Scalar> phi = opts.start.size() == n ? opts.start : VectorX<Scalar>::Ones(n);
  if (!(phi.minCoeff() > 0)) throw std::invalid_argument("perron_pair: start vector must be strictly positive");
  phi /= phi.maxCoeff();

  const Scalar tol = Scalar(opts.tol);
  bool use_resolvent = false;
  std::optional<detail::ShiftedSolver<Scalar>> resolvent;
  long it = 0;
  Scalar lo = 0, hi = 0;
  VectorX<Scalar> Lphi;
  for (;;) {
    Lphi.noalias() = L * phi;
    detail::collatz_bounds(Lphi, phi, lo, hi);
    const Scalar scale = std::max(Scalar(1), std::abs(hi));
    if (hi - lo <= tol * scale) break;
    if (it >= opts.max_iterations) {
      const Scalar mid = (hi + lo) / 2;
      throw EigenNotConverged("principal eigenpair: no convergence after " + std::to_string(it) + " iterations",
                              static_cast<double>((Lphi - mid * phi).cwiseAbs().maxCoeff()));
    }
    ++it;
    if (opts.method == EigenMethod::Accelerated && it > opts.power_steps) use_resolvent = true;

    VectorX<Scalar> next;
    if (use_resolvent) {
      const Scalar s = hi + std::max(hi - lo, Scalar(1e-9) * scale);
      if (!resolvent) resolvent.emplace(L);
      if (resolvent->factor(s)) next = resolvent->solve(phi);
      if (next.size() != n || !(next.minCoeff() > 0) || !next.allFinite()) {
        // Rounding broke positivity; finish with plain power steps.
        use_resolvent = false;
        next = Lphi + shift * phi;
      }
    } else {
      next = Lphi + shift * phi;
    }
    phi = next / next.maxCoeff();
  }

  PerronPair<Scalar> out;
  out.lambda = (hi + lo) / 2;
  out.iterations = it;
  out.lower = lo;
  out.upper = hi;
  out.residual = (Lphi - out.lambda * phi).cwiseAbs().maxCoeff();
  out.vector = std::move(phi);
  return out;
}

/// Principal eigenpair of the coupled operator (lambda_p, (phi1, phi2)).
template <typename Scalar>
EigenResult<Scalar> principal_eigenpair(const BlockOperator<Scalar>& op, const EigenOptions<Scalar>& opts = {}) {
  const auto pair = perron_pair<Scalar>(op.dense(), op.shift(), opts);
  const Eigen::Index n = op.grid().n;
  EigenResult<Scalar> r;
  r.lambda_p = pair.lambda;
  r.phi1 = pair.vector.head(n);
  r.phi2 = pair.vector.tail(n);
  r.iterations = pair.iterations;
  r.residual = pair.residual;
  r.lower = pair.lower;
  r.upper = pair.upper;
  return r;
}

/// Principal eigenvalue of coeff * (W - I) - sink on the grid.
template <typename Scalar>
Scalar scalar_principal_eigenvalue(const KernelSpec<Scalar>& k, Scalar coeff, Scalar sink, const Grid<Scalar>& g,
                                   const EigenOptions<Scalar>& opts = {}) {
  if (!(coeff >= 0)) throw std::invalid_argument("scalar eigenvalue: coefficient must be nonnegative");
  MatrixX<Scalar> L = coeff * ConvolutionMatrix<Scalar>(k, g).entries();
  L.diagonal().array() -= coeff + sink;
  return perron_pair<Scalar>(L, coeff + std::abs(sink) + 1, opts).lambda;
}

/// nu(l): principal eigenvalue of W - I on an interval of length l.
/// `dx <= 0` selects the default spacing.
template <typename Scalar>
Scalar nu_curve(const KernelSpec<Scalar>& k, Scalar l, Scalar dx = 0, const EigenOptions<Scalar>& opts = {}) {
  if (!(l > 0)) throw std::invalid_argument("nu_curve: length must be positive");
  GridOptions gopt;
  gopt.dx_target = static_cast<double>(dx);
  const auto g = make_grid<Scalar>(-l / 2, l / 2, k.scale, gopt);
  return scalar_principal_eigenvalue<Scalar>(k, 1, 0, g, opts);
}

template <typename Scalar>
AsymptoticPair<Scalar> lambda_A_closed_form(const BlockCoefficients<Scalar>& c) {
  if (!(c.a12 * c.a21 > 0)) throw std::invalid_argument("lambda_A: need a12 * a21 > 0");
  const Scalar p = c.a11 - c.b1;
  const Scalar q = c.a22 - c.b2;
  const Scalar lambda = (p + q + std::sqrt((p - q) * (p - q) + 4 * c.a12 * c.a21)) / 2;
  return {lambda, c.a12 / (lambda - p)};
}

/// Parameters of the shared-kernel comparison: the single-species problems
/// use d = d1.
template <typename Scalar>
struct ComparisonParams {
  Scalar d1 = 1, d2 = 1, a = 1, b = 1, c = 1.5, g0 = 1;
};

template <typename Scalar>
struct ClosedFormLambdas {
  Scalar lambda1 = 0, lambda2 = 0, lambda3 = 0, lambda4 = 0, lambda_p = 0;
};

/// Principal eigenvalues of the five shared-kernel problems as functions of
/// nu = nu(l) in (-1, 0).
template <typename Scalar>
ClosedFormLambdas<Scalar> closed_form_lambdas(Scalar nu, const ComparisonParams<Scalar>& p) {
  if (!(nu > -1 && nu < 0)) throw std::invalid_argument("closed_form_lambdas: nu must lie in (-1, 0)");
  const Scalar r = p.c * p.g0;
  const Scalar u = p.d1 * nu - p.a;
  const Scalar v = p.d2 * nu - p.b;
  const Scalar gap2 = (v - u) * (v - u);
  ClosedFormLambdas<Scalar> out;
  out.lambda1 = u + r / p.b;
  out.lambda2 = u + r / p.b * (nu + 1);
  out.lambda3 = (u + v + std::sqrt(gap2 + 4 * r)) / 2;
  out.lambda4 = (u + v + std::sqrt(gap2 + 4 * r * (nu + 1))) / 2;
  out.lambda_p = (u + v + std::sqrt(gap2 + 4 * r * (nu + 1) * (nu + 1))) / 2;
  return out;
}

/// max_i (L phi)_i / phi_i over both components; an upper bound for lambda_p
/// for every strictly positive phi.
template <typename Scalar>
Scalar upper_bound_from_test(const BlockOperator<Scalar>& op, const VectorX<Scalar>& phi1,
                             const VectorX<Scalar>& phi2) {
  const Eigen::Index n = op.grid().n;
  if (phi1.size() != n || phi2.size() != n) throw std::invalid_argument("upper_bound_from_test: size mismatch");
  if (!(phi1.minCoeff() > 0) || !(phi2.minCoeff() > 0))
    throw std::invalid_argument("upper_bound_from_test: test function must be strictly positive");
  VectorX<Scalar> phi(2 * n);
  phi << phi1, phi2;
  const VectorX<Scalar> Lphi = op.apply(phi);
  return Lphi.cwiseQuotient(phi).maxCoeff();
}

}  // namespace nlepi
