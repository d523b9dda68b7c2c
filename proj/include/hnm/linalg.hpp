#pragma once

// Small dense helpers on top of Eigen: tensor products, partial traces over
// multi-factor spaces and the usual validity checks for density operators.

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <complex>
#include <cstddef>
#include <vector>

namespace hnm {

using cplx = std::complex<double>;

template <typename Real>
using Matrix2c = Eigen::Matrix<std::complex<Real>, 2, 2>;
template <typename Real>
using Vector2c = Eigen::Matrix<std::complex<Real>, 2, 1>;
template <typename Real>
using Matrix4c = Eigen::Matrix<std::complex<Real>, 4, 4>;
template <typename Real>
using MatrixXc = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

using Mat2 = Matrix2c<double>;
using Vec2 = Vector2c<double>;
using Mat4 = Matrix4c<double>;
using MatX = Eigen::MatrixXcd;
using VecX = Eigen::VectorXcd;

template <typename DerivedA, typename DerivedB>
MatrixXc<typename Eigen::NumTraits<typename DerivedA::Scalar>::Real>
kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Result = MatrixXc<typename Eigen::NumTraits<typename DerivedA::Scalar>::Real>;
  return Result(Eigen::kroneckerProduct(a.eval(), b.eval()));
}

/// Tensor product of a list of factors, first entry outermost.
template <typename Mat>
MatrixXc<typename Eigen::NumTraits<typename Mat::Scalar>::Real>
kron_all(const std::vector<Mat>& factors) {
  using Result = MatrixXc<typename Eigen::NumTraits<typename Mat::Scalar>::Real>;
  Result out = Result::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

/// Smallest eigenvalue of the Hermitian part.
template <typename Derived>
double min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  using Mat = MatrixXc<typename Eigen::NumTraits<typename Derived::Scalar>::Real>;
  const Mat herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(herm, Eigen::EigenvaluesOnly);
  return static_cast<double>(es.eigenvalues().minCoeff());
}

template <typename DerivedA, typename DerivedB>
double frobenius_distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  return static_cast<double>((a - b).norm());
}

template <typename DerivedA, typename DerivedB>
double max_abs_deviation(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  return static_cast<double>((a - b).cwiseAbs().maxCoeff());
}

/// Partial trace of an operator on a product space with factor dimensions
/// `dims` (first factor outermost, i.e. most significant in the row index).
/// Factors whose index appears in `traced` are summed over.
template <typename Derived>
MatrixXc<typename Eigen::NumTraits<typename Derived::Scalar>::Real>
partial_trace(const Eigen::MatrixBase<Derived>& m, const std::vector<std::size_t>& dims,
              const std::vector<std::size_t>& traced) {
  using Result = MatrixXc<typename Eigen::NumTraits<typename Derived::Scalar>::Real>;
  const std::size_t n = dims.size();
  std::vector<bool> is_traced(n, false);
  for (auto t : traced) is_traced.at(t) = true;

  std::size_t kept_dim = 1, traced_dim = 1;
  for (std::size_t i = 0; i < n; ++i) (is_traced[i] ? traced_dim : kept_dim) *= dims[i];

  // strides of each factor in the full index
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t i = n; i-- > 1;) stride[i - 1] = stride[i] * dims[i];

  auto compose = [&](std::size_t kept, std::size_t tr) {
    std::size_t full = 0;
    for (std::size_t i = n; i-- > 0;) {
      std::size_t digit;
      if (is_traced[i]) {
        digit = tr % dims[i];
        tr /= dims[i];
      } else {
        digit = kept % dims[i];
        kept /= dims[i];
      }
      full += digit * stride[i];
    }
    return full;
  };

  Result out = Result::Zero(static_cast<Eigen::Index>(kept_dim), static_cast<Eigen::Index>(kept_dim));
  for (std::size_t a = 0; a < kept_dim; ++a)
    for (std::size_t b = 0; b < kept_dim; ++b)
      for (std::size_t t = 0; t < traced_dim; ++t)
        out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
            m(static_cast<Eigen::Index>(compose(a, t)), static_cast<Eigen::Index>(compose(b, t)));
  return out;
}

/// Column-stacking superoperator of the map rho -> sum_i K_i rho K_i^dagger.
template <typename Mat>
MatrixXc<typename Eigen::NumTraits<typename Mat::Scalar>::Real>
transfer_matrix(const std::vector<Mat>& kraus) {
  using Result = MatrixXc<typename Eigen::NumTraits<typename Mat::Scalar>::Real>;
  const auto d = kraus.empty() ? Eigen::Index{0} : kraus.front().rows();
  Result s = Result::Zero(d * d, d * d);
  for (const auto& k : kraus) s += kron(k.conjugate(), k);
  return s;
}

} // namespace hnm
