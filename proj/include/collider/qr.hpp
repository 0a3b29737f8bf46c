#pragma once

// Householder QR for tall dense least-squares problems.
//
// For k = 0..p-1 the column segment x = A[k:, k] is reflected onto
// -sign(x_0)|x| e_0 with v = x + sign(x_0)|x| e_0, H = I - 2 v v^T / v^T v.
// The reflectors are kept so Q^T can be applied to right-hand sides; R is the
// upper p x p block left behind.

#include <cmath>

#include <Eigen/Dense>

#include "collider/error.hpp"

namespace collider {

class HouseholderQr {
 public:
  explicit HouseholderQr(Eigen::MatrixXd a)
      : qr_(std::move(a)), beta_(Eigen::VectorXd::Zero(qr_.cols())), diag_(Eigen::VectorXd::Zero(qr_.cols())) {
    const Eigen::Index m = qr_.rows();
    const Eigen::Index p = qr_.cols();
    if (m < p) throw Error(ErrorKind::InsufficientData, "QR needs at least as many rows as columns");
    for (Eigen::Index k = 0; k < p; ++k) {
      auto x = qr_.col(k).tail(m - k);
      const double norm = x.norm();
      if (norm == 0.0) continue;
      const double alpha = x(0) >= 0 ? -norm : norm;
      // v = x - alpha e_0 overwrites the column; R(k, k) = alpha lives in diag_.
      const double v0 = x(0) - alpha;
      x(0) = v0;
      const double vtv = x.squaredNorm();
      beta_(k) = 2.0 / vtv;
      for (Eigen::Index j = k + 1; j < p; ++j) {
        auto col = qr_.col(j).tail(m - k);
        col -= (beta_(k) * x.dot(col)) * x;
      }
      diag_(k) = alpha;
    }
  }

  Eigen::Index rows() const noexcept { return qr_.rows(); }
  Eigen::Index cols() const noexcept { return qr_.cols(); }

  /// Upper-triangular R (p x p).
  Eigen::MatrixXd r() const {
    const Eigen::Index p = qr_.cols();
    Eigen::MatrixXd out = qr_.topRows(p).triangularView<Eigen::StrictlyUpper>();
    out.diagonal() = diag_;
    return out;
  }

  /// Computes Q^T b in place.
  void apply_qt(Eigen::VectorXd& b) const {
    const Eigen::Index m = qr_.rows();
    for (Eigen::Index k = 0; k < qr_.cols(); ++k) {
      if (beta_(k) == 0.0) continue;
      const auto v = qr_.col(k).tail(m - k);
      auto seg = b.tail(m - k);
      seg -= (beta_(k) * v.dot(seg)) * v;
    }
  }

  /// Singular values of R, equal to those of the factored matrix.
  Eigen::VectorXd singular_values() const { return Eigen::JacobiSVD<Eigen::MatrixXd>(r()).singularValues(); }

  /// True when the smallest singular value is below tol * largest.
  bool rank_deficient(double tol) const {
    if (qr_.cols() == 0) return false;
    const Eigen::VectorXd sv = singular_values();
    return sv(0) == 0.0 || sv(sv.size() - 1) < tol * sv(0);
  }

  /// Least-squares solution; also returns the residual sum of squares.
  Eigen::VectorXd solve(const Eigen::VectorXd& b, double* rss = nullptr) const {
    Eigen::VectorXd qtb = b;
    apply_qt(qtb);
    const Eigen::Index p = qr_.cols();
    if (rss) *rss = qtb.tail(qtb.size() - p).squaredNorm();
    return r().triangularView<Eigen::Upper>().solve(qtb.head(p));
  }

  /// (A^T A)^{-1} = R^{-1} R^{-T}.
  Eigen::MatrixXd inverse_gram() const {
    const Eigen::Index p = qr_.cols();
    const Eigen::MatrixXd rinv =
        r().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    return rinv * rinv.transpose();
  }

 private:
  Eigen::MatrixXd qr_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd diag_;
};

}  // namespace collider
