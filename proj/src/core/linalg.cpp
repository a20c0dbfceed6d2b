#include "fiblab/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace fiblab::linalg {

Vec singular_values(const Mat& a) {
  if (a.size() == 0) return Vec();
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues();
}

double sigma(const Mat& a, int k) {
  const Vec s = singular_values(a);
  if (k < 1 || k > s.size()) return 0.0;
  return s(k - 1);
}

MinNormSolution min_norm_solve(const Mat& a, const Vec& b, double rel_tol) {
  MinNormSolution out;
  out.x = Vec::Zero(a.cols());
  if (a.size() == 0) {
    out.residual = b.norm();
    return out;
  }
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  out.sigma_max = s.size() > 0 ? s(0) : 0.0;
  const double cutoff = rel_tol * out.sigma_max;
  const Vec utb = svd.matrixU().transpose() * b;
  Vec coeffs = Vec::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) {
      coeffs(i) = utb(i) / s(i);
      out.sigma_min_kept = s(i);
      ++out.rank;
    }
  }
  out.x = svd.matrixV() * coeffs;
  out.residual = (a * out.x - b).norm();
  return out;
}

Mat orthonormal_complement(const Mat& a) {
  const Eigen::Index n = a.rows();
  const Eigen::Index k = a.cols();
  if (k >= n) return Mat(n, 0);
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  return q.rightCols(n - k);
}

Mat kernel_projector(const Mat& a, double rel_tol) {
  const Eigen::Index n = a.cols();
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? rel_tol * s(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff && s(i) > 0.0) ++rank;
  const Mat ker = svd.matrixV().rightCols(n - rank);
  return ker * ker.transpose();
}

double cosine(const Vec& u, const Vec& v) {
  const double c = u.dot(v) / (u.norm() * v.norm());
  return std::clamp(c, -1.0, 1.0);
}

double angle(const Vec& u, const Vec& v) {
  const Vec a = u.normalized();
  const Vec b = v.normalized();
  return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

}  // namespace fiblab::linalg
