#pragma once

#include <Eigen/Dense>

namespace fiblab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace linalg {

/// Singular values in descending order.
Vec singular_values(const Mat& a);

/// k-th largest singular value (1-based); zero when k exceeds min(rows, cols).
double sigma(const Mat& a, int k);

struct MinNormSolution {
  Vec x;
  int rank = 0;
  double sigma_max = 0.0;
  double sigma_min_kept = 0.0;  // smallest singular value above the cutoff
  double residual = 0.0;        // ||a x - b||
};

/// Minimal-norm least-squares solution of a x = b through the SVD
/// pseudo-inverse; singular values <= rel_tol * sigma_max are discarded.
MinNormSolution min_norm_solve(const Mat& a, const Vec& b, double rel_tol = 1e-8);

/// Orthonormal basis (columns) of the orthogonal complement of span(cols(a)).
/// Assumes the columns of `a` are linearly independent.
Mat orthonormal_complement(const Mat& a);

/// Orthogonal projector onto ker(a), using numerical rank with rel_tol.
Mat kernel_projector(const Mat& a, double rel_tol = 1e-8);

/// cos of the angle between u and v; both must be nonzero.
double cosine(const Vec& u, const Vec& v);

/// Angle in radians between two nonzero vectors, computed stably via atan2.
double angle(const Vec& u, const Vec& v);

}  // namespace linalg
}  // namespace fiblab
