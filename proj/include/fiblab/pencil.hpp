#pragma once

// Calculus of the spherefication F(x) = ||x|| f(x)/||f(x)|| and the tangency
// test for the pencil members E_l = Phi^{-1}(point).

#include "fiblab/jet.hpp"

namespace fiblab::pencil {

/// Decomposition of DF_x(v) into the part along F(x) and the part tangent to
/// the sphere of radius ||x|| in R^p.
struct SplitVector {
  Vec radial;
  Vec spherical;
};

/// DF_x(v) = <x,v>/||x||^2 F(x) - f(x)/||f(x)||^2 <F(x), Df_x v> + ||x||/||f(x)|| Df_x v.
Vec d_spherefication(const Jet& jet, const Vec& v);

/// ||DF_x(v)||^2 from the closed form, without forming DF_x(v).
double d_spherefication_norm_sq(const Jet& jet, const Vec& v);

SplitVector radial_spherical_split(const Jet& jet, const Vec& v);

/// || Df_x v - f(x)/||f(x)||^2 <f(x), Df_x v> ||; zero iff v is tangent to the
/// pencil member through x.
double pencil_tangent_residual(const Jet& jet, const Vec& v);

/// residual < 1e-8 * scale * ||v||.
bool is_tangent(const Jet& jet, const Vec& v, double rel_tol = 1e-8);

}  // namespace fiblab::pencil
