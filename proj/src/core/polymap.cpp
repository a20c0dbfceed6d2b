#include "fiblab/polymap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fiblab/error.hpp"
#include "fiblab/serialize.hpp"

namespace fiblab {

namespace {

constexpr int kMaxExponent = 255;

std::string loc(std::size_t i) { return "components[" + std::to_string(i) + "]"; }

std::string loc(std::size_t i, std::size_t t) { return loc(i) + "[" + std::to_string(t) + "]"; }

void sort_terms(Polynomial& poly) {
  std::stable_sort(poly.begin(), poly.end(),
                   [](const Term& a, const Term& b) { return a.exponents < b.exponents; });
}

Polynomial differentiate(const Polynomial& poly, int j) {
  Polynomial out;
  for (const Term& t : poly) {
    if (t.exponents[j] == 0 || t.coeff == 0.0) continue;
    Term d = t;
    d.coeff = t.coeff * t.exponents[j];
    d.exponents[j] -= 1;
    out.push_back(std::move(d));
  }
  sort_terms(out);
  return out;
}

kernels::PolyTable compile(int n, const std::vector<const Polynomial*>& polys) {
  kernels::PolyTable table;
  table.n = n;
  table.offsets.push_back(0);
  for (const Polynomial* poly : polys) {
    for (const Term& t : *poly) {
      table.coeffs.push_back(t.coeff);
      for (int e : t.exponents) {
        table.exponents.push_back(static_cast<std::uint8_t>(e));
        table.max_exponent = std::max(table.max_exponent, e);
      }
    }
    table.offsets.push_back(table.coeffs.size());
  }
  return table;
}

// SoA buffer for one or many points.
std::vector<double> to_soa(const std::vector<Vec>& points, int n) {
  const std::size_t count = points.size();
  std::vector<double> soa(static_cast<std::size_t>(n) * count);
  for (std::size_t i = 0; i < count; ++i)
    for (int k = 0; k < n; ++k) soa[k * count + i] = points[i](k);
  return soa;
}

}  // namespace

PolynomialMap::PolynomialMap(int n, std::vector<Polynomial> components, std::string name,
                             bool allow_constant_zero)
    : n_(n), components_(std::move(components)), name_(std::move(name)),
      allow_constant_zero_(allow_constant_zero) {
  if (n_ < 2) throw InputError("n: input dimension must be >= 2, got " + std::to_string(n_));
  const int p = static_cast<int>(components_.size());
  if (p < 2) throw InputError("p: output dimension must be >= 2, got " + std::to_string(p));
  if (p > n_)
    throw InputError("p: output dimension " + std::to_string(p) + " exceeds n = " + std::to_string(n_));

  for (std::size_t i = 0; i < components_.size(); ++i) {
    double constant = 0.0;
    bool nonzero = false;
    for (std::size_t t = 0; t < components_[i].size(); ++t) {
      const Term& term = components_[i][t];
      if (static_cast<int>(term.exponents.size()) != n_)
        throw InputError(loc(i, t) + ".e: expected " + std::to_string(n_) + " exponents, got " +
                         std::to_string(term.exponents.size()));
      for (int e : term.exponents)
        if (e < 0 || e > kMaxExponent)
          throw InputError(loc(i, t) + ".e: exponent " + std::to_string(e) + " out of range [0, " +
                           std::to_string(kMaxExponent) + "]");
      if (!(std::abs(term.coeff) <= std::numeric_limits<double>::max()))
        throw InputError(loc(i, t) + ".c: coefficient is not finite");
      if (term.coeff != 0.0) nonzero = true;
      if (std::all_of(term.exponents.begin(), term.exponents.end(), [](int e) { return e == 0; }))
        constant += term.coeff;
    }
    if (constant != 0.0) throw InputError(loc(i) + ": f(0) != 0 (constant term " + std::to_string(constant) + ")");
    if (!nonzero && !allow_constant_zero_)
      throw InputError(loc(i) + ": component is identically zero");
    sort_terms(components_[i]);
  }

  derivatives_.reserve(static_cast<std::size_t>(p) * n_);
  for (const Polynomial& comp : components_)
    for (int j = 0; j < n_; ++j) derivatives_.push_back(differentiate(comp, j));

  std::vector<const Polynomial*> values;
  std::vector<const Polynomial*> derivs;
  for (const Polynomial& c : components_) values.push_back(&c);
  for (const Polynomial& d : derivatives_) derivs.push_back(&d);
  std::vector<const Polynomial*> all = values;
  all.insert(all.end(), derivs.begin(), derivs.end());
  values_table_ = compile(n_, values);
  jacobian_table_ = compile(n_, derivs);
  full_table_ = compile(n_, all);
}

int PolynomialMap::degree() const {
  int deg = 0;
  for (const Polynomial& c : components_)
    for (const Term& t : c) {
      int d = 0;
      for (int e : t.exponents) d += e;
      deg = std::max(deg, d);
    }
  return deg;
}

void PolynomialMap::check_dim(const Vec& x) const {
  if (x.size() != n_)
    throw InputError("point has dimension " + std::to_string(x.size()) + ", map expects n = " +
                     std::to_string(n_));
}

Vec PolynomialMap::eval(const Vec& x) const {
  check_dim(x);
  Vec out(p());
  kernels::eval_scalar(values_table_, x.data(), 1, 0, 1, out.data());
  return out;
}

Mat PolynomialMap::jacobian(const Vec& x) const {
  check_dim(x);
  // Table order is row-major (component i, variable j).
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> jac(p(), n_);
  kernels::eval_scalar(jacobian_table_, x.data(), 1, 0, 1, jac.data());
  return jac;
}

void PolynomialMap::eval_batch(const std::vector<Vec>& points, std::vector<Vec>* values,
                               std::vector<Mat>* jacobians) const {
  for (const Vec& x : points) check_dim(x);
  const std::size_t count = points.size();
  const int p_ = p();
  const std::vector<double> soa = to_soa(points, n_);
  std::vector<double> out(full_table_.polys() * count);
  if (count > 0) kernels::eval(full_table_, soa.data(), count, out.data());
  if (values) {
    values->assign(count, Vec(p_));
    for (std::size_t i = 0; i < count; ++i)
      for (int r = 0; r < p_; ++r) (*values)[i](r) = out[r * count + i];
  }
  if (jacobians) {
    jacobians->assign(count, Mat(p_, n_));
    for (std::size_t i = 0; i < count; ++i)
      for (int r = 0; r < p_; ++r)
        for (int c = 0; c < n_; ++c) (*jacobians)[i](r, c) = out[(p_ + r * n_ + c) * count + i];
  }
}

PolynomialMap PolynomialMap::scaled(double c) const {
  std::vector<Polynomial> comps = components_;
  for (Polynomial& poly : comps)
    for (Term& t : poly) t.coeff *= c;
  return PolynomialMap(n_, std::move(comps), name_, allow_constant_zero_);
}

Vec eval(const PolynomialMap& map, const Vec& x) { return map.eval(x); }

Mat jacobian(const PolynomialMap& map, const Vec& x) { return map.jacobian(x); }

PolynomialMap parse_map(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("map document: malformed JSON: ") + e.what());
  }
  return map_from_json(doc);
}

}  // namespace fiblab
