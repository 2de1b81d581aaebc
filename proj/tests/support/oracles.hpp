#pragma once

// Independent reference computations used by the unit and acceptance
// suites. Nothing here calls into the solver or kernel evaluation paths it
// is used to check.

#include <cmath>
#include <cstddef>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <Eigen/Core>

namespace elm::oracle {

using Big = boost::multiprecision::cpp_bin_float_50;

inline Big big_binomial(int n, int k) {
  Big c = 1;
  for (int i = 1; i <= k; ++i) c = c * Big(n - k + i) / Big(i);
  return c;
}

/// Gaussian-type kernel at distance t, summed term by term in 50 digits.
inline Big kernel_value_mp(double sigma, int s, int d, double t) {
  using boost::multiprecision::exp;
  using boost::multiprecision::pow;
  const Big sig(sigma);
  const Big dist(t);
  const Big pi = boost::math::constants::pi<Big>();
  const Big normal = pow(Big(2) / (sig * sig * pi), Big(d) / 2);
  Big sum = 0;
  for (int j = 1; j <= s; ++j) {
    const Big sign = (j % 2 == 1) ? Big(1) : Big(-1);
    sum += sign * big_binomial(s, j) / pow(Big(j), d) * normal * exp(-Big(2) * dist * dist / (Big(j * j) * sig * sig));
  }
  return sum;
}

/// Composite Simpson rule of f over [lo, hi]^d (d = 1 or 2) with `panels`
/// (even) subintervals per axis.
template <typename F>
double simpson_cube(const F& f, int d, double lo, double hi, int panels) {
  if (panels % 2) ++panels;
  const double h = (hi - lo) / panels;
  auto w = [&](int i) { return (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  double total = 0.0;
  if (d == 1) {
    for (int i = 0; i <= panels; ++i) {
      Eigen::VectorXd x(1);
      x(0) = lo + i * h;
      total += w(i) * f(x);
    }
    return total * h / 3.0;
  }
  for (int i = 0; i <= panels; ++i) {
    double row = 0.0;
    for (int j = 0; j <= panels; ++j) {
      Eigen::VectorXd x(2);
      x << lo + i * h, lo + j * h;
      row += w(j) * f(x);
    }
    total += w(i) * row;
  }
  return total * (h / 3.0) * (h / 3.0);
}

/// Solves A x = b in 50-digit arithmetic by Gaussian elimination with partial
/// pivoting.
inline std::vector<Big> solve_mp(std::vector<std::vector<Big>> A, std::vector<Big> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (abs(A[r][col]) > abs(A[piv][col])) piv = r;
    std::swap(A[col], A[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const Big factor = A[r][col] / A[col][col];
      for (std::size_t c = col; c < n; ++c) A[r][c] -= factor * A[col][c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<Big> x(n);
  for (std::size_t i = n; i-- > 0;) {
    Big acc = b[i];
    for (std::size_t c = i + 1; c < n; ++c) acc -= A[i][c] * x[c];
    x[i] = acc / A[i][i];
  }
  return x;
}

/// Ridge coefficients from the normal equations (D^T D + m lambda I) a = D^T y,
/// formed and solved in 50 digits.
inline Eigen::VectorXd ridge_normal_mp(const Eigen::MatrixXd& D, const Eigen::VectorXd& y, double lambda) {
  const auto m = static_cast<std::size_t>(D.rows());
  const auto n = static_cast<std::size_t>(D.cols());
  std::vector<std::vector<Big>> A(n, std::vector<Big>(n, Big(0)));
  std::vector<Big> b(n, Big(0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < m; ++k) A[i][j] += Big(D(k, i)) * Big(D(k, j));
    A[i][i] += Big(double(m)) * Big(lambda);
    for (std::size_t k = 0; k < m; ++k) b[i] += Big(D(k, i)) * Big(y(k));
  }
  const auto x = solve_mp(A, b);
  Eigen::VectorXd out(n);
  for (std::size_t i = 0; i < n; ++i) out(i) = static_cast<double>(x[i]);
  return out;
}

/// Minimum-norm least-squares solution for a design whose column `dup`
/// duplicates column `orig` and whose remaining columns are independent.
///
/// The null space is spanned exactly by e_orig - e_dup. A particular solution
/// comes from the 50-digit normal equations of the reduced (duplicate-free)
/// design; projecting out the null direction gives the minimum-norm solution.
inline Eigen::VectorXd min_norm_duplicate_column(const Eigen::MatrixXd& D, const Eigen::VectorXd& y, int orig,
                                                 int dup) {
  const auto m = static_cast<std::size_t>(D.rows());
  const int n = static_cast<int>(D.cols());
  std::vector<int> keep;
  for (int j = 0; j < n; ++j)
    if (j != dup) keep.push_back(j);
  const std::size_t k = keep.size();
  std::vector<std::vector<Big>> A(k, std::vector<Big>(k, Big(0)));
  std::vector<Big> b(k, Big(0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t r = 0; r < m; ++r) A[i][j] += Big(D(r, keep[i])) * Big(D(r, keep[j]));
    for (std::size_t r = 0; r < m; ++r) b[i] += Big(D(r, keep[i])) * Big(y(r));
  }
  const auto reduced = solve_mp(A, b);
  std::vector<Big> particular(static_cast<std::size_t>(n), Big(0));
  for (std::size_t i = 0; i < k; ++i) particular[static_cast<std::size_t>(keep[i])] = reduced[i];

  // Null vector v = e_orig - e_dup, |v|^2 = 2.
  const Big along = (particular[orig] - particular[dup]) / 2;
  particular[orig] -= along;
  particular[dup] += along;

  Eigen::VectorXd out(n);
  for (int j = 0; j < n; ++j) out(j) = static_cast<double>(particular[static_cast<std::size_t>(j)]);
  return out;
}

}  // namespace elm::oracle
