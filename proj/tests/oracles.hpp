#pragma once

// Reference computations written independently of the library kernels.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

namespace oracle
{

/// Root of f on [lo, hi] by plain bisection; f(lo) and f(hi) must differ in sign.
inline double bisect(const std::function<double(double)> &f, double lo, double hi)
{
  double flo = f(lo);
  for (int it = 0; it < 200; ++it)
  {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0.0) == (flo > 0.0))
    {
      lo = mid;
      flo = fm;
    }
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// P1 stiffness and centroid-rule mass matrices on (-R, R) with n uniform
/// cells, restricted to the n - 1 interior nodes. a and m are per-cell values.
struct IntervalMatrices
{
  Eigen::MatrixXd K;
  Eigen::MatrixXd M;
};

inline IntervalMatrices intervalMatrices(double R, int n, const std::vector<double> &a,
                                         const std::vector<double> &m)
{
  const double h = 2.0 * R / n;
  const int dofs = n - 1;
  IntervalMatrices out{Eigen::MatrixXd::Zero(dofs, dofs), Eigen::MatrixXd::Zero(dofs, dofs)};
  for (int c = 0; c < n; ++c)
  {
    // cell c joins nodes c and c + 1; interior node i is dof i - 1
    const int dl = c - 1, dr = c;
    const double k = a[c] / h;
    const double mm = m[c] * h / 4.0;
    auto add = [&](int i, int j, double vk, double vm) {
      if (i >= 0 && i < dofs && j >= 0 && j < dofs)
      {
        out.K(i, j) += vk;
        out.M(i, j) += vm;
      }
    };
    add(dl, dl, k, mm);
    add(dr, dr, k, mm);
    add(dl, dr, -k, mm);
    add(dr, dl, -k, mm);
  }
  return out;
}

/// Smallest mu with K x = mu M x, from the largest nu of M x = nu K x (K is
/// positive definite, M may be singular under the centroid rule).
inline std::vector<double> generalizedEigenvalues(const IntervalMatrices &mats, int count)
{
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(mats.M, mats.K);
  const auto &nu = es.eigenvalues(); // ascending
  std::vector<double> mu;
  for (int i = 0; i < count; ++i)
    mu.push_back(1.0 / nu[nu.size() - 1 - i]);
  return mu;
}

/// x^T K x with interior values x (boundary nodes dropped).
inline double quadraticForm(const Eigen::MatrixXd &K, const std::vector<double> &nodal)
{
  Eigen::VectorXd x(static_cast<Eigen::Index>(nodal.size() - 2));
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x[i] = nodal[i + 1];
  return x.dot(K * x);
}

} // namespace oracle
