#pragma once

// Brute-force reference implementations for the statistics tests. Plain
// nested vectors and textbook loops; nothing here shares code with the
// library under test.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

inline Mat zeros(std::size_t r, std::size_t c) { return Mat(r, Vec(c, 0.0)); }

inline Mat transpose(const Mat& a) {
  Mat t = zeros(a[0].size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
  return t;
}

inline Mat mul(const Mat& a, const Mat& b) {
  Mat c = zeros(a.size(), b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b[0].size(); ++j)
      for (std::size_t k = 0; k < b.size(); ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

// Gauss-Jordan inverse with partial pivoting.
inline Mat inverse(Mat a) {
  const std::size_t n = a.size();
  Mat inv = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    if (std::fabs(a[pivot][col]) < 1e-300) throw std::runtime_error("singular");
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double d = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Returns
// eigenvalues; eigenvectors are the columns of `vectors`.
inline Vec jacobi_eigen(Mat a, Mat& vectors) {
  const std::size_t n = a.size();
  vectors = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) vectors[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-300) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vectors[k][p], vkq = vectors[k][q];
          vectors[k][p] = c * vkp - s * vkq;
          vectors[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  Vec values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a[i][i];
  return values;
}

struct Row {
  int base = 0, toward = 0, away = 0;
  int cluster = 0;
};

struct Fit {
  Vec beta;
  Mat vcov;
};

// OLS plus the cluster sandwich, assembled term by term.
inline Fit ols_cluster(const Vec& y, const std::vector<Row>& rows, bool cr1) {
  const std::size_t n = y.size(), k = 6;
  Mat x = zeros(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    const Row& r = rows[i];
    x[i] = {1.0, double(r.base), double(r.toward), double(r.away), double(r.base * r.toward),
            double(r.base * r.away)};
  }
  const Mat xt = transpose(x);
  const Mat bread = inverse(mul(xt, x));
  Mat ycol = zeros(n, 1);
  for (std::size_t i = 0; i < n; ++i) ycol[i][0] = y[i];
  const Mat b = mul(bread, mul(xt, ycol));
  Fit f;
  f.beta.resize(k);
  for (std::size_t j = 0; j < k; ++j) f.beta[j] = b[j][0];

  std::map<int, Vec> score;  // cluster -> X_g' u_g
  for (std::size_t i = 0; i < n; ++i) {
    double fitted = 0.0;
    for (std::size_t j = 0; j < k; ++j) fitted += x[i][j] * f.beta[j];
    const double u = y[i] - fitted;
    Vec& s = score[rows[i].cluster];
    s.resize(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) s[j] += x[i][j] * u;
  }
  Mat meat = zeros(k, k);
  for (const auto& [g, s] : score)
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t c = 0; c < k; ++c) meat[a][c] += s[a] * s[c];
  f.vcov = mul(mul(bread, meat), bread);
  if (cr1) {
    const double g = double(score.size());
    const double factor = g / (g - 1.0) * (double(n) - 1.0) / (double(n) - double(k));
    for (auto& row : f.vcov)
      for (double& v : row) v *= factor;
  }
  return f;
}

// Regularized upper incomplete gamma Q(a, x): series for x < a + 1,
// continued fraction otherwise.
inline double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double sum = 1.0 / a, term = sum;
    for (int n = 1; n < 1000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
  }
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

struct Wald {
  double stat = 0.0;
  int rank = 0;
  double p = 1.0;
};

// W = b' pinv(V) b over beta_1..beta_5, pseudo-inverse via Jacobi.
inline Wald wald(const Fit& f) {
  Mat v = zeros(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) v[i][j] = f.vcov[i + 1][j + 1];
  Mat vectors;
  const Vec values = jacobi_eigen(v, vectors);
  double largest = 0.0;
  for (double e : values) largest = std::max(largest, std::fabs(e));
  Wald w;
  if (largest < 1e-20) return w;
  for (int i = 0; i < 5; ++i) {
    if (largest <= 0.0 || values[i] <= largest * 1e-10) continue;
    double proj = 0.0;
    for (int j = 0; j < 5; ++j) proj += vectors[j][i] * f.beta[j + 1];
    w.stat += proj * proj / values[i];
    ++w.rank;
  }
  w.p = w.rank == 0 ? 1.0 : gamma_q(w.rank / 2.0, w.stat / 2.0);
  return w;
}

struct Bh {
  std::vector<bool> rejected;
  Vec q;
};

// Step-up rule straight from its definition.
inline Bh benjamini_hochberg(const Vec& p, double alpha) {
  const std::size_t m = p.size();
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::size_t kstar = 0;
  for (std::size_t k = 1; k <= m; ++k)
    if (p[idx[k - 1]] <= double(k) * alpha / double(m)) kstar = k;
  Bh out{std::vector<bool>(m, false), Vec(m, 1.0)};
  for (std::size_t k = 1; k <= kstar; ++k) out.rejected[idx[k - 1]] = true;
  for (std::size_t k = 1; k <= m; ++k) {
    double q = 1.0;
    for (std::size_t j = k; j <= m; ++j) q = std::min(q, p[idx[j - 1]] * double(m) / double(j));
    out.q[idx[k - 1]] = q;
  }
  return out;
}

}  // namespace oracle
