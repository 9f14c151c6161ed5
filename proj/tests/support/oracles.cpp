#include "oracles.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace stmatern::testing {
namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights at kXgk[1], kXgk[3], kXgk[5], kXgk[7].
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

std::pair<double, double> gk_panel(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = kWgk[7] * fc;
  double gauss = kWg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double s = f(c - h * kXgk[i]) + f(c + h * kXgk[i]);
    kron += kWgk[i] * s;
    if (i % 2 == 1) gauss += kWg[i / 2] * s;
  }
  return {kron * h, std::abs(kron - gauss) * h};
}

double gk_recurse(const std::function<double(double)>& f, double a, double b, double est, double err,
                  double tol, int depth) {
  if (err <= tol * std::abs(est) || err < 1e-300 || depth == 0) return est;
  const double c = 0.5 * (a + b);
  const auto [l, le] = gk_panel(f, a, c);
  const auto [r, re] = gk_panel(f, c, b);
  return gk_recurse(f, a, c, l, le, tol, depth - 1) + gk_recurse(f, c, b, r, re, tol, depth - 1);
}

}  // namespace

double gauss_kronrod(const std::function<double(double)>& f, double a, double b, double tol,
                     int max_depth) {
  const auto [est, err] = gk_panel(f, a, b);
  return gk_recurse(f, a, b, est, err, tol, max_depth);
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n, double a, double b) {
  std::vector<double> x(static_cast<std::size_t>(n));
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = 0.5 * (a + b) - 0.5 * (b - a) * z;
    w[static_cast<std::size_t>(i)] = (b - a) / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

double temporal_cov_oracle(double mu, double lambda, double gamma, double h) {
  const double a = 2.0 * mu * std::abs(h);
  const double g = gamma;
  auto integrand = [&](double v) {
    const double u = std::pow(v, 1.0 / g);
    return std::pow(u + a, g - 1.0) * std::exp(-u) / g;
  };
  const std::array<double, 7> cuts_u = {0.0, 0.5, 2.0, 6.0, 15.0, 40.0, 120.0};
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < cuts_u.size(); ++i) {
    integral += gauss_kronrod(integrand, std::pow(cuts_u[i], g), std::pow(cuts_u[i + 1], g), 1e-14);
  }
  return lambda * std::exp(-mu * std::abs(h)) * integral /
         (std::pow(2.0 * mu, 2.0 * g - 1.0) * std::tgamma(g) * std::tgamma(g));
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

ConvolvedArma convolve_arma(const std::vector<double>& p, const std::vector<double>& q, int g,
                            double mu, double dt) {
  const double rho = std::exp(-mu * dt);
  auto scaled = [rho](const std::vector<double>& c) {
    std::vector<double> out(c.size());
    double r = 1.0;
    for (std::size_t i = 0; i < c.size(); ++i, r *= rho) out[i] = c[i] * r;
    return out;
  };
  std::vector<double> ar = scaled(p);
  for (int i = 0; i < g; ++i) ar = poly_mul(ar, {1.0, -rho});
  const std::vector<double> ma = scaled(q);
  ConvolvedArma out;
  for (std::size_t i = 1; i < ar.size(); ++i) out.phi.push_back(-ar[i] / ar[0]);
  for (std::size_t i = 1; i < ma.size(); ++i) out.theta.push_back(ma[i] / ma[0]);
  return out;
}

std::vector<double> arma_recursion(const std::vector<double>& phi, const std::vector<double>& theta,
                                   const std::vector<double>& eps) {
  std::vector<double> c(eps.size(), 0.0);
  for (std::size_t n = 0; n < eps.size(); ++n) {
    double v = eps[n];
    for (std::size_t i = 1; i <= phi.size() && i <= n; ++i) v += phi[i - 1] * c[n - i];
    for (std::size_t i = 1; i <= theta.size() && i <= n; ++i) v += theta[i - 1] * eps[n - i];
    c[n] = v;
  }
  return c;
}

double frac_binom(double g, int n) {
  double v = 1.0;
  for (int j = 0; j < n; ++j) v *= (g + j) / (j + 1.0);
  return v;
}

double mvn_logpdf(const Eigen::VectorXd& y, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw std::runtime_error("mvn_logpdf: covariance not PD");
  const Eigen::VectorXd z = llt.matrixL().solve(y - mean);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi) + logdet +
                 z.squaredNorm());
}

JointUpdate joint_update(const Eigen::VectorXd& m, const Eigen::MatrixXd& S, const Eigen::MatrixXd& H,
                         const Eigen::VectorXd& y, double sigma_obs2) {
  const Eigen::MatrixXd A =
      H * S * H.transpose() + sigma_obs2 * Eigen::MatrixXd::Identity(H.rows(), H.rows());
  const Eigen::MatrixXd K = S * H.transpose() * A.inverse();
  JointUpdate out;
  out.m = m + K * (y - H * m);
  out.S = S - K * H * S;
  out.loglik = mvn_logpdf(y, H * m, A);
  return out;
}

double dense_state_space_loglik(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Sigma,
                                const Eigen::MatrixXd& S0, const std::vector<Eigen::MatrixXd>& H,
                                const std::vector<Eigen::VectorXd>& y, double sigma_obs2) {
  const std::size_t N = H.size();
  std::vector<Eigen::MatrixXd> P(N + 1);
  P[0] = S0;
  for (std::size_t n = 1; n <= N; ++n) P[n] = F * P[n - 1] * F.transpose() + Sigma;

  std::vector<Eigen::Index> start(N + 1, 0);
  for (std::size_t n = 0; n < N; ++n) start[n + 1] = start[n] + H[n].rows();
  const Eigen::Index total = start[N];
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(total, total);
  Eigen::VectorXd ys(total);
  for (std::size_t n = 0; n < N; ++n) {
    ys.segment(start[n], H[n].rows()) = y[n];
    Eigen::MatrixXd Fpow = Eigen::MatrixXd::Identity(F.rows(), F.cols());
    // Cov(x^{n+1}, x^{k+1}) = F^{n-k} P_{k+1} for k <= n.
    for (std::size_t k = n + 1; k-- > 0;) {
      const Eigen::MatrixXd block = H[n] * Fpow * P[k + 1] * H[k].transpose();
      cov.block(start[n], start[k], H[n].rows(), H[k].rows()) = block;
      cov.block(start[k], start[n], H[k].rows(), H[n].rows()) = block.transpose();
      Fpow = Fpow * F;
    }
  }
  cov.diagonal().array() += sigma_obs2;
  return mvn_logpdf(ys, Eigen::VectorXd::Zero(total), cov);
}

Eigen::MatrixXd random_spd(int n, unsigned seed, double lo, double hi) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(lo, hi);
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) G(i, j) = nd(rng);
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  const Eigen::MatrixXd Q = qr.householderQ();
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d[i] = ud(rng);
  return Q * d.asDiagonal() * Q.transpose();
}

}  // namespace stmatern::testing
