#include "stmatern/arma.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <ostream>
#include <sstream>

namespace stmatern {
namespace {

constexpr double kTailTol = 1e-14;
constexpr std::size_t kMaxTerms = 20'000'000;

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<double> ar_poly(const ArmaCoeffs& ac) {
  std::vector<double> poly{1.0};
  for (double f : ac.phi) poly.push_back(-f);
  return poly;
}

std::vector<double> ma_poly(const ArmaCoeffs& ac) {
  std::vector<double> poly{1.0};
  poly.insert(poly.end(), ac.theta.begin(), ac.theta.end());
  return poly;
}

// Roots of z^p P(1/z) for P = 1 + c_1 z + ... + c_p z^p. Solving the monic
// reversed polynomial stays accurate when the c_i are tiny.
std::vector<std::complex<double>> reciprocal_roots(std::span<const double> poly) {
  std::size_t p = poly.size();
  while (p > 1 && poly[p - 1] == 0.0) --p;
  std::vector<double> rev(poly.rbegin() + static_cast<std::ptrdiff_t>(poly.size() - p), poly.rend());
  return poly_roots(rev);
}

bool roots_outside_unit_disc(std::span<const double> poly) {
  for (const auto& w : reciprocal_roots(poly)) {
    if (!(std::abs(w) < 1.0)) return false;
  }
  return true;
}

// Largest 1 / |root| of the AR polynomial, i.e. the decay rate of psi_j.
double ar_decay(const ArmaCoeffs& ac) {
  if (ac.factored) {
    const double base = std::exp(-ac.mu * ac.dt);
    double rho = ac.floor_gamma > 0 ? base : 0.0;
    if (ac.ra) {
      for (const auto& r : poly_roots(ac.ra->p)) rho = std::max(rho, base / std::abs(r));
    }
    return rho;
  }
  double rho = 0.0;
  for (const auto& w : reciprocal_roots(ar_poly(ac))) rho = std::max(rho, std::abs(w));
  return rho;
}

// Generates terms until the squared tail is below kTailTol of the running
// total, estimating the tail from block sums of length L decaying at rate
// at least rho^{2L}.
std::vector<double> truncated_sequence(const std::function<double(std::size_t)>& next, double rho,
                                       std::size_t min_terms) {
  const std::size_t L = std::max<std::size_t>(20, min_terms);
  std::vector<double> seq;
  double total = 0.0;
  double prev_block = -1.0;
  const double geometric = std::pow(rho, 2.0 * static_cast<double>(L));
  for (;;) {
    double block = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
      const double v = next(seq.size());
      if (!std::isfinite(v)) throw std::runtime_error("MA(infinity) weights are not finite");
      seq.push_back(v);
      block += v * v;
    }
    total += block;
    if (seq.size() >= 2 * L && prev_block >= 0.0) {
      const double ratio = prev_block > 0.0 ? block / prev_block : 0.0;
      const double r = std::max(geometric, ratio);
      if (block == 0.0 || (r < 1.0 && block * r / (1.0 - r) < kTailTol * total &&
                           block < kTailTol * total)) {
        return seq;
      }
    }
    prev_block = block;
    if (seq.size() > kMaxTerms) throw std::runtime_error("MA(infinity) truncation did not converge");
  }
}

}  // namespace

FrequencyError::FrequencyError(std::size_t index, const std::string& what)
    : std::runtime_error("frequency " + std::to_string(index) + ": " + what), index_(index) {}

GammaSplit split_gamma(double gamma) {
  if (!(gamma > 0.5) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must exceed 1/2");
  GammaSplit s;
  s.floor = static_cast<int>(std::floor(gamma));
  long long key = std::llround((gamma - s.floor) * 1e6);
  if (key >= 1'000'000) {
    ++s.floor;
    key = 0;
  }
  s.eta = static_cast<double>(key) * 1e-6;
  return s;
}

ArmaCoeffs arma_coefficients(double mu, double gamma, double dt,
                             std::shared_ptr<const RationalApprox> ra) {
  if (!(mu > 0.0) || !(dt > 0.0)) throw std::invalid_argument("arma_coefficients: mu and dt must be positive");
  const GammaSplit gs = split_gamma(gamma);
  ArmaCoeffs ac;
  ac.mu = mu;
  ac.gamma = gamma;
  ac.dt = dt;
  ac.floor_gamma = gs.floor;
  ac.factored = true;

  std::vector<double> p{1.0};
  std::vector<double> q{1.0};
  if (!gs.integer()) {
    if (!ra) throw std::invalid_argument("arma_coefficients: rational approximation required");
    if (std::abs(ra->eta - gs.eta) > 1e-6) {
      throw std::invalid_argument("arma_coefficients: rational fit eta does not match gamma");
    }
    p = ra->p;
    q = ra->q;
    ac.m = ra->m;
    ac.ra = std::move(ra);
  }
  const int m = ac.m;
  const int g = gs.floor;
  const double p0 = p[0];
  const double q0 = q[0];
  if (std::abs(p0) < 1e-12 || std::abs(q0) < 1e-12) {
    throw std::invalid_argument("arma_coefficients: p(0) and q(0) must be nonzero");
  }

  const double decay = std::exp(-mu * dt);
  ac.phi.resize(static_cast<std::size_t>(m + g));
  for (int i = 1; i <= m + g; ++i) {
    double s = 0.0;
    for (int j = std::max(0, i - g); j <= std::min(m, i); ++j) {
      const double sign = ((i - j) % 2 == 0) ? 1.0 : -1.0;
      s += sign * binom(g, i - j) * p[static_cast<std::size_t>(j)] / p0;
    }
    ac.phi[static_cast<std::size_t>(i - 1)] = -std::pow(decay, i) * s;
  }
  ac.theta.resize(static_cast<std::size_t>(m));
  for (int i = 1; i <= m; ++i) {
    ac.theta[static_cast<std::size_t>(i - 1)] = std::pow(decay, i) * q[static_cast<std::size_t>(i)] / q0;
  }
  return ac;
}

namespace {

// Roots r of poly(rho z) lie outside the unit disc iff |r| > rho for the roots of poly.
bool scaled_roots_outside(std::span<const double> poly, double rho) {
  for (const auto& r : poly_roots(poly)) {
    if (!(std::abs(r) > rho)) return false;
  }
  return true;
}

}  // namespace

bool is_causal(const ArmaCoeffs& ac) {
  if (!ac.factored) return roots_outside_unit_disc(ar_poly(ac));
  const double rho = std::exp(-ac.mu * ac.dt);
  if (ac.floor_gamma > 0 && !(rho < 1.0)) return false;
  return !ac.ra || scaled_roots_outside(ac.ra->p, rho);
}

bool is_invertible(const ArmaCoeffs& ac) {
  if (!ac.factored) return roots_outside_unit_disc(ma_poly(ac));
  return !ac.ra || scaled_roots_outside(ac.ra->q, std::exp(-ac.mu * ac.dt));
}

FrequencyBlock companion(const ArmaCoeffs& ac) {
  FrequencyBlock fb;
  fb.m = static_cast<int>(ac.theta.size());
  fb.n_ar = std::max(static_cast<int>(ac.phi.size()), 1);
  fb.sigma2 = ac.sigma2;
  const int b = fb.size();
  const int na = fb.n_ar;

  fb.F = Eigen::MatrixXd::Zero(b, b);
  for (std::size_t i = 0; i < ac.phi.size(); ++i) fb.F(0, static_cast<Eigen::Index>(i)) = ac.phi[i];
  for (int i = 0; i < fb.m; ++i) fb.F(0, na + i) = ac.theta[static_cast<std::size_t>(i)];
  for (int i = 1; i < na; ++i) fb.F(i, i - 1) = 1.0;
  for (int i = 1; i < fb.m; ++i) fb.F(na + i, na + i - 1) = 1.0;

  fb.Sigma = Eigen::MatrixXd::Zero(b, b);
  fb.Sigma(0, 0) = ac.sigma2;
  if (fb.m > 0) {
    fb.Sigma(0, na) = ac.sigma2;
    fb.Sigma(na, 0) = ac.sigma2;
    fb.Sigma(na, na) = ac.sigma2;
  }
  fb.spectral_radius = spectral_radius(fb.F);
  fb.S_stat = Eigen::MatrixXd::Zero(b, b);
  return fb;
}

double spectral_radius(const Eigen::MatrixXd& F) {
  if (F.size() == 0) return 0.0;
  if (F.rows() == 1) return std::abs(F(0, 0));
  Eigen::EigenSolver<Eigen::MatrixXd> es(F, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

long init_steps(double r_t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("init_steps: dt must be positive");
  const double n = std::ceil(10.0 * r_t / dt);
  if (!(n < 1e12)) throw std::invalid_argument("init_steps: r_t / dt too large");
  return std::max(static_cast<long>(n), 200L);
}

Eigen::MatrixXd covariance_recursion(const FrequencyBlock& fb, const Eigen::MatrixXd& S0, long n) {
  // S^n = S_inf + F^n (S^0 - S_inf) F^nT with S_inf = F S_inf F^T + Sigma. Stepwise propagation
  // amplifies roundoff by up to |F^j|^2, which reaches 1e12 for clustered near-unit roots.
  const Eigen::Index b = fb.F.rows();
  Eigen::MatrixXd K(b * b, b * b);
  for (Eigen::Index i = 0; i < b; ++i) {
    for (Eigen::Index j = 0; j < b; ++j) K.block(i * b, j * b, b, b) = -fb.F(i, j) * fb.F;
  }
  K.diagonal().array() += 1.0;
  const Eigen::VectorXd sigma = Eigen::Map<const Eigen::VectorXd>(fb.Sigma.data(), b * b);
  const Eigen::VectorXd s = K.fullPivLu().solve(sigma);
  Eigen::MatrixXd S_inf = Eigen::Map<const Eigen::MatrixXd>(s.data(), b, b);
  S_inf = (0.5 * (S_inf + S_inf.transpose())).eval();

  // F^n by direct products: squaring lets rounding swamp the decayed eigenvalues of such F.
  const Eigen::MatrixXd D = S0 - S_inf;
  const double floor = 1e-20 * S_inf.cwiseAbs().maxCoeff();
  Eigen::MatrixXd Fa = Eigen::MatrixXd::Identity(b, b);
  for (long j = 0; j < n; ++j) {
    Fa = (fb.F * Fa).eval();
    const double norm = Fa.cwiseAbs().maxCoeff();
    if (norm * norm * static_cast<double>(b * b) * D.cwiseAbs().maxCoeff() < floor) {
      Fa.setZero();
      break;
    }
  }
  Eigen::MatrixXd S = S_inf + Fa * D * Fa.transpose();
  return 0.5 * (S + S.transpose());
}

FrequencyBlock stationary_init(FrequencyBlock fb, double target_var, double r_t, double dt,
                               std::size_t index) {
  if (!(target_var > 0.0) || !std::isfinite(target_var)) {
    throw FrequencyError(index, "target variance must be positive and finite");
  }
  fb.spectral_radius = spectral_radius(fb.F);
  if (!(fb.spectral_radius < 1.0)) {
    std::ostringstream os;
    os << "companion spectral radius " << fb.spectral_radius << " is not below 1";
    throw FrequencyError(index, os.str());
  }
  const double unit = fb.sigma2;
  FrequencyBlock work = fb;
  if (unit != 1.0) work.Sigma /= unit;
  const long n = init_steps(r_t, dt);
  const Eigen::MatrixXd S = covariance_recursion(
      work, Eigen::MatrixXd::Identity(fb.F.rows(), fb.F.cols()), n);
  const double s11 = S(0, 0);
  if (!S.allFinite() || !(s11 > 0.0)) throw FrequencyError(index, "stationary recursion is not finite");

  const double scale = target_var / s11;
  fb.sigma2 = scale;
  fb.Sigma = work.Sigma * scale;
  fb.S_stat = S * scale;
  fb.S_stat(0, 0) = target_var;
  return fb;
}

std::vector<double> psi_weights(const ArmaCoeffs& ac, std::size_t extra) {
  if (!is_causal(ac)) throw std::domain_error("psi_weights: ARMA coefficients are not causal");
  const auto& phi = ac.phi;
  const auto& theta = ac.theta;
  std::vector<double> psi;
  auto next = [&](std::size_t j) {
    double v = j == 0 ? 1.0 : (j <= theta.size() ? theta[j - 1] : 0.0);
    for (std::size_t i = 1; i <= std::min(j, phi.size()); ++i) v += phi[i - 1] * psi[j - i];
    psi.push_back(v);
    return v;
  };
  const auto seq = truncated_sequence(next, ar_decay(ac), phi.size() + theta.size() + 1);
  for (std::size_t e = 0; e < extra; ++e) next(psi.size());
  (void)seq;
  return psi;
}

std::vector<double> arma_acvf(const ArmaCoeffs& ac, std::size_t max_lag) {
  const auto psi = psi_weights(ac, max_lag);
  const std::size_t J = psi.size() - max_lag;
  std::vector<double> out(max_lag + 1, 0.0);
  for (std::size_t h = 0; h <= max_lag; ++h) {
    double s = 0.0;
    for (std::size_t j = 0; j < J; ++j) s += psi[j] * psi[j + h];
    out[h] = ac.sigma2 * s;
  }
  return out;
}

std::vector<double> arma_acf(const ArmaCoeffs& ac, std::size_t max_lag) {
  auto out = arma_acvf(ac, max_lag);
  const double v0 = out[0];
  for (auto& v : out) v /= v0;
  out[0] = 1.0;
  return out;
}

std::vector<double> frac_ma_weights(double mu, double gamma, double dt, std::size_t n_max) {
  if (!(gamma > 0.5)) throw std::invalid_argument("frac_ma_weights: gamma must exceed 1/2");
  const double decay = std::exp(-mu * dt);
  std::vector<double> c(n_max + 1);
  c[0] = 1.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    c[n] = c[n - 1] * (static_cast<double>(n) - 1.0 + gamma) / static_cast<double>(n) * decay;
  }
  return c;
}

std::vector<double> frac_ma_acf(double mu, double gamma, double dt, std::size_t max_lag) {
  if (!(gamma > 0.5)) throw std::invalid_argument("frac_ma_acf: gamma must exceed 1/2");
  const double decay = std::exp(-mu * dt);
  std::vector<double> c;
  auto next = [&](std::size_t n) {
    const double v = n == 0 ? 1.0
                            : c.back() * (static_cast<double>(n) - 1.0 + gamma) /
                                  static_cast<double>(n) * decay;
    c.push_back(v);
    return v;
  };
  truncated_sequence(next, decay, 1);
  for (std::size_t e = 0; e < max_lag; ++e) next(c.size());
  const std::size_t J = c.size() - max_lag;
  std::vector<double> out(max_lag + 1);
  for (std::size_t h = 0; h <= max_lag; ++h) {
    double s = 0.0;
    for (std::size_t j = 0; j < J; ++j) s += c[j] * c[j + h];
    out[h] = s;
  }
  const double v0 = out[0];
  for (auto& v : out) v /= v0;
  out[0] = 1.0;
  return out;
}

FrequencyBlock build_frequency_block(double mu, double gamma, double dt,
                                     std::shared_ptr<const RationalApprox> ra, double target_var,
                                     double r_t, std::size_t index) {
  ArmaCoeffs ac;
  try {
    ac = arma_coefficients(mu, gamma, dt, std::move(ra));
  } catch (const std::invalid_argument& e) {
    throw FrequencyError(index, e.what());
  }
  return stationary_init(companion(ac), target_var, r_t, dt, index);
}

void write_arma_diagnostics_csv(std::ostream& os, std::span<const ArmaDiagnostics> rows) {
  os << "k,phi,theta,sigma2,spectral_radius,stationary_var\n";
  os.precision(17);
  auto join = [&](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ";" : "") << v[i];
  };
  for (const auto& r : rows) {
    os << r.k + 1 << ',';
    join(r.coeffs.phi);
    os << ',';
    join(r.coeffs.theta);
    os << ',' << r.block.sigma2 << ',' << r.block.spectral_radius << ',' << r.block.S_stat(0, 0)
       << '\n';
  }
}

}  // namespace stmatern
