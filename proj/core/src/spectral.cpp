#include "stmatern/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace stmatern {

RectangleDomain RectangleDomain::interval(double length, double origin) {
  RectangleDomain d;
  d.dim = 1;
  d.lengths = {length, 1.0};
  d.origin = {origin, 0.0};
  d.validate();
  return d;
}

RectangleDomain RectangleDomain::rectangle(double a1, double a2, double x0, double y0) {
  RectangleDomain d;
  d.dim = 2;
  d.lengths = {a1, a2};
  d.origin = {x0, y0};
  d.validate();
  return d;
}

void RectangleDomain::validate() const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("RectangleDomain: dim must be 1 or 2");
  for (int a = 0; a < dim; ++a) {
    if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a])) {
      throw std::invalid_argument("RectangleDomain: side lengths must be positive");
    }
  }
}

double RectangleDomain::measure() const { return dim == 1 ? lengths[0] : lengths[0] * lengths[1]; }

bool RectangleDomain::contains(const Location& s) const {
  for (int a = 0; a < dim; ++a) {
    const double tol = 1e-12 * std::max(1.0, std::abs(origin[a]) + lengths[a]);
    const double x = s[a] - origin[a];
    if (!(x >= -tol && x <= lengths[a] + tol)) return false;
  }
  return true;
}

double neumann_eigenvalue(const RectangleDomain& dom, const Frequency& f) {
  const double a1 = dom.lengths[0];
  double q = static_cast<double>(f.i) * f.i / (a1 * a1);
  if (dom.dim == 2) {
    const double a2 = dom.lengths[1];
    q += static_cast<double>(f.j) * f.j / (a2 * a2);
  }
  return q * std::numbers::pi * std::numbers::pi;
}

SpectralBasis::SpectralBasis(RectangleDomain dom, std::vector<Frequency> freqs)
    : dom_(dom), freqs_(std::move(freqs)) {
  dom_.validate();
  xis_.reserve(freqs_.size());
  norms_.reserve(freqs_.size());
  for (const auto& f : freqs_) {
    if (f.i < 0 || f.j < 0 || (dom_.dim == 1 && f.j != 0)) {
      throw std::invalid_argument("SpectralBasis: invalid frequency");
    }
    xis_.push_back(neumann_eigenvalue(dom_, f));
    // 2^{1 - delta_i/2 - delta_j/2} / sqrt(|D|), one sqrt(2) per nonzero frequency.
    double n = 1.0 / std::sqrt(dom_.measure());
    if (f.i != 0) n *= std::numbers::sqrt2;
    if (dom_.dim == 2 && f.j != 0) n *= std::numbers::sqrt2;
    norms_.push_back(n);
  }
}

double SpectralBasis::value(std::size_t k, const Location& s) const {
  const auto& f = freqs_[k];
  double v = norms_[k];
  if (f.i != 0) v *= std::cos(std::numbers::pi * f.i * (s[0] - dom_.origin[0]) / dom_.lengths[0]);
  if (dom_.dim == 2 && f.j != 0) {
    v *= std::cos(std::numbers::pi * f.j * (s[1] - dom_.origin[1]) / dom_.lengths[1]);
  }
  return v;
}

std::size_t SpectralBasis::index_of(const Frequency& f) const {
  const auto it = std::find(freqs_.begin(), freqs_.end(), f);
  return static_cast<std::size_t>(it - freqs_.begin());
}

SpectralBasis build_basis(const RectangleDomain& dom, std::size_t M) {
  dom.validate();
  if (M == 0) throw std::invalid_argument("build_basis: M must be at least 1");

  if (dom.dim == 1) {
    std::vector<Frequency> freqs(M);
    for (std::size_t k = 0; k < M; ++k) freqs[k] = {static_cast<int>(k), 0};
    return SpectralBasis(dom, std::move(freqs));
  }

  const double aspect = std::max(dom.lengths[0] / dom.lengths[1], dom.lengths[1] / dom.lengths[0]);
  int K = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(M)) * aspect)) + 2;
  for (;;) {
    std::vector<std::tuple<double, int, int>> lattice;
    lattice.reserve(static_cast<std::size_t>(K + 1) * (K + 1));
    for (int i = 0; i <= K; ++i) {
      for (int j = 0; j <= K; ++j) lattice.emplace_back(neumann_eigenvalue(dom, {i, j}), i, j);
    }
    if (lattice.size() >= M) {
      std::partial_sort(lattice.begin(), lattice.begin() + static_cast<std::ptrdiff_t>(M),
                        lattice.end());
      const double xi_m = std::get<0>(lattice[M - 1]);
      // Every omitted eigenvalue is at least the smaller of these two.
      const double omitted =
          std::min(neumann_eigenvalue(dom, {K + 1, 0}), neumann_eigenvalue(dom, {0, K + 1}));
      if (omitted > xi_m) {
        std::vector<Frequency> freqs(M);
        for (std::size_t k = 0; k < M; ++k) {
          freqs[k] = {std::get<1>(lattice[k]), std::get<2>(lattice[k])};
        }
        return SpectralBasis(dom, std::move(freqs));
      }
    }
    K *= 2;
  }
}

Eigen::VectorXd eval_basis(const SpectralBasis& b, const Location& s) {
  if (!b.domain().contains(s)) {
    std::ostringstream os;
    os << "eval_basis: location (" << s[0] << ", " << s[1] << ") outside domain";
    throw std::out_of_range(os.str());
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(b.size()));
  for (std::size_t k = 0; k < b.size(); ++k) out[static_cast<Eigen::Index>(k)] = b.value(k, s);
  return out;
}

Eigen::MatrixXd design_matrix(const SpectralBasis& b, std::span<const Location> locs) {
  Eigen::MatrixXd H(static_cast<Eigen::Index>(locs.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < locs.size(); ++i) {
    H.row(static_cast<Eigen::Index>(i)) = eval_basis(b, locs[i]).transpose();
  }
  return H;
}

void write_basis_csv(std::ostream& os, const SpectralBasis& b) {
  os << "k,i,j,xi,norm\n";
  os.precision(17);
  for (std::size_t k = 0; k < b.size(); ++k) {
    os << k + 1 << ',' << b.freqs()[k].i << ',' << b.freqs()[k].j << ',' << b.xis()[k] << ','
       << b.norms()[k] << '\n';
  }
}

}  // namespace stmatern
