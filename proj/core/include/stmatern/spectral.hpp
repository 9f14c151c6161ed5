#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace stmatern {

/// A point in the domain; 1D domains use only the first coordinate.
using Location = std::array<double, 2>;

/// Axis-aligned rectangle origin + (0, A_1) x (0, A_2), or an interval in 1D.
struct RectangleDomain {
  int dim = 2;
  std::array<double, 2> lengths{1.0, 1.0};
  std::array<double, 2> origin{0.0, 0.0};

  static RectangleDomain interval(double length, double origin = 0.0);
  static RectangleDomain rectangle(double a1, double a2, double x0 = 0.0, double y0 = 0.0);

  /// Throws std::invalid_argument for a bad dimension or non-positive length.
  void validate() const;
  double measure() const;
  bool contains(const Location& s) const;
};

struct Frequency {
  int i = 0;
  int j = 0;
  bool operator==(const Frequency&) const = default;
};

/// The M leading Neumann-Laplacian eigenpairs on a rectangle, ordered by
/// ascending eigenvalue with lexicographic (i, j) tie-breaking.
class SpectralBasis {
 public:
  SpectralBasis(RectangleDomain dom, std::vector<Frequency> freqs);

  std::size_t size() const { return freqs_.size(); }
  const RectangleDomain& domain() const { return dom_; }
  const std::vector<Frequency>& freqs() const { return freqs_; }
  const std::vector<double>& xis() const { return xis_; }
  const std::vector<double>& norms() const { return norms_; }

  /// f_k(s) for one basis function; no domain check.
  double value(std::size_t k, const Location& s) const;

  /// Index of a frequency in this basis, or size() when absent.
  std::size_t index_of(const Frequency& f) const;

 private:
  RectangleDomain dom_;
  std::vector<Frequency> freqs_;
  std::vector<double> xis_;
  std::vector<double> norms_;
};

/// Eigenvalue (i^2/A_1^2 + j^2/A_2^2) pi^2.
double neumann_eigenvalue(const RectangleDomain& dom, const Frequency& f);

SpectralBasis build_basis(const RectangleDomain& dom, std::size_t M);

/// All M basis values at s. Throws std::out_of_range for s outside the domain.
Eigen::VectorXd eval_basis(const SpectralBasis& b, const Location& s);

/// n_locs x M matrix whose row i is eval_basis(b, locs[i]).
Eigen::MatrixXd design_matrix(const SpectralBasis& b, std::span<const Location> locs);

/// CSV with header k,i,j,xi,norm.
void write_basis_csv(std::ostream& os, const SpectralBasis& b);

}  // namespace stmatern
