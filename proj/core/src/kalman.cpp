#include "stmatern/kalman.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace stmatern {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kPsdTol = 1e-10;

// S <- F S F^T + Sigma; T is scratch of the same size as S.
void predict_blocks(const BlockStateSpace& ss, Eigen::VectorXd& m, Eigen::MatrixXd& S,
                    Eigen::MatrixXd& T) {
  const Eigen::Index b = ss.block_size;
  const Eigen::Index n = ss.b_total();
  T.resize(n, n);
  for (std::size_t k = 0; k < ss.M(); ++k) {
    const Eigen::Index o = ss.offset(k);
    const auto& F = ss.blocks[k].F;
    T.middleRows(o, b).noalias() = F * S.middleRows(o, b);
    m.segment(o, b) = (F * m.segment(o, b)).eval();
  }
  for (std::size_t k = 0; k < ss.M(); ++k) {
    const Eigen::Index o = ss.offset(k);
    S.middleCols(o, b).noalias() = T.middleCols(o, b) * ss.blocks[k].F.transpose();
    S.block(o, o, b, b) += ss.blocks[k].Sigma;
  }
}

// Sequential conditioning of (m, S) on the scalar observations of one step,
// all supported on the state indices cols (size u). After j updates
//   S_j = S - X G_j X^T and m_j = m + X w_j, with X = S[:, cols],
// so each update costs O(u^2) on P = S[cols, cols]; finish() applies G and w
// to the full state once.
class StepUpdater {
 public:
  StepUpdater(Eigen::VectorXd& m, Eigen::MatrixXd& S, std::span<const Eigen::Index> cols, long step)
      : m_(m), S_(S), cols_(cols.begin(), cols.end()), step_(step) {
    const auto u = static_cast<Eigen::Index>(cols_.size());
    P_.resize(u, u);
    mc_.resize(u);
    for (Eigen::Index j = 0; j < u; ++j) {
      const Eigen::Index cj = cols_[static_cast<std::size_t>(j)];
      mc_[j] = m[cj];
      for (Eigen::Index i = 0; i < u; ++i) P_(i, j) = S(cols_[static_cast<std::size_t>(i)], cj);
    }
    G_ = Eigen::MatrixXd::Zero(u, u);
    w_ = Eigen::VectorXd::Zero(u);
    Z_.resize(u, u);
  }

  /// h has one entry per column in cols.
  void update(const Eigen::Ref<const Eigen::VectorXd>& h, double y, double offset, double sigma_obs2,
              double& yhat, double& a) {
    Ph_.noalias() = P_ * h;
    z_ = h;
    z_.noalias() -= G_ * Ph_;
    Shc_.noalias() = P_ * z_;
    double hSh = h.dot(Shc_);
    const double hh = h.cwiseAbs2().dot(P_.diagonal().cwiseAbs());
    if (!std::isfinite(hSh) || hSh < -kPsdTol * std::max(hh, 1e-300) - 1e-300) {
      std::ostringstream os;
      os << "innovation variance lost positivity (h^T S h = " << hSh << ")";
      throw FilterError(step_, os.str());
    }
    hSh = std::max(hSh, 0.0);
    a = hSh + sigma_obs2;
    if (!(a > 0.0)) throw FilterError(step_, "nonpositive innovation variance");
    yhat = h.dot(mc_) + offset;
    const double g = (y - yhat) / a;
    mc_.noalias() += g * Shc_;
    w_.noalias() += g * z_;
    G_.noalias() += (1.0 / a) * z_ * z_.transpose();
    if (used_ < static_cast<long>(Z_.cols())) Z_.col(used_) = z_ / std::sqrt(a);
    ++used_;
  }

  void finish() {
    if (used_ > 0) {
      const Eigen::Index n = S_.rows();
      const auto u = static_cast<Eigen::Index>(cols_.size());
      Eigen::MatrixXd X(n, u);
      for (Eigen::Index j = 0; j < u; ++j) X.col(j) = S_.col(cols_[static_cast<std::size_t>(j)]);
      m_.noalias() += X * w_;
      // G = Z Z^T while fewer observations than columns were used.
      if (used_ < u) {
        const Eigen::MatrixXd Y = X * Z_.leftCols(used_);
        S_.selfadjointView<Eigen::Lower>().rankUpdate(Y, -1.0);
      } else {
        const Eigen::MatrixXd XG = X * G_;
        S_.triangularView<Eigen::Lower>() -= XG * X.transpose();
      }
    }
    S_.triangularView<Eigen::StrictlyUpper>() = S_.transpose();
  }

 private:
  Eigen::VectorXd& m_;
  Eigen::MatrixXd& S_;
  std::vector<Eigen::Index> cols_;
  long step_;
  Eigen::MatrixXd P_;
  Eigen::MatrixXd G_;
  Eigen::MatrixXd Z_;
  Eigen::VectorXd mc_;
  Eigen::VectorXd w_;
  Eigen::VectorXd Ph_;
  Eigen::VectorXd z_;
  Eigen::VectorXd Shc_;
  long used_ = 0;
};

void check_diagonal(const Eigen::MatrixXd& S, long step) {
  const double scale = S.diagonal().cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < S.rows(); ++i) {
    if (!std::isfinite(S(i, i)) || S(i, i) < -1e-8 * scale) {
      throw FilterError(step, "filtered covariance lost positive semidefiniteness");
    }
  }
}

}  // namespace

std::size_t ObservationSet::count() const {
  std::size_t c = 0;
  for (const auto& s : steps) c += s.size();
  return c;
}

void ObservationSet::validate(const RectangleDomain& dom) const {
  if (covariates.rows() != static_cast<Eigen::Index>(locations.size()) && covariates.size() != 0) {
    throw std::invalid_argument("ObservationSet: covariate rows must match stations");
  }
  if (covariate_names.size() != static_cast<std::size_t>(covariates.cols())) {
    throw std::invalid_argument("ObservationSet: covariate names must match columns");
  }
  if (!covariates.allFinite()) throw std::invalid_argument("ObservationSet: non-finite covariate");
  for (const auto& s : locations) {
    if (!dom.contains(s)) throw std::invalid_argument("ObservationSet: station outside the domain");
  }
  for (std::size_t n = 0; n < steps.size(); ++n) {
    for (const auto& o : steps[n]) {
      if (o.loc >= locations.size()) throw std::invalid_argument("ObservationSet: bad station index");
      if (!std::isfinite(o.value)) {
        throw std::invalid_argument("ObservationSet: non-finite value at step " + std::to_string(n + 1));
      }
    }
  }
}

ObservationSet ObservationSet::subset(std::span<const std::size_t> stations) const {
  ObservationSet out;
  std::vector<std::size_t> remap(locations.size(), locations.size());
  out.locations.reserve(stations.size());
  out.covariates.resize(static_cast<Eigen::Index>(stations.size()), covariates.cols());
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const std::size_t s = stations[i];
    if (s >= locations.size()) throw std::out_of_range("ObservationSet::subset: bad station index");
    remap[s] = i;
    out.locations.push_back(locations[s]);
    if (covariates.cols() > 0) out.covariates.row(static_cast<Eigen::Index>(i)) = covariates.row(static_cast<Eigen::Index>(s));
  }
  out.covariate_names = covariate_names;
  out.steps.resize(steps.size());
  for (std::size_t n = 0; n < steps.size(); ++n) {
    for (const auto& o : steps[n]) {
      if (remap[o.loc] < locations.size()) out.steps[n].push_back({remap[o.loc], o.value});
    }
  }
  return out;
}

FilterError::FilterError(long step, const std::string& what)
    : std::runtime_error("filter step " + std::to_string(step) + ": " + what), step_(step) {}

UpdateResult sequential_update(Eigen::VectorXd& m, Eigen::MatrixXd& S,
                               std::span<const SparseRow> rows, std::span<const double> y,
                               std::span<const double> offsets, double sigma_obs2, long step) {
  if (rows.size() != y.size() || (!offsets.empty() && offsets.size() != y.size())) {
    throw std::invalid_argument("sequential_update: size mismatch");
  }
  UpdateResult res;
  res.yhat.resize(y.size());
  res.a.resize(y.size());
  std::vector<Eigen::Index> cols;
  for (const auto& r : rows) {
    if (r.idx.size() != r.val.size()) throw std::invalid_argument("sequential_update: ragged sparse row");
    for (Eigen::Index c : r.idx) {
      if (c < 0 || c >= S.rows()) throw std::out_of_range("sequential_update: state index out of range");
    }
    cols.insert(cols.end(), r.idx.begin(), r.idx.end());
  }
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());

  StepUpdater up(m, S, cols, step);
  Eigen::VectorXd h(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < y.size(); ++j) {
    h.setZero();
    for (std::size_t t = 0; t < rows[j].idx.size(); ++t) {
      const auto pos = std::lower_bound(cols.begin(), cols.end(), rows[j].idx[t]) - cols.begin();
      h[pos] += rows[j].val[t];
    }
    const double off = offsets.empty() ? 0.0 : offsets[j];
    up.update(h, y[j], off, sigma_obs2, res.yhat[j], res.a[j]);
    const double r = y[j] - res.yhat[j];
    res.loglik += -0.5 * (kLog2Pi + std::log(res.a[j]) + r * r / res.a[j]);
  }
  up.finish();
  if (!y.empty()) check_diagonal(S, step);
  return res;
}

UpdateResult sequential_update(Eigen::VectorXd& m, Eigen::MatrixXd& S, const Eigen::MatrixXd& H,
                               const Eigen::VectorXd& y, double sigma_obs2, long step) {
  std::vector<SparseRow> rows(static_cast<std::size_t>(H.rows()));
  for (Eigen::Index i = 0; i < H.rows(); ++i) {
    for (Eigen::Index c = 0; c < H.cols(); ++c) {
      if (H(i, c) != 0.0) {
        rows[static_cast<std::size_t>(i)].idx.push_back(c);
        rows[static_cast<std::size_t>(i)].val.push_back(H(i, c));
      }
    }
  }
  return sequential_update(m, S, rows, std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
                           {}, sigma_obs2, step);
}

void predict_step(const BlockStateSpace& ss, Eigen::VectorXd& m, Eigen::MatrixXd& S) {
  Eigen::MatrixXd T;
  predict_blocks(ss, m, S, T);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> predict_step(const BlockStateSpace& ss,
                                                         const Eigen::VectorXd& m,
                                                         const Eigen::MatrixXd& S) {
  Eigen::VectorXd mp = m;
  Eigen::MatrixXd Sp = S;
  predict_step(ss, mp, Sp);
  return {std::move(mp), std::move(Sp)};
}

std::vector<double> fixed_effect_offsets(const ObservationSet& obs, std::span<const double> beta) {
  std::vector<double> off(obs.locations.size(), 0.0);
  if (beta.empty()) return off;
  if (beta.size() != obs.n_covariates() + 1) {
    throw std::invalid_argument("fixed_effect_offsets: beta must hold intercept plus one entry per covariate");
  }
  for (std::size_t i = 0; i < off.size(); ++i) {
    double v = beta[0];
    for (std::size_t c = 0; c < obs.n_covariates(); ++c) {
      v += beta[c + 1] * obs.covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    }
    off[i] = v;
  }
  return off;
}

FilterOutput run_filter(const BlockStateSpace& ss, const ObservationSet& obs,
                        std::span<const double> beta, double sigma_obs, const FilterOptions& opts) {
  if (!(sigma_obs > 0.0)) throw std::invalid_argument("run_filter: sigma_obs must be positive");
  obs.validate(ss.basis.domain());
  const Eigen::Index n = ss.b_total();
  const std::size_t M = ss.M();
  const double s2 = sigma_obs * sigma_obs;
  const Eigen::MatrixXd H = design_matrix(ss.basis, obs.locations);
  const std::vector<double> offsets = fixed_effect_offsets(obs, beta);

  std::vector<Eigen::Index> idx(M);
  for (std::size_t k = 0; k < M; ++k) idx[k] = ss.offset(k);
  Eigen::MatrixXd Hrow_major = H.transpose();  // column i holds the basis values of station i

  FilterOutput out;
  const long N = obs.N();
  if (opts.keep_means) {
    out.filtered_means.resize(n, N);
    out.forecast_means.resize(n, N);
  }
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd S = ss.dense_S_init();
  Eigen::MatrixXd T;
  Eigen::VectorXd m_pred;
  Eigen::MatrixXd S_pred;
  const bool need_pred_copy = static_cast<bool>(opts.on_step) || opts.cov_stride > 0;

  for (long step = 1; step <= N; ++step) {
    predict_blocks(ss, m, S, T);
    if (opts.keep_means) out.forecast_means.col(step - 1) = m;
    const bool store_cov = opts.cov_stride > 0 && (step % opts.cov_stride == 0 || step == N);
    if (store_cov) out.forecast_covs.emplace_back(step, S);
    if (need_pred_copy) {
      m_pred = m;
      S_pred = S;
    }
    const auto& rows = obs.steps[static_cast<std::size_t>(step - 1)];
    StepUpdater up(m, S, idx, step);
    for (const auto& o : rows) {
      double yhat = 0.0;
      double a = 0.0;
      up.update(Hrow_major.col(static_cast<Eigen::Index>(o.loc)), o.value, offsets[o.loc], s2, yhat, a);
      const double r = o.value - yhat;
      out.loglik += -0.5 * (kLog2Pi + std::log(a) + r * r / a);
      if (opts.keep_predictions) out.predictions.push_back({step, o.loc, o.value, yhat, a});
    }
    out.n_obs += rows.size();
    up.finish();
    if (!rows.empty()) check_diagonal(S, step);
    if (opts.keep_means) out.filtered_means.col(step - 1) = m;
    if (store_cov) out.filtered_covs.emplace_back(step, S);
    if (opts.on_step) opts.on_step(FilterStep{step, m_pred, S_pred, m, S});
  }
  out.final_mean = std::move(m);
  out.final_cov = std::move(S);
  return out;
}

double filter_loglik(const BlockStateSpace& ss, const ObservationSet& obs,
                     std::span<const double> beta, double sigma_obs) {
  FilterOptions opts;
  opts.keep_means = false;
  opts.keep_predictions = false;
  return run_filter(ss, obs, beta, sigma_obs, opts).loglik;
}

Eigen::VectorXd coefficient_mean(const BlockStateSpace& ss, const Eigen::VectorXd& m) {
  Eigen::VectorXd c(static_cast<Eigen::Index>(ss.M()));
  for (std::size_t k = 0; k < ss.M(); ++k) c[static_cast<Eigen::Index>(k)] = m[ss.offset(k)];
  return c;
}

Eigen::MatrixXd coefficient_cov(const BlockStateSpace& ss, const Eigen::MatrixXd& S) {
  const auto M = static_cast<Eigen::Index>(ss.M());
  Eigen::MatrixXd C(M, M);
  for (Eigen::Index i = 0; i < M; ++i) {
    for (Eigen::Index j = 0; j < M; ++j) C(i, j) = S(ss.offset(static_cast<std::size_t>(i)), ss.offset(static_cast<std::size_t>(j)));
  }
  return C;
}

FieldPrediction predict_field(const BlockStateSpace& ss, const Eigen::VectorXd& m,
                              const Eigen::MatrixXd& S, const Eigen::MatrixXd& H,
                              std::span<const double> offsets, double noise_var) {
  if (H.cols() != static_cast<Eigen::Index>(ss.M())) throw std::invalid_argument("predict_field: H has wrong width");
  if (!offsets.empty() && offsets.size() != static_cast<std::size_t>(H.rows())) {
    throw std::invalid_argument("predict_field: offsets size mismatch");
  }
  FieldPrediction p;
  p.mean = H * coefficient_mean(ss, m);
  const Eigen::MatrixXd C = coefficient_cov(ss, S);
  p.var = ((H * C).cwiseProduct(H)).rowwise().sum().array() + noise_var;
  for (Eigen::Index i = 0; i < p.var.size(); ++i) p.var[i] = std::max(p.var[i], noise_var);
  if (!offsets.empty()) {
    for (Eigen::Index i = 0; i < p.mean.size(); ++i) p.mean[i] += offsets[static_cast<std::size_t>(i)];
  }
  return p;
}

FieldPrediction forecast(const BlockStateSpace& ss, const Eigen::VectorXd& m_filt,
                         const Eigen::MatrixXd& S_filt, std::span<const Location> locs,
                         std::span<const double> offsets, double sigma_obs, bool include_noise) {
  auto [mp, Sp] = predict_step(ss, m_filt, S_filt);
  const Eigen::MatrixXd H = design_matrix(ss.basis, locs);
  return predict_field(ss, mp, Sp, H, offsets, include_noise ? sigma_obs * sigma_obs : 0.0);
}

void write_prediction_csv(std::ostream& os, long step, std::span<const Location> locs,
                          const FieldPrediction& pred, const std::string& kind, bool header) {
  if (header) os << "step,x,y,mean,sd,kind\n";
  os.precision(17);
  for (std::size_t i = 0; i < locs.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    os << step << ',' << locs[i][0] << ',' << locs[i][1] << ',' << pred.mean[r] << ','
       << std::sqrt(pred.var[r]) << ',' << kind << '\n';
  }
}

}  // namespace stmatern
