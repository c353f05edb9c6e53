#include "regimelab/surrogate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace relab {

PriorState PriorState::flat(int n, double tau2) {
  PriorState p;
  p.family = PriorFamily::flat;
  p.mean.assign(n, 0.0);
  p.variance.assign(n, tau2);
  return p;
}

PriorState PriorState::from_means(PriorFamily family,
                                  std::vector<double> means, double tau2,
                                  double alpha) {
  PriorState p;
  p.family = family;
  p.mean = std::move(means);
  p.variance.assign(p.mean.size(), tau2);
  p.alpha = alpha;
  return p;
}

PriorState PriorState::oracle(const OracleTable& table, double tau2) {
  std::vector<double> m(table.n_actions);
  for (int a = 0; a < table.n_actions; ++a) m[a] = table.cross_context_mean(a);
  return from_means(PriorFamily::oracle, std::move(m), tau2);
}

PriorState ema_transfer(
    const PriorState& prior,
    const std::vector<std::optional<double>>& context_means) {
  if (prior.family != PriorFamily::ema)
    throw std::invalid_argument("ema_transfer requires an ema-family prior");
  if (static_cast<int>(context_means.size()) != prior.n_actions())
    throw std::invalid_argument("context means size mismatch");
  PriorState next = prior;
  for (int a = 0; a < prior.n_actions(); ++a) {
    if (!context_means[a].has_value()) continue;
    next.mean[a] =
        prior.alpha * prior.mean[a] + (1.0 - prior.alpha) * *context_means[a];
  }
  return next;
}

PosteriorState PosteriorState::from_prior(const PriorState& prior) {
  PosteriorState s;
  s.prior_mean = prior.mean;
  s.prior_var = prior.variance;
  s.obs_count.assign(prior.mean.size(), 0);
  s.obs_sum.assign(prior.mean.size(), 0.0);
  return s;
}

double PosteriorState::mean(int action, double sigma2) const {
  const int n = obs_count[action];
  if (n == 0) return prior_mean[action];
  const double v = prior_var[action];
  const double precision = 1.0 / v + n / sigma2;
  return (prior_mean[action] / v + obs_sum[action] / sigma2) / precision;
}

double PosteriorState::variance(int action, double sigma2) const {
  const int n = obs_count[action];
  if (n == 0) return prior_var[action];
  return 1.0 / (1.0 / prior_var[action] + n / sigma2);
}

void PosteriorState::observe(int action, double y, double sigma2) {
  if (!std::isfinite(y)) throw BadValue("non-finite observation");
  if (sigma2 <= 0.0) throw BadValue("observation variance must be > 0");
  if (action < 0 || action >= n_actions())
    throw IndexError("posterior action out of range");
  obs_count[action] += 1;
  obs_sum[action] += y;
}

PosteriorState posterior_update(PosteriorState state, int action, double y,
                                double sigma2) {
  state.observe(action, y, sigma2);
  return state;
}

Kernel kernel_from_string(const std::string& s) {
  if (s == "tanimoto-binary" || s == "tanimoto") return Kernel::tanimoto_binary;
  if (s == "cosine") return Kernel::cosine;
  if (s == "rbf") return Kernel::rbf;
  throw BadValue("unknown kernel: " + s);
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double similarity(const std::vector<double>& x, const std::vector<double>& y,
                  Kernel kernel, double rbf_length) {
  switch (kernel) {
    case Kernel::tanimoto_binary: {
      const double xy = dot(x, y);
      const double denom = dot(x, x) + dot(y, y) - xy;
      return denom > 0.0 ? xy / denom : 0.0;
    }
    case Kernel::cosine: {
      const double nx = std::sqrt(dot(x, x));
      const double ny = std::sqrt(dot(y, y));
      if (nx == 0.0 || ny == 0.0)
        throw DegenerateFeature("zero-norm feature with cosine kernel");
      return dot(x, y) / (nx * ny);
    }
    case Kernel::rbf: {
      double d2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        d2 += d * d;
      }
      return std::exp(-d2 / (2.0 * rbf_length * rbf_length));
    }
  }
  return 0.0;
}

}  // namespace

PriorState make_structured_prior(
    const std::vector<std::vector<double>>& features, Kernel kernel,
    const std::vector<Anchor>& anchors, double tau2, double tau2_min,
    double rbf_length) {
  if (anchors.empty()) throw NoAnchors("structured prior needs at least one anchor");
  const int n = static_cast<int>(features.size());
  if (n < 1) throw BadValue("structured prior needs features");
  const std::size_t dim = features[0].size();
  for (const auto& f : features)
    if (f.size() != dim) throw BadValue("feature dimension not uniform");
  for (const auto& a : anchors)
    if (a.action < 0 || a.action >= n)
      throw IndexError("anchor action out of range");

  double anchor_mean = 0.0;
  for (const auto& a : anchors) anchor_mean += a.value;
  anchor_mean /= anchors.size();

  PriorState p;
  p.family = PriorFamily::structured;
  p.mean.resize(n);
  p.variance.resize(n);
  constexpr double kExactMatch = 1.0 - 1e-12;

  for (int a = 0; a < n; ++a) {
    double wsum = 0.0, vsum = 0.0, max_sim = 0.0;
    double exact_sum = 0.0;
    int exact_count = 0;
    for (const auto& anc : anchors) {
      const double s =
          similarity(features[a], features[anc.action], kernel, rbf_length);
      if (s >= kExactMatch) {
        exact_sum += anc.value;
        ++exact_count;
      }
      wsum += s;
      vsum += s * anc.value;
      max_sim = std::max(max_sim, s);
    }
    if (exact_count > 0) {
      // Interpolate anchors exactly at similarity 1.
      p.mean[a] = exact_sum / exact_count;
    } else if (wsum > 0.0) {
      p.mean[a] = vsum / wsum;
    } else {
      p.mean[a] = anchor_mean;  // no signal: global anchor mean
    }
    p.variance[a] = std::clamp(tau2 * (1.0 - max_sim), tau2_min, tau2);
  }
  return p;
}

std::vector<double> kernel_matrix(
    const std::vector<std::vector<double>>& features, Kernel kernel,
    double rbf_length) {
  const int n = static_cast<int>(features.size());
  std::vector<double> k(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double s = similarity(features[i], features[j], kernel, rbf_length);
      k[static_cast<std::size_t>(i) * n + j] = s;
      k[static_cast<std::size_t>(j) * n + i] = s;
    }
  return k;
}

double spectral_concentration(const std::vector<double>& kernel, int n) {
  if (n < 2) throw BadKernel("spectral concentration needs n >= 2");
  if (static_cast<int>(kernel.size()) != n * n)
    throw BadKernel("kernel matrix size mismatch");
  double scale = 0.0;
  for (double v : kernel) scale = std::max(scale, std::abs(v));
  const double tol = 1e-9 * std::max(scale, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(kernel[static_cast<std::size_t>(i) * n + j] -
                   kernel[static_cast<std::size_t>(j) * n + i]) > tol)
        throw BadKernel("kernel matrix is not symmetric");

  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m(i, j) = kernel[static_cast<std::size_t>(i) * n + j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m,
                                                        Eigen::EigenvaluesOnly);
  const double lambda_max = solver.eigenvalues().maxCoeff();
  const double trace = m.trace();
  if (trace <= 0.0) throw BadKernel("kernel trace must be positive");
  return lambda_max / trace;
}

double effective_rho(double rho0, double kappa, double eta2,
                     double sigma2_obs) {
  if (kappa <= 0.0 || eta2 <= 0.0)
    throw BadValue("kappa and eta2 must be > 0");
  if (sigma2_obs < 0.0) throw BadValue("sigma2_obs must be >= 0");
  return rho0 / (1.0 + sigma2_obs / (kappa * eta2));
}

}  // namespace relab
