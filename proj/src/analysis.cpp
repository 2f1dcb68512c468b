#include "influence/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "influence/special.hpp"

namespace influence {

std::string to_string(AnovaResponse r) {
  return r == AnovaResponse::log_total_time ? "log_total_time" : "log_reach";
}

namespace {

double residual_ss_of_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
  return (y - x * beta).squaredNorm();
}

}  // namespace

AnovaResult nested_anova(std::span<const ExperimentRecord> records,
                         AnovaResponse response) {
  std::vector<double> y_raw;
  std::vector<const ExperimentRecord*> kept;
  int excluded = 0;
  for (const auto& rec : records) {
    double value = response == AnovaResponse::log_total_time ? rec.total_time
                                                             : rec.reach;
    if (value > 0.0) {
      y_raw.push_back(std::log(value));
      kept.push_back(&rec);
    } else {
      ++excluded;
    }
  }
  const int m = static_cast<int>(y_raw.size());
  const int n_cols = 6;
  if (m <= n_cols)
    throw input_error("nested_anova: not enough usable records");

  // columns: intercept, capacity gamma, susceptibility gamma, modularity
  // high, max-capacity sampling within low, max-capacity sampling within high
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m, n_cols);
  Eigen::VectorXd y(m);
  for (int r = 0; r < m; ++r) {
    const auto& rec = *kept[r];
    bool high = rec.modularity_regime == ModularityRegime::high;
    bool max_rule = rec.initiator_rule == InitiatorRule::max_capacity;
    x(r, 0) = 1.0;
    x(r, 1) = rec.o_dist == CapacityDist::gamma_shifted ? 1.0 : 0.0;
    x(r, 2) = rec.i_dist == SusceptibilityDist::gamma ? 1.0 : 0.0;
    x(r, 3) = high ? 1.0 : 0.0;
    x(r, 4) = (!high && max_rule) ? 1.0 : 0.0;
    x(r, 5) = (high && max_rule) ? 1.0 : 0.0;
    y(r) = y_raw[r];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  const int residual_df = m - static_cast<int>(qr.rank());
  if (residual_df < 1) throw input_error("nested_anova: no residual degrees of freedom");

  Eigen::VectorXd beta = qr.solve(y);
  Eigen::VectorXd residuals = y - x * beta;
  double rss_full = residuals.squaredNorm();
  double sigma2 = rss_full / residual_df;

  // sequential (type I) sums of squares over the factor blocks
  struct Block {
    std::string name;
    std::vector<int> cols;
    std::vector<std::string> tags;
  };
  const std::vector<Block> blocks = {
      {"capacity", {1}, {"2"}},
      {"susceptibility", {2}, {"2"}},
      {"modularity", {3}, {"2"}},
      {"sampling_within_modularity", {4, 5}, {"1.b", "2.b"}},
  };

  AnovaResult out;
  out.response = to_string(response);
  out.excluded = excluded;
  out.intercept = beta(0);
  out.residual_df = residual_df;
  out.residual_ss = rss_full;
  out.residuals = residuals;

  double mean_y = y.mean();
  out.total_ss = (y.array() - mean_y).square().sum();

  int used = 1;
  double rss_prev = out.total_ss;  // intercept-only fit
  for (const auto& block : blocks) {
    used += static_cast<int>(block.cols.size());
    double rss_k = residual_ss_of_fit(x.leftCols(used), y);
    double dq = static_cast<double>(block.cols.size());
    double delta = std::max(0.0, rss_prev - rss_k);
    AnovaFactor f;
    f.name = block.name;
    f.df = static_cast<int>(dq);
    for (std::size_t c = 0; c < block.cols.size(); ++c)
      f.coefficients.emplace_back(block.tags[c], beta(block.cols[c]));
    if (sigma2 > 0.0) {
      f.f_stat = (delta / dq) / sigma2;
      f.p_value = f_sf(f.f_stat, dq, residual_df);
    } else {
      // perfect fit: any explained variation is infinitely significant
      f.f_stat = delta > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
      f.p_value = delta > 0.0 ? 0.0 : 1.0;
    }
    out.factors.push_back(std::move(f));
    rss_prev = rss_k;
  }
  out.model_ss = out.total_ss - rss_full;

  // scenario cell of each retained record, for grouping diagnostics
  std::map<std::tuple<int, int, int, int>, int> cell_ids;
  for (const auto* rec : kept) {
    auto key = std::make_tuple(static_cast<int>(rec->o_dist),
                               static_cast<int>(rec->i_dist),
                               static_cast<int>(rec->modularity_regime),
                               static_cast<int>(rec->initiator_rule));
    auto [it, inserted] =
        cell_ids.emplace(key, static_cast<int>(cell_ids.size()));
    out.cell_index.push_back(it->second);
  }
  return out;
}

std::optional<TestStatistic> jarque_bera(std::span<const double> residuals) {
  const std::size_t m = residuals.size();
  if (m < 8) throw input_error("jarque_bera: need at least 8 residuals");
  double mean = 0.0;
  for (double r : residuals) mean += r;
  mean /= static_cast<double>(m);
  double m2 = 0, m3 = 0, m4 = 0;
  for (double r : residuals) {
    double d = r - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= static_cast<double>(m);
  m3 /= static_cast<double>(m);
  m4 /= static_cast<double>(m);
  if (m2 <= 0.0) return std::nullopt;
  double skew = m3 / std::pow(m2, 1.5);
  double excess_kurt = m4 / (m2 * m2) - 3.0;
  TestStatistic t;
  t.statistic =
      static_cast<double>(m) / 6.0 *
      (skew * skew + excess_kurt * excess_kurt / 4.0);
  t.p_value = chi2_sf(t.statistic, 2.0);
  return t;
}

TestStatistic levene(std::span<const double> values, std::span<const int> groups) {
  if (values.size() != groups.size())
    throw input_error("levene: values and groups differ in length");
  std::map<int, std::vector<double>> by_group;
  for (std::size_t i = 0; i < values.size(); ++i)
    by_group[groups[i]].push_back(values[i]);
  const int k = static_cast<int>(by_group.size());
  if (k < 2) throw input_error("levene: need at least two groups");

  // absolute deviations from the group medians
  std::vector<std::vector<double>> z;
  std::size_t total = 0;
  for (auto& [label, xs] : by_group) {
    if (xs.size() < 2)
      throw input_error("levene: every group needs at least two members");
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    double median = sorted.size() % 2 == 1
                        ? sorted[sorted.size() / 2]
                        : 0.5 * (sorted[sorted.size() / 2 - 1] +
                                 sorted[sorted.size() / 2]);
    std::vector<double> dev(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
      dev[i] = std::fabs(xs[i] - median);
    total += xs.size();
    z.push_back(std::move(dev));
  }

  double grand = 0.0;
  for (const auto& g : z)
    for (double v : g) grand += v;
  grand /= static_cast<double>(total);

  double between = 0.0, within = 0.0;
  for (const auto& g : z) {
    double gm = 0.0;
    for (double v : g) gm += v;
    gm /= static_cast<double>(g.size());
    between += static_cast<double>(g.size()) * (gm - grand) * (gm - grand);
    for (double v : g) within += (v - gm) * (v - gm);
  }
  const double df1 = k - 1.0;
  const double df2 = static_cast<double>(total) - k;

  TestStatistic t;
  if (within <= 0.0) {
    t.statistic = between > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    t.p_value = between > 0.0 ? 0.0 : 1.0;
    return t;
  }
  t.statistic = (between / df1) / (within / df2);
  t.p_value = f_sf(t.statistic, df1, df2);
  return t;
}

Eigen::VectorXd pca_variance_share(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  const Eigen::Index p = points.cols();
  if (n <= p) throw input_error("pca_variance_share: need more rows than columns");
  Eigen::MatrixXd centered = points.rowwise() - points.colwise().mean();
  Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw numeric_error("pca_variance_share: eigendecomposition failed");
  Eigen::VectorXd eig = solver.eigenvalues().reverse();  // descending
  double total = eig.sum();
  if (total <= 0.0)
    throw numeric_error("pca_variance_share: zero total variance");
  return eig / total;
}

}  // namespace influence
