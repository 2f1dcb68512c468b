#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "influence/scenarios.hpp"

namespace influence {

enum class AnovaResponse { log_total_time, log_reach };
std::string to_string(AnovaResponse r);

struct AnovaFactor {
  std::string name;
  // coefficient per non-reference level, tagged with the scenario coding
  std::vector<std::pair<std::string, double>> coefficients;
  double f_stat = 0.0;
  double p_value = 1.0;
  int df = 0;
};

// Linear model with main effects for the capacity, susceptibility, and
// modularity factors plus initiator sampling nested within modularity.
// Reference levels: constant capacity, constant susceptibility, low
// modularity, random sampling. F tests are sequential in the order listed.
struct AnovaResult {
  std::vector<AnovaFactor> factors;
  double intercept = 0.0;
  double model_ss = 0.0;
  double residual_ss = 0.0;
  double total_ss = 0.0;
  int residual_df = 0;
  int excluded = 0;  // records dropped because the response was not positive
  std::string response;
  Eigen::VectorXd residuals;
  std::vector<int> cell_index;  // scenario cell per retained record
};

AnovaResult nested_anova(std::span<const ExperimentRecord> records,
                         AnovaResponse response);

struct TestStatistic {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Jarque-Bera normality test: (m/6)(S^2 + K^2/4) against chi-square(2).
// nullopt for constant residuals.
std::optional<TestStatistic> jarque_bera(std::span<const double> residuals);

// Brown-Forsythe variant of Levene's test: one-way F on absolute deviations
// from group medians. Requires >= 2 groups with >= 2 members each.
TestStatistic levene(std::span<const double> values, std::span<const int> groups);

// Eigenvalue shares of the row covariance, descending; sums to 1.
Eigen::VectorXd pca_variance_share(const Eigen::MatrixXd& points);

}  // namespace influence
