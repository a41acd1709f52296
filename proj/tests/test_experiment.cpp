#include "doctest.h"
#include "kernelflow/errors.hpp"
#include "kernelflow/experiment.hpp"

using namespace kernelflow;

TEST_CASE("quantile interpolation") {
  CHECK(quantile({3.0}, 0.25) == 3.0);
  CHECK(quantile({3.0}, 0.75) == 3.0);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.0) == 1.0);
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 1.0) == 4.0);
}

TEST_CASE("method names round-trip") {
  for (MethodKind m : {MethodKind::krr, MethodKind::kgf, MethodKind::kgd,
                       MethodKind::ksgd, MethodKind::kcd, MethodKind::kegd,
                       MethodKind::kl1r, MethodKind::klinfr}) {
    CHECK(method_from_string(method_name(m)) == m);
  }
  CHECK_THROWS_AS(method_from_string("svm"), input_error);
}

TEST_CASE("every method kind runs through the experiment loop") {
  ExperimentConfig config;
  config.source = ExperimentConfig::Source::sin;
  config.methods = {MethodKind::kgf, MethodKind::kegd, MethodKind::klinfr};
  config.splits = 2;
  config.n = 50;
  config.test_n = 60;
  config.bandwidth_count = 4;
  config.reg_count = 4;
  config.folds = 5;
  config.es_folds = 3;
  config.sign_max_steps = 6000;
  config.seed = 17;

  const ExperimentReport report = run_experiment(config);
  REQUIRE(report.rows.size() == 3);
  for (const MethodSummary& row : report.rows) {
    CHECK(std::isfinite(row.r2_median));
    CHECK(row.sparsity_median >= 0.0);
    CHECK(row.sparsity_median <= 1.0);
  }
}

TEST_CASE("small experiment run produces sane summaries") {
  ExperimentConfig config;
  config.source = ExperimentConfig::Source::peak;
  config.methods = {MethodKind::krr, MethodKind::kcd};
  config.splits = 2;
  config.n = 60;
  config.test_n = 80;
  config.bandwidth_count = 4;
  config.reg_count = 4;
  config.folds = 5;
  config.sign_max_steps = 8000;
  config.seed = 3;

  const ExperimentReport report = run_experiment(config);
  REQUIRE(report.rows.size() == 2);
  REQUIRE(report.per_split.size() == 2);
  for (const MethodSummary& row : report.rows) {
    CHECK(row.r2_q1 <= row.r2_median);
    CHECK(row.r2_median <= row.r2_q3);
    CHECK(std::isfinite(row.r2_median));
  }
  CHECK(report.rows[0].sparsity_median == 1.0);  // ridge keeps every observation
  CHECK(report.rows[1].sparsity_median < 1.0);   // coordinate descent does not

  // Deterministic given the config.
  const ExperimentReport again = run_experiment(config);
  for (std::size_t m = 0; m < report.rows.size(); ++m) {
    CHECK(report.rows[m].r2_median == again.rows[m].r2_median);
    CHECK(report.rows[m].sparsity_median == again.rows[m].sparsity_median);
  }
}
