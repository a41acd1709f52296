#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kernelflow::cli {

struct FitOptions {
  std::string synth;  // "sin" or "peak"; empty when --data is used
  std::string data_path;
  std::string target_column;
  std::string kernel = "gaussian";
  std::string method = "krr";
  double bandwidth = 0.0;  // 0: not given
  bool use_cv = false;
  double reg = -1.0;  // < 0: not given; accepts plain numbers or name=value
  bool early_stop = false;
  std::uint64_t seed = 1;
  int n = 100;
  int subsample = 0;
  bool add_outliers = false;
  int grid = 20;
  bool paper_grid = false;
  double jitter = 1e-10;
  std::string out_dir = ".";
  std::string path_csv;  // optional solution-path export
  std::string cv_csv;    // optional CV table export
};

struct CompareOptions {
  std::string synth = "sin";
  std::string data_path;
  std::string target_column;
  std::vector<std::string> methods;
  std::string kernel = "gaussian";
  int splits = 20;
  int n = 100;
  std::uint64_t seed = 1;
  int grid = 20;
  bool paper_grid = false;
  bool add_outliers = false;
  int subsample = 0;
  std::string out_dir;
  std::string json_path;
};

struct VerifyOptions {
  std::vector<std::string> props = {"all"};
  int instances = 10;
  std::uint64_t seed = 1;
  std::string json_path;
};

int cmd_fit(const FitOptions& options);
int cmd_compare(const CompareOptions& options);
int cmd_verify(const VerifyOptions& options);

}  // namespace kernelflow::cli
