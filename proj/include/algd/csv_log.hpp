#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace algd {

/// One training-epoch record; columns are fixed in this order. Unobserved
/// values (e.g. eval columns on non-eval epochs) are NaN.
struct EpochLogRow {
  std::int64_t epoch = 0;
  std::uint64_t env_steps = 0;
  double train_return = 0.0;
  double train_episode_cost = 0.0;
  double eval_return = 0.0;
  double eval_episode_cost = 0.0;
  double lambda = 0.0;
  double score_loss = 0.0;
  double q_loss = 0.0;
  double qc_loss = 0.0;
  double mean_ess = 0.0;
};

/// Appending CSV writer: header at creation, reals at 9 significant digits,
/// flushed per row. I/O failures throw.
class EpochLogger {
 public:
  explicit EpochLogger(const std::string& path);
  void write(const EpochLogRow& row);

  static const char* header();
  /// Parses a file written by this logger; NaN cells round-trip.
  static std::vector<EpochLogRow> read(const std::string& path);

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace algd
