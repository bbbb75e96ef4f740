#pragma once

#include <optional>
#include <string>
#include <vector>

#include "namer/latex.hpp"
#include "namer/vocab.hpp"

namespace namer {

/// Levenshtein distance over class-id sequences, unit costs.
int token_edit_distance(const std::vector<ClassId>& pred, const std::vector<ClassId>& ref);

struct EvalReport {
  double exprate = 0.0;
  double leq1 = 0.0;
  double leq2 = 0.0;
  std::size_t n = 0;
  std::vector<std::optional<int>> per_sample;  // nullopt: prediction did not parse
};

/// Expression-level rates on canonical token sequences. An unparseable
/// prediction counts as wrong at every tolerance. Throws LengthMismatch.
EvalReport evaluate(const std::vector<std::string>& preds, const std::vector<std::string>& refs,
                    const TokenVocab& vocab);

std::string to_json(const EvalReport& report);

/// Per-sample stage durations in milliseconds; every sample lists the same
/// stages in the same order.
struct TimingTable {
  std::vector<std::string> stages;
  std::vector<std::vector<double>> samples_ms;
};

struct StageSummary {
  std::string stage;
  double mean_ms = 0.0;
  double median_ms = 0.0;
};

struct TimingSummary {
  std::vector<StageSummary> stages;
  double total_mean_ms = 0.0;
  double total_median_ms = 0.0;
  double fps = 0.0;  // 1000 / total_mean_ms
  std::size_t n = 0;
};

TimingSummary time_stats(const TimingTable& table);

/// Least-squares slope of log(y) against log(x); used for scaling checks.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace namer
