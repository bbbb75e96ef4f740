#include "namer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "namer/error.hpp"

namespace namer {

int token_edit_distance(const std::vector<ClassId>& pred, const std::vector<ClassId>& ref) {
  const std::vector<ClassId>& a = pred.size() < ref.size() ? pred : ref;
  const std::vector<ClassId>& b = pred.size() < ref.size() ? ref : pred;
  std::vector<int> row(a.size() + 1);
  std::iota(row.begin(), row.end(), 0);
  for (std::size_t j = 1; j <= b.size(); ++j) {
    int diag = row[0];
    row[0] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
      int up = row[i];
      int sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[i] = std::min({row[i - 1] + 1, up + 1, sub});
      diag = up;
    }
  }
  return row[a.size()];
}

EvalReport evaluate(const std::vector<std::string>& preds, const std::vector<std::string>& refs,
                    const TokenVocab& vocab) {
  if (preds.size() != refs.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(preds.size()) + " predictions for " +
                                          std::to_string(refs.size()) + " references");
  }
  const auto n = static_cast<std::ptrdiff_t>(refs.size());
  EvalReport report;
  report.n = refs.size();
  report.per_sample.resize(refs.size());

  // References must parse; collect them serially so errors surface in order.
  std::vector<std::vector<ClassId>> ref_tokens(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) ref_tokens[i] = parse_latex(refs[i], vocab).tokens;

#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto iu = static_cast<std::size_t>(i);
    try {
      auto pred = parse_latex(preds[iu], vocab);
      report.per_sample[iu] = token_edit_distance(pred.tokens, ref_tokens[iu]);
    } catch (const Error&) {
      report.per_sample[iu] = std::nullopt;
    }
  }

  std::size_t exact = 0, within1 = 0, within2 = 0;
  for (const auto& d : report.per_sample) {
    if (!d) continue;
    exact += *d == 0 ? 1 : 0;
    within1 += *d <= 1 ? 1 : 0;
    within2 += *d <= 2 ? 1 : 0;
  }
  if (report.n > 0) {
    const auto total = static_cast<double>(report.n);
    report.exprate = static_cast<double>(exact) / total;
    report.leq1 = static_cast<double>(within1) / total;
    report.leq2 = static_cast<double>(within2) / total;
  }
  return report;
}

std::string to_json(const EvalReport& report) {
  nlohmann::json j;
  j["exprate"] = report.exprate;
  j["leq1"] = report.leq1;
  j["leq2"] = report.leq2;
  j["n"] = report.n;
  j["per_sample"] = nlohmann::json::array();
  for (const auto& d : report.per_sample) {
    if (d) {
      j["per_sample"].push_back(*d);
    } else {
      j["per_sample"].push_back(nullptr);
    }
  }
  return j.dump(2);
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

TimingSummary time_stats(const TimingTable& table) {
  if (table.samples_ms.empty()) throw Error(Errc::EmptyInput, "no timing samples");
  const std::size_t stages = table.stages.size();
  TimingSummary summary;
  summary.n = table.samples_ms.size();
  std::vector<std::vector<double>> columns(stages);
  std::vector<double> totals;
  totals.reserve(summary.n);
  for (const auto& sample : table.samples_ms) {
    if (sample.size() != stages) throw Error(Errc::ShapeMismatch, "sample stage count differs from header");
    for (std::size_t s = 0; s < stages; ++s) columns[s].push_back(sample[s]);
    totals.push_back(std::accumulate(sample.begin(), sample.end(), 0.0));
  }
  for (std::size_t s = 0; s < stages; ++s) {
    summary.stages.push_back({table.stages[s], mean(columns[s]), median(columns[s])});
  }
  summary.total_mean_ms = mean(totals);
  summary.total_median_ms = median(totals);
  summary.fps = summary.total_mean_ms > 0.0 ? 1000.0 / summary.total_mean_ms : 0.0;
  return summary;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(Errc::ShapeMismatch, "need at least two (x, y) pairs");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace namer
