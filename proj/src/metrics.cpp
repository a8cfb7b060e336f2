#include "gseo/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "gseo/errors.hpp"

namespace gseo::metrics {
namespace {

const ArticleScores& scores_for(const ScoreTable& table, Dimension dim) {
  auto it = table.find(dim);
  if (it == table.end() || it->second.empty()) {
    throw ValidationError("score table has no ratings for " + std::string(dimension_key(dim)));
  }
  for (const auto& [article, ratings] : it->second) {
    if (ratings.empty()) throw ValidationError("article '" + article + "' has no ratings");
  }
  return it->second;
}

double article_mean(const std::vector<double>& ratings) {
  double sum = 0.0;
  for (double r : ratings) sum += r;
  return sum / static_cast<double>(ratings.size());
}

double article_variance(const std::vector<double>& ratings) {
  const double mu = article_mean(ratings);
  double ss = 0.0;
  for (double r : ratings) ss += (r - mu) * (r - mu);
  return ss / static_cast<double>(ratings.size());
}

double article_isr(const std::vector<double>& ratings, double tau) {
  const auto hits = std::count_if(ratings.begin(), ratings.end(), [tau](double r) { return r >= tau; });
  return static_cast<double>(hits) / static_cast<double>(ratings.size());
}

}  // namespace

void validate_table(const ScoreTable& table) {
  for (const auto& [dim, articles] : table) {
    for (const auto& [article, ratings] : articles) {
      if (ratings.empty()) throw ValidationError("article '" + article + "' has no ratings");
      for (double r : ratings) {
        if (!(r >= 0.0 && r <= 10.0)) {
          throw ValidationError(fmt::format("rating {} for article '{}' outside [0, 10]", r, article));
        }
      }
    }
  }
}

double mean_influence_score(const ScoreTable& table, Dimension dim) {
  const auto& articles = scores_for(table, dim);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [_, ratings] : articles) {
    for (double r : ratings) sum += r;
    n += ratings.size();
  }
  return sum / static_cast<double>(n);
}

SuccessRate influence_success_rate(const ScoreTable& table, Dimension dim, double tau) {
  if (!(tau >= 0.0 && tau <= 10.0)) throw ValidationError(fmt::format("tau {} outside [0, 10]", tau));
  const auto& articles = scores_for(table, dim);
  SuccessRate out;
  double sum = 0.0;
  for (const auto& [article, ratings] : articles) {
    const double isr = article_isr(ratings, tau);
    out.per_article[article] = isr;
    sum += isr;
  }
  out.overall = sum / static_cast<double>(articles.size());
  return out;
}

double mean_intra_article_variance(const ScoreTable& table, Dimension dim) {
  const auto& articles = scores_for(table, dim);
  double sum = 0.0;
  for (const auto& [_, ratings] : articles) sum += article_variance(ratings);
  return sum / static_cast<double>(articles.size());
}

AggregateReport aggregate(const ScoreTable& table, double tau) {
  validate_table(table);
  AggregateReport report;
  report.tau = tau;
  for (const auto& [dim, articles] : table) {
    DimensionReport d;
    d.mis = mean_influence_score(table, dim);
    auto isr = influence_success_rate(table, dim, tau);
    d.isr_overall = isr.overall;
    d.per_article_isr = std::move(isr.per_article);
    d.miv = mean_intra_article_variance(table, dim);
    for (const auto& [article, ratings] : articles) {
      d.per_article_mean[article] = article_mean(ratings);
      d.per_article_variance[article] = article_variance(ratings);
    }
    report.dims.emplace(dim, std::move(d));
  }
  return report;
}

void add_evaluation(ScoreTable& table, const std::string& article_id, const Evaluation& evaluation) {
  for (const auto& record : evaluation.records) {
    if (record.rating) table[record.dim][article_id].push_back(*record.rating);
  }
}

nlohmann::json report_to_json(const AggregateReport& report) {
  nlohmann::json dims = nlohmann::json::object();
  for (const auto& [dim, d] : report.dims) {
    dims[std::string(dimension_key(dim))] = {{"mis", d.mis},
                                             {"isr", d.isr_overall},
                                             {"miv", d.miv},
                                             {"per_article_isr", d.per_article_isr},
                                             {"per_article_mean", d.per_article_mean},
                                             {"per_article_variance", d.per_article_variance}};
  }
  return {{"tau", report.tau}, {"dimensions", std::move(dims)}};
}

std::string format_table(std::span<const ReportRow> rows) {
  std::size_t label_width = 6;
  for (const auto& row : rows) label_width = std::max(label_width, row.label.size());

  constexpr int kCell = 6;
  constexpr int kGroup = 3 * kCell + 2;
  std::string out = fmt::format("{:<{}}", "", label_width);
  for (auto d : kAllDimensions) out += fmt::format(" | {:^{}}", dimension_key(d), kGroup);
  out += "\n" + fmt::format("{:<{}}", "Method", label_width);
  for (std::size_t i = 0; i < kAllDimensions.size(); ++i) {
    out += fmt::format(" | {:>{}} {:>{}} {:>{}}", "MIS", kCell, "ISR", kCell, "MIV", kCell);
  }
  out += "\n" + std::string(label_width, '-');
  for (std::size_t i = 0; i < kAllDimensions.size(); ++i) out += "-+-" + std::string(kGroup, '-');
  out += "\n";

  for (const auto& row : rows) {
    out += fmt::format("{:<{}}", row.label, label_width);
    for (auto d : kAllDimensions) {
      auto it = row.report.dims.find(d);
      if (it == row.report.dims.end()) {
        out += fmt::format(" | {:>{}} {:>{}} {:>{}}", "-", kCell, "-", kCell, "-", kCell);
      } else {
        out += fmt::format(" | {:>{}.2f} {:>{}.2f} {:>{}.2f}", it->second.mis, kCell, it->second.isr_overall, kCell,
                           it->second.miv, kCell);
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace gseo::metrics
