#pragma once

#include <map>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "gseo/judge.hpp"

namespace gseo::metrics {

inline constexpr double kDefaultTau = 7.0;

/// Ratings per dimension, per article, in query order.
using ArticleScores = std::map<std::string, std::vector<double>>;
using ScoreTable = std::map<Dimension, ArticleScores>;

/// Throws ValidationError for a rating outside [0, 10] or an article with no ratings.
void validate_table(const ScoreTable& table);

/// Pooled mean over every rating of the dimension.
double mean_influence_score(const ScoreTable& table, Dimension dim);

struct SuccessRate {
  std::map<std::string, double> per_article;
  double overall = 0.0;  // unweighted mean of per_article
};

/// Fraction of ratings >= tau per article, then averaged over articles.
SuccessRate influence_success_rate(const ScoreTable& table, Dimension dim, double tau);

/// Population variance per article, averaged over articles.
double mean_intra_article_variance(const ScoreTable& table, Dimension dim);

struct DimensionReport {
  double mis = 0.0;
  double isr_overall = 0.0;
  std::map<std::string, double> per_article_isr;
  double miv = 0.0;
  std::map<std::string, double> per_article_mean;
  std::map<std::string, double> per_article_variance;
};

struct AggregateReport {
  double tau = kDefaultTau;
  std::map<Dimension, DimensionReport> dims;
};

AggregateReport aggregate(const ScoreTable& table, double tau);

/// Adds an evaluation's ratings under `article_id`, one entry per record, in
/// record order.
void add_evaluation(ScoreTable& table, const std::string& article_id, const Evaluation& evaluation);

nlohmann::json report_to_json(const AggregateReport& report);

struct ReportRow {
  std::string label;
  AggregateReport report;
};

/// Aligned text table: one row per label, MIS/ISR/MIV under each of the six
/// dimensions.
std::string format_table(std::span<const ReportRow> rows);

}  // namespace gseo::metrics
