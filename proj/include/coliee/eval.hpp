#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coliee/corpus.hpp"
#include "coliee/ranking.hpp"
#include "json.hpp"

namespace coliee {

/// Queries are always those of the gold labels; a query absent from the
/// predictions counts as an empty prediction and predictions for queries
/// outside the gold labels are ignored.

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f = 0.0;
};

/// 5PR / (4P + R), 0 when the denominator vanishes.
double f2_score(double precision, double recall);

/// Pooled counts: P = sum TP / sum retrieved, R = sum TP / sum relevant.
Prf micro_prf(const PredictionSet& predictions, const GoldLabels& gold);

/// Per-query F2, precision and recall, averaged over queries.
Prf macro_f2(const PredictionSet& predictions, const GoldLabels& gold);

/// Per-query F1 averaged over queries; for analysis next to micro_prf.
Prf macro_f1(const PredictionSet& predictions, const GoldLabels& gold);

/// Precision at each relevant hit, summed and divided by |gold|.
double average_precision(const std::vector<std::string>& ranked, const std::set<std::string>& gold);

double map_score(const PredictionSet& ranked, const GoldLabels& gold);

/// Mean over queries of |gold ∩ top-k| / |gold|; k must be at least 1.
double recall_at_k(const PredictionSet& ranked, const GoldLabels& gold, std::size_t k);

struct AccuracyResult {
    double accuracy = 0.0;
    std::vector<std::string> warnings;
};

/// Fraction of gold queries answered correctly. Missing answers count as
/// wrong and produce a warning; an empty gold set is an error.
AccuracyResult accuracy(const AnswerLabels& answers, const AnswerLabels& gold);

enum class Metric { micro_f1, macro_f2 };

Metric parse_metric(std::string_view s);
std::string_view to_string(Metric m) noexcept;

double evaluate_metric(const PredictionSet& predictions, const GoldLabels& gold, Metric metric);

struct QueryBreakdown {
    std::size_t true_positives = 0;
    std::size_t retrieved = 0;
    std::size_t relevant = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f2 = 0.0;
    std::optional<double> average_precision;
};

struct MetricReport {
    double micro_precision = 0.0;
    double micro_recall = 0.0;
    double micro_f1 = 0.0;
    double macro_f2 = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    std::optional<double> map;
    std::map<std::size_t, double> recall_at;
    std::optional<double> accuracy;
    std::map<std::string, QueryBreakdown> per_query;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
    std::string to_table() const;
};

struct ReportInputs {
    const PredictionSet* predictions = nullptr;
    const GoldLabels* gold = nullptr;
    /// Full ranked lists for MAP and R@k.
    const PredictionSet* ranked = nullptr;
    std::vector<std::size_t> recall_ks{5, 10, 30};
    const AnswerLabels* answers = nullptr;
    const AnswerLabels* gold_answers = nullptr;
};

MetricReport build_report(const ReportInputs& inputs);

}  // namespace coliee
