#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coliee/corpus.hpp"
#include "coliee/eval.hpp"
#include "coliee/ranking.hpp"
#include "json.hpp"

namespace coliee {

enum class RuleKind { topk_margin, threshold };

RuleKind parse_rule_kind(std::string_view s);
std::string_view to_string(RuleKind kind) noexcept;

struct SelectionRule {
    RuleKind kind = RuleKind::topk_margin;
    std::size_t k = 1;
    double m = 0.0;
    double t = 0.0;

    static SelectionRule topk_margin(std::size_t k, double m);
    static SelectionRule threshold(double t);

    void validate() const;

    nlohmann::json to_json() const;
    static SelectionRule from_json(const nlohmann::json& j);
};

/// Keeps the top candidate plus every candidate ranked within the first k
/// whose gap to the top score is strictly below m. `ranked` must be non-empty
/// and sorted by score descending.
std::vector<std::string> select_topk_margin(std::span<const ScoredDoc> ranked, std::size_t k, double m);

/// Every candidate scoring at least t; may be empty.
std::vector<std::string> select_threshold(std::span<const ScoredDoc> ranked, double t);

std::vector<std::string> apply_rule(std::span<const ScoredDoc> ranked, const SelectionRule& rule);

/// Applies the rule to each query. Queries with an empty candidate list get
/// an empty prediction.
PredictionSet predict(const RankedLists& ranked, const SelectionRule& rule);

struct KmSearchResult {
    std::size_t k = 1;
    double m = 0.0;
    double value = 0.0;
};

/// Exhaustive search over k_range x m_grid on the gold queries; ties go to
/// the smallest k, then the smallest m.
KmSearchResult search_k_m(const RankedLists& ranked,
                          const GoldLabels& gold,
                          std::span<const std::size_t> k_range,
                          std::span<const double> m_grid,
                          Metric metric);

struct ThresholdSearchResult {
    double t = 0.0;
    double value = 0.0;
};

/// Same for the threshold rule; ties go to the smallest t.
ThresholdSearchResult search_threshold(const RankedLists& ranked,
                                       const GoldLabels& gold,
                                       std::span<const double> t_grid,
                                       Metric metric);

/// k in {1..5}
std::vector<std::size_t> default_k_range();
/// m in {0, 0.01, ..., 0.2}
std::vector<double> default_m_grid();
/// t in {0, 0.05, ..., 1}
std::vector<double> default_t_grid();

/// Restricts ranked lists to the queries present in `gold`.
RankedLists restrict_to(const RankedLists& ranked, const GoldLabels& gold);

/// predictions.jsonl: {"query_id","docs":[ids]} per line, ascending query id.
std::string serialize_predictions(const PredictionSet& predictions);
PredictionSet load_predictions(const std::filesystem::path& path);

}  // namespace coliee
