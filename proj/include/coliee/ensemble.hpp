#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "coliee/eval.hpp"
#include "coliee/predict.hpp"
#include "coliee/ranking.hpp"
#include "coliee/scores.hpp"
#include "json.hpp"

namespace coliee {

/// Raw weights in [0, 1] per checkpoint; the effective weights are raw / sum.
class WeightVector {
  public:
    WeightVector() = default;
    /// Validates range and that at least one raw weight is positive.
    explicit WeightVector(std::map<std::string, double> raw);

    static WeightVector one_hot(const std::vector<std::string>& checkpoints, const std::string& chosen);

    const std::map<std::string, double>& raw() const noexcept { return m_raw; }
    std::map<std::string, double> normalized() const;

  private:
    std::map<std::string, double> m_raw;
};

struct EnsembleConfig {
    double grid_step = 0.25;
    Metric metric = Metric::micro_f1;
    /// Upper bound on the number of checkpoints searched over.
    std::size_t h = 5;

    void validate() const;
};

/// combined(q, d) = sum_i w_i * score_i(q, d) with normalized weights, as
/// rank-ordered lists.
RankedLists weighted_scores(const ScoreMatrix& matrix, const WeightVector& weights);

/// {0, step, 2 step, ..., 1}; 1 is always included.
std::vector<double> grid_values(double step);

struct GridSearchResult {
    WeightVector weights;
    double value = 0.0;
    std::size_t points_evaluated = 0;
};

/// Exhaustive search over grid_values(step)^h minus the origin, scoring the
/// predictions of `rule` on the gold queries. Ties go to the lexicographically
/// smallest raw vector (checkpoints in ascending id order).
GridSearchResult grid_search_weights(const ScoreMatrix& matrix,
                                     const GoldLabels& validation_gold,
                                     const EnsembleConfig& cfg,
                                     const SelectionRule& rule);

/// ensemble.json: {"weights":{ckpt:raw}, "metric", "value", "grid_step"}.
nlohmann::json ensemble_to_json(const GridSearchResult& result, const EnsembleConfig& cfg);
WeightVector load_weights(const std::filesystem::path& path);

/// Queries outside `missed` keep the main prediction as is. A missed query
/// gets the main prediction followed by every auxiliary document not already
/// present, in auxiliary order.
PredictionSet main_auxiliary_merge(const PredictionSet& main,
                                   std::span<const PredictionSet> auxiliaries,
                                   const std::set<std::string>& missed);

}  // namespace coliee
