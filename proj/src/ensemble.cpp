#include "coliee/ensemble.hpp"

#include <cmath>
#include <unordered_set>

#include "coliee/error.hpp"
#include "coliee/util.hpp"

namespace coliee {

WeightVector::WeightVector(std::map<std::string, double> raw) : m_raw(std::move(raw))
{
    bool any = false;
    for (const auto& [id, w] : m_raw) {
        if (!(w >= 0.0 && w <= 1.0)) {
            throw Error(ErrorKind::config, "raw weight of '" + id + "' must lie in [0, 1]");
        }
        any = any || w > 0.0;
    }
    if (!any) {
        throw Error(ErrorKind::config, "at least one raw weight must be positive");
    }
}

WeightVector WeightVector::one_hot(const std::vector<std::string>& checkpoints, const std::string& chosen)
{
    std::map<std::string, double> raw;
    for (const auto& c : checkpoints) {
        raw[c] = c == chosen ? 1.0 : 0.0;
    }
    return WeightVector(std::move(raw));
}

std::map<std::string, double> WeightVector::normalized() const
{
    double sum = 0.0;
    for (const auto& [_, w] : m_raw) {
        sum += w;
    }
    std::map<std::string, double> out;
    for (const auto& [id, w] : m_raw) {
        out[id] = w / sum;
    }
    return out;
}

void EnsembleConfig::validate() const
{
    if (!(grid_step > 0.0 && grid_step <= 1.0)) {
        throw Error(ErrorKind::config, "grid step must lie in (0, 1]");
    }
    if (h < 1) {
        throw Error(ErrorKind::config, "h must be at least 1");
    }
}

namespace {

std::vector<double> effective_weights(const ScoreMatrix& matrix, const WeightVector& weights)
{
    auto norm = weights.normalized();
    for (const auto& [c, _] : norm) {
        if (!matrix.checkpoint_index(c)) {
            throw Error(ErrorKind::config, "weight given for unknown checkpoint '" + c + "'");
        }
    }
    std::vector<double> out;
    for (const auto& c : matrix.checkpoints()) {
        auto it = norm.find(c);
        if (it == norm.end()) {
            throw Error(ErrorKind::config, "no weight given for checkpoint '" + c + "'");
        }
        out.push_back(it->second);
    }
    return out;
}

RankedLists combine(const ScoreMatrix& matrix, const std::vector<double>& w)
{
    RankedLists out;
    for (std::size_t q = 0; q < matrix.query_ids().size(); ++q) {
        const auto& docs = matrix.candidates(q);
        std::vector<ScoredDoc> list(docs.size());
        for (std::size_t d = 0; d < docs.size(); ++d) {
            list[d].doc_id = docs[d];
        }
        for (std::size_t c = 0; c < w.size(); ++c) {
            auto s = matrix.scores(c, q);
            for (std::size_t d = 0; d < docs.size(); ++d) {
                list[d].score += w[c] * s[d];
            }
        }
        sort_ranked(list);
        out.emplace(matrix.query_ids()[q], std::move(list));
    }
    return out;
}

}  // namespace

RankedLists weighted_scores(const ScoreMatrix& matrix, const WeightVector& weights)
{
    return combine(matrix, effective_weights(matrix, weights));
}

std::vector<double> grid_values(double step)
{
    std::vector<double> out;
    for (std::size_t i = 0;; ++i) {
        const double v = static_cast<double>(i) * step;
        if (v >= 1.0 - 1e-9) {
            break;
        }
        out.push_back(v);
    }
    out.push_back(1.0);
    return out;
}

GridSearchResult grid_search_weights(const ScoreMatrix& matrix,
                                     const GoldLabels& validation_gold,
                                     const EnsembleConfig& cfg,
                                     const SelectionRule& rule)
{
    cfg.validate();
    rule.validate();
    if (validation_gold.empty()) {
        throw Error(ErrorKind::empty_input, "validation gold labels are empty");
    }
    const auto& ckpts = matrix.checkpoints();
    if (ckpts.empty()) {
        throw Error(ErrorKind::empty_input, "score matrix has no checkpoints");
    }
    if (ckpts.size() > cfg.h) {
        throw Error(ErrorKind::config, "matrix has " + std::to_string(ckpts.size()) +
                                           " checkpoints, more than h = " + std::to_string(cfg.h));
    }
    const auto values = grid_values(cfg.grid_step);
    const std::size_t h = ckpts.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < h; ++i) {
        total *= values.size();
    }

    // Point p enumerates raw vectors in lexicographic order with the first
    // checkpoint most significant; point 0 is the origin and is skipped.
    auto raw_at = [&](std::size_t p) {
        std::vector<double> raw(h);
        for (std::size_t i = h; i-- > 0;) {
            raw[i] = values[p % values.size()];
            p /= values.size();
        }
        return raw;
    };

    std::vector<double> metric(total, -1.0);
    parallel_for(total - 1, [&](std::size_t i) {
        const auto raw = raw_at(i + 1);
        double sum = 0.0;
        for (double r : raw) {
            sum += r;
        }
        std::vector<double> w(h);
        for (std::size_t c = 0; c < h; ++c) {
            w[c] = raw[c] / sum;
        }
        auto preds = predict(restrict_to(combine(matrix, w), validation_gold), rule);
        metric[i + 1] = evaluate_metric(preds, validation_gold, cfg.metric);
    });
    std::size_t best = 1;
    for (std::size_t p = 2; p < total; ++p) {
        if (metric[p] > metric[best]) {
            best = p;
        }
    }
    std::map<std::string, double> raw;
    const auto best_raw = raw_at(best);
    for (std::size_t c = 0; c < h; ++c) {
        raw[ckpts[c]] = best_raw[c];
    }
    return {WeightVector(std::move(raw)), metric[best], total - 1};
}

nlohmann::json ensemble_to_json(const GridSearchResult& result, const EnsembleConfig& cfg)
{
    nlohmann::json weights = nlohmann::json::object();
    for (const auto& [c, w] : result.weights.raw()) {
        weights[c] = w;
    }
    return {{"weights", weights},
            {"metric", to_string(cfg.metric)},
            {"value", result.value},
            {"grid_step", cfg.grid_step}};
}

WeightVector load_weights(const std::filesystem::path& path)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::parse, path.string() + ": " + e.what());
    }
    std::map<std::string, double> raw;
    for (const auto& [c, w] : doc.at("weights").items()) {
        raw[c] = w.get<double>();
    }
    return WeightVector(std::move(raw));
}

PredictionSet main_auxiliary_merge(const PredictionSet& main,
                                   std::span<const PredictionSet> auxiliaries,
                                   const std::set<std::string>& missed)
{
    PredictionSet out = main;
    for (const auto& qid : missed) {
        auto& docs = out[qid];
        std::unordered_set<std::string> seen(docs.begin(), docs.end());
        for (const auto& aux : auxiliaries) {
            auto it = aux.find(qid);
            if (it == aux.end()) {
                continue;
            }
            for (const auto& d : it->second) {
                if (seen.insert(d).second) {
                    docs.push_back(d);
                }
            }
        }
    }
    return out;
}

}  // namespace coliee
