#include "coliee/predict.hpp"

#include <cmath>
#include <set>

#include "coliee/error.hpp"
#include "coliee/util.hpp"

namespace coliee {

RuleKind parse_rule_kind(std::string_view s)
{
    if (s == "topk-margin") return RuleKind::topk_margin;
    if (s == "threshold") return RuleKind::threshold;
    throw Error(ErrorKind::config, "unknown selection rule '" + std::string(s) + "'");
}

std::string_view to_string(RuleKind kind) noexcept
{
    return kind == RuleKind::threshold ? "threshold" : "topk-margin";
}

SelectionRule SelectionRule::topk_margin(std::size_t k, double m)
{
    SelectionRule r;
    r.kind = RuleKind::topk_margin;
    r.k = k;
    r.m = m;
    r.validate();
    return r;
}

SelectionRule SelectionRule::threshold(double t)
{
    SelectionRule r;
    r.kind = RuleKind::threshold;
    r.k = 0;
    r.t = t;
    r.validate();
    return r;
}

void SelectionRule::validate() const
{
    if (kind == RuleKind::topk_margin) {
        if (k < 1) {
            throw Error(ErrorKind::config, "top-k rule needs k >= 1");
        }
        if (!(m >= 0.0)) {
            throw Error(ErrorKind::config, "margin must be non-negative");
        }
    } else if (std::isnan(t)) {
        throw Error(ErrorKind::config, "threshold must be a number");
    }
}

nlohmann::json SelectionRule::to_json() const
{
    if (kind == RuleKind::topk_margin) {
        // JSON has no infinity; an unbounded margin is written as null.
        return {{"kind", to_string(kind)}, {"k", k}, {"m", std::isinf(m) ? nlohmann::json() : nlohmann::json(m)}};
    }
    return {{"kind", to_string(kind)}, {"t", std::isinf(t) ? nlohmann::json() : nlohmann::json(t)}};
}

SelectionRule SelectionRule::from_json(const nlohmann::json& j)
{
    auto kind = parse_rule_kind(j.at("kind").get<std::string>());
    if (kind == RuleKind::topk_margin) {
        const auto& m = j.at("m");
        return topk_margin(j.at("k").get<std::size_t>(),
                           m.is_null() ? std::numeric_limits<double>::infinity() : m.get<double>());
    }
    const auto& t = j.at("t");
    return threshold(t.is_null() ? -std::numeric_limits<double>::infinity() : t.get<double>());
}

namespace {

void require_sorted(std::span<const ScoredDoc> ranked)
{
    for (std::size_t i = 1; i < ranked.size(); ++i) {
        if (ranked[i].score > ranked[i - 1].score) {
            throw Error(ErrorKind::precondition, "ranked list is not sorted by score descending");
        }
    }
}

}  // namespace

std::vector<std::string> select_topk_margin(std::span<const ScoredDoc> ranked, std::size_t k, double m)
{
    if (ranked.empty()) {
        throw Error(ErrorKind::empty_input, "cannot select from an empty ranked list");
    }
    if (k < 1) {
        throw Error(ErrorKind::precondition, "top-k rule needs k >= 1");
    }
    require_sorted(ranked);
    std::vector<std::string> out{ranked[0].doc_id};
    const double top = ranked[0].score;
    for (std::size_t i = 1; i < std::min(k, ranked.size()); ++i) {
        if (top - ranked[i].score < m) {
            out.push_back(ranked[i].doc_id);
        }
    }
    return out;
}

std::vector<std::string> select_threshold(std::span<const ScoredDoc> ranked, double t)
{
    require_sorted(ranked);
    std::vector<std::string> out;
    for (const auto& d : ranked) {
        if (d.score >= t) {
            out.push_back(d.doc_id);
        }
    }
    return out;
}

std::vector<std::string> apply_rule(std::span<const ScoredDoc> ranked, const SelectionRule& rule)
{
    if (rule.kind == RuleKind::threshold) {
        return select_threshold(ranked, rule.t);
    }
    if (ranked.empty()) {
        return {};
    }
    return select_topk_margin(ranked, rule.k, rule.m);
}

PredictionSet predict(const RankedLists& ranked, const SelectionRule& rule)
{
    rule.validate();
    PredictionSet out;
    for (const auto& [qid, list] : ranked) {
        out[qid] = apply_rule(list, rule);
    }
    return out;
}

RankedLists restrict_to(const RankedLists& ranked, const GoldLabels& gold)
{
    RankedLists out;
    for (const auto& [qid, list] : ranked) {
        if (gold.contains(qid)) {
            out.emplace(qid, list);
        }
    }
    return out;
}

KmSearchResult search_k_m(const RankedLists& ranked,
                          const GoldLabels& gold,
                          std::span<const std::size_t> k_range,
                          std::span<const double> m_grid,
                          Metric metric)
{
    if (gold.empty()) {
        throw Error(ErrorKind::empty_input, "validation gold labels are empty");
    }
    if (k_range.empty() || m_grid.empty()) {
        throw Error(ErrorKind::config, "k and m search ranges must be non-empty");
    }
    std::vector<std::size_t> ks(k_range.begin(), k_range.end());
    std::vector<double> ms(m_grid.begin(), m_grid.end());
    std::sort(ks.begin(), ks.end());
    std::sort(ms.begin(), ms.end());
    const auto val = restrict_to(ranked, gold);

    std::vector<double> values(ks.size() * ms.size());
    parallel_for(values.size(), [&](std::size_t cell) {
        auto rule = SelectionRule::topk_margin(ks[cell / ms.size()], ms[cell % ms.size()]);
        values[cell] = evaluate_metric(predict(val, rule), gold, metric);
    });
    std::size_t best = 0;
    for (std::size_t cell = 1; cell < values.size(); ++cell) {
        if (values[cell] > values[best]) {
            best = cell;
        }
    }
    return {ks[best / ms.size()], ms[best % ms.size()], values[best]};
}

ThresholdSearchResult search_threshold(const RankedLists& ranked,
                                       const GoldLabels& gold,
                                       std::span<const double> t_grid,
                                       Metric metric)
{
    if (gold.empty()) {
        throw Error(ErrorKind::empty_input, "validation gold labels are empty");
    }
    if (t_grid.empty()) {
        throw Error(ErrorKind::config, "threshold search grid must be non-empty");
    }
    std::vector<double> ts(t_grid.begin(), t_grid.end());
    std::sort(ts.begin(), ts.end());
    const auto val = restrict_to(ranked, gold);
    std::vector<double> values(ts.size());
    parallel_for(ts.size(), [&](std::size_t i) {
        values[i] = evaluate_metric(predict(val, SelectionRule::threshold(ts[i])), gold, metric);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) {
            best = i;
        }
    }
    return {ts[best], values[best]};
}

std::vector<std::size_t> default_k_range() { return {1, 2, 3, 4, 5}; }

std::vector<double> default_m_grid()
{
    std::vector<double> out;
    for (int i = 0; i <= 20; ++i) {
        out.push_back(i / 100.0);
    }
    return out;
}

std::vector<double> default_t_grid()
{
    std::vector<double> out;
    for (int i = 0; i <= 20; ++i) {
        out.push_back(i / 20.0);
    }
    return out;
}

std::string serialize_predictions(const PredictionSet& predictions)
{
    std::vector<json> rows;
    for (const auto& [qid, docs] : predictions) {
        rows.push_back({{"query_id", qid}, {"docs", docs}});
    }
    return to_jsonl(rows);
}

PredictionSet load_predictions(const std::filesystem::path& path)
{
    PredictionSet out;
    for_each_jsonl(path, [&](std::size_t line, const json& rec) {
        auto qid = rec.at("query_id").get<std::string>();
        auto docs = rec.at("docs").get<std::vector<std::string>>();
        std::set<std::string> seen;
        for (const auto& d : docs) {
            if (!seen.insert(d).second) {
                throw Error(ErrorKind::validation, path.string() + ":" + std::to_string(line) +
                                                       ": duplicate document '" + d + "' for query '" + qid + "'");
            }
        }
        if (!out.emplace(qid, std::move(docs)).second) {
            throw Error(ErrorKind::validation,
                        path.string() + ":" + std::to_string(line) + ": duplicate query '" + qid + "'");
        }
    });
    return out;
}

}  // namespace coliee
