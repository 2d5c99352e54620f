#pragma once

#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "coliee/corpus.hpp"
#include "coliee/scores.hpp"

namespace testing_support {

/// Statute corpus with articles "d1".."dn" and the given queries (all train).
inline coliee::Corpus statute_corpus(const std::vector<std::string>& article_texts,
                                     const std::vector<std::pair<std::string, std::string>>& queries,
                                     coliee::GoldLabels gold,
                                     coliee::Split split = coliee::Split::train)
{
    std::vector<coliee::Article> articles;
    for (std::size_t i = 0; i < article_texts.size(); ++i) {
        const auto id = "d" + std::to_string(i + 1);
        articles.push_back({id, id, "", article_texts[i], coliee::Lang::en});
    }
    std::vector<coliee::Query> qs;
    for (const auto& [id, text] : queries) qs.push_back({id, text, coliee::Lang::en, split});
    return coliee::Corpus::build(std::move(articles), {}, std::move(qs), std::move(gold));
}

inline coliee::ScoreMatrix matrix_of(
    const std::vector<std::tuple<std::string, std::string, std::string, double>>& rows)
{
    std::vector<coliee::ScoreRow> out;
    for (const auto& [c, q, d, s] : rows) out.push_back({c, q, d, s});
    return coliee::ScoreMatrix::from_rows(std::move(out));
}

/// Two checkpoints, two queries, three docs each; gold q1={d2}, q2={d3}.
inline coliee::ScoreMatrix two_checkpoint_fixture()
{
    return matrix_of({{"c1", "q1", "d1", 0.9}, {"c1", "q1", "d2", 0.6}, {"c1", "q1", "d3", 0.1},
                      {"c1", "q2", "d1", 0.2}, {"c1", "q2", "d2", 0.7}, {"c1", "q2", "d3", 0.65},
                      {"c2", "q1", "d1", 0.3}, {"c2", "q1", "d2", 0.8}, {"c2", "q1", "d3", 0.2},
                      {"c2", "q2", "d1", 0.1}, {"c2", "q2", "d2", 0.4}, {"c2", "q2", "d3", 0.9}});
}

inline coliee::GoldLabels two_checkpoint_gold() { return {{"q1", {"d2"}}, {"q2", {"d3"}}}; }

}  // namespace testing_support
