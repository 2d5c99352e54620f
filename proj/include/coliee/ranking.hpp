#pragma once

#include <map>
#include <string>
#include <vector>

namespace coliee {

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;

    bool operator==(const ScoredDoc&) const = default;
};

/// Score descending, ties by ascending doc id.
inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b)
{
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.doc_id < b.doc_id;
}

void sort_ranked(std::vector<ScoredDoc>& docs);

/// query id -> candidates in rank order.
using RankedLists = std::map<std::string, std::vector<ScoredDoc>>;

}  // namespace coliee

namespace coliee {

/// query id -> selected doc ids in score-descending order.
using PredictionSet = std::map<std::string, std::vector<std::string>>;

/// Drops the scores, keeping rank order.
PredictionSet ranked_ids(const RankedLists& lists);

}  // namespace coliee
