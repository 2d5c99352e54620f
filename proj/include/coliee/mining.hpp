#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coliee/corpus.hpp"
#include "coliee/lexical.hpp"
#include "coliee/ranking.hpp"
#include "coliee/scores.hpp"

namespace coliee {

enum class Label { positive, negative };
enum class Provenance { bm25, model, tfidf, datflt_q, datflt_a };

std::string_view to_string(Label label) noexcept;
std::string_view to_string(Provenance p) noexcept;
Label parse_label(std::string_view s);
Provenance parse_provenance(std::string_view s);

struct TrainingPair {
    std::string query_id;
    std::string doc_id;
    Label label = Label::negative;
    int round = 1;
    Provenance provenance = Provenance::bm25;

    bool operator==(const TrainingPair&) const = default;
};

/// Pairs in emission order: queries ascending, and within a query the gold
/// positives (ascending id) followed by the negatives in rank order.
class TrainingPairSet {
  public:
    /// Returns false (and keeps the first) when (query, doc) is already present.
    bool add(TrainingPair pair);
    void warn(std::string message) { m_warnings.push_back(std::move(message)); }
    void merge(const TrainingPairSet& other);

    const std::vector<TrainingPair>& pairs() const noexcept { return m_pairs; }
    const std::vector<std::string>& warnings() const noexcept { return m_warnings; }
    std::size_t size() const noexcept { return m_pairs.size(); }

  private:
    std::vector<TrainingPair> m_pairs;
    std::set<std::pair<std::string, std::string>> m_keys;
    std::vector<std::string> m_warnings;
};

/// pairs.jsonl: {"query_id","doc_id","label","round","provenance"}.
std::string serialize_pairs(const TrainingPairSet& set);
TrainingPairSet load_pairs(const std::filesystem::path& path);

/// Lexical indexes over each query's candidate pool: one per case for a case
/// corpus, one shared index over the articles for a statute corpus.
class CandidatePools {
  public:
    static CandidatePools build(const Corpus& corpus, const Tokenizer& tokenizer);

    /// nullptr when the query has no candidates.
    const InvertedIndex* index_for(std::string_view query_id) const;

  private:
    std::shared_ptr<const InvertedIndex> m_shared;
    std::map<std::string, std::shared_ptr<const InvertedIndex>, std::less<>> m_per_query;
};

struct MiningParams {
    std::size_t n_neg = 10;
    LexicalScorer scorer = LexicalScorer::bm25;
    Bm25Params bm25;
};

/// Per query: every gold positive plus the n_neg best-ranked non-gold
/// candidates by the lexical scorer. round = 1, provenance bm25 or tfidf.
TrainingPairSet mine_negatives_round1(const Corpus& corpus,
                                      const GoldLabels& gold,
                                      const CandidatePools& pools,
                                      std::span<const std::string> query_ids,
                                      const MiningParams& params = {});

/// As round 1 but ranked by a checkpoint's scores. For a case corpus the
/// matrix must score every paragraph of the case; for a statute corpus the
/// matrix's candidates of a query are its (pre-filtered) pool.
TrainingPairSet mine_negatives_round2(const Corpus& corpus,
                                      const GoldLabels& gold,
                                      const ScoreMatrix& matrix,
                                      std::string_view checkpoint,
                                      std::span<const std::string> query_ids,
                                      std::size_t n_neg = 10);

enum class MissedBy { gold_based, empty_prediction };

struct MissedQuerySet {
    std::set<std::string> query_ids;
    MissedBy defined_by = MissedBy::empty_prediction;
};

/// With gold: queries whose prediction shares nothing with their gold set.
/// Without: queries with an empty prediction.
MissedQuerySet find_missed_queries(const PredictionSet& predictions, const GoldLabels* gold = nullptr);

/// Where neighbor queries take their negatives from.
struct NegativeSource {
    /// Lexical ranking over the candidate pools (used when matrix is null).
    const CandidatePools* pools = nullptr;
    MiningParams lexical;
    /// Model ranking by this checkpoint.
    const ScoreMatrix* matrix = nullptr;
    std::string checkpoint;
};

/// The n_near nearest train queries (embedding cosine, ties by id, the missed
/// query itself excluded) of every missed query, each contributing its gold
/// positives and mined negatives once.
TrainingPairSet build_datflt_q(const Corpus& corpus,
                               const MissedQuerySet& missed,
                               const EmbeddingStore& embeddings,
                               std::span<const std::string> train_query_ids,
                               const GoldLabels& gold,
                               const NegativeSource& negatives,
                               std::size_t n_near = 10,
                               std::size_t n_neg = 10);

/// Nearest neighbours used by build_datflt_q, exposed for inspection.
std::vector<std::string> nearest_queries(std::string_view query_id,
                                         const EmbeddingStore& embeddings,
                                         std::span<const std::string> candidates,
                                         std::size_t n_near);

/// Per train query: gold positives plus the n_neg best non-gold articles by
/// the M0 checkpoint's scores.
TrainingPairSet build_datflt_a(const Corpus& corpus,
                               const GoldLabels& gold,
                               const ScoreMatrix& matrix,
                               std::string_view checkpoint,
                               std::span<const std::string> query_ids,
                               std::size_t n_neg = 10);

}  // namespace coliee
