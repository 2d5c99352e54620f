#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coliee/ranking.hpp"

namespace coliee {

struct ScoreRow {
    std::string checkpoint;
    std::string query_id;
    std::string doc_id;
    double score = 0.0;
};

/// (checkpoint x query x candidate) relevance scores. Every checkpoint scores
/// the same candidate pool for each query; the pool of a query is the union
/// of the documents seen for it. Checkpoints, queries and per-query candidates
/// are kept in ascending id order.
class ScoreMatrix {
  public:
    /// Validates finiteness, uniqueness and completeness.
    static ScoreMatrix from_rows(std::vector<ScoreRow> rows);

    const std::vector<std::string>& checkpoints() const noexcept { return m_checkpoints; }
    const std::vector<std::string>& query_ids() const noexcept { return m_queries; }

    std::optional<std::size_t> checkpoint_index(std::string_view id) const;
    std::optional<std::size_t> query_index(std::string_view id) const;

    /// Candidate ids of query `q` (index into query_ids()).
    const std::vector<std::string>& candidates(std::size_t q) const { return m_docs[q]; }

    /// Scores aligned with candidates(q).
    std::span<const double> scores(std::size_t checkpoint, std::size_t q) const
    {
        return m_values[checkpoint][q];
    }

    /// Throws completeness error when the combination is absent.
    double score(std::string_view checkpoint, std::string_view query_id, std::string_view doc_id) const;
    std::optional<double> find(std::string_view checkpoint, std::string_view query_id,
                               std::string_view doc_id) const;

    /// One checkpoint's scores as rank-ordered lists.
    RankedLists ranked(std::size_t checkpoint) const;

    std::vector<ScoreRow> rows() const;

    /// A matrix with the same shape and new values; used by normalization.
    ScoreMatrix with_values(std::vector<std::vector<std::vector<double>>> values) const;

    bool operator==(const ScoreMatrix&) const = default;

  private:
    std::vector<std::string> m_checkpoints;
    std::vector<std::string> m_queries;
    std::vector<std::vector<std::string>> m_docs;
    std::vector<std::vector<std::vector<double>>> m_values;  // [checkpoint][query][doc]
};

/// TSV: checkpoint_id \t query_id \t doc_id \t score. Blank lines and lines
/// starting with '#' are ignored.
ScoreMatrix parse_scores(std::istream& in, const std::string& source_name);
ScoreMatrix load_scores(const std::filesystem::path& path);
std::string serialize_scores(const ScoreMatrix& matrix);

/// Ranked lists (e.g. a retrieval run) written as score rows of one checkpoint.
std::string serialize_ranked(const RankedLists& lists, std::string_view checkpoint);

enum class Normalization { none, minmax };

Normalization parse_normalization(std::string_view s);

/// minmax rescales each (checkpoint, query) list onto [0, 1]; a constant list
/// maps to 0.5.
ScoreMatrix normalize_per_query(const ScoreMatrix& matrix, Normalization method);

/// id -> dense vector of a fixed dimension.
class EmbeddingStore {
  public:
    static EmbeddingStore load(const std::filesystem::path& path);

    void add(std::string id, std::vector<double> vector);

    std::size_t dimension() const noexcept { return m_dim; }
    std::size_t size() const noexcept { return m_vectors.size(); }
    bool contains(std::string_view id) const;

    /// Throws not-found naming the id.
    std::span<const double> at(std::string_view id) const;

  private:
    std::size_t m_dim = 0;
    std::map<std::string, std::vector<double>, std::less<>> m_vectors;
};

/// Half-open token range.
struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    bool operator==(const TokenSpan&) const = default;
};

struct SrlArgument {
    std::string role;
    TokenSpan span;
};

struct SrlPredicate {
    TokenSpan verb;
    std::vector<SrlArgument> args;
};

struct SrlAnnotation {
    std::string sentence_id;
    /// The tagger's tokenization, when it supplied one.
    std::vector<std::string> tokens;
    std::vector<SrlPredicate> predicates;
};

/// Checks that spans are non-empty, ordered and inside [0, n_tokens).
void validate_srl(const SrlAnnotation& annotation, std::size_t n_tokens);

class SrlStore {
  public:
    static SrlStore load(const std::filesystem::path& path);
    static SrlStore parse_jsonl(std::string_view text, const std::string& source_name = "srl.jsonl");

    void add(SrlAnnotation annotation);
    const SrlAnnotation* find(std::string_view sentence_id) const;
    std::size_t size() const noexcept { return m_items.size(); }

  private:
    std::map<std::string, SrlAnnotation, std::less<>> m_items;
};

struct FillCandidate {
    std::string token;
    double prob = 0.0;
};

/// Mask-fill candidates keyed by (template id, token position of the mask).
class FillStore {
  public:
    static FillStore load(const std::filesystem::path& path);

    void add(std::string template_id, std::size_t mask_index, std::vector<FillCandidate> candidates);

    /// Candidates sorted by probability descending (ties by token), or
    /// nullptr when the mask has no entry.
    const std::vector<FillCandidate>* find(std::string_view template_id, std::size_t mask_index) const;

  private:
    std::map<std::pair<std::string, std::size_t>, std::vector<FillCandidate>> m_fills;
};

}  // namespace coliee
