#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coliee/corpus.hpp"
#include "coliee/lexical.hpp"
#include "coliee/scores.hpp"
#include "json.hpp"

namespace coliee {

// ---------------------------------------------------------------------------
// Negation counting

struct NegationLexicon {
    /// Whole lowercase word tokens; any token ending in "n't" also counts.
    std::set<std::string> words{"not", "no", "never", "cannot", "nothing", "neither", "nor", "without"};
    /// Substrings counted (non-overlapping) in Japanese text.
    std::vector<std::string> ja_substrings{"ない", "ず", "ぬ", "ません"};
};

enum class Parity { even, odd };

std::size_t count_negations(std::string_view text, Lang lang = Lang::en, const NegationLexicon& lexicon = {});
Parity negation_parity(std::string_view text, Lang lang = Lang::en, const NegationLexicon& lexicon = {});

// ---------------------------------------------------------------------------
// Condition / statement extraction

/// Whitespace split with edge punctuation peeled off and the clitics "'s"
/// and "n't" separated, the convention SRL annotations are expected in.
std::vector<std::string> srl_tokenize(std::string_view sentence);

/// Joins SRL tokens back into text (no space before closing punctuation and
/// clitics). Japanese tokens are joined without spaces.
std::string detokenize(std::span<const std::string> tokens, Lang lang = Lang::en);

/// Collapses whitespace and removes the spaces a tokenizer leaves before
/// clitics and closing punctuation, so differently tokenized renderings of
/// the same text compare equal.
std::string normalize_surface(std::string_view text);

/// Drops a leading paragraph marker such as "(1)", "(ii)" or "(a)".
std::string strip_point_marker(std::string_view sentence);

enum class PairVariant { main, exception_merged };

std::string_view to_string(PairVariant v) noexcept;

struct CondStatePair {
    std::string article_id;
    std::size_t sentence_index = 0;
    PairVariant variant = PairVariant::main;
    std::string condition;
    std::string statement;
    /// Token view of the pair; for a main pair the two lists partition the
    /// sentence tokens.
    std::vector<std::string> condition_tokens;
    std::vector<std::string> statement_tokens;
    /// The sentence had no predicate, so the whole sentence is the statement.
    bool degraded = false;

    /// "<article_id>/<sentence_index>/<main|exception>"
    std::string id() const;
};

/// Id an SRL annotation must carry: "<article_id>/<sentence_index>", plus
/// "/exception" for the part after an exception marker.
std::string srl_sentence_id(std::string_view article_id, std::size_t sentence_index, bool exception_part = false);

struct ExtractionOptions {
    /// Case-insensitive markers introducing an exception clause.
    std::vector<std::string> exception_markers{"provided, however", "ただし"};
    /// Phrases in an exception clause that cancel the main statement.
    std::vector<std::string> override_phrases{"does not apply", "shall not apply", "この限りでない"};
    /// "not" goes after the first of these in a negated statement.
    std::set<std::string> auxiliaries{"is",    "are",   "was",    "were",  "be",     "been",
                                      "shall", "may",   "must",   "can",   "will",   "would",
                                      "should", "could", "might", "has",   "have",   "had",
                                      "does",  "do",    "did"};
};

/// Condition/statement pairs of every sentence of the article, from the SRL
/// annotations of its sentences. Throws not-found when a sentence has no
/// annotation.
std::vector<CondStatePair> extract_pairs(const Article& article,
                                         const SrlStore& srl,
                                         const ExtractionOptions& options = {});

/// The sentences extract_pairs expects annotations for, keyed by
/// srl_sentence_id; useful to build the request sent to an SRL tagger.
std::vector<std::pair<std::string, std::vector<std::string>>> srl_requests(const Article& article,
                                                                           const ExtractionOptions& options = {});

std::string serialize_cs_pairs(const std::vector<CondStatePair>& pairs);
std::vector<CondStatePair> load_cs_pairs(const std::filesystem::path& path);

struct QueryDecomposition {
    std::string condition;
    std::string statement;
};

/// Last sentence is the statement; the earlier ones, joined, the condition.
QueryDecomposition decompose_query(std::string_view text, Lang lang = Lang::en);
inline QueryDecomposition decompose_query(const Query& q) { return decompose_query(q.text, q.lang); }

struct InferenceResult {
    Answer answer = Answer::no;
    std::size_t matched = 0;
    double similarity = 0.0;
    std::string matched_pair_id;
};

/// Picks the pair whose condition is closest (TfIdf cosine) to the query
/// condition; a query without a condition is matched on statements instead.
/// Ties go to the lowest sentence index, then main before exception pairs,
/// then list order. YES iff condition parities and statement parities both
/// agree.
InferenceResult infer_yes_no(const QueryDecomposition& query,
                             std::span<const CondStatePair> pairs,
                             const InvertedIndex& idf_source,
                             Lang lang = Lang::en,
                             const NegationLexicon& lexicon = {});

// ---------------------------------------------------------------------------
// Query kind

enum class QueryKindTag { specific_scenario, general };

struct QueryKind {
    QueryKindTag kind = QueryKindTag::general;
    std::vector<std::string> evidence;
};

std::string_view to_string(QueryKindTag k) noexcept;

/// Specific-scenario iff the text names parties with standalone uppercase
/// letters ("A", "B", ...). "I" never counts. A sentence-initial "A" followed
/// by a lowercase word reads as the article unless other party letters occur
/// in the text.
QueryKind detect_query_kind(std::string_view text);

// ---------------------------------------------------------------------------
// Linear SVM

struct SvmParams {
    double lambda = 1e-3;
    int epochs = 20;
    std::uint64_t seed = 13;
};

struct SvmExample {
    /// Query text followed by the matched article text.
    std::string text;
    Answer label = Answer::no;
};

/// Linear model over L2-normalized TfIdf features. The idf table travels with
/// the model so prediction featurizes exactly as training did.
struct SvmModel {
    std::map<std::string, double> weights;
    double bias = 0.0;
    double lambda = 1e-3;
    int epochs = 20;
    std::uint64_t seed = 13;
    TokenizerMode tokenizer = TokenizerMode::word;
    std::set<std::string> stopwords;
    std::size_t n_docs = 0;
    std::map<std::string, double> idf;

    /// Sparse features of a text (sorted by term).
    std::vector<std::pair<std::string, double>> featurize(std::string_view text) const;
    double decision(std::string_view text) const;

    nlohmann::json to_json() const;
    static SvmModel from_json(const nlohmann::json& j);
};

/// Seeded Pegasos (projected stochastic subgradient on the L2-regularized
/// hinge loss) returning the averaged iterate. The bias is trained as the
/// weight of a constant feature. Throws a training error on single-class data.
SvmModel svm_train(std::span<const SvmExample> examples, const Tokenizer& tokenizer, const SvmParams& params);

/// lambda/2 (|w|^2 + b^2) + mean hinge loss.
double svm_objective(const SvmModel& model, std::span<const SvmExample> examples);

struct SvmPrediction {
    Answer answer = Answer::no;
    double margin = 0.0;
};

/// YES when w.x + b >= 0.
SvmPrediction svm_predict(const SvmModel& model, std::string_view query, std::string_view article);

std::string svm_input_text(std::string_view query, std::string_view article);

// ---------------------------------------------------------------------------
// Routing

/// Agreement wins; otherwise the SVM for specific-scenario queries and the
/// condition/statement answer for general ones.
Answer route_ensemble(Answer cs_answer, Answer svm_answer, const QueryKind& kind);

struct AnswerRecord {
    std::string query_id;
    Answer answer = Answer::no;
    std::string method;
    std::optional<std::string> matched_pair;
};

/// answers.jsonl: {"query_id","answer","method","matched_pair"}.
std::string serialize_answer_records(const std::vector<AnswerRecord>& records);
std::map<std::string, AnswerRecord> load_answer_records(const std::filesystem::path& path);
AnswerLabels answers_of(const std::map<std::string, AnswerRecord>& records);

// ---------------------------------------------------------------------------
// Masked-template augmentation

inline constexpr std::string_view kMaskToken = "[MASK]";

struct AugTemplate {
    std::string template_id;
    std::string query_id;
    std::vector<std::string> tokens;
    std::vector<std::size_t> mask_positions;
    double mask_ratio = 0.15;
    std::uint64_t seed = 0;
    std::size_t top_k_fill = 5;

    nlohmann::json to_json() const;
    static AugTemplate from_json(const nlohmann::json& j);
};

/// Masks max(1, round(ratio * n)) distinct whitespace tokens, chosen
/// uniformly with the seeded generator. Throws a precondition error for a
/// query without tokens.
AugTemplate make_masked_template(const Query& query,
                                 double mask_ratio,
                                 std::uint64_t seed,
                                 std::size_t top_k_fill = 5,
                                 std::size_t variant = 0);

struct AugmentedExample {
    std::string template_id;
    std::string query_id;
    std::string text;
    std::vector<std::string> articles;
    std::optional<Answer> label;

    nlohmann::json to_json() const;
    static AugmentedExample from_json(const nlohmann::json& j);
};

/// Replaces each mask with a uniform pick among its top_k_fill most likely
/// candidates. Throws a fill error when a mask has no candidates.
AugmentedExample realize_augmented(const AugTemplate& tmpl,
                                   const FillStore& fills,
                                   std::uint64_t seed,
                                   std::vector<std::string> article_texts,
                                   std::optional<Answer> label = std::nullopt);

}  // namespace coliee
