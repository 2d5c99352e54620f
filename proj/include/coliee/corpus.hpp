#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace coliee {

enum class Lang { en, ja };
enum class Split { train, validation, test };
enum class Answer { yes, no };

std::string_view to_string(Lang lang) noexcept;
std::string_view to_string(Split split) noexcept;
std::string_view to_string(Answer answer) noexcept;
Lang parse_lang(std::string_view s);
Split parse_split(std::string_view s);
Answer parse_answer(std::string_view s);

struct Article {
    std::string id;
    std::string number;
    std::string caption;
    std::string text;
    Lang lang = Lang::en;

    bool operator==(const Article&) const = default;
};

struct Query {
    std::string id;
    std::string text;
    Lang lang = Lang::en;
    Split split = Split::train;

    bool operator==(const Query&) const = default;
};

struct Paragraph {
    std::string id;
    std::string text;
};

struct CaseFragment {
    std::string case_id;
    std::string fragment_text;
    std::vector<Paragraph> candidates;
};

/// query id -> relevant document (article or paragraph) ids.
using GoldLabels = std::map<std::string, std::set<std::string>>;

/// query id -> entailment answer.
using AnswerLabels = std::map<std::string, Answer>;

struct DatasetStats {
    std::size_t n_train = 0;
    std::size_t n_validation = 0;
    std::size_t n_test = 0;
    double candidates_per_case = 0.0;
    double entailments_per_case = 0.0;
};

/// Split assignment by query-id patterns (see id_pattern_match).
struct SplitManifest {
    std::vector<std::pair<Split, std::vector<std::string>>> patterns;

    /// Throws an integrity error when the id matches no split or several.
    Split assign(std::string_view query_id) const;

    static SplitManifest load(const std::filesystem::path& path);
    static SplitManifest all_train();
};

/// A document in some query's candidate pool.
struct DocRef {
    std::string_view id;
    std::string_view text;
};

/// Either a statute corpus (articles shared by every query) or a case corpus
/// (each case fragment is a query over its own paragraphs). Immutable once
/// built; `build` validates every invariant.
class Corpus {
  public:
    static Corpus build(std::vector<Article> articles,
                        std::vector<CaseFragment> cases,
                        std::vector<Query> queries,
                        GoldLabels gold,
                        AnswerLabels answers = {});

    bool is_case_corpus() const noexcept { return !m_cases.empty(); }

    const std::vector<Article>& articles() const noexcept { return m_articles; }
    const std::vector<CaseFragment>& cases() const noexcept { return m_cases; }
    const std::vector<Query>& queries() const noexcept { return m_queries; }
    const GoldLabels& gold() const noexcept { return m_gold; }
    const AnswerLabels& answers() const noexcept { return m_answers; }

    const Query* find_query(std::string_view id) const;
    const Article* find_article(std::string_view id) const;
    const CaseFragment* find_case(std::string_view id) const;

    /// Query ids (ascending) in the given split, or all when omitted.
    std::vector<std::string> query_ids(std::optional<Split> split = std::nullopt) const;

    /// The candidates a query is ranked against: its case's paragraphs for a
    /// case corpus, every article otherwise.
    std::vector<DocRef> candidate_pool(std::string_view query_id) const;

    bool in_pool(std::string_view query_id, std::string_view doc_id) const;

  private:
    std::vector<Article> m_articles;
    std::vector<CaseFragment> m_cases;
    std::vector<Query> m_queries;
    GoldLabels m_gold;
    AnswerLabels m_answers;
    std::unordered_map<std::string, std::size_t> m_article_pos;
    std::unordered_map<std::string, std::size_t> m_case_pos;
    std::unordered_map<std::string, std::size_t> m_query_pos;
};

enum class CorpusFormat { canonical_jsonl, coliee_task2_dir, coliee_statute_xml };

CorpusFormat parse_corpus_format(std::string_view s);

/// canonical-jsonl: a directory with articles.jsonl, queries.jsonl and
///   optionally manifest.json, gold.json, answers.json.
/// coliee-task2-dir: cases/<case_id>/fragment.txt,
///   cases/<case_id>/paragraphs/<pid>.txt, labels.json, manifest.json.
/// coliee-statute-xml: a <dataset><pair id label><t1/><t2/></pair></dataset>
///   file; a manifest.json next to it assigns splits.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);

GoldLabels load_gold(const std::filesystem::path& path);
AnswerLabels load_answers(const std::filesystem::path& path);

std::vector<Article> load_articles_jsonl(const std::filesystem::path& path);

/// Sorted-key JSON lines; load(serialize(x)) == x.
std::string serialize_articles(const std::vector<Article>& articles);
std::string serialize_queries(const std::vector<Query>& queries);
std::string serialize_gold(const GoldLabels& gold);
std::string serialize_answers(const AnswerLabels& answers);

/// Statistics over the queries of `split` (all queries when omitted); the
/// three split counts always cover the whole corpus.
DatasetStats compute_stats(const Corpus& corpus, std::optional<Split> split = std::nullopt);

struct SentenceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Byte ranges of the sentences in `text`. Everything outside the ranges is
/// whitespace, so the text is recoverable from the spans plus the gaps.
std::vector<SentenceSpan> sentence_spans(std::string_view text, Lang lang);

std::vector<std::string> split_sentences(std::string_view text, Lang lang);

/// Words that end in '.' without ending a sentence.
const std::vector<std::string>& abbreviation_guards();

}  // namespace coliee
