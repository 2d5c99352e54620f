#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "coliee/corpus.hpp"
#include "coliee/ranking.hpp"

namespace coliee {

enum class TokenizerMode : std::uint8_t {
    /// Lowercased ASCII, split on anything that is not a letter or digit.
    /// Bytes of multi-byte UTF-8 sequences count as letters.
    word = 0,
    /// Overlapping codepoint bigrams over runs of non-space, non-punctuation
    /// characters; a run of one codepoint yields that codepoint.
    char_bigram = 1,
};

TokenizerMode parse_tokenizer_mode(std::string_view s);
std::string_view to_string(TokenizerMode mode) noexcept;

class Tokenizer {
  public:
    explicit Tokenizer(TokenizerMode mode = TokenizerMode::word, std::set<std::string> stopwords = {});

    static Tokenizer for_lang(Lang lang);

    std::vector<std::string> tokenize(std::string_view text) const;

    TokenizerMode mode() const noexcept { return m_mode; }
    const std::set<std::string>& stopwords() const noexcept { return m_stopwords; }

  private:
    TokenizerMode m_mode;
    std::set<std::string> m_stopwords;
};

struct Posting {
    std::uint32_t doc = 0;
    std::uint32_t tf = 0;
};

struct Document {
    std::string id;
    std::string text;
};

/// Term -> postings over a fixed document set. Postings are sorted by
/// document index. Immutable after build.
class InvertedIndex {
  public:
    static InvertedIndex build(std::span<const Document> docs, const Tokenizer& tokenizer);
    static InvertedIndex build(std::span<const DocRef> docs, const Tokenizer& tokenizer);

    std::size_t size() const noexcept { return m_doc_ids.size(); }
    double avg_doc_len() const noexcept { return m_avg_doc_len; }
    const Tokenizer& tokenizer() const noexcept { return m_tokenizer; }

    const std::string& doc_id(std::size_t doc) const { return m_doc_ids[doc]; }
    std::uint32_t doc_length(std::size_t doc) const { return m_doc_lengths[doc]; }

    /// Throws not-found for unknown ids.
    std::size_t doc_index(std::string_view id) const;
    bool contains(std::string_view id) const;

    std::size_t df(const std::string& term) const;
    std::uint32_t tf(const std::string& term, std::size_t doc) const;
    std::span<const Posting> postings(const std::string& term) const;

    /// Terms in ascending order.
    std::vector<std::string> terms() const;

    /// Binary format: magic "LXIDX1", u32 version, tokenizer mode and
    /// stopwords, then documents and postings. Little-endian fixed widths.
    void save(std::ostream& out) const;
    static InvertedIndex load(std::istream& in);
    void save_file(const std::filesystem::path& path) const;
    static InvertedIndex load_file(const std::filesystem::path& path);

  private:
    Tokenizer m_tokenizer;
    std::vector<std::string> m_doc_ids;
    std::vector<std::uint32_t> m_doc_lengths;
    std::unordered_map<std::string, std::size_t> m_doc_pos;
    std::unordered_map<std::string, std::vector<Posting>> m_postings;
    double m_avg_doc_len = 0.0;

    void finish();
};

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;

    void validate() const;
};

/// ln(1 + (N - df + 0.5) / (df + 0.5)); always positive.
double bm25_idf(std::size_t n_docs, std::size_t df);

/// Sum over query tokens (repeats count again) of
///   idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl)).
double bm25_score(const InvertedIndex& index,
                  std::span<const std::string> query_tokens,
                  std::string_view doc_id,
                  const Bm25Params& params = {});

enum class LexicalScorer { bm25, tfidf };

LexicalScorer parse_lexical_scorer(std::string_view s);

/// Every indexed document scored against the query, in rank order.
std::vector<ScoredDoc> rank_all(const InvertedIndex& index,
                                std::string_view query,
                                LexicalScorer scorer = LexicalScorer::bm25,
                                const Bm25Params& params = {});

/// First min(k, N) entries of rank_all. k must be at least 1.
std::vector<ScoredDoc> retrieve_top_k(const InvertedIndex& index,
                                      std::string_view query,
                                      std::size_t k,
                                      LexicalScorer scorer = LexicalScorer::bm25,
                                      const Bm25Params& params = {});

/// Sparse term -> weight, sorted by term.
struct TfIdfVector {
    std::vector<std::pair<std::string, double>> entries;

    bool empty() const noexcept { return entries.empty(); }
    double dot(const TfIdfVector& other) const;
};

/// idf = ln((N + 1) / (df + 1)) + 1
double tfidf_idf(std::size_t n_docs, std::size_t df);

/// Raw term counts times idf (statistics from `idf_source`), L2-normalized.
TfIdfVector tfidf_vector(std::span<const std::string> tokens, const InvertedIndex& idf_source);

/// Cosine of the TfIdf vectors of two texts, tokenized with `tokenizer`.
/// Throws undefined-similarity when both texts have no tokens; 0 when exactly
/// one of them is empty.
double tfidf_cosine(std::string_view a,
                    std::string_view b,
                    const Tokenizer& tokenizer,
                    const InvertedIndex& idf_source);

inline double tfidf_cosine(std::string_view a, std::string_view b, const InvertedIndex& idf_source)
{
    return tfidf_cosine(a, b, idf_source.tokenizer(), idf_source);
}

double embedding_cosine(std::span<const double> u, std::span<const double> v);

}  // namespace coliee
