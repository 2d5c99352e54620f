#include "coliee/lexical.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "coliee/error.hpp"
#include "coliee/util.hpp"

namespace coliee {

void sort_ranked(std::vector<ScoredDoc>& docs)
{
    std::sort(docs.begin(), docs.end(), ranks_before);
}

TokenizerMode parse_tokenizer_mode(std::string_view s)
{
    if (s == "word") return TokenizerMode::word;
    if (s == "char-bigram") return TokenizerMode::char_bigram;
    throw Error(ErrorKind::config, "unknown tokenizer mode '" + std::string(s) + "'");
}

std::string_view to_string(TokenizerMode mode) noexcept
{
    return mode == TokenizerMode::char_bigram ? "char-bigram" : "word";
}

LexicalScorer parse_lexical_scorer(std::string_view s)
{
    if (s == "bm25") return LexicalScorer::bm25;
    if (s == "tfidf") return LexicalScorer::tfidf;
    throw Error(ErrorKind::config, "unknown lexical scorer '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Tokenizer

Tokenizer::Tokenizer(TokenizerMode mode, std::set<std::string> stopwords)
    : m_mode(mode), m_stopwords(std::move(stopwords))
{}

Tokenizer Tokenizer::for_lang(Lang lang)
{
    return Tokenizer(lang == Lang::ja ? TokenizerMode::char_bigram : TokenizerMode::word);
}

namespace {

bool is_word_byte(unsigned char c)
{
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

/// Splits UTF-8 into codepoint substrings; malformed bytes become
/// single-byte units.
std::vector<std::pair<std::string, char32_t>> codepoints(std::string_view text)
{
    std::vector<std::pair<std::string, char32_t>> out;
    std::size_t i = 0;
    while (i < text.size()) {
        auto c = static_cast<unsigned char>(text[i]);
        std::size_t len = 1;
        char32_t cp = c;
        if (c >= 0xF0 && c < 0xF8) {
            len = 4;
            cp = c & 0x07;
        } else if (c >= 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if (c >= 0xC0) {
            len = 2;
            cp = c & 0x1F;
        }
        if (i + len > text.size()) {
            len = 1;
            cp = c;
        } else {
            for (std::size_t k = 1; k < len; ++k) {
                cp = (cp << 6) | (static_cast<unsigned char>(text[i + k]) & 0x3F);
            }
        }
        out.emplace_back(std::string(text.substr(i, len)), cp);
        i += len;
    }
    return out;
}

bool breaks_run(char32_t cp)
{
    if (cp < 0x80) {
        return !is_word_byte(static_cast<unsigned char>(cp));
    }
    return (cp >= 0x3000 && cp <= 0x303F) ||   // CJK symbols and punctuation
           (cp >= 0xFF01 && cp <= 0xFF0F) ||   // fullwidth punctuation
           (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
           (cp >= 0xFF5B && cp <= 0xFF65) || cp == 0x00A0;
}

}  // namespace

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const
{
    std::vector<std::string> out;
    auto emit = [&](std::string tok) {
        if (!tok.empty() && !m_stopwords.contains(tok)) {
            out.push_back(std::move(tok));
        }
    };
    if (m_mode == TokenizerMode::word) {
        std::string cur;
        for (char ch : text) {
            auto c = static_cast<unsigned char>(ch);
            if (is_word_byte(c)) {
                cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch;
            } else {
                emit(std::move(cur));
                cur.clear();
            }
        }
        emit(std::move(cur));
        return out;
    }
    std::vector<std::string> run;
    auto flush = [&] {
        if (run.size() == 1) {
            emit(run[0]);
        }
        for (std::size_t i = 0; i + 1 < run.size(); ++i) {
            emit(run[i] + run[i + 1]);
        }
        run.clear();
    };
    for (auto& [unit, cp] : codepoints(text)) {
        if (breaks_run(cp)) {
            flush();
        } else {
            run.push_back(cp < 0x80 ? to_lower_ascii(unit) : unit);
        }
    }
    flush();
    return out;
}

// ---------------------------------------------------------------------------
// Inverted index

namespace {

template <typename Doc>
void build_impl(std::span<const Doc> docs, const Tokenizer& tokenizer,
                std::vector<std::string>& ids, std::vector<std::uint32_t>& lengths,
                std::unordered_map<std::string, std::vector<Posting>>& postings)
{
    if (docs.empty()) {
        throw Error(ErrorKind::empty_input, "cannot build an index over zero documents");
    }
    for (std::size_t d = 0; d < docs.size(); ++d) {
        auto tokens = tokenizer.tokenize(docs[d].text);
        ids.emplace_back(docs[d].id);
        lengths.push_back(static_cast<std::uint32_t>(tokens.size()));
        std::sort(tokens.begin(), tokens.end());
        for (std::size_t i = 0; i < tokens.size();) {
            std::size_t j = i;
            while (j < tokens.size() && tokens[j] == tokens[i]) {
                ++j;
            }
            postings[tokens[i]].push_back(
                {static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(j - i)});
            i = j;
        }
    }
}

}  // namespace

InvertedIndex InvertedIndex::build(std::span<const Document> docs, const Tokenizer& tokenizer)
{
    InvertedIndex idx;
    idx.m_tokenizer = tokenizer;
    build_impl(docs, tokenizer, idx.m_doc_ids, idx.m_doc_lengths, idx.m_postings);
    idx.finish();
    return idx;
}

InvertedIndex InvertedIndex::build(std::span<const DocRef> docs, const Tokenizer& tokenizer)
{
    InvertedIndex idx;
    idx.m_tokenizer = tokenizer;
    build_impl(docs, tokenizer, idx.m_doc_ids, idx.m_doc_lengths, idx.m_postings);
    idx.finish();
    return idx;
}

void InvertedIndex::finish()
{
    m_doc_pos.clear();
    for (std::size_t d = 0; d < m_doc_ids.size(); ++d) {
        if (!m_doc_pos.emplace(m_doc_ids[d], d).second) {
            throw Error(ErrorKind::integrity, "duplicate document id '" + m_doc_ids[d] + "' in index");
        }
    }
    double total = 0.0;
    for (auto len : m_doc_lengths) {
        total += len;
    }
    m_avg_doc_len = m_doc_ids.empty() ? 0.0 : total / static_cast<double>(m_doc_ids.size());
}

std::size_t InvertedIndex::doc_index(std::string_view id) const
{
    auto it = m_doc_pos.find(std::string(id));
    if (it == m_doc_pos.end()) {
        throw Error(ErrorKind::not_found, "document '" + std::string(id) + "' is not indexed");
    }
    return it->second;
}

bool InvertedIndex::contains(std::string_view id) const
{
    return m_doc_pos.contains(std::string(id));
}

std::size_t InvertedIndex::df(const std::string& term) const
{
    auto it = m_postings.find(term);
    return it == m_postings.end() ? 0 : it->second.size();
}

std::span<const Posting> InvertedIndex::postings(const std::string& term) const
{
    auto it = m_postings.find(term);
    if (it == m_postings.end()) {
        return {};
    }
    return it->second;
}

std::uint32_t InvertedIndex::tf(const std::string& term, std::size_t doc) const
{
    auto list = postings(term);
    auto it = std::lower_bound(list.begin(), list.end(), doc,
                               [](const Posting& p, std::size_t d) { return p.doc < d; });
    return (it != list.end() && it->doc == doc) ? it->tf : 0;
}

std::vector<std::string> InvertedIndex::terms() const
{
    std::vector<std::string> out;
    out.reserve(m_postings.size());
    for (const auto& [t, _] : m_postings) {
        out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

constexpr char kMagic[6] = {'L', 'X', 'I', 'D', 'X', '1'};
constexpr std::uint32_t kIndexVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v)
{
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_str(std::ostream& out, const std::string& s)
{
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in)
{
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw Error(ErrorKind::parse, "truncated index file");
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::string get_str(std::istream& in)
{
    auto len = get_u32(in);
    std::string s(len, '\0');
    if (len > 0 && !in.read(s.data(), len)) {
        throw Error(ErrorKind::parse, "truncated index file");
    }
    return s;
}

}  // namespace

void InvertedIndex::save(std::ostream& out) const
{
    out.write(kMagic, sizeof(kMagic));
    put_u32(out, kIndexVersion);
    out.put(static_cast<char>(m_tokenizer.mode()));
    put_u32(out, static_cast<std::uint32_t>(m_tokenizer.stopwords().size()));
    for (const auto& s : m_tokenizer.stopwords()) {
        put_str(out, s);
    }
    put_u32(out, static_cast<std::uint32_t>(m_doc_ids.size()));
    for (std::size_t d = 0; d < m_doc_ids.size(); ++d) {
        put_str(out, m_doc_ids[d]);
        put_u32(out, m_doc_lengths[d]);
    }
    auto ts = terms();
    put_u32(out, static_cast<std::uint32_t>(ts.size()));
    for (const auto& t : ts) {
        put_str(out, t);
        const auto& list = m_postings.at(t);
        put_u32(out, static_cast<std::uint32_t>(list.size()));
        for (const auto& p : list) {
            put_u32(out, p.doc);
            put_u32(out, p.tf);
        }
    }
}

InvertedIndex InvertedIndex::load(std::istream& in)
{
    char magic[sizeof(kMagic)];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw Error(ErrorKind::parse, "not an index file (bad magic)");
    }
    if (auto v = get_u32(in); v != kIndexVersion) {
        throw Error(ErrorKind::parse, "unsupported index version " + std::to_string(v));
    }
    int mode = in.get();
    if (mode != 0 && mode != 1) {
        throw Error(ErrorKind::parse, "unknown tokenizer mode in index header");
    }
    std::set<std::string> stop;
    for (auto n = get_u32(in); n > 0; --n) {
        stop.insert(get_str(in));
    }
    InvertedIndex idx;
    idx.m_tokenizer = Tokenizer(static_cast<TokenizerMode>(mode), std::move(stop));
    auto n_docs = get_u32(in);
    for (std::uint32_t d = 0; d < n_docs; ++d) {
        idx.m_doc_ids.push_back(get_str(in));
        idx.m_doc_lengths.push_back(get_u32(in));
    }
    auto n_terms = get_u32(in);
    for (std::uint32_t t = 0; t < n_terms; ++t) {
        auto term = get_str(in);
        auto& list = idx.m_postings[term];
        auto n = get_u32(in);
        list.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) {
            Posting p;
            p.doc = get_u32(in);
            p.tf = get_u32(in);
            if (p.doc >= n_docs) {
                throw Error(ErrorKind::parse, "posting references document out of range");
            }
            list.push_back(p);
        }
    }
    idx.finish();
    return idx;
}

void InvertedIndex::save_file(const std::filesystem::path& path) const
{
    std::ostringstream buf;
    save(buf);
    write_file_atomic(path, buf.str());
}

InvertedIndex InvertedIndex::load_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, "cannot open " + path.string());
    }
    return load(in);
}

// ---------------------------------------------------------------------------
// Scoring

void Bm25Params::validate() const
{
    if (!(k1 > 0.0) || !std::isfinite(k1)) {
        throw Error(ErrorKind::config, "bm25 k1 must be positive");
    }
    if (!(b >= 0.0 && b <= 1.0)) {
        throw Error(ErrorKind::config, "bm25 b must lie in [0, 1]");
    }
}

double bm25_idf(std::size_t n_docs, std::size_t df)
{
    const auto n = static_cast<double>(n_docs);
    const auto f = static_cast<double>(df);
    return std::log(1.0 + (n - f + 0.5) / (f + 0.5));
}

namespace {

double bm25_term(double idf, double tf, double dl, double avgdl, const Bm25Params& p)
{
    const double norm = avgdl > 0.0 ? dl / avgdl : 1.0;
    return idf * tf * (p.k1 + 1.0) / (tf + p.k1 * (1.0 - p.b + p.b * norm));
}

}  // namespace

double bm25_score(const InvertedIndex& index,
                  std::span<const std::string> query_tokens,
                  std::string_view doc_id,
                  const Bm25Params& params)
{
    const auto doc = index.doc_index(doc_id);
    const double dl = index.doc_length(doc);
    double score = 0.0;
    for (const auto& term : query_tokens) {
        const auto tf = index.tf(term, doc);
        if (tf == 0) {
            continue;
        }
        score += bm25_term(bm25_idf(index.size(), index.df(term)), tf, dl, index.avg_doc_len(), params);
    }
    return score;
}

std::vector<ScoredDoc> rank_all(const InvertedIndex& index,
                                std::string_view query,
                                LexicalScorer scorer,
                                const Bm25Params& params)
{
    const auto tokens = index.tokenizer().tokenize(query);
    std::vector<double> acc(index.size(), 0.0);
    if (scorer == LexicalScorer::bm25) {
        params.validate();
        // Same per-token accumulation order as bm25_score, so the two agree
        // bit for bit.
        for (const auto& term : tokens) {
            const double idf = bm25_idf(index.size(), index.df(term));
            for (const auto& p : index.postings(term)) {
                acc[p.doc] += bm25_term(idf, p.tf, index.doc_length(p.doc), index.avg_doc_len(), params);
            }
        }
    } else {
        const auto qv = tfidf_vector(tokens, index);
        // Document vectors use the same idf table; normalize per document.
        std::vector<double> norm2(index.size(), 0.0);
        for (const auto& term : index.terms()) {
            const double idf = tfidf_idf(index.size(), index.df(term));
            for (const auto& p : index.postings(term)) {
                const double w = p.tf * idf;
                norm2[p.doc] += w * w;
            }
        }
        for (const auto& [term, qw] : qv.entries) {
            const double idf = tfidf_idf(index.size(), index.df(term));
            for (const auto& p : index.postings(term)) {
                acc[p.doc] += qw * p.tf * idf;
            }
        }
        for (std::size_t d = 0; d < acc.size(); ++d) {
            acc[d] = norm2[d] > 0.0 ? acc[d] / std::sqrt(norm2[d]) : 0.0;
        }
    }
    std::vector<ScoredDoc> out;
    out.reserve(index.size());
    for (std::size_t d = 0; d < index.size(); ++d) {
        out.push_back({index.doc_id(d), acc[d]});
    }
    sort_ranked(out);
    return out;
}

std::vector<ScoredDoc> retrieve_top_k(const InvertedIndex& index,
                                      std::string_view query,
                                      std::size_t k,
                                      LexicalScorer scorer,
                                      const Bm25Params& params)
{
    if (k == 0) {
        throw Error(ErrorKind::precondition, "retrieve_top_k needs k >= 1");
    }
    auto all = rank_all(index, query, scorer, params);
    if (all.size() > k) {
        all.resize(k);
    }
    return all;
}

double tfidf_idf(std::size_t n_docs, std::size_t df)
{
    return std::log((static_cast<double>(n_docs) + 1.0) / (static_cast<double>(df) + 1.0)) + 1.0;
}

double TfIdfVector::dot(const TfIdfVector& other) const
{
    double s = 0.0;
    auto a = entries.begin();
    auto b = other.entries.begin();
    while (a != entries.end() && b != other.entries.end()) {
        if (a->first < b->first) {
            ++a;
        } else if (b->first < a->first) {
            ++b;
        } else {
            s += a->second * b->second;
            ++a;
            ++b;
        }
    }
    return s;
}

TfIdfVector tfidf_vector(std::span<const std::string> tokens, const InvertedIndex& idf_source)
{
    std::vector<std::string> sorted(tokens.begin(), tokens.end());
    std::sort(sorted.begin(), sorted.end());
    TfIdfVector v;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) {
            ++j;
        }
        const double w = static_cast<double>(j - i) * tfidf_idf(idf_source.size(), idf_source.df(sorted[i]));
        v.entries.emplace_back(sorted[i], w);
        norm2 += w * w;
        i = j;
    }
    const double norm = std::sqrt(norm2);
    for (auto& [_, w] : v.entries) {
        w /= norm;
    }
    return v;
}

double tfidf_cosine(std::string_view a,
                    std::string_view b,
                    const Tokenizer& tokenizer,
                    const InvertedIndex& idf_source)
{
    const auto ta = tokenizer.tokenize(a);
    const auto tb = tokenizer.tokenize(b);
    if (ta.empty() && tb.empty()) {
        throw Error(ErrorKind::undefined_similarity, "both texts are empty");
    }
    if (ta.empty() || tb.empty()) {
        return 0.0;
    }
    const double c = tfidf_vector(ta, idf_source).dot(tfidf_vector(tb, idf_source));
    return std::clamp(c, 0.0, 1.0);
}

double embedding_cosine(std::span<const double> u, std::span<const double> v)
{
    if (u.size() != v.size()) {
        throw Error(ErrorKind::validation, "embedding dimensions differ (" + std::to_string(u.size()) +
                                               " vs " + std::to_string(v.size()) + ")");
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) {
        throw Error(ErrorKind::validation, "cosine with a zero vector");
    }
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

}  // namespace coliee
