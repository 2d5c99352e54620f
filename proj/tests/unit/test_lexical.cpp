#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "coliee/error.hpp"
#include "coliee/lexical.hpp"
#include "support.hpp"

using namespace coliee;

namespace {

std::vector<Document> docs_of(const std::vector<std::string>& texts)
{
    std::vector<Document> docs;
    for (std::size_t i = 0; i < texts.size(); ++i) docs.push_back({"d" + std::to_string(i + 1), texts[i]});
    return docs;
}

std::vector<std::string> toks(std::string_view text) { return Tokenizer{}.tokenize(text); }

}  // namespace

TEST(Tokenizer, WordMode)
{
    const Tokenizer t;
    EXPECT_EQ(t.tokenize("The person's  Domicile, (1) is-unknown."),
              (std::vector<std::string>{"the", "person", "s", "domicile", "1", "is", "unknown"}));
    EXPECT_TRUE(t.tokenize(" ,.;").empty());
    const Tokenizer stop(TokenizerMode::word, {"the"});
    EXPECT_EQ(stop.tokenize("The cat"), std::vector<std::string>{"cat"});
}

TEST(Tokenizer, CharBigramMode)
{
    const Tokenizer t(TokenizerMode::char_bigram);
    EXPECT_EQ(t.tokenize("住所地"), (std::vector<std::string>{"住所", "所地"}));
    EXPECT_EQ(t.tokenize("居、所"), (std::vector<std::string>{"居", "所"}));
    EXPECT_EQ(Tokenizer::for_lang(Lang::ja).mode(), TokenizerMode::char_bigram);
    EXPECT_EQ(Tokenizer::for_lang(Lang::en).mode(), TokenizerMode::word);
}

TEST(Tokenizer, Deterministic)
{
    const Tokenizer t;
    const std::string text = "A contract of sale becomes effective when one party promises.";
    const auto first = t.tokenize(text);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(t.tokenize(text), first);
}

TEST(InvertedIndex, TwoDocExample)
{
    const auto idx = InvertedIndex::build(docs_of({"a b", "b c"}), Tokenizer{});
    EXPECT_EQ(idx.size(), 2u);
    EXPECT_EQ(idx.df("b"), 2u);
    EXPECT_EQ(idx.df("zzz"), 0u);
    EXPECT_DOUBLE_EQ(idx.avg_doc_len(), 2.0);
    EXPECT_EQ(idx.terms(), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(InvertedIndex, RepeatedTerm)
{
    const auto idx = InvertedIndex::build(docs_of({"x x x"}), Tokenizer{});
    EXPECT_EQ(idx.tf("x", 0), 3u);
    EXPECT_EQ(idx.doc_length(0), 3u);
}

TEST(InvertedIndex, ManyArticles)
{
    std::vector<std::string> texts;
    for (int i = 0; i < 768; ++i) texts.push_back("article " + std::to_string(i));
    EXPECT_EQ(InvertedIndex::build(docs_of(texts), Tokenizer{}).size(), 768u);
}

TEST(InvertedIndex, Errors)
{
    try {
        InvertedIndex::build(std::vector<Document>{}, Tokenizer{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::empty_input);
    }
    EXPECT_THROW(InvertedIndex::build(std::vector<Document>{{"a", "x"}, {"a", "y"}}, Tokenizer{}), Error);
}

TEST(InvertedIndex, PostingInvariants)
{
    std::mt19937_64 gen(11);
    for (int round = 0; round < 50; ++round) {
        std::vector<std::string> texts;
        const int n = 1 + static_cast<int>(gen() % 8);
        for (int d = 0; d < n; ++d) {
            std::string t;
            const int len = static_cast<int>(gen() % 9);
            for (int i = 0; i < len; ++i) t += "w" + std::to_string(gen() % 6) + " ";
            texts.push_back(t);
        }
        const auto idx = InvertedIndex::build(docs_of(texts), Tokenizer{});
        std::vector<std::uint64_t> sums(idx.size(), 0);
        for (const auto& term : idx.terms()) {
            std::uint32_t prev = 0;
            bool first = true;
            for (const auto& p : idx.postings(term)) {
                if (!first) EXPECT_GT(p.doc, prev);
                prev = p.doc;
                first = false;
                sums[p.doc] += p.tf;
            }
        }
        double total = 0;
        for (std::size_t d = 0; d < idx.size(); ++d) {
            EXPECT_EQ(sums[d], idx.doc_length(d));
            total += idx.doc_length(d);
        }
        EXPECT_DOUBLE_EQ(idx.avg_doc_len(), total / static_cast<double>(idx.size()));
    }
}

TEST(InvertedIndex, BinaryRoundTrip)
{
    const auto idx = InvertedIndex::build(docs_of({"alpha beta", "beta gamma gamma", ""}),
                                          Tokenizer(TokenizerMode::word, {"alpha"}));
    std::stringstream buf;
    idx.save(buf);
    EXPECT_EQ(buf.str().substr(0, 6), "LXIDX1");
    const auto back = InvertedIndex::load(buf);
    EXPECT_EQ(back.size(), idx.size());
    EXPECT_EQ(back.terms(), idx.terms());
    EXPECT_EQ(back.tokenizer().stopwords(), idx.tokenizer().stopwords());
    EXPECT_EQ(back.tf("gamma", 1), 2u);
    const auto q = toks("beta gamma");
    for (std::size_t d = 0; d < idx.size(); ++d) {
        EXPECT_EQ(bm25_score(back, q, idx.doc_id(d)), bm25_score(idx, q, idx.doc_id(d)));
    }
    std::stringstream bad("NOTIDX....");
    try {
        InvertedIndex::load(bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::parse);
    }
}

TEST(Bm25, ToyCorpusMatchesOracle)
{
    const auto idx = InvertedIndex::build(docs_of({"a b c", "b b d", "c d e e"}), Tokenizer{});
    const auto q = toks("b");
    EXPECT_NEAR(bm25_score(idx, q, "d1"), 0.4790809525573485, 1e-12);
    EXPECT_NEAR(bm25_score(idx, q, "d2"), 0.6236081672953195, 1e-12);
    EXPECT_EQ(bm25_score(idx, q, "d3"), 0.0);
    EXPECT_NEAR(bm25_score(idx, q, "d2", {1.2, 0.75}), 0.664956903112938, 1e-12);
}

TEST(Bm25, IdfIsLuceneVariant)
{
    EXPECT_DOUBLE_EQ(bm25_idf(3, 2), std::log(1.0 + 1.5 / 2.5));
    EXPECT_GT(bm25_idf(10, 10), 0.0);
}

TEST(Bm25, UnknownDocAndBadParams)
{
    const auto idx = InvertedIndex::build(docs_of({"a"}), Tokenizer{});
    try {
        bm25_score(idx, toks("a"), "nope");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::not_found);
    }
    EXPECT_THROW((Bm25Params{0.0, 0.4}.validate()), Error);
    EXPECT_THROW((Bm25Params{0.9, 1.5}.validate()), Error);
    EXPECT_NO_THROW((Bm25Params{}.validate()));
}

TEST(Bm25, SmallK1DependsOnlyOnPresence)
{
    const auto idx = InvertedIndex::build(docs_of({"x y", "x x x x y", "z"}), Tokenizer{});
    const Bm25Params p{1e-9, 0.0};
    const auto q = toks("x");
    EXPECT_NEAR(bm25_score(idx, q, "d1", p), bm25_score(idx, q, "d2", p), 1e-8);
    EXPECT_NEAR(bm25_score(idx, q, "d1", p), bm25_idf(3, 2), 1e-8);
}

TEST(Bm25, MonotoneInTf)
{
    // Same length, only the tf of the query term varies.
    const auto idx = InvertedIndex::build(docs_of({"q f f f", "q q f f", "q q q f", "q q q q", "f f f f"}), Tokenizer{});
    const auto q = toks("q");
    for (const auto& p : {Bm25Params{}, Bm25Params{1.5, 1.0}, Bm25Params{0.2, 0.0}}) {
        double prev = bm25_score(idx, q, "d5", p);
        EXPECT_EQ(prev, 0.0);
        for (const char* id : {"d1", "d2", "d3", "d4"}) {
            const double s = bm25_score(idx, q, id, p);
            EXPECT_GE(s, prev);
            prev = s;
        }
    }
}

TEST(Retrieve, TopKLengthAndTies)
{
    std::vector<std::string> texts;
    for (int i = 0; i < 768; ++i) texts.push_back(i % 3 == 0 ? "sale contract" : "lease " + std::to_string(i));
    const auto idx = InvertedIndex::build(docs_of(texts), Tokenizer{});
    EXPECT_EQ(retrieve_top_k(idx, "sale", 150).size(), 150u);
    EXPECT_EQ(retrieve_top_k(idx, "sale", 5000).size(), 768u);
    const auto top = retrieve_top_k(idx, "sale", 3);
    EXPECT_EQ(top[0].doc_id, "d1");
    EXPECT_EQ(top[1].doc_id, "d10");
    EXPECT_EQ(top[0].score, top[1].score);
    EXPECT_THROW(retrieve_top_k(idx, "sale", 0), Error);
}

TEST(Retrieve, FullRankingConsistentWithPairwiseScores)
{
    const auto idx = InvertedIndex::build(
        docs_of({"a b c", "b b d", "c d e e", "a a", "e", "b", "q r s"}), Tokenizer{});
    for (const char* query : {"b", "a e", "d d c", "zzz"}) {
        const auto ranked = rank_all(idx, query);
        ASSERT_EQ(ranked.size(), idx.size());
        for (std::size_t i = 0; i + 1 < ranked.size(); ++i) {
            EXPECT_TRUE(ranks_before(ranked[i], ranked[i + 1]));
            EXPECT_EQ(ranked[i].score, bm25_score(idx, toks(query), ranked[i].doc_id));
        }
    }
}

TEST(TfIdf, Cosines)
{
    const auto idx = InvertedIndex::build(docs_of({"if a person s domicile is unknown",
                                                   "if a person does not have a domicile in japan",
                                                   "the law of domicile is to be applied"}),
                                          Tokenizer{});
    EXPECT_NEAR(tfidf_cosine("person domicile", "person domicile", idx), 1.0, 1e-12);
    EXPECT_EQ(tfidf_cosine("alpha beta", "gamma", idx), 0.0);
    EXPECT_EQ(tfidf_cosine("", "gamma", idx), 0.0);
    try {
        tfidf_cosine("", " ,", idx);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::undefined_similarity);
    }
    EXPECT_DOUBLE_EQ(tfidf_idf(3, 1), std::log(4.0 / 2.0) + 1.0);
    const auto v = tfidf_vector(toks("domicile domicile japan unseen"), idx);
    double norm = 0;
    for (const auto& [t, w] : v.entries) norm += w * w;
    EXPECT_NEAR(norm, 1.0, 1e-12);
}

TEST(TfIdf, ConditionMatchingOrdersTableOnePairs)
{
    const std::string p1 = "If a person's domicile is unknown";
    const std::string p2 = "If a person does not have a domicile in Japan and regardless of whether the person is a "
                           "Japanese national or a foreign national";
    const std::string p3 = p2 + " and if the law of domicile is to be applied in accordance with the provisions of "
                                "the laws that establish the governing law";
    const auto idx = InvertedIndex::build(docs_of({p1, p2, p3}), Tokenizer{});
    const double c1 = tfidf_cosine("domicile unknown", p1, idx);
    const double c3 = tfidf_cosine("domicile unknown", p3, idx);
    EXPECT_NEAR(c1, 0.6002087544119831, 1e-12);
    EXPECT_NEAR(c3, 0.07958337024950715, 1e-12);
    EXPECT_GT(c1, c3);
}

TEST(TfIdf, Symmetric)
{
    const auto idx = InvertedIndex::build(docs_of({"a b c", "b b d", "c d e e", "f"}), Tokenizer{});
    std::mt19937_64 gen(3);
    const std::vector<std::string> words{"a", "b", "c", "d", "e", "f", "g"};
    for (int i = 0; i < 200; ++i) {
        std::string x, y;
        for (int j = 0; j < 1 + static_cast<int>(gen() % 5); ++j) x += words[gen() % words.size()] + " ";
        for (int j = 0; j < 1 + static_cast<int>(gen() % 5); ++j) y += words[gen() % words.size()] + " ";
        const double xy = tfidf_cosine(x, y, idx);
        EXPECT_EQ(xy, tfidf_cosine(y, x, idx));
        EXPECT_GE(xy, 0.0);
        EXPECT_LE(xy, 1.0 + 1e-12);
    }
}

TEST(EmbeddingCosine, Cases)
{
    const std::vector<double> u{0.5, -1.25, 2.0, 0.75, -0.5, 1.5, -2.25, 0.25};
    const std::vector<double> v{1.0, 0.5, -0.75, 2.5, 1.25, -1.0, 0.5, 2.0};
    EXPECT_NEAR(embedding_cosine(u, v), -0.17323973216880928, 1e-12);
    EXPECT_NEAR(embedding_cosine(u, u), 1.0, 1e-12);
    const std::vector<double> e1{1, 0}, e2{0, 1}, zero{0, 0}, three{1, 2, 3};
    EXPECT_EQ(embedding_cosine(e1, e2), 0.0);
    EXPECT_THROW(embedding_cosine(e1, three), Error);
    EXPECT_THROW(embedding_cosine(e1, zero), Error);
}
