#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "coliee/error.hpp"
#include "coliee/mining.hpp"
#include "coliee/util.hpp"
#include "fixtures.hpp"
#include "support.hpp"

using namespace coliee;
using testing_support::matrix_of;
using testing_support::statute_corpus;

namespace {

std::vector<std::string> negatives_of(const TrainingPairSet& set, const std::string& qid)
{
    std::vector<std::string> out;
    for (const auto& p : set.pairs())
        if (p.query_id == qid && p.label == Label::negative) out.push_back(p.doc_id);
    return out;
}

std::vector<std::string> positives_of(const TrainingPairSet& set, const std::string& qid)
{
    std::vector<std::string> out;
    for (const auto& p : set.pairs())
        if (p.query_id == qid && p.label == Label::positive) out.push_back(p.doc_id);
    return out;
}

void expect_label_consistency(const TrainingPairSet& set, const GoldLabels& gold)
{
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& p : set.pairs()) {
        const auto it = gold.find(p.query_id);
        const bool in_gold = it != gold.end() && it->second.contains(p.doc_id);
        EXPECT_EQ(p.label == Label::positive, in_gold) << p.query_id << " " << p.doc_id;
        EXPECT_TRUE(seen.insert({p.query_id, p.doc_id}).second);
    }
}

// Query "x"; d1 is gold, d2..d5 have equal length and decreasing tf.
Corpus inverted_order_corpus()
{
    return statute_corpus({"x", "x x x x", "x x x y", "x x y y", "x y y y"}, {{"q", "x"}}, {{"q", {"d1"}}});
}

}  // namespace

TEST(Round1, PositivesPlusTopNegatives)
{
    std::vector<std::string> texts;
    for (int i = 0; i < 13; ++i) texts.push_back("term " + std::string(static_cast<std::size_t>(i + 1), 'a') + " q");
    const auto corpus = statute_corpus(texts, {{"q1", "term q"}}, {{"q1", {"d3"}}});
    const auto pools = CandidatePools::build(corpus, Tokenizer{});
    const std::vector<std::string> ids{"q1"};
    const auto set = mine_negatives_round1(corpus, corpus.gold(), pools, ids);
    EXPECT_EQ(positives_of(set, "q1"), std::vector<std::string>{"d3"});
    EXPECT_EQ(negatives_of(set, "q1").size(), 10u);
    for (const auto& p : set.pairs()) {
        EXPECT_EQ(p.round, 1);
        EXPECT_EQ(p.provenance, Provenance::bm25);
    }
    expect_label_consistency(set, corpus.gold());
}

TEST(Round1, PoolExhausted)
{
    const auto corpus = statute_corpus({"a", "a b", "b", "c"}, {{"q", "a"}}, {{"q", {"d1"}}});
    const auto pools = CandidatePools::build(corpus, Tokenizer{});
    const std::vector<std::string> ids{"q"};
    const auto set = mine_negatives_round1(corpus, corpus.gold(), pools, ids);
    EXPECT_EQ(positives_of(set, "q").size(), 1u);
    // Every non-gold candidate becomes a negative, in BM25 order.
    EXPECT_EQ(negatives_of(set, "q"), (std::vector<std::string>{"d2", "d3", "d4"}));
}

TEST(Round1, GoldNeverNegativeAndBm25Order)
{
    const auto corpus = inverted_order_corpus();
    const auto pools = CandidatePools::build(corpus, Tokenizer{});
    const std::vector<std::string> ids{"q"};
    const auto set = mine_negatives_round1(corpus, corpus.gold(), pools, ids);
    EXPECT_EQ(negatives_of(set, "q"), (std::vector<std::string>{"d2", "d3", "d4", "d5"}));
    expect_label_consistency(set, corpus.gold());
    MiningParams tfidf;
    tfidf.scorer = LexicalScorer::tfidf;
    for (const auto& p : mine_negatives_round1(corpus, corpus.gold(), pools, ids, tfidf).pairs())
        EXPECT_EQ(p.provenance, Provenance::tfidf);
}

TEST(Round1, UnknownQuery)
{
    const auto corpus = inverted_order_corpus();
    const auto pools = CandidatePools::build(corpus, Tokenizer{});
    const std::vector<std::string> ids{"nope"};
    EXPECT_THROW(mine_negatives_round1(corpus, corpus.gold(), pools, ids), Error);
}

TEST(Round2, ModelOrderReplacesBm25Order)
{
    const auto corpus = inverted_order_corpus();
    const std::vector<std::pair<std::string, double>> model{
        {"d1", 0.5}, {"d2", 0.6}, {"d3", 0.7}, {"d4", 0.8}, {"d5", 0.9}};
    std::vector<std::tuple<std::string, std::string, std::string, double>> rows;
    for (const auto& [d, s] : model) rows.emplace_back("m", "q", d, s);
    const auto matrix = matrix_of(rows);
    const std::vector<std::string> ids{"q"};
    const auto set = mine_negatives_round2(corpus, corpus.gold(), matrix, "m", ids);

    // Direct sort of the non-gold candidates by model score.
    auto oracle = model;
    oracle.erase(oracle.begin());
    std::sort(oracle.begin(), oracle.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    std::vector<std::string> expected;
    for (const auto& [d, s] : oracle) expected.push_back(d);
    EXPECT_EQ(negatives_of(set, "q"), expected);
    EXPECT_EQ(expected, (std::vector<std::string>{"d5", "d4", "d3", "d2"}));
    for (const auto& p : set.pairs()) {
        EXPECT_EQ(p.round, 2);
        EXPECT_EQ(p.provenance, Provenance::model);
    }
}

TEST(Round2, TiesAndZeroNegatives)
{
    const auto corpus = inverted_order_corpus();
    const auto matrix = matrix_of(
        {{"m", "q", "d1", 0.1}, {"m", "q", "d2", 0.3}, {"m", "q", "d3", 0.8}, {"m", "q", "d4", 0.8}, {"m", "q", "d5", 0.2}});
    const std::vector<std::string> ids{"q"};
    EXPECT_EQ(negatives_of(mine_negatives_round2(corpus, corpus.gold(), matrix, "m", ids, 2), "q"),
              (std::vector<std::string>{"d3", "d4"}));
    const auto none = mine_negatives_round2(corpus, corpus.gold(), matrix, "m", ids, 0);
    EXPECT_EQ(none.size(), 1u);
    EXPECT_EQ(none.pairs()[0].label, Label::positive);
    EXPECT_THROW(mine_negatives_round2(corpus, corpus.gold(), matrix, "other", ids), Error);
}

TEST(Round2, MissingScoreIsCompletenessError)
{
    std::vector<CaseFragment> cases{{"c1", "frag", {{"p1", "a"}, {"p2", "b"}, {"p3", "c"}}}};
    const auto corpus = Corpus::build({}, cases, {{"c1", "frag", Lang::en, Split::train}}, {{"c1", {"p1"}}});
    const auto matrix = matrix_of({{"m", "c1", "p1", 0.5}, {"m", "c1", "p2", 0.4}});
    const std::vector<std::string> ids{"c1"};
    try {
        mine_negatives_round2(corpus, corpus.gold(), matrix, "m", ids);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::completeness);
    }
}

TEST(Round2, Bm25ScoresReproduceRound1)
{
    std::mt19937_64 gen(17);
    for (int round = 0; round < 20; ++round) {
        std::vector<std::string> texts;
        for (int d = 0; d < 15; ++d) {
            std::string t;
            for (int i = 0; i < 3 + static_cast<int>(gen() % 6); ++i) t += "w" + std::to_string(gen() % 10) + " ";
            texts.push_back(t);
        }
        std::vector<std::pair<std::string, std::string>> queries;
        GoldLabels gold;
        for (int q = 0; q < 4; ++q) {
            const auto id = "q" + std::to_string(q);
            queries.emplace_back(id, "w" + std::to_string(gen() % 10) + " w" + std::to_string(gen() % 10));
            gold[id] = {"d" + std::to_string(1 + gen() % 15)};
        }
        const auto corpus = statute_corpus(texts, queries, gold);
        const auto pools = CandidatePools::build(corpus, Tokenizer{});
        const auto ids = corpus.query_ids();
        std::vector<ScoreRow> rows;
        for (const auto& qid : ids)
            for (const auto& sd : rank_all(*pools.index_for(qid), corpus.find_query(qid)->text))
                rows.push_back({"bm25", qid, sd.doc_id, sd.score});
        const auto matrix = ScoreMatrix::from_rows(rows);
        const auto r1 = mine_negatives_round1(corpus, gold, pools, ids, MiningParams{5});
        const auto r2 = mine_negatives_round2(corpus, gold, matrix, "bm25", ids, 5);
        ASSERT_EQ(r1.size(), r2.size());
        for (std::size_t i = 0; i < r1.size(); ++i) {
            EXPECT_EQ(r1.pairs()[i].query_id, r2.pairs()[i].query_id);
            EXPECT_EQ(r1.pairs()[i].doc_id, r2.pairs()[i].doc_id);
            EXPECT_EQ(r1.pairs()[i].label, r2.pairs()[i].label);
        }
        expect_label_consistency(r2, gold);
    }
}

TEST(Mining, DeterministicAcrossWorkerCounts)
{
    std::vector<std::string> texts;
    std::vector<std::pair<std::string, std::string>> queries;
    GoldLabels gold;
    for (int d = 0; d < 30; ++d) texts.push_back("w" + std::to_string(d % 7) + " w" + std::to_string(d % 5));
    for (int q = 0; q < 25; ++q) {
        queries.emplace_back("q" + std::to_string(q), "w" + std::to_string(q % 7));
        gold["q" + std::to_string(q)] = {"d" + std::to_string(1 + q)};
    }
    const auto corpus = statute_corpus(texts, queries, gold);
    const auto pools = CandidatePools::build(corpus, Tokenizer{});
    const auto ids = corpus.query_ids();
    set_max_jobs(1);
    const auto a = serialize_pairs(mine_negatives_round1(corpus, gold, pools, ids));
    set_max_jobs(4);
    const auto b = serialize_pairs(mine_negatives_round1(corpus, gold, pools, ids));
    set_max_jobs(1);
    EXPECT_EQ(a, b);
}

TEST(Pairs, SerializeRoundTrip)
{
    TrainingPairSet set;
    EXPECT_TRUE(set.add({"q1", "d1", Label::positive, 1, Provenance::bm25}));
    EXPECT_TRUE(set.add({"q1", "d2", Label::negative, 2, Provenance::datflt_q}));
    EXPECT_FALSE(set.add({"q1", "d2", Label::positive, 1, Provenance::model}));
    testing_support::TempDir dir;
    write_file_atomic(dir / "pairs.jsonl", serialize_pairs(set));
    const auto back = load_pairs(dir / "pairs.jsonl");
    EXPECT_EQ(back.pairs(), set.pairs());
    EXPECT_NE(serialize_pairs(set).find("\"datflt-q\""), std::string::npos);
}

TEST(Missed, Definitions)
{
    const GoldLabels gold{{"q1", {"a2"}}, {"q2", {"a2"}}, {"q3", {"a1"}}};
    const PredictionSet preds{{"q1", {"a1"}}, {"q2", {"a1", "a2"}}, {"q3", {}}};
    const auto by_gold = find_missed_queries(preds, &gold);
    EXPECT_EQ(by_gold.defined_by, MissedBy::gold_based);
    EXPECT_EQ(by_gold.query_ids, (std::set<std::string>{"q1", "q3"}));
    const auto by_empty = find_missed_queries(preds);
    EXPECT_EQ(by_empty.defined_by, MissedBy::empty_prediction);
    EXPECT_EQ(by_empty.query_ids, std::set<std::string>{"q3"});
}

class DatFltQ : public ::testing::Test {
  protected:
    DatFltQ()
        : corpus(statute_corpus({"alpha", "beta", "gamma", "delta"},
                                {{"m1", "alpha beta"}, {"t1", "alpha"}, {"t2", "beta"}, {"t3", "gamma"}},
                                {{"m1", {"d1"}}, {"t1", {"d1"}}, {"t2", {"d2"}}, {"t3", {"d3"}}})),
          pools(CandidatePools::build(corpus, Tokenizer{}))
    {
        emb.add("m1", {1.0, 0.0});
        emb.add("m2", {1.0, 0.0});
        emb.add("t1", {0.9, std::sqrt(1 - 0.81)});
        emb.add("t2", {0.5, std::sqrt(0.75)});
        emb.add("t3", {0.1, std::sqrt(0.99)});
    }
    Corpus corpus;
    CandidatePools pools;
    EmbeddingStore emb;
    const std::vector<std::string> train{"t1", "t2", "t3"};
};

TEST_F(DatFltQ, NearestByCosine)
{
    EXPECT_EQ(nearest_queries("m1", emb, train, 2), (std::vector<std::string>{"t1", "t2"}));
    const std::vector<std::string> with_self{"m1", "t1", "t2", "t3"};
    EXPECT_EQ(nearest_queries("m1", emb, with_self, 1), std::vector<std::string>{"t1"});
    EXPECT_EQ(nearest_queries("m1", emb, train, 10).size(), 3u);
}

TEST_F(DatFltQ, SharedNeighboursAppearOnce)
{
    NegativeSource src;
    src.pools = &pools;
    const MissedQuerySet missed{{"m1", "m2"}, MissedBy::gold_based};
    const auto set = build_datflt_q(corpus, missed, emb, train, corpus.gold(), src, 2, 1);
    std::set<std::string> queries;
    for (const auto& p : set.pairs()) {
        queries.insert(p.query_id);
        EXPECT_EQ(p.provenance, Provenance::datflt_q);
    }
    EXPECT_EQ(queries, (std::set<std::string>{"t1", "t2"}));
    EXPECT_EQ(set.size(), 4u);
    expect_label_consistency(set, corpus.gold());
}

TEST_F(DatFltQ, MatrixNegatives)
{
    const auto matrix = matrix_of({{"m", "t1", "d1", 0.9}, {"m", "t1", "d2", 0.1}, {"m", "t1", "d4", 0.5}});
    NegativeSource src;
    src.matrix = &matrix;
    src.checkpoint = "m";
    const MissedQuerySet missed{{"m1"}, MissedBy::gold_based};
    const auto set = build_datflt_q(corpus, missed, emb, train, corpus.gold(), src, 1, 1);
    EXPECT_EQ(negatives_of(set, "t1"), std::vector<std::string>{"d4"});
}

TEST_F(DatFltQ, MissingEmbeddingNamesId)
{
    NegativeSource src;
    src.pools = &pools;
    const std::vector<std::string> bad{"t1", "t9"};
    try {
        build_datflt_q(corpus, {{"m1"}, MissedBy::gold_based}, emb, bad, corpus.gold(), src);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::not_found);
        EXPECT_NE(std::string(e.what()).find("t9"), std::string::npos);
    }
    EXPECT_THROW(build_datflt_q(corpus, {{"m9"}, MissedBy::gold_based}, emb, train, corpus.gold(), src), Error);
}

TEST(DatFltA, HardestNegativeAndDeepRanks)
{
    std::vector<std::string> texts(25, "text");
    GoldLabels gold{{"q", {}}};
    std::vector<std::tuple<std::string, std::string, std::string, double>> rows;
    for (int d = 1; d <= 25; ++d) {
        const auto id = "d" + std::to_string(d);
        rows.emplace_back("m0", "q", id, 1.0 - d * 0.01);
        if (d <= 10) gold["q"].insert(id);
    }
    const auto corpus = statute_corpus(texts, {{"q", "text"}}, gold);
    const auto matrix = matrix_of(rows);
    const std::vector<std::string> ids{"q"};
    const auto set = build_datflt_a(corpus, gold, matrix, "m0", ids);
    // Oracle: sort by score and drop gold.
    auto sorted = rows;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return std::get<3>(a) > std::get<3>(b); });
    std::vector<std::string> expected;
    for (const auto& r : sorted)
        if (!gold["q"].contains(std::get<2>(r)) && expected.size() < 10) expected.push_back(std::get<2>(r));
    EXPECT_EQ(negatives_of(set, "q"), expected);
    EXPECT_EQ(expected.front(), "d11");
    EXPECT_EQ(positives_of(set, "q").size(), 10u);

    const GoldLabels one{{"q", {"d2"}}};
    const auto corpus1 = statute_corpus(texts, {{"q", "text"}}, one);
    const auto hard = build_datflt_a(corpus1, one, matrix, "m0", ids);
    EXPECT_EQ(negatives_of(hard, "q").front(), "d1");
    for (const auto& p : hard.pairs()) EXPECT_EQ(p.provenance, Provenance::datflt_a);
}
