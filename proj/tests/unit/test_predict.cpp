#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <random>

#include "coliee/error.hpp"
#include "coliee/predict.hpp"
#include "coliee/util.hpp"
#include "fixtures.hpp"
#include "support.hpp"

using namespace coliee;

namespace {

std::vector<ScoredDoc> ranked(std::initializer_list<double> scores)
{
    std::vector<ScoredDoc> out;
    int i = 0;
    for (double s : scores) out.push_back({"d" + std::to_string(++i), s});
    return out;
}

bool subset(const std::vector<std::string>& a, const std::vector<std::string>& b)
{
    return std::all_of(a.begin(), a.end(), [&](const auto& x) { return std::find(b.begin(), b.end(), x) != b.end(); });
}

}  // namespace

TEST(TopKMargin, Examples)
{
    const auto r = ranked({0.9, 0.88, 0.5});
    EXPECT_EQ(select_topk_margin(r, 3, 0.05), (std::vector<std::string>{"d1", "d2"}));
    EXPECT_EQ(select_topk_margin(r, 3, 0.0), std::vector<std::string>{"d1"});
    EXPECT_EQ(select_topk_margin(r, 1, 100.0), std::vector<std::string>{"d1"});
    EXPECT_EQ(select_topk_margin(r, 3, 100.0).size(), 3u);
    // Gap exactly equal to m is excluded.
    const auto eq = ranked({1.0, 0.5});
    EXPECT_EQ(select_topk_margin(eq, 2, 0.5), std::vector<std::string>{"d1"});
    try {
        select_topk_margin({}, 1, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::empty_input);
    }
}

TEST(Threshold, Examples)
{
    const auto r = ranked({0.8, 0.3});
    EXPECT_EQ(select_threshold(r, 0.5), std::vector<std::string>{"d1"});
    EXPECT_TRUE(select_threshold(r, 0.9).empty());
    EXPECT_EQ(select_threshold(r, -std::numeric_limits<double>::infinity()).size(), 2u);
    EXPECT_EQ(select_threshold(r, 0.3).size(), 2u);
    EXPECT_TRUE(select_threshold({}, 0.3).empty());
}

TEST(Rules, BruteForceAndMonotonicity)
{
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(0, 1);
    for (int round = 0; round < 500; ++round) {
        std::vector<ScoredDoc> r;
        const int n = 1 + static_cast<int>(gen() % 8);
        for (int i = 0; i < n; ++i) r.push_back({"d" + std::to_string(i), std::round(u(gen) * 20) / 20});
        sort_ranked(r);
        const std::size_t k = 1 + gen() % 8;
        const double m = std::round(u(gen) * 10) / 20;
        const double t = std::round(u(gen) * 20) / 20;
        std::vector<std::string> bf_km, bf_t;
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i == 0 || (i < k && r[0].score - r[i].score < m)) bf_km.push_back(r[i].doc_id);
            if (r[i].score >= t) bf_t.push_back(r[i].doc_id);
        }
        const auto km = select_topk_margin(r, k, m);
        EXPECT_EQ(km, bf_km);
        EXPECT_EQ(select_threshold(r, t), bf_t);
        EXPECT_GE(km.size(), 1u);
        EXPECT_LE(km.size(), k);
        EXPECT_TRUE(subset(km, select_topk_margin(r, k, m + 0.05)));
        EXPECT_TRUE(subset(km, select_topk_margin(r, k + 1, m)));
        EXPECT_TRUE(subset(select_threshold(r, t + 0.05), select_threshold(r, t)));
    }
}

TEST(Rules, Serialization)
{
    const auto a = SelectionRule::topk_margin(3, 0.05);
    const auto back = SelectionRule::from_json(a.to_json());
    EXPECT_EQ(back.kind, RuleKind::topk_margin);
    EXPECT_EQ(back.k, 3u);
    EXPECT_EQ(back.m, 0.05);
    const auto t = SelectionRule::from_json(SelectionRule::threshold(0.4).to_json());
    EXPECT_EQ(t.kind, RuleKind::threshold);
    EXPECT_EQ(t.t, 0.4);
    EXPECT_THROW(SelectionRule::topk_margin(0, 0.1).validate(), Error);
    EXPECT_THROW(SelectionRule::topk_margin(1, -0.1).validate(), Error);
}

TEST(Predict, EmptyCandidateListGivesEmptyPrediction)
{
    const RankedLists lists{{"q1", {}}, {"q2", ranked({0.4, 0.39})}};
    const auto p = predict(lists, SelectionRule::topk_margin(2, 0.05));
    EXPECT_TRUE(p.at("q1").empty());
    EXPECT_EQ(p.at("q2").size(), 2u);
}

TEST(SearchKM, MatchesExhaustiveOracle)
{
    const auto m = testing_support::two_checkpoint_fixture();
    const std::vector<std::size_t> ks{1, 2};
    const std::vector<double> ms{0.0, 0.1};
    const auto r = search_k_m(m.ranked(0), testing_support::two_checkpoint_gold(), ks, ms, Metric::micro_f1);
    EXPECT_EQ(r.k, 2u);
    EXPECT_EQ(r.m, 0.1);
    EXPECT_NEAR(r.value, 0.4, 1e-15);
}

TEST(SearchKM, SinglePointAndTies)
{
    const RankedLists lists{{"q", ranked({0.9, 0.1})}};
    const GoldLabels gold{{"q", {"d1"}}};
    const std::vector<std::size_t> one_k{3};
    const std::vector<double> one_m{0.2};
    const auto single = search_k_m(lists, gold, one_k, one_m, Metric::micro_f1);
    EXPECT_EQ(single.k, 3u);
    EXPECT_EQ(single.m, 0.2);
    const auto ks = default_k_range();
    const auto ms = default_m_grid();
    const auto tied = search_k_m(lists, gold, ks, ms, Metric::macro_f2);
    EXPECT_EQ(tied.k, 1u);
    EXPECT_EQ(tied.m, 0.0);
    EXPECT_EQ(tied.value, 1.0);
    EXPECT_THROW(search_k_m(lists, {}, ks, ms, Metric::micro_f1), Error);
    const std::vector<std::size_t> no_k;
    EXPECT_THROW(search_k_m(lists, gold, no_k, ms, Metric::micro_f1), Error);
}

TEST(SearchThreshold, SmallestBestThreshold)
{
    const RankedLists lists{{"q1", ranked({0.9, 0.2, 0.1})}, {"q2", ranked({0.3, 0.1})}};
    const GoldLabels gold{{"q1", {"d1"}}, {"q2", {"d1"}}};
    const auto ts = default_t_grid();
    const auto r = search_threshold(lists, gold, ts, Metric::micro_f1);
    // Any t in (0.2, 0.3] keeps exactly the two gold documents.
    EXPECT_NEAR(r.t, 0.25, 1e-12);
    EXPECT_EQ(r.value, 1.0);
}

TEST(DefaultGrids, Shapes)
{
    EXPECT_EQ(default_k_range(), (std::vector<std::size_t>{1, 2, 3, 4, 5}));
    EXPECT_EQ(default_m_grid().size(), 21u);
    EXPECT_NEAR(default_m_grid().back(), 0.2, 1e-12);
    EXPECT_EQ(default_t_grid().size(), 21u);
}

TEST(Predictions, RoundTripAndRestrict)
{
    const PredictionSet p{{"q2", {"b", "a"}}, {"q1", {}}};
    testing_support::TempDir dir;
    write_file_atomic(dir / "p.jsonl", serialize_predictions(p));
    EXPECT_EQ(load_predictions(dir / "p.jsonl"), p);
    const RankedLists lists{{"q1", ranked({0.1})}, {"q2", ranked({0.2})}};
    EXPECT_EQ(restrict_to(lists, {{"q2", {"d1"}}}).size(), 1u);
    testing_support::write(dir / "dup.jsonl", "{\"query_id\":\"q\",\"docs\":[\"a\",\"a\"]}\n");
    EXPECT_THROW(load_predictions(dir / "dup.jsonl"), Error);
}
