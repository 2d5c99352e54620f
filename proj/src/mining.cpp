#include "coliee/mining.hpp"

#include <algorithm>

#include "coliee/error.hpp"
#include "coliee/util.hpp"

namespace coliee {

std::string_view to_string(Label label) noexcept
{
    return label == Label::positive ? "positive" : "negative";
}

std::string_view to_string(Provenance p) noexcept
{
    switch (p) {
    case Provenance::bm25: return "bm25";
    case Provenance::model: return "model";
    case Provenance::tfidf: return "tfidf";
    case Provenance::datflt_q: return "datflt-q";
    case Provenance::datflt_a: return "datflt-a";
    }
    return "bm25";
}

Label parse_label(std::string_view s)
{
    if (s == "positive") return Label::positive;
    if (s == "negative") return Label::negative;
    throw Error(ErrorKind::parse, "unknown label '" + std::string(s) + "'");
}

Provenance parse_provenance(std::string_view s)
{
    for (auto p : {Provenance::bm25, Provenance::model, Provenance::tfidf, Provenance::datflt_q,
                   Provenance::datflt_a}) {
        if (to_string(p) == s) {
            return p;
        }
    }
    throw Error(ErrorKind::parse, "unknown provenance '" + std::string(s) + "'");
}

bool TrainingPairSet::add(TrainingPair pair)
{
    if (!m_keys.emplace(pair.query_id, pair.doc_id).second) {
        return false;
    }
    m_pairs.push_back(std::move(pair));
    return true;
}

void TrainingPairSet::merge(const TrainingPairSet& other)
{
    for (const auto& p : other.pairs()) {
        add(p);
    }
    m_warnings.insert(m_warnings.end(), other.warnings().begin(), other.warnings().end());
}

std::string serialize_pairs(const TrainingPairSet& set)
{
    std::vector<json> rows;
    rows.reserve(set.size());
    for (const auto& p : set.pairs()) {
        rows.push_back({{"query_id", p.query_id},
                        {"doc_id", p.doc_id},
                        {"label", to_string(p.label)},
                        {"round", p.round},
                        {"provenance", to_string(p.provenance)}});
    }
    return to_jsonl(rows);
}

TrainingPairSet load_pairs(const std::filesystem::path& path)
{
    TrainingPairSet set;
    for_each_jsonl(path, [&](std::size_t line, const json& rec) {
        TrainingPair p{rec.at("query_id").get<std::string>(), rec.at("doc_id").get<std::string>(),
                       parse_label(rec.at("label").get<std::string>()), rec.at("round").get<int>(),
                       parse_provenance(rec.at("provenance").get<std::string>())};
        if (!set.add(p)) {
            throw Error(ErrorKind::validation, path.string() + ":" + std::to_string(line) +
                                                   ": duplicate pair (" + p.query_id + ", " + p.doc_id + ")");
        }
    });
    return set;
}

// ---------------------------------------------------------------------------

CandidatePools CandidatePools::build(const Corpus& corpus, const Tokenizer& tokenizer)
{
    CandidatePools pools;
    if (!corpus.is_case_corpus()) {
        if (!corpus.articles().empty()) {
            auto refs = corpus.candidate_pool("");
            pools.m_shared = std::make_shared<const InvertedIndex>(InvertedIndex::build(refs, tokenizer));
        }
        return pools;
    }
    for (const auto& cs : corpus.cases()) {
        auto refs = corpus.candidate_pool(cs.case_id);
        pools.m_per_query.emplace(cs.case_id,
                                  std::make_shared<const InvertedIndex>(InvertedIndex::build(refs, tokenizer)));
    }
    return pools;
}

const InvertedIndex* CandidatePools::index_for(std::string_view query_id) const
{
    if (m_shared) {
        return m_shared.get();
    }
    auto it = m_per_query.find(query_id);
    return it == m_per_query.end() ? nullptr : it->second.get();
}

namespace {

struct QueryOutput {
    std::vector<TrainingPair> pairs;
    std::vector<std::string> warnings;
};

const std::set<std::string>& gold_for(const GoldLabels& gold, const std::string& qid)
{
    static const std::set<std::string> empty;
    auto it = gold.find(qid);
    return it == gold.end() ? empty : it->second;
}

/// Gold positives followed by the n_neg best non-gold entries of `ranking`.
QueryOutput emit_pairs(const std::string& qid, const std::set<std::string>& positives,
                       const std::vector<ScoredDoc>& ranking, std::size_t n_neg, int round, Provenance prov)
{
    QueryOutput out;
    for (const auto& d : positives) {
        out.pairs.push_back({qid, d, Label::positive, round, prov});
    }
    std::size_t taken = 0;
    for (const auto& d : ranking) {
        if (taken == n_neg) {
            break;
        }
        if (positives.contains(d.doc_id)) {
            continue;
        }
        out.pairs.push_back({qid, d.doc_id, Label::negative, round, prov});
        ++taken;
    }
    return out;
}

TrainingPairSet collect(std::span<const std::string> query_ids,
                        const std::function<QueryOutput(const std::string&)>& per_query)
{
    std::vector<std::string> ids(query_ids.begin(), query_ids.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::vector<QueryOutput> slots(ids.size());
    parallel_for(ids.size(), [&](std::size_t i) { slots[i] = per_query(ids[i]); });
    TrainingPairSet set;
    for (auto& slot : slots) {
        for (auto& w : slot.warnings) {
            set.warn(std::move(w));
        }
        for (auto& p : slot.pairs) {
            set.add(std::move(p));
        }
    }
    return set;
}

const Query& require_query(const Corpus& corpus, const std::string& qid)
{
    const auto* q = corpus.find_query(qid);
    if (q == nullptr) {
        throw Error(ErrorKind::not_found, "query '" + qid + "' is not in the corpus");
    }
    return *q;
}

QueryOutput lexical_pairs(const Corpus& corpus, const GoldLabels& gold, const CandidatePools& pools,
                          const std::string& qid, const MiningParams& params, Provenance prov)
{
    const auto& q = require_query(corpus, qid);
    const auto* index = pools.index_for(qid);
    if (index == nullptr) {
        QueryOutput out;
        out.warnings.push_back("query '" + qid + "' has no candidates; skipped");
        return out;
    }
    auto ranking = rank_all(*index, q.text, params.scorer, params.bm25);
    return emit_pairs(qid, gold_for(gold, qid), ranking, params.n_neg, 1, prov);
}

std::vector<ScoredDoc> model_ranking(const Corpus& corpus, const ScoreMatrix& matrix, std::size_t ckpt,
                                     const std::string& qid)
{
    require_query(corpus, qid);
    const auto& ckpt_id = matrix.checkpoints()[ckpt];
    std::vector<ScoredDoc> ranking;
    if (corpus.is_case_corpus()) {
        for (const auto& d : corpus.candidate_pool(qid)) {
            ranking.push_back({std::string(d.id), matrix.score(ckpt_id, qid, d.id)});
        }
    } else {
        auto q = matrix.query_index(qid);
        if (!q) {
            throw Error(ErrorKind::completeness,
                        "checkpoint '" + ckpt_id + "' has no scores for query '" + qid + "'");
        }
        const auto& docs = matrix.candidates(*q);
        auto scores = matrix.scores(ckpt, *q);
        for (std::size_t d = 0; d < docs.size(); ++d) {
            if (!corpus.in_pool(qid, docs[d])) {
                throw Error(ErrorKind::integrity, "scores reference unknown document '" + docs[d] +
                                                      "' for query '" + qid + "'");
            }
            ranking.push_back({docs[d], scores[d]});
        }
    }
    sort_ranked(ranking);
    return ranking;
}

std::size_t require_checkpoint(const ScoreMatrix& matrix, std::string_view checkpoint)
{
    auto c = matrix.checkpoint_index(checkpoint);
    if (!c) {
        throw Error(ErrorKind::completeness, "score matrix has no checkpoint '" + std::string(checkpoint) + "'");
    }
    return *c;
}

}  // namespace

TrainingPairSet mine_negatives_round1(const Corpus& corpus,
                                      const GoldLabels& gold,
                                      const CandidatePools& pools,
                                      std::span<const std::string> query_ids,
                                      const MiningParams& params)
{
    const auto prov = params.scorer == LexicalScorer::tfidf ? Provenance::tfidf : Provenance::bm25;
    return collect(query_ids, [&](const std::string& qid) {
        return lexical_pairs(corpus, gold, pools, qid, params, prov);
    });
}

TrainingPairSet mine_negatives_round2(const Corpus& corpus,
                                      const GoldLabels& gold,
                                      const ScoreMatrix& matrix,
                                      std::string_view checkpoint,
                                      std::span<const std::string> query_ids,
                                      std::size_t n_neg)
{
    const auto c = require_checkpoint(matrix, checkpoint);
    return collect(query_ids, [&](const std::string& qid) {
        return emit_pairs(qid, gold_for(gold, qid), model_ranking(corpus, matrix, c, qid), n_neg, 2,
                          Provenance::model);
    });
}

MissedQuerySet find_missed_queries(const PredictionSet& predictions, const GoldLabels* gold)
{
    MissedQuerySet out;
    out.defined_by = gold != nullptr ? MissedBy::gold_based : MissedBy::empty_prediction;
    for (const auto& [qid, docs] : predictions) {
        if (gold == nullptr) {
            if (docs.empty()) {
                out.query_ids.insert(qid);
            }
            continue;
        }
        const auto& g = gold_for(*gold, qid);
        bool hit = std::any_of(docs.begin(), docs.end(), [&](const std::string& d) { return g.contains(d); });
        if (!hit) {
            out.query_ids.insert(qid);
        }
    }
    return out;
}

std::vector<std::string> nearest_queries(std::string_view query_id,
                                         const EmbeddingStore& embeddings,
                                         std::span<const std::string> candidates,
                                         std::size_t n_near)
{
    const auto target = embeddings.at(query_id);
    std::vector<ScoredDoc> sims;
    for (const auto& c : candidates) {
        if (c == query_id) {
            continue;
        }
        sims.push_back({c, embedding_cosine(target, embeddings.at(c))});
    }
    sort_ranked(sims);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(n_near, sims.size()); ++i) {
        out.push_back(sims[i].doc_id);
    }
    return out;
}

TrainingPairSet build_datflt_q(const Corpus& corpus,
                               const MissedQuerySet& missed,
                               const EmbeddingStore& embeddings,
                               std::span<const std::string> train_query_ids,
                               const GoldLabels& gold,
                               const NegativeSource& negatives,
                               std::size_t n_near,
                               std::size_t n_neg)
{
    std::vector<std::string> train(train_query_ids.begin(), train_query_ids.end());
    std::sort(train.begin(), train.end());
    train.erase(std::unique(train.begin(), train.end()), train.end());
    for (const auto& t : train) {
        embeddings.at(t);
    }
    std::set<std::string> neighbours;
    for (const auto& m : missed.query_ids) {
        for (auto& n : nearest_queries(m, embeddings, train, n_near)) {
            neighbours.insert(std::move(n));
        }
    }
    std::vector<std::string> ids(neighbours.begin(), neighbours.end());
    if (negatives.matrix != nullptr) {
        const auto c = require_checkpoint(*negatives.matrix, negatives.checkpoint);
        return collect(ids, [&](const std::string& qid) {
            return emit_pairs(qid, gold_for(gold, qid), model_ranking(corpus, *negatives.matrix, c, qid), n_neg,
                              2, Provenance::datflt_q);
        });
    }
    if (negatives.pools == nullptr) {
        throw Error(ErrorKind::config, "datflt-q needs candidate pools or a score matrix for negatives");
    }
    auto params = negatives.lexical;
    params.n_neg = n_neg;
    return collect(ids, [&](const std::string& qid) {
        return lexical_pairs(corpus, gold, *negatives.pools, qid, params, Provenance::datflt_q);
    });
}

TrainingPairSet build_datflt_a(const Corpus& corpus,
                               const GoldLabels& gold,
                               const ScoreMatrix& matrix,
                               std::string_view checkpoint,
                               std::span<const std::string> query_ids,
                               std::size_t n_neg)
{
    const auto c = require_checkpoint(matrix, checkpoint);
    return collect(query_ids, [&](const std::string& qid) {
        return emit_pairs(qid, gold_for(gold, qid), model_ranking(corpus, matrix, c, qid), n_neg, 2,
                          Provenance::datflt_a);
    });
}

}  // namespace coliee
