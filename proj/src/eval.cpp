#include "coliee/eval.hpp"

#include <cstdio>
#include <sstream>

#include "coliee/error.hpp"

namespace coliee {

PredictionSet ranked_ids(const RankedLists& lists)
{
    PredictionSet out;
    for (const auto& [qid, docs] : lists) {
        auto& ids = out[qid];
        ids.reserve(docs.size());
        for (const auto& d : docs) {
            ids.push_back(d.doc_id);
        }
    }
    return out;
}

namespace {

const std::vector<std::string> kNoDocs;

const std::vector<std::string>& predicted_for(const PredictionSet& p, const std::string& qid)
{
    auto it = p.find(qid);
    return it == p.end() ? kNoDocs : it->second;
}

std::size_t count_hits(const std::vector<std::string>& docs, const std::set<std::string>& gold)
{
    std::set<std::string_view> seen;
    std::size_t tp = 0;
    for (const auto& d : docs) {
        if (seen.insert(d).second && gold.contains(d)) {
            ++tp;
        }
    }
    return tp;
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

double f2_score(double precision, double recall)
{
    const double den = 4.0 * precision + recall;
    return den > 0.0 ? 5.0 * precision * recall / den : 0.0;
}

Prf micro_prf(const PredictionSet& predictions, const GoldLabels& gold)
{
    double tp = 0.0, retrieved = 0.0, relevant = 0.0;
    for (const auto& [qid, docs] : gold) {
        const auto& pred = predicted_for(predictions, qid);
        tp += static_cast<double>(count_hits(pred, docs));
        retrieved += static_cast<double>(pred.size());
        relevant += static_cast<double>(docs.size());
    }
    Prf out;
    out.precision = ratio(tp, retrieved);
    out.recall = ratio(tp, relevant);
    out.f = f1(out.precision, out.recall);
    return out;
}

namespace {

template <typename F>
Prf macro_average(const PredictionSet& predictions, const GoldLabels& gold, F&& combine)
{
    Prf out;
    if (gold.empty()) {
        return out;
    }
    for (const auto& [qid, docs] : gold) {
        const auto& pred = predicted_for(predictions, qid);
        const double tp = static_cast<double>(count_hits(pred, docs));
        const double p = ratio(tp, static_cast<double>(pred.size()));
        const double r = ratio(tp, static_cast<double>(docs.size()));
        out.precision += p;
        out.recall += r;
        out.f += combine(p, r);
    }
    const auto n = static_cast<double>(gold.size());
    out.precision /= n;
    out.recall /= n;
    out.f /= n;
    return out;
}

}  // namespace

Prf macro_f2(const PredictionSet& predictions, const GoldLabels& gold)
{
    return macro_average(predictions, gold, f2_score);
}

Prf macro_f1(const PredictionSet& predictions, const GoldLabels& gold)
{
    return macro_average(predictions, gold, f1);
}

double average_precision(const std::vector<std::string>& ranked, const std::set<std::string>& gold)
{
    if (gold.empty()) {
        return 0.0;
    }
    std::set<std::string_view> seen;
    double hits = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (!seen.insert(ranked[i]).second) {
            continue;
        }
        if (gold.contains(ranked[i])) {
            hits += 1.0;
            sum += hits / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(gold.size());
}

double map_score(const PredictionSet& ranked, const GoldLabels& gold)
{
    if (gold.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& [qid, docs] : gold) {
        sum += average_precision(predicted_for(ranked, qid), docs);
    }
    return sum / static_cast<double>(gold.size());
}

double recall_at_k(const PredictionSet& ranked, const GoldLabels& gold, std::size_t k)
{
    if (k == 0) {
        throw Error(ErrorKind::precondition, "recall@k needs k >= 1");
    }
    if (gold.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& [qid, docs] : gold) {
        const auto& list = predicted_for(ranked, qid);
        std::vector<std::string> top(list.begin(), list.begin() + static_cast<long>(std::min(k, list.size())));
        sum += ratio(static_cast<double>(count_hits(top, docs)), static_cast<double>(docs.size()));
    }
    return sum / static_cast<double>(gold.size());
}

AccuracyResult accuracy(const AnswerLabels& answers, const AnswerLabels& gold)
{
    if (gold.empty()) {
        throw Error(ErrorKind::empty_input, "no gold answers to score against");
    }
    AccuracyResult out;
    std::size_t correct = 0;
    for (const auto& [qid, expected] : gold) {
        auto it = answers.find(qid);
        if (it == answers.end()) {
            out.warnings.push_back("no answer for query '" + qid + "', counted wrong");
            continue;
        }
        if (it->second == expected) {
            ++correct;
        }
    }
    out.accuracy = static_cast<double>(correct) / static_cast<double>(gold.size());
    return out;
}

Metric parse_metric(std::string_view s)
{
    if (s == "micro-f1") return Metric::micro_f1;
    if (s == "macro-f2") return Metric::macro_f2;
    throw Error(ErrorKind::config, "unknown metric '" + std::string(s) + "'");
}

std::string_view to_string(Metric m) noexcept
{
    return m == Metric::micro_f1 ? "micro-f1" : "macro-f2";
}

double evaluate_metric(const PredictionSet& predictions, const GoldLabels& gold, Metric metric)
{
    return metric == Metric::micro_f1 ? micro_prf(predictions, gold).f : macro_f2(predictions, gold).f;
}

MetricReport build_report(const ReportInputs& in)
{
    MetricReport r;
    if (in.predictions != nullptr && in.gold != nullptr) {
        auto micro = micro_prf(*in.predictions, *in.gold);
        r.micro_precision = micro.precision;
        r.micro_recall = micro.recall;
        r.micro_f1 = micro.f;
        auto macro = macro_f2(*in.predictions, *in.gold);
        r.macro_f2 = macro.f;
        r.macro_precision = macro.precision;
        r.macro_recall = macro.recall;
        for (const auto& [qid, docs] : *in.gold) {
            const auto& pred = predicted_for(*in.predictions, qid);
            QueryBreakdown b;
            b.true_positives = count_hits(pred, docs);
            b.retrieved = pred.size();
            b.relevant = docs.size();
            b.precision = ratio(static_cast<double>(b.true_positives), static_cast<double>(b.retrieved));
            b.recall = ratio(static_cast<double>(b.true_positives), static_cast<double>(b.relevant));
            b.f2 = f2_score(b.precision, b.recall);
            r.per_query[qid] = b;
        }
        for (const auto& [qid, _] : *in.predictions) {
            if (!in.gold->contains(qid)) {
                r.warnings.push_back("prediction for query '" + qid + "' has no gold labels; ignored");
            }
        }
    }
    if (in.ranked != nullptr && in.gold != nullptr) {
        r.map = map_score(*in.ranked, *in.gold);
        for (auto k : in.recall_ks) {
            r.recall_at[k] = recall_at_k(*in.ranked, *in.gold, k);
        }
        for (const auto& [qid, docs] : *in.gold) {
            r.per_query[qid].average_precision = average_precision(predicted_for(*in.ranked, qid), docs);
        }
    }
    if (in.answers != nullptr && in.gold_answers != nullptr) {
        auto acc = accuracy(*in.answers, *in.gold_answers);
        r.accuracy = acc.accuracy;
        r.warnings.insert(r.warnings.end(), acc.warnings.begin(), acc.warnings.end());
    }
    return r;
}

nlohmann::json MetricReport::to_json() const
{
    nlohmann::json j;
    j["micro_precision"] = micro_precision;
    j["micro_recall"] = micro_recall;
    j["micro_f1"] = micro_f1;
    j["macro_f2"] = macro_f2;
    j["macro_precision"] = macro_precision;
    j["macro_recall"] = macro_recall;
    j["map"] = map ? nlohmann::json(*map) : nlohmann::json();
    j["accuracy"] = accuracy ? nlohmann::json(*accuracy) : nlohmann::json();
    auto& ra = j["recall_at"] = nlohmann::json::object();
    for (const auto& [k, v] : recall_at) {
        ra[std::to_string(k)] = v;
    }
    auto& pq = j["per_query"] = nlohmann::json::object();
    for (const auto& [qid, b] : per_query) {
        nlohmann::json q{{"tp", b.true_positives},
                         {"retrieved", b.retrieved},
                         {"relevant", b.relevant},
                         {"precision", b.precision},
                         {"recall", b.recall},
                         {"f2", b.f2}};
        if (b.average_precision) {
            q["ap"] = *b.average_precision;
        }
        pq[qid] = q;
    }
    j["warnings"] = warnings;
    return j;
}

std::string MetricReport::to_table() const
{
    std::ostringstream out;
    auto row = [&](const std::string& name, double v) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%-18s %8.2f\n", name.c_str(), 100.0 * v);
        out << buf;
    };
    out << "metric             value(%)\n";
    row("micro precision", micro_precision);
    row("micro recall", micro_recall);
    row("micro F1", micro_f1);
    row("macro precision", macro_precision);
    row("macro recall", macro_recall);
    row("macro F2", macro_f2);
    if (map) {
        row("MAP", *map);
    }
    for (const auto& [k, v] : recall_at) {
        row("R@" + std::to_string(k), v);
    }
    if (accuracy) {
        row("accuracy", *accuracy);
    }
    return out.str();
}

}  // namespace coliee
