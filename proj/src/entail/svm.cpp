#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "coliee/entail.hpp"
#include "coliee/error.hpp"
#include "coliee/util.hpp"

namespace coliee {

namespace {

double label_sign(Answer a) { return a == Answer::yes ? 1.0 : -1.0; }

struct SparseRow {
    std::vector<std::pair<std::size_t, double>> entries;
};

}  // namespace

std::string svm_input_text(std::string_view query, std::string_view article)
{
    std::string s(query);
    s += ' ';
    s += article;
    return s;
}

std::vector<std::pair<std::string, double>> SvmModel::featurize(std::string_view text) const
{
    const Tokenizer tok(tokenizer, stopwords);
    std::map<std::string, double> tf;
    for (const auto& t : tok.tokenize(text)) tf[t] += 1.0;
    std::vector<std::pair<std::string, double>> out;
    out.reserve(tf.size());
    double norm2 = 0.0;
    const double unseen = tfidf_idf(n_docs, 0);
    for (const auto& [term, count] : tf) {
        const auto it = idf.find(term);
        const double w = count * (it == idf.end() ? unseen : it->second);
        out.emplace_back(term, w);
        norm2 += w * w;
    }
    if (norm2 > 0.0) {
        const double inv = 1.0 / std::sqrt(norm2);
        for (auto& e : out) e.second *= inv;
    }
    return out;
}

double SvmModel::decision(std::string_view text) const
{
    double s = bias;
    for (const auto& [term, x] : featurize(text)) {
        const auto it = weights.find(term);
        if (it != weights.end()) s += it->second * x;
    }
    return s;
}

nlohmann::json SvmModel::to_json() const
{
    json w = json::object();
    for (const auto& [term, v] : weights) w[term] = v;
    json i = json::object();
    for (const auto& [term, v] : idf) i[term] = v;
    return {{"weights", w},
            {"bias", bias},
            {"lambda", lambda},
            {"epochs", epochs},
            {"seed", seed},
            {"tokenizer", std::string(coliee::to_string(tokenizer))},
            {"stopwords", stopwords},
            {"n_docs", n_docs},
            {"idf", i}};
}

SvmModel SvmModel::from_json(const nlohmann::json& j)
{
    SvmModel m;
    try {
        for (const auto& [term, v] : j.at("weights").items()) m.weights[term] = v.get<double>();
        m.bias = j.at("bias").get<double>();
        m.lambda = j.at("lambda").get<double>();
        m.epochs = j.at("epochs").get<int>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.tokenizer = parse_tokenizer_mode(j.value("tokenizer", std::string("word")));
        m.stopwords = j.value("stopwords", std::set<std::string>{});
        m.n_docs = j.value("n_docs", std::size_t{0});
        if (j.contains("idf")) {
            for (const auto& [term, v] : j["idf"].items()) m.idf[term] = v.get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, std::string("malformed SVM model: ") + e.what());
    }
    if (!(m.lambda > 0.0)) throw Error(ErrorKind::validation, "SVM lambda must be positive");
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(m.bias) || !std::all_of(m.weights.begin(), m.weights.end(), [&](const auto& kv) { return finite(kv.second); })) {
        throw Error(ErrorKind::validation, "SVM model has non-finite weights");
    }
    return m;
}

double svm_objective(const SvmModel& model, std::span<const SvmExample> examples)
{
    double norm2 = model.bias * model.bias;
    for (const auto& [_, w] : model.weights) norm2 += w * w;
    double loss = 0.0;
    for (const auto& ex : examples) {
        loss += std::max(0.0, 1.0 - label_sign(ex.label) * model.decision(ex.text));
    }
    const double n = examples.empty() ? 1.0 : static_cast<double>(examples.size());
    return 0.5 * model.lambda * norm2 + loss / n;
}

SvmModel svm_train(std::span<const SvmExample> examples, const Tokenizer& tokenizer, const SvmParams& params)
{
    if (!(params.lambda > 0.0) || !std::isfinite(params.lambda)) {
        throw Error(ErrorKind::config, "SVM lambda must be positive");
    }
    if (params.epochs < 1) throw Error(ErrorKind::config, "SVM epochs must be at least 1");
    const bool has_yes = std::any_of(examples.begin(), examples.end(), [](const auto& e) { return e.label == Answer::yes; });
    const bool has_no = std::any_of(examples.begin(), examples.end(), [](const auto& e) { return e.label == Answer::no; });
    if (!has_yes || !has_no) throw Error(ErrorKind::training, "SVM training data must contain both YES and NO examples");

    SvmModel model;
    model.lambda = params.lambda;
    model.epochs = params.epochs;
    model.seed = params.seed;
    model.tokenizer = tokenizer.mode();
    model.stopwords = tokenizer.stopwords();
    model.n_docs = examples.size();

    std::map<std::string, std::size_t> df;
    for (const auto& ex : examples) {
        auto toks = tokenizer.tokenize(ex.text);
        std::sort(toks.begin(), toks.end());
        toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
        for (auto& t : toks) ++df[t];
    }
    std::unordered_map<std::string, std::size_t> column;
    std::vector<std::string> vocab;
    vocab.reserve(df.size());
    for (const auto& [term, d] : df) {
        model.idf[term] = tfidf_idf(model.n_docs, d);
        column.emplace(term, vocab.size());
        vocab.push_back(term);
    }

    // The last column is the constant bias feature.
    const std::size_t dim = vocab.size() + 1;
    std::vector<SparseRow> rows(examples.size());
    std::vector<double> y(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
        for (const auto& [term, x] : model.featurize(examples[i].text)) rows[i].entries.emplace_back(column.at(term), x);
        rows[i].entries.emplace_back(dim - 1, 1.0);
        y[i] = label_sign(examples[i].label);
    }

    std::vector<double> w(dim, 0.0);
    std::vector<double> sum(dim, 0.0);
    const double radius = 1.0 / std::sqrt(params.lambda);
    SeededRng rng(params.seed);
    std::size_t t = 0;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        for (const std::size_t i : rng.sample_without_replacement(rows.size(), rows.size())) {
            ++t;
            const double eta = 1.0 / (params.lambda * static_cast<double>(t));
            double margin = 0.0;
            for (const auto& [c, x] : rows[i].entries) margin += w[c] * x;
            margin *= y[i];
            const double shrink = 1.0 - eta * params.lambda;
            for (auto& v : w) v *= shrink;
            if (margin < 1.0) {
                for (const auto& [c, x] : rows[i].entries) w[c] += eta * y[i] * x;
            }
            double norm2 = 0.0;
            for (double v : w) norm2 += v * v;
            if (norm2 > radius * radius) {
                const double scale = radius / std::sqrt(norm2);
                for (auto& v : w) v *= scale;
            }
            for (std::size_t c = 0; c < dim; ++c) sum[c] += w[c];
        }
    }

    const double inv_t = 1.0 / static_cast<double>(t);
    for (std::size_t c = 0; c + 1 < dim; ++c) {
        const double v = sum[c] * inv_t;
        if (v != 0.0) model.weights[vocab[c]] = v;
    }
    model.bias = sum[dim - 1] * inv_t;

    SvmModel zero = model;
    zero.weights.clear();
    zero.bias = 0.0;
    if (svm_objective(model, examples) > svm_objective(zero, examples)) {
        return zero;
    }
    return model;
}

SvmPrediction svm_predict(const SvmModel& model, std::string_view query, std::string_view article)
{
    const double m = model.decision(svm_input_text(query, article));
    return {m >= 0.0 ? Answer::yes : Answer::no, m};
}

}  // namespace coliee
