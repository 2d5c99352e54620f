#include "coliee/scores.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "coliee/error.hpp"
#include "coliee/util.hpp"

namespace coliee {

namespace {

template <typename Vec>
std::optional<std::size_t> sorted_position(const Vec& v, std::string_view id)
{
    auto it = std::lower_bound(v.begin(), v.end(), id,
                               [](const std::string& a, std::string_view b) { return a < b; });
    if (it == v.end() || *it != id) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - v.begin());
}

}  // namespace

ScoreMatrix ScoreMatrix::from_rows(std::vector<ScoreRow> rows)
{
    if (rows.empty()) {
        throw Error(ErrorKind::empty_input, "score matrix has no rows");
    }
    std::set<std::string> ckpts;
    std::map<std::string, std::set<std::string>> pools;
    for (const auto& r : rows) {
        if (!std::isfinite(r.score)) {
            throw Error(ErrorKind::validation, "non-finite score for (" + r.checkpoint + ", " +
                                                   r.query_id + ", " + r.doc_id + ")");
        }
        ckpts.insert(r.checkpoint);
        pools[r.query_id].insert(r.doc_id);
    }
    ScoreMatrix m;
    m.m_checkpoints.assign(ckpts.begin(), ckpts.end());
    for (auto& [q, docs] : pools) {
        m.m_queries.push_back(q);
        m.m_docs.emplace_back(docs.begin(), docs.end());
    }
    const double missing = std::numeric_limits<double>::quiet_NaN();
    m.m_values.resize(m.m_checkpoints.size());
    for (auto& per_ckpt : m.m_values) {
        per_ckpt.resize(m.m_queries.size());
        for (std::size_t q = 0; q < m.m_queries.size(); ++q) {
            per_ckpt[q].assign(m.m_docs[q].size(), missing);
        }
    }
    for (const auto& r : rows) {
        auto c = *sorted_position(m.m_checkpoints, r.checkpoint);
        auto q = *sorted_position(m.m_queries, r.query_id);
        auto d = *sorted_position(m.m_docs[q], r.doc_id);
        auto& slot = m.m_values[c][q][d];
        if (!std::isnan(slot)) {
            throw Error(ErrorKind::validation, "duplicate score row for (" + r.checkpoint + ", " +
                                                   r.query_id + ", " + r.doc_id + ")");
        }
        slot = r.score;
    }
    for (std::size_t c = 0; c < m.m_checkpoints.size(); ++c) {
        for (std::size_t q = 0; q < m.m_queries.size(); ++q) {
            for (std::size_t d = 0; d < m.m_docs[q].size(); ++d) {
                if (std::isnan(m.m_values[c][q][d])) {
                    throw Error(ErrorKind::completeness,
                                "checkpoint '" + m.m_checkpoints[c] + "' has no score for query '" +
                                    m.m_queries[q] + "', document '" + m.m_docs[q][d] + "'");
                }
            }
        }
    }
    return m;
}

std::optional<std::size_t> ScoreMatrix::checkpoint_index(std::string_view id) const
{
    return sorted_position(m_checkpoints, id);
}

std::optional<std::size_t> ScoreMatrix::query_index(std::string_view id) const
{
    return sorted_position(m_queries, id);
}

std::optional<double> ScoreMatrix::find(std::string_view checkpoint, std::string_view query_id,
                                        std::string_view doc_id) const
{
    auto c = checkpoint_index(checkpoint);
    auto q = query_index(query_id);
    if (!c || !q) {
        return std::nullopt;
    }
    auto d = sorted_position(m_docs[*q], doc_id);
    if (!d) {
        return std::nullopt;
    }
    return m_values[*c][*q][*d];
}

double ScoreMatrix::score(std::string_view checkpoint, std::string_view query_id,
                          std::string_view doc_id) const
{
    if (auto v = find(checkpoint, query_id, doc_id)) {
        return *v;
    }
    throw Error(ErrorKind::completeness, "no score for checkpoint '" + std::string(checkpoint) +
                                             "', query '" + std::string(query_id) + "', document '" +
                                             std::string(doc_id) + "'");
}

RankedLists ScoreMatrix::ranked(std::size_t checkpoint) const
{
    RankedLists out;
    for (std::size_t q = 0; q < m_queries.size(); ++q) {
        auto& list = out[m_queries[q]];
        for (std::size_t d = 0; d < m_docs[q].size(); ++d) {
            list.push_back({m_docs[q][d], m_values[checkpoint][q][d]});
        }
        sort_ranked(list);
    }
    return out;
}

std::vector<ScoreRow> ScoreMatrix::rows() const
{
    std::vector<ScoreRow> out;
    for (std::size_t c = 0; c < m_checkpoints.size(); ++c) {
        for (std::size_t q = 0; q < m_queries.size(); ++q) {
            for (std::size_t d = 0; d < m_docs[q].size(); ++d) {
                out.push_back({m_checkpoints[c], m_queries[q], m_docs[q][d], m_values[c][q][d]});
            }
        }
    }
    return out;
}

ScoreMatrix ScoreMatrix::with_values(std::vector<std::vector<std::vector<double>>> values) const
{
    ScoreMatrix m = *this;
    if (values.size() != m_values.size()) {
        throw Error(ErrorKind::validation, "value tensor shape mismatch");
    }
    for (std::size_t c = 0; c < values.size(); ++c) {
        if (values[c].size() != m_queries.size()) {
            throw Error(ErrorKind::validation, "value tensor shape mismatch");
        }
        for (std::size_t q = 0; q < values[c].size(); ++q) {
            if (values[c][q].size() != m_docs[q].size()) {
                throw Error(ErrorKind::validation, "value tensor shape mismatch");
            }
        }
    }
    m.m_values = std::move(values);
    return m;
}

ScoreMatrix parse_scores(std::istream& in, const std::string& source_name)
{
    std::vector<ScoreRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty() || line[0] == '#') {
            continue;
        }
        auto where = [&] { return source_name + ":" + std::to_string(line_no) + ": "; };
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            auto tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos) {
                break;
            }
            start = tab + 1;
        }
        if (fields.size() != 4) {
            throw Error(ErrorKind::parse, where() + "expected 4 tab-separated fields, got " +
                                              std::to_string(fields.size()));
        }
        ScoreRow r{fields[0], fields[1], fields[2], 0.0};
        const auto& s = fields[3];
        auto res = std::from_chars(s.data(), s.data() + s.size(), r.score);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            throw Error(ErrorKind::parse, where() + "invalid score '" + s + "'");
        }
        if (!std::isfinite(r.score)) {
            throw Error(ErrorKind::validation, where() + "non-finite score '" + s + "'");
        }
        if (r.checkpoint.empty() || r.query_id.empty() || r.doc_id.empty()) {
            throw Error(ErrorKind::parse, where() + "empty identifier");
        }
        rows.push_back(std::move(r));
    }
    try {
        return ScoreMatrix::from_rows(std::move(rows));
    } catch (const Error& e) {
        throw Error(e.kind(), source_name + ": " + e.what());
    }
}

ScoreMatrix load_scores(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, "cannot open " + path.string());
    }
    return parse_scores(in, path.string());
}

std::string serialize_scores(const ScoreMatrix& matrix)
{
    std::string out;
    for (const auto& r : matrix.rows()) {
        out += r.checkpoint + '\t' + r.query_id + '\t' + r.doc_id + '\t' + format_double(r.score) + '\n';
    }
    return out;
}

std::string serialize_ranked(const RankedLists& lists, std::string_view checkpoint)
{
    std::string out;
    for (const auto& [qid, docs] : lists) {
        for (const auto& d : docs) {
            out += std::string(checkpoint) + '\t' + qid + '\t' + d.doc_id + '\t' + format_double(d.score) + '\n';
        }
    }
    return out;
}

Normalization parse_normalization(std::string_view s)
{
    if (s == "none") return Normalization::none;
    if (s == "minmax") return Normalization::minmax;
    throw Error(ErrorKind::config, "unknown normalization '" + std::string(s) + "'");
}

ScoreMatrix normalize_per_query(const ScoreMatrix& matrix, Normalization method)
{
    if (method == Normalization::none) {
        return matrix;
    }
    std::vector<std::vector<std::vector<double>>> values(matrix.checkpoints().size());
    for (std::size_t c = 0; c < values.size(); ++c) {
        values[c].resize(matrix.query_ids().size());
        for (std::size_t q = 0; q < values[c].size(); ++q) {
            auto src = matrix.scores(c, q);
            auto [lo, hi] = std::minmax_element(src.begin(), src.end());
            auto& dst = values[c][q];
            dst.reserve(src.size());
            for (double s : src) {
                dst.push_back(*hi == *lo ? 0.5 : (s - *lo) / (*hi - *lo));
            }
        }
    }
    return matrix.with_values(std::move(values));
}

// ---------------------------------------------------------------------------
// Embeddings

void EmbeddingStore::add(std::string id, std::vector<double> vector)
{
    if (vector.empty()) {
        throw Error(ErrorKind::validation, "embedding '" + id + "' is empty");
    }
    if (m_vectors.empty()) {
        m_dim = vector.size();
    } else if (vector.size() != m_dim) {
        throw Error(ErrorKind::validation, "embedding '" + id + "' has dimension " +
                                               std::to_string(vector.size()) + ", expected " +
                                               std::to_string(m_dim));
    }
    if (!std::all_of(vector.begin(), vector.end(), [](double x) { return std::isfinite(x); })) {
        throw Error(ErrorKind::validation, "embedding '" + id + "' has non-finite entries");
    }
    if (!m_vectors.emplace(id, std::move(vector)).second) {
        throw Error(ErrorKind::validation, "duplicate embedding id '" + id + "'");
    }
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& path)
{
    EmbeddingStore store;
    for_each_jsonl(path, [&](std::size_t line, const json& rec) {
        try {
            store.add(rec.at("id").get<std::string>(), rec.at("vector").get<std::vector<double>>());
        } catch (const Error& e) {
            throw Error(e.kind(), path.string() + ":" + std::to_string(line) + ": " + e.what());
        }
    });
    return store;
}

bool EmbeddingStore::contains(std::string_view id) const { return m_vectors.find(id) != m_vectors.end(); }

std::span<const double> EmbeddingStore::at(std::string_view id) const
{
    auto it = m_vectors.find(id);
    if (it == m_vectors.end()) {
        throw Error(ErrorKind::not_found, "no embedding for '" + std::string(id) + "'");
    }
    return it->second;
}

// ---------------------------------------------------------------------------
// SRL

void validate_srl(const SrlAnnotation& a, std::size_t n_tokens)
{
    auto check = [&](const TokenSpan& s, const std::string& what) {
        if (s.begin >= s.end || s.end > n_tokens) {
            throw Error(ErrorKind::validation,
                        "sentence '" + a.sentence_id + "': " + what + " span [" + std::to_string(s.begin) +
                            ", " + std::to_string(s.end) + ") outside [0, " + std::to_string(n_tokens) + ")");
        }
    };
    for (const auto& p : a.predicates) {
        check(p.verb, "verb");
        for (const auto& arg : p.args) {
            check(arg.span, arg.role);
        }
    }
}

namespace {

TokenSpan read_span(const json& j)
{
    if (!j.is_array() || j.size() != 2) {
        throw Error(ErrorKind::parse, "span must be a [start, end) pair");
    }
    auto b = j[0].get<long long>();
    auto e = j[1].get<long long>();
    if (b < 0 || e < 0) {
        throw Error(ErrorKind::validation, "negative span offset");
    }
    return {static_cast<std::size_t>(b), static_cast<std::size_t>(e)};
}

SrlAnnotation read_srl(const json& rec)
{
    SrlAnnotation a;
    a.sentence_id = rec.at("sentence_id").get<std::string>();
    if (auto it = rec.find("tokens"); it != rec.end()) {
        a.tokens = it->get<std::vector<std::string>>();
    }
    for (const auto& p : rec.at("predicates")) {
        SrlPredicate pred;
        pred.verb = read_span(p.at("verb"));
        if (auto it = p.find("args"); it != p.end()) {
            for (const auto& arg : *it) {
                pred.args.push_back({arg.at("role").get<std::string>(), read_span(arg.at("span"))});
            }
        }
        a.predicates.push_back(std::move(pred));
    }
    // Without tokens only ordering can be checked here; extraction checks the
    // bounds against its own tokenization.
    validate_srl(a, a.tokens.empty() ? std::numeric_limits<std::size_t>::max() : a.tokens.size());
    return a;
}

}  // namespace

void SrlStore::add(SrlAnnotation annotation)
{
    auto id = annotation.sentence_id;
    if (!m_items.emplace(id, std::move(annotation)).second) {
        throw Error(ErrorKind::validation, "duplicate SRL annotation for sentence '" + id + "'");
    }
}

const SrlAnnotation* SrlStore::find(std::string_view sentence_id) const
{
    auto it = m_items.find(sentence_id);
    return it == m_items.end() ? nullptr : &it->second;
}

SrlStore SrlStore::load(const std::filesystem::path& path)
{
    SrlStore store;
    for_each_jsonl(path, [&](std::size_t line, const json& rec) {
        try {
            store.add(read_srl(rec));
        } catch (const Error& e) {
            throw Error(e.kind(), path.string() + ":" + std::to_string(line) + ": " + e.what());
        }
    });
    return store;
}

SrlStore SrlStore::parse_jsonl(std::string_view text, const std::string& source_name)
{
    SrlStore store;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        try {
            store.add(read_srl(json::parse(line)));
        } catch (const json::exception& e) {
            throw Error(ErrorKind::parse, source_name + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return store;
}

// ---------------------------------------------------------------------------
// Mask fills

void FillStore::add(std::string template_id, std::size_t mask_index, std::vector<FillCandidate> candidates)
{
    for (const auto& c : candidates) {
        if (!std::isfinite(c.prob) || c.prob < 0.0) {
            throw Error(ErrorKind::validation, "fill probability must be finite and non-negative");
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const FillCandidate& a, const FillCandidate& b) {
        if (a.prob != b.prob) {
            return a.prob > b.prob;
        }
        return a.token < b.token;
    });
    auto key = std::make_pair(template_id, mask_index);
    if (!m_fills.emplace(key, std::move(candidates)).second) {
        throw Error(ErrorKind::validation, "duplicate fills for template '" + template_id + "' mask " +
                                               std::to_string(mask_index));
    }
}

const std::vector<FillCandidate>* FillStore::find(std::string_view template_id, std::size_t mask_index) const
{
    auto it = m_fills.find(std::make_pair(std::string(template_id), mask_index));
    return it == m_fills.end() ? nullptr : &it->second;
}

FillStore FillStore::load(const std::filesystem::path& path)
{
    FillStore store;
    for_each_jsonl(path, [&](std::size_t line, const json& rec) {
        std::vector<FillCandidate> cands;
        for (const auto& c : rec.at("candidates")) {
            cands.push_back({c.at("token").get<std::string>(), c.at("prob").get<double>()});
        }
        try {
            store.add(rec.at("template_id").get<std::string>(), rec.at("mask_index").get<std::size_t>(),
                      std::move(cands));
        } catch (const Error& e) {
            throw Error(e.kind(), path.string() + ":" + std::to_string(line) + ": " + e.what());
        }
    });
    return store;
}

}  // namespace coliee
