#include <algorithm>
#include <cctype>
#include <limits>

#include "coliee/entail.hpp"
#include "coliee/error.hpp"
#include "coliee/util.hpp"

namespace coliee {

namespace {

constexpr std::string_view kLeadPunct = "([{\"'";
constexpr std::string_view kTrailPunct = ".,;:!?)]}\"'";

bool is_ascii_punct_token(std::string_view tok)
{
    if (tok.empty()) return false;
    return std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return c < 0x80 && std::ispunct(c); });
}

// CJK punctuation used in Japanese statutes.
bool is_cjk_punct_token(std::string_view tok)
{
    static const std::vector<std::string_view> marks{"、", "。", "，", "．", "（", "）", "「", "」"};
    return std::find(marks.begin(), marks.end(), tok) != marks.end();
}

bool is_punct_token(std::string_view tok) { return is_ascii_punct_token(tok) || is_cjk_punct_token(tok); }

bool attaches_left(std::string_view tok)
{
    static const std::vector<std::string_view> left{".", ",", ";", ":", "!", "?", ")", "]", "}", "'s", "n't", "'"};
    return std::find(left.begin(), left.end(), tok) != left.end();
}

bool attaches_right(std::string_view tok) { return tok == "(" || tok == "[" || tok == "{"; }

std::vector<std::string> trim_punct_edges(std::vector<std::string> tokens)
{
    std::size_t lo = 0;
    std::size_t hi = tokens.size();
    while (lo < hi && is_punct_token(tokens[lo])) ++lo;
    while (hi > lo && is_punct_token(tokens[hi - 1])) --hi;
    return {tokens.begin() + static_cast<std::ptrdiff_t>(lo), tokens.begin() + static_cast<std::ptrdiff_t>(hi)};
}

std::string trim_punct_text(std::string_view text)
{
    std::string s = trim(text);
    auto punct_end = [](const std::string& t) {
        return !t.empty() && static_cast<unsigned char>(t.back()) < 0x80 && std::ispunct(static_cast<unsigned char>(t.back()));
    };
    while (punct_end(s)) {
        s.pop_back();
        s = trim(s);
    }
    for (std::string_view mark : {"。", "、"}) {
        while (s.size() >= mark.size() && s.compare(s.size() - mark.size(), mark.size(), mark) == 0) {
            s = trim(std::string_view(s).substr(0, s.size() - mark.size()));
        }
    }
    return s;
}

std::size_t find_ci(std::string_view haystack, std::string_view needle)
{
    return to_lower_ascii(haystack).find(to_lower_ascii(needle));
}

struct Segmented {
    std::vector<std::string> condition_tokens;
    std::vector<std::string> statement_tokens;
    std::string condition;
    bool degraded = false;
};

// Main predicate: the one covering the most distinct tokens with its verb and
// arguments; the earliest wins ties.
const SrlPredicate* main_predicate(const SrlAnnotation& a, std::size_t n)
{
    const SrlPredicate* best = nullptr;
    std::size_t best_cover = 0;
    std::vector<char> covered(n);
    for (const auto& p : a.predicates) {
        std::fill(covered.begin(), covered.end(), 0);
        auto mark = [&](TokenSpan s) {
            for (std::size_t i = s.begin; i < s.end; ++i) covered[i] = 1;
        };
        mark(p.verb);
        for (const auto& arg : p.args) mark(arg.span);
        const auto cover = static_cast<std::size_t>(std::count(covered.begin(), covered.end(), 1));
        if (best == nullptr || cover > best_cover) {
            best = &p;
            best_cover = cover;
        }
    }
    return best;
}

Segmented segment(const std::vector<std::string>& tokens, const SrlAnnotation& a, Lang lang)
{
    Segmented out;
    const SrlPredicate* p = main_predicate(a, tokens.size());
    if (p == nullptr) {
        out.statement_tokens = tokens;
        out.degraded = true;
        return out;
    }
    std::size_t lo = p->verb.begin;
    std::size_t hi = p->verb.end;
    for (const auto& arg : p->args) {
        lo = std::min(lo, arg.span.begin);
        hi = std::max(hi, arg.span.end);
    }
    const auto first = tokens.begin();
    out.statement_tokens.assign(first + static_cast<std::ptrdiff_t>(lo), first + static_cast<std::ptrdiff_t>(hi));
    std::vector<std::string> before(first, first + static_cast<std::ptrdiff_t>(lo));
    std::vector<std::string> after(first + static_cast<std::ptrdiff_t>(hi), tokens.end());
    out.condition_tokens = before;
    out.condition_tokens.insert(out.condition_tokens.end(), after.begin(), after.end());

    std::vector<std::string> parts;
    for (auto* seg : {&before, &after}) {
        auto trimmed = trim_punct_edges(*seg);
        if (!trimmed.empty()) parts.push_back(detokenize(trimmed, lang));
    }
    out.condition = join(parts, lang == Lang::ja ? "" : " and ");
    return out;
}

std::vector<std::string> sentence_tokens(const SrlAnnotation& a, std::string_view text)
{
    auto tokens = a.tokens.empty() ? srl_tokenize(text) : a.tokens;
    validate_srl(a, tokens.size());
    return tokens;
}

const SrlAnnotation& require(const SrlStore& srl, const std::string& id)
{
    const SrlAnnotation* a = srl.find(id);
    if (a == nullptr) throw Error(ErrorKind::not_found, "no SRL annotation for sentence '" + id + "'");
    return *a;
}

std::vector<std::string> negate(std::vector<std::string> tokens, const std::set<std::string>& auxiliaries, Lang lang)
{
    if (lang == Lang::ja) {
        tokens.emplace_back("ない");
        return tokens;
    }
    auto it = std::find_if(tokens.begin(), tokens.end(),
                           [&](const std::string& t) { return auxiliaries.count(to_lower_ascii(t)) > 0; });
    const auto pos = it == tokens.end() ? std::min<std::size_t>(1, tokens.size())
                                        : static_cast<std::size_t>(it - tokens.begin()) + 1;
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(pos), "not");
    return tokens;
}

struct ExceptionSplit {
    std::string pre;
    std::string post;
};

std::optional<ExceptionSplit> split_exception(std::string_view sentence, const ExtractionOptions& options)
{
    std::size_t best = std::string_view::npos;
    std::size_t len = 0;
    for (const auto& m : options.exception_markers) {
        const auto pos = find_ci(sentence, m);
        if (pos < best) {
            best = pos;
            len = m.size();
        }
    }
    if (best == std::string_view::npos) return std::nullopt;
    ExceptionSplit out{trim(sentence.substr(0, best)), std::string(sentence.substr(best + len))};
    // Leading ", that" / "、" left over after the marker.
    std::string post = out.post;
    for (;;) {
        std::string before = post;
        post = trim(post);
        while (!post.empty() && (post.front() == ',' || post.front() == ':' || post.front() == ';')) post.erase(0, 1);
        if (post.rfind("、", 0) == 0) post.erase(0, std::string_view("、").size());
        post = trim(post);
        if (to_lower_ascii(post.substr(0, 5)) == "that ") post = post.substr(5);
        if (post == before) break;
    }
    out.post = post;
    return out;
}

CondStatePair make_pair(const Article& article, std::size_t idx, PairVariant variant, Segmented seg, std::string_view fallback)
{
    CondStatePair p;
    p.article_id = article.id;
    p.sentence_index = idx;
    p.variant = variant;
    p.degraded = seg.degraded;
    p.condition = seg.condition;
    p.statement = seg.degraded ? trim(fallback) : detokenize(seg.statement_tokens, article.lang);
    p.condition_tokens = std::move(seg.condition_tokens);
    p.statement_tokens = std::move(seg.statement_tokens);
    return p;
}

}  // namespace

std::vector<std::string> srl_tokenize(std::string_view sentence)
{
    std::vector<std::string> out;
    for (const auto& word : split_whitespace(sentence)) {
        std::string_view w = word;
        if (w == "'s" || w == "n't") {
            out.emplace_back(w);
            continue;
        }
        std::vector<std::string> trailing;
        while (!w.empty() && kLeadPunct.find(w.front()) != std::string_view::npos) {
            out.emplace_back(1, w.front());
            w.remove_prefix(1);
        }
        while (!w.empty() && kTrailPunct.find(w.back()) != std::string_view::npos) {
            trailing.emplace_back(1, w.back());
            w.remove_suffix(1);
        }
        auto ends_with = [&](std::string_view suf) {
            return w.size() > suf.size() && w.substr(w.size() - suf.size()) == suf;
        };
        std::string clitic;
        if (ends_with("'s")) {
            clitic = "'s";
        } else if (ends_with("n't")) {
            clitic = "n't";
        }
        if (!clitic.empty()) w.remove_suffix(clitic.size());
        if (!w.empty()) out.emplace_back(w);
        if (!clitic.empty()) out.push_back(clitic);
        out.insert(out.end(), trailing.rbegin(), trailing.rend());
    }
    return out;
}

std::string detokenize(std::span<const std::string> tokens, Lang lang)
{
    std::string out;
    bool glue_next = true;
    for (const auto& t : tokens) {
        if (!glue_next && lang == Lang::en && !attaches_left(t)) out += ' ';
        out += t;
        glue_next = attaches_right(t);
    }
    return out;
}

std::string normalize_surface(std::string_view text)
{
    return detokenize(srl_tokenize(text), Lang::en);
}

std::string strip_point_marker(std::string_view sentence)
{
    std::string s = trim(sentence);
    if (s.size() < 3 || s.front() != '(') return s;
    const auto close = s.find(')');
    if (close == std::string::npos || close > 6 || close == 1) return s;
    const std::string inner = s.substr(1, close - 1);
    const bool digits = std::all_of(inner.begin(), inner.end(), [](unsigned char c) { return std::isdigit(c); });
    const bool roman = std::all_of(inner.begin(), inner.end(), [](char c) { return std::string_view("ivxlIVXL").find(c) != std::string_view::npos; });
    const bool letter = inner.size() == 1 && std::isalpha(static_cast<unsigned char>(inner[0]));
    if (!digits && !roman && !letter) return s;
    return trim(std::string_view(s).substr(close + 1));
}

std::string_view to_string(PairVariant v) noexcept
{
    return v == PairVariant::main ? "main" : "exception";
}

std::string CondStatePair::id() const
{
    return article_id + "/" + std::to_string(sentence_index) + "/" + std::string(to_string(variant));
}

std::string srl_sentence_id(std::string_view article_id, std::size_t sentence_index, bool exception_part)
{
    std::string id = std::string(article_id) + "/" + std::to_string(sentence_index);
    if (exception_part) id += "/exception";
    return id;
}

std::vector<std::pair<std::string, std::vector<std::string>>> srl_requests(const Article& article,
                                                                           const ExtractionOptions& options)
{
    std::vector<std::pair<std::string, std::vector<std::string>>> out;
    const auto sentences = split_sentences(article.text, article.lang);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        const std::string s = strip_point_marker(sentences[i]);
        if (auto ex = split_exception(s, options)) {
            out.emplace_back(srl_sentence_id(article.id, i), srl_tokenize(ex->pre));
            if (!ex->post.empty()) out.emplace_back(srl_sentence_id(article.id, i, true), srl_tokenize(ex->post));
        } else if (!srl_tokenize(s).empty()) {
            out.emplace_back(srl_sentence_id(article.id, i), srl_tokenize(s));
        }
    }
    return out;
}

std::vector<CondStatePair> extract_pairs(const Article& article, const SrlStore& srl, const ExtractionOptions& options)
{
    std::vector<CondStatePair> out;
    const auto sentences = split_sentences(article.text, article.lang);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        const std::string sentence = strip_point_marker(sentences[i]);
        const auto ex = split_exception(sentence, options);
        const std::string main_text = ex ? ex->pre : sentence;
        if (srl_tokenize(main_text).empty() && ex == std::nullopt) continue;

        const auto main_id = srl_sentence_id(article.id, i);
        const auto& ann = require(srl, main_id);
        const auto tokens = sentence_tokens(ann, main_text);
        auto seg = segment(tokens, ann, article.lang);
        out.push_back(make_pair(article, i, PairVariant::main, seg, main_text));
        if (!ex || ex->post.empty()) continue;

        const CondStatePair& main = out.back();
        std::optional<std::size_t> override_at;
        std::size_t override_len = 0;
        for (const auto& phrase : options.override_phrases) {
            const auto pos = find_ci(ex->post, phrase);
            if (pos != std::string::npos && (!override_at || pos < *override_at)) {
                override_at = pos;
                override_len = phrase.size();
            }
        }

        if (override_at) {
            std::string cond = trim_punct_text(ex->post.substr(*override_at + override_len));
            if (cond.empty()) cond = trim_punct_text(ex->post.substr(0, *override_at));
            CondStatePair merged = main;
            merged.variant = PairVariant::exception_merged;
            merged.degraded = false;
            const auto cond_tokens = srl_tokenize(cond);
            merged.condition_tokens.insert(merged.condition_tokens.end(), cond_tokens.begin(), cond_tokens.end());
            if (!cond.empty()) {
                const std::string sep = article.lang == Lang::ja ? "" : " and ";
                merged.condition = main.condition.empty() ? cond : main.condition + sep + cond;
            }
            merged.statement_tokens = negate(main.statement_tokens, options.auxiliaries, article.lang);
            merged.statement = detokenize(merged.statement_tokens, article.lang);
            out.push_back(std::move(merged));
            continue;
        }

        const auto ex_id = srl_sentence_id(article.id, i, true);
        if (const SrlAnnotation* ex_ann = srl.find(ex_id)) {
            const auto ex_tokens = sentence_tokens(*ex_ann, ex->post);
            out.push_back(make_pair(article, i, PairVariant::exception_merged, segment(ex_tokens, *ex_ann, article.lang),
                                    ex->post));
        } else {
            Segmented whole;
            whole.statement_tokens = srl_tokenize(ex->post);
            whole.degraded = true;
            out.push_back(make_pair(article, i, PairVariant::exception_merged, whole, trim_punct_text(ex->post)));
        }
    }
    return out;
}

std::string serialize_cs_pairs(const std::vector<CondStatePair>& pairs)
{
    std::vector<json> records;
    records.reserve(pairs.size());
    for (const auto& p : pairs) {
        records.push_back({{"id", p.id()},
                           {"article_id", p.article_id},
                           {"sentence_index", p.sentence_index},
                           {"variant", std::string(to_string(p.variant))},
                           {"condition", p.condition},
                           {"statement", p.statement},
                           {"condition_tokens", p.condition_tokens},
                           {"statement_tokens", p.statement_tokens},
                           {"degraded", p.degraded}});
    }
    return to_jsonl(records);
}

std::vector<CondStatePair> load_cs_pairs(const std::filesystem::path& path)
{
    std::vector<CondStatePair> out;
    for_each_jsonl(path, [&](std::size_t, const json& j) {
        CondStatePair p;
        p.article_id = j.at("article_id").get<std::string>();
        p.sentence_index = j.at("sentence_index").get<std::size_t>();
        const auto v = j.at("variant").get<std::string>();
        if (v == "main") {
            p.variant = PairVariant::main;
        } else if (v == "exception") {
            p.variant = PairVariant::exception_merged;
        } else {
            throw Error(ErrorKind::parse, "unknown pair variant '" + v + "'");
        }
        p.condition = j.at("condition").get<std::string>();
        p.statement = j.at("statement").get<std::string>();
        p.condition_tokens = j.value("condition_tokens", std::vector<std::string>{});
        p.statement_tokens = j.value("statement_tokens", std::vector<std::string>{});
        p.degraded = j.value("degraded", false);
        if (p.statement.empty()) throw Error(ErrorKind::validation, "pair '" + p.id() + "' has an empty statement");
        out.push_back(std::move(p));
    });
    return out;
}

QueryDecomposition decompose_query(std::string_view text, Lang lang)
{
    auto sentences = split_sentences(text, lang);
    if (sentences.empty()) throw Error(ErrorKind::precondition, "query text is empty");
    QueryDecomposition out;
    out.statement = sentences.back();
    sentences.pop_back();
    out.condition = join(sentences, lang == Lang::ja ? "" : " ");
    return out;
}

InferenceResult infer_yes_no(const QueryDecomposition& query,
                             std::span<const CondStatePair> pairs,
                             const InvertedIndex& idf_source,
                             Lang lang,
                             const NegationLexicon& lexicon)
{
    if (pairs.empty()) throw Error(ErrorKind::precondition, "no condition/statement pairs to match against");
    const bool by_condition = !idf_source.tokenizer().tokenize(query.condition).empty();

    auto similarity = [&](const CondStatePair& p) {
        try {
            return by_condition ? tfidf_cosine(query.condition, p.condition, idf_source)
                                : tfidf_cosine(query.statement, p.statement, idf_source);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::undefined_similarity) throw;
            return 0.0;
        }
    };

    std::size_t best = 0;
    double best_sim = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double s = similarity(pairs[i]);
        bool better = s > best_sim;
        if (!better && s == best_sim) {
            const auto& a = pairs[i];
            const auto& b = pairs[best];
            better = a.sentence_index < b.sentence_index ||
                     (a.sentence_index == b.sentence_index && a.variant == PairVariant::main &&
                      b.variant != PairVariant::main);
        }
        if (better) {
            best = i;
            best_sim = s;
        }
    }

    const auto& p = pairs[best];
    const bool cond_ok = negation_parity(p.condition, lang, lexicon) == negation_parity(query.condition, lang, lexicon);
    const bool stmt_ok = negation_parity(p.statement, lang, lexicon) == negation_parity(query.statement, lang, lexicon);
    return {cond_ok && stmt_ok ? Answer::yes : Answer::no, best, best_sim, p.id()};
}

}  // namespace coliee
