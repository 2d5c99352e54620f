#include <algorithm>
#include <cctype>

#include "coliee/entail.hpp"
#include "coliee/error.hpp"
#include "coliee/util.hpp"

namespace coliee {

namespace {

std::vector<std::string> negation_words(std::string_view text)
{
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.push_back(to_lower_ascii(cur));
        cur.clear();
    };
    for (char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '\'') {
            cur += c;
        } else {
            flush();
        }
    }
    flush();
    return out;
}

std::size_t count_substring(std::string_view text, std::string_view needle)
{
    if (needle.empty()) return 0;
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

}  // namespace

std::size_t count_negations(std::string_view text, Lang lang, const NegationLexicon& lexicon)
{
    if (lang == Lang::ja) {
        std::size_t n = 0;
        for (const auto& s : lexicon.ja_substrings) n += count_substring(text, s);
        return n;
    }
    std::size_t n = 0;
    for (const auto& w : negation_words(text)) {
        const bool clitic = w.size() >= 3 && w.compare(w.size() - 3, 3, "n't") == 0;
        if (clitic || lexicon.words.count(w) > 0) ++n;
    }
    return n;
}

Parity negation_parity(std::string_view text, Lang lang, const NegationLexicon& lexicon)
{
    return count_negations(text, lang, lexicon) % 2 == 0 ? Parity::even : Parity::odd;
}

std::string_view to_string(QueryKindTag k) noexcept
{
    return k == QueryKindTag::specific_scenario ? "specific-scenario" : "general";
}

QueryKind detect_query_kind(std::string_view text)
{
    struct Word {
        std::string text;
        bool sentence_initial = false;
    };
    std::vector<Word> words;
    std::string cur;
    bool initial = true;
    bool pending_initial = true;
    auto flush = [&] {
        if (cur.empty()) return;
        if (cur.size() > 2 && (cur.compare(cur.size() - 2, 2, "'s") == 0)) cur.resize(cur.size() - 2);
        words.push_back({cur, initial});
        cur.clear();
        initial = false;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '\'' || u >= 0x80) {
            if (cur.empty()) initial = pending_initial;
            pending_initial = false;
            cur += c;
            continue;
        }
        flush();
        if (c == '.' || c == '!' || c == '?') {
            const bool boundary = i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]));
            if (boundary) pending_initial = true;
        }
    }
    flush();

    auto party_letter = [](const std::string& w) { return w.size() == 1 && w[0] >= 'A' && w[0] <= 'Z' && w != "I"; };

    struct Hit {
        std::string letter;
        bool tentative = false;
    };
    std::vector<Hit> hits;
    bool certain = false;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (!party_letter(words[i].text)) continue;
        const bool article_like = words[i].text == "A" && words[i].sentence_initial && i + 1 < words.size() &&
                                  std::islower(static_cast<unsigned char>(words[i + 1].text.front()));
        hits.push_back({words[i].text, article_like});
        if (!article_like) certain = true;
    }

    QueryKind out;
    if (!certain) return out;
    for (const auto& h : hits) {
        if (std::find(out.evidence.begin(), out.evidence.end(), h.letter) == out.evidence.end()) {
            out.evidence.push_back(h.letter);
        }
    }
    out.kind = QueryKindTag::specific_scenario;
    return out;
}

Answer route_ensemble(Answer cs_answer, Answer svm_answer, const QueryKind& kind)
{
    if (cs_answer == svm_answer) return cs_answer;
    return kind.kind == QueryKindTag::specific_scenario ? svm_answer : cs_answer;
}

std::string serialize_answer_records(const std::vector<AnswerRecord>& records)
{
    std::vector<json> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        json j{{"query_id", r.query_id}, {"answer", std::string(to_string(r.answer))}, {"method", r.method}};
        j["matched_pair"] = r.matched_pair ? json(*r.matched_pair) : json(nullptr);
        out.push_back(std::move(j));
    }
    return to_jsonl(out);
}

std::map<std::string, AnswerRecord> load_answer_records(const std::filesystem::path& path)
{
    std::map<std::string, AnswerRecord> out;
    for_each_jsonl(path, [&](std::size_t, const json& j) {
        AnswerRecord r;
        r.query_id = j.at("query_id").get<std::string>();
        r.answer = parse_answer(j.at("answer").get<std::string>());
        r.method = j.value("method", std::string{});
        if (j.contains("matched_pair") && !j["matched_pair"].is_null()) {
            r.matched_pair = j["matched_pair"].get<std::string>();
        }
        if (out.count(r.query_id) > 0) {
            throw Error(ErrorKind::validation, "duplicate answer for query '" + r.query_id + "'");
        }
        out.emplace(r.query_id, std::move(r));
    });
    return out;
}

AnswerLabels answers_of(const std::map<std::string, AnswerRecord>& records)
{
    AnswerLabels out;
    for (const auto& [id, r] : records) out.emplace(id, r.answer);
    return out;
}

}  // namespace coliee
