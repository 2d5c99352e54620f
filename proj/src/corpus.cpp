#include "coliee/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <optional>

#include "coliee/error.hpp"
#include "coliee/util.hpp"

namespace coliee {

namespace fs = std::filesystem;

std::string_view to_string(Lang lang) noexcept { return lang == Lang::ja ? "ja" : "en"; }

std::string_view to_string(Split split) noexcept
{
    switch (split) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
    }
    return "train";
}

std::string_view to_string(Answer answer) noexcept { return answer == Answer::yes ? "YES" : "NO"; }

Lang parse_lang(std::string_view s)
{
    if (s == "en") return Lang::en;
    if (s == "ja") return Lang::ja;
    throw Error(ErrorKind::parse, "unknown language tag '" + std::string(s) + "'");
}

Split parse_split(std::string_view s)
{
    if (s == "train") return Split::train;
    if (s == "validation") return Split::validation;
    if (s == "test") return Split::test;
    throw Error(ErrorKind::parse, "unknown split '" + std::string(s) + "'");
}

Answer parse_answer(std::string_view s)
{
    if (s == "YES" || s == "Y") return Answer::yes;
    if (s == "NO" || s == "N") return Answer::no;
    throw Error(ErrorKind::parse, "answer must be YES or NO, got '" + std::string(s) + "'");
}

CorpusFormat parse_corpus_format(std::string_view s)
{
    if (s == "canonical-jsonl") return CorpusFormat::canonical_jsonl;
    if (s == "coliee-task2-dir") return CorpusFormat::coliee_task2_dir;
    if (s == "coliee-statute-xml") return CorpusFormat::coliee_statute_xml;
    throw Error(ErrorKind::config, "unknown corpus format '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Split manifest

Split SplitManifest::assign(std::string_view query_id) const
{
    std::optional<Split> found;
    for (const auto& [split, pats] : patterns) {
        bool hit = std::any_of(pats.begin(), pats.end(),
                               [&](const std::string& p) { return id_pattern_match(p, query_id); });
        if (!hit) {
            continue;
        }
        if (found && *found != split) {
            throw Error(ErrorKind::integrity, "query '" + std::string(query_id) +
                                                  "' matches both " + std::string(to_string(*found)) +
                                                  " and " + std::string(to_string(split)));
        }
        found = split;
    }
    if (!found) {
        throw Error(ErrorKind::integrity,
                    "query '" + std::string(query_id) + "' matches no split in the manifest");
    }
    return *found;
}

SplitManifest SplitManifest::load(const fs::path& path)
{
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::parse, path.string() + ": " + e.what());
    }
    SplitManifest m;
    if (!doc.contains("splits") || !doc["splits"].is_object()) {
        throw Error(ErrorKind::parse, path.string() + ": missing \"splits\" object");
    }
    for (const auto& [name, pats] : doc["splits"].items()) {
        std::vector<std::string> list;
        for (const auto& p : pats) {
            list.push_back(p.get<std::string>());
        }
        m.patterns.emplace_back(parse_split(name), std::move(list));
    }
    return m;
}

SplitManifest SplitManifest::all_train()
{
    return SplitManifest{{{Split::train, {"*"}}}};
}

// ---------------------------------------------------------------------------
// Corpus

Corpus Corpus::build(std::vector<Article> articles,
                     std::vector<CaseFragment> cases,
                     std::vector<Query> queries,
                     GoldLabels gold,
                     AnswerLabels answers)
{
    Corpus c;
    c.m_articles = std::move(articles);
    c.m_cases = std::move(cases);
    c.m_queries = std::move(queries);
    c.m_gold = std::move(gold);
    c.m_answers = std::move(answers);

    for (std::size_t i = 0; i < c.m_articles.size(); ++i) {
        const auto& a = c.m_articles[i];
        if (a.id.empty()) {
            throw Error(ErrorKind::integrity, "article with empty id");
        }
        if (trim(a.text).empty()) {
            throw Error(ErrorKind::integrity, "article '" + a.id + "' has empty text");
        }
        if (!c.m_article_pos.emplace(a.id, i).second) {
            throw Error(ErrorKind::integrity, "duplicate article id '" + a.id + "'");
        }
    }
    for (std::size_t i = 0; i < c.m_cases.size(); ++i) {
        const auto& cs = c.m_cases[i];
        if (cs.candidates.empty()) {
            throw Error(ErrorKind::integrity, "case '" + cs.case_id + "' has no candidates");
        }
        std::set<std::string_view> pids;
        for (const auto& p : cs.candidates) {
            if (!pids.insert(p.id).second) {
                throw Error(ErrorKind::integrity,
                            "duplicate paragraph id '" + p.id + "' in case '" + cs.case_id + "'");
            }
        }
        if (!c.m_case_pos.emplace(cs.case_id, i).second) {
            throw Error(ErrorKind::integrity, "duplicate case id '" + cs.case_id + "'");
        }
    }
    for (std::size_t i = 0; i < c.m_queries.size(); ++i) {
        const auto& q = c.m_queries[i];
        if (!c.m_query_pos.emplace(q.id, i).second) {
            throw Error(ErrorKind::integrity, "duplicate query id '" + q.id + "'");
        }
        if (c.is_case_corpus() && !c.m_case_pos.contains(q.id)) {
            throw Error(ErrorKind::integrity, "query '" + q.id + "' has no matching case");
        }
    }
    for (const auto& [qid, docs] : c.m_gold) {
        if (!c.m_query_pos.contains(qid)) {
            throw Error(ErrorKind::integrity, "gold references unknown query '" + qid + "'");
        }
        if (docs.empty()) {
            throw Error(ErrorKind::integrity, "gold set for '" + qid + "' is empty");
        }
        for (const auto& d : docs) {
            if (!c.in_pool(qid, d)) {
                throw Error(ErrorKind::integrity,
                            "gold for '" + qid + "' references unknown document '" + d + "'");
            }
        }
    }
    for (const auto& [qid, _] : c.m_answers) {
        if (!c.m_query_pos.contains(qid)) {
            throw Error(ErrorKind::integrity, "answer label for unknown query '" + qid + "'");
        }
    }
    return c;
}

const Query* Corpus::find_query(std::string_view id) const
{
    auto it = m_query_pos.find(std::string(id));
    return it == m_query_pos.end() ? nullptr : &m_queries[it->second];
}

const Article* Corpus::find_article(std::string_view id) const
{
    auto it = m_article_pos.find(std::string(id));
    return it == m_article_pos.end() ? nullptr : &m_articles[it->second];
}

const CaseFragment* Corpus::find_case(std::string_view id) const
{
    auto it = m_case_pos.find(std::string(id));
    return it == m_case_pos.end() ? nullptr : &m_cases[it->second];
}

std::vector<std::string> Corpus::query_ids(std::optional<Split> split) const
{
    std::vector<std::string> ids;
    for (const auto& q : m_queries) {
        if (!split || q.split == *split) {
            ids.push_back(q.id);
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<DocRef> Corpus::candidate_pool(std::string_view query_id) const
{
    std::vector<DocRef> pool;
    if (is_case_corpus()) {
        if (const auto* cs = find_case(query_id)) {
            for (const auto& p : cs->candidates) {
                pool.push_back({p.id, p.text});
            }
        }
        return pool;
    }
    for (const auto& a : m_articles) {
        pool.push_back({a.id, a.text});
    }
    return pool;
}

bool Corpus::in_pool(std::string_view query_id, std::string_view doc_id) const
{
    if (is_case_corpus()) {
        const auto* cs = find_case(query_id);
        return cs != nullptr &&
               std::any_of(cs->candidates.begin(), cs->candidates.end(),
                           [&](const Paragraph& p) { return p.id == doc_id; });
    }
    return find_article(doc_id) != nullptr;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

/// Any codepoint in the CJK / kana blocks marks text as Japanese.
Lang detect_lang(std::string_view text)
{
    for (std::size_t i = 0; i + 2 < text.size(); ++i) {
        auto c0 = static_cast<unsigned char>(text[i]);
        if (c0 == 0xE3 || (c0 >= 0xE4 && c0 <= 0xE9)) {
            return Lang::ja;
        }
    }
    return Lang::en;
}

std::string get_string(const json& rec, const char* key, bool required = true)
{
    auto it = rec.find(key);
    if (it == rec.end() || it->is_null()) {
        if (required) {
            throw Error(ErrorKind::parse, std::string("missing field \"") + key + "\"");
        }
        return {};
    }
    return it->get<std::string>();
}

template <typename F>
void with_location(const fs::path& path, std::size_t line, F&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::parse) {
            throw Error(ErrorKind::parse, path.string() + ":" + std::to_string(line) + ": " + e.what());
        }
        throw;
    }
}

std::vector<Query> load_queries_jsonl(const fs::path& path, const SplitManifest& manifest)
{
    std::vector<Query> out;
    for_each_jsonl(path, [&](std::size_t line, const json& rec) {
        with_location(path, line, [&] {
            Query q;
            q.id = get_string(rec, "id");
            q.text = get_string(rec, "text");
            auto lang = get_string(rec, "lang", false);
            q.lang = lang.empty() ? Lang::en : parse_lang(lang);
            q.split = manifest.assign(q.id);
            out.push_back(std::move(q));
        });
    });
    return out;
}

SplitManifest manifest_in(const fs::path& dir)
{
    auto p = dir / "manifest.json";
    return fs::exists(p) ? SplitManifest::load(p) : SplitManifest::all_train();
}

std::string strip_txt(std::string s)
{
    if (s.size() > 4 && s.ends_with(".txt")) {
        s.resize(s.size() - 4);
    }
    return s;
}

Corpus load_canonical(const fs::path& dir)
{
    auto articles = load_articles_jsonl(dir / "articles.jsonl");
    auto queries = load_queries_jsonl(dir / "queries.jsonl", manifest_in(dir));
    GoldLabels gold;
    if (fs::exists(dir / "gold.json")) {
        gold = load_gold(dir / "gold.json");
    }
    AnswerLabels answers;
    if (fs::exists(dir / "answers.json")) {
        answers = load_answers(dir / "answers.json");
    }
    return Corpus::build(std::move(articles), {}, std::move(queries), std::move(gold),
                         std::move(answers));
}

Corpus load_task2_dir(const fs::path& dir)
{
    const auto cases_dir = dir / "cases";
    if (!fs::is_directory(cases_dir)) {
        throw Error(ErrorKind::io, "missing directory " + cases_dir.string());
    }
    auto manifest = manifest_in(dir);
    std::vector<fs::path> case_dirs;
    for (const auto& e : fs::directory_iterator(cases_dir)) {
        if (e.is_directory()) {
            case_dirs.push_back(e.path());
        }
    }
    std::sort(case_dirs.begin(), case_dirs.end());

    std::vector<CaseFragment> cases;
    std::vector<Query> queries;
    for (const auto& cd : case_dirs) {
        CaseFragment cs;
        cs.case_id = cd.filename().string();
        const auto fragment = fs::exists(cd / "fragment.txt") ? cd / "fragment.txt" : cd / "entailed_fragment.txt";
        cs.fragment_text = trim(read_file(fragment));
        std::vector<fs::path> paras;
        if (fs::is_directory(cd / "paragraphs")) {
            for (const auto& e : fs::directory_iterator(cd / "paragraphs")) {
                if (e.is_regular_file() && e.path().extension() == ".txt") {
                    paras.push_back(e.path());
                }
            }
        }
        std::sort(paras.begin(), paras.end());
        for (const auto& p : paras) {
            cs.candidates.push_back({p.stem().string(), read_file(p)});
        }
        Query q;
        q.id = cs.case_id;
        q.text = cs.fragment_text;
        q.lang = detect_lang(q.text);
        q.split = manifest.assign(q.id);
        queries.push_back(std::move(q));
        cases.push_back(std::move(cs));
    }
    GoldLabels gold;
    if (fs::exists(dir / "labels.json")) {
        gold = load_gold(dir / "labels.json");
        GoldLabels cleaned;
        for (auto& [qid, docs] : gold) {
            auto& set = cleaned[strip_txt(qid)];
            for (const auto& d : docs) {
                set.insert(strip_txt(d));
            }
        }
        gold = std::move(cleaned);
    }
    return Corpus::build({}, std::move(cases), std::move(queries), std::move(gold));
}

// Minimal XML reader covering the statute pair files: elements, attributes,
// character data, the five predefined entities, numeric references, comments,
// declarations and CDATA. Unknown elements and attributes are kept and ignored
// by the caller.
struct XmlNode {
    std::string name;
    std::map<std::string, std::string> attrs;
    std::vector<XmlNode> children;
    std::string text;
};

class XmlReader {
  public:
    XmlReader(std::string_view src, std::string name) : m_src(src), m_name(std::move(name)) {}

    XmlNode parse_document()
    {
        XmlNode root;
        root.name = "#document";
        parse_content(root, "");
        return root;
    }

  private:
    [[noreturn]] void fail(const std::string& msg) const
    {
        std::size_t line = 1 + static_cast<std::size_t>(
                                   std::count(m_src.begin(), m_src.begin() + static_cast<long>(m_pos), '\n'));
        throw Error(ErrorKind::parse, m_name + ":" + std::to_string(line) + ": " + msg);
    }

    bool starts_with(std::string_view s) const { return m_src.substr(m_pos).starts_with(s); }

    void skip_past(std::string_view terminator)
    {
        auto p = m_src.find(terminator, m_pos);
        if (p == std::string_view::npos) {
            fail("unterminated construct, expected '" + std::string(terminator) + "'");
        }
        m_pos = p + terminator.size();
    }

    static void append_utf8(std::string& out, unsigned long cp)
    {
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }

    std::string decode(std::string_view raw) const
    {
        std::string out;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] != '&') {
                out += raw[i];
                continue;
            }
            auto semi = raw.find(';', i);
            if (semi == std::string_view::npos) {
                fail("unterminated entity");
            }
            auto ent = raw.substr(i + 1, semi - i - 1);
            if (ent == "amp") out += '&';
            else if (ent == "lt") out += '<';
            else if (ent == "gt") out += '>';
            else if (ent == "quot") out += '"';
            else if (ent == "apos") out += '\'';
            else if (!ent.empty() && ent[0] == '#') {
                unsigned long cp = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X')
                                       ? std::stoul(std::string(ent.substr(2)), nullptr, 16)
                                       : std::stoul(std::string(ent.substr(1)), nullptr, 10);
                append_utf8(out, cp);
            } else {
                fail("unknown entity &" + std::string(ent) + ";");
            }
            i = semi;
        }
        return out;
    }

    std::string read_name()
    {
        auto b = m_pos;
        while (m_pos < m_src.size()) {
            char c = m_src[m_pos];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '>' || c == '/' || c == '=') {
                break;
            }
            ++m_pos;
        }
        if (b == m_pos) {
            fail("expected a name");
        }
        return std::string(m_src.substr(b, m_pos - b));
    }

    void skip_space()
    {
        while (m_pos < m_src.size() && std::isspace(static_cast<unsigned char>(m_src[m_pos]))) {
            ++m_pos;
        }
    }

    void parse_content(XmlNode& parent, std::string_view closing)
    {
        while (m_pos < m_src.size()) {
            if (starts_with("<!--")) {
                skip_past("-->");
            } else if (starts_with("<![CDATA[")) {
                m_pos += 9;
                auto end = m_src.find("]]>", m_pos);
                if (end == std::string_view::npos) {
                    fail("unterminated CDATA");
                }
                parent.text += m_src.substr(m_pos, end - m_pos);
                m_pos = end + 3;
            } else if (starts_with("<?") || starts_with("<!")) {
                skip_past(">");
            } else if (starts_with("</")) {
                m_pos += 2;
                auto name = read_name();
                skip_space();
                if (m_pos >= m_src.size() || m_src[m_pos] != '>') {
                    fail("malformed closing tag");
                }
                ++m_pos;
                if (name != closing) {
                    fail("mismatched closing tag </" + name + ">");
                }
                return;
            } else if (m_src[m_pos] == '<') {
                ++m_pos;
                parent.children.push_back(parse_element());
            } else {
                auto next = m_src.find('<', m_pos);
                if (next == std::string_view::npos) {
                    next = m_src.size();
                }
                parent.text += decode(m_src.substr(m_pos, next - m_pos));
                m_pos = next;
            }
        }
        if (!closing.empty()) {
            fail("missing </" + std::string(closing) + ">");
        }
    }

    XmlNode parse_element()
    {
        XmlNode node;
        node.name = read_name();
        while (true) {
            skip_space();
            if (m_pos >= m_src.size()) {
                fail("unterminated tag <" + node.name + ">");
            }
            if (starts_with("/>")) {
                m_pos += 2;
                return node;
            }
            if (m_src[m_pos] == '>') {
                ++m_pos;
                break;
            }
            auto key = read_name();
            skip_space();
            if (m_pos >= m_src.size() || m_src[m_pos] != '=') {
                fail("attribute '" + key + "' without value");
            }
            ++m_pos;
            skip_space();
            if (m_pos >= m_src.size() || (m_src[m_pos] != '"' && m_src[m_pos] != '\'')) {
                fail("attribute '" + key + "' value must be quoted");
            }
            char quote = m_src[m_pos++];
            auto end = m_src.find(quote, m_pos);
            if (end == std::string_view::npos) {
                fail("unterminated attribute value");
            }
            node.attrs[key] = decode(m_src.substr(m_pos, end - m_pos));
            m_pos = end + 1;
        }
        parse_content(node, node.name);
        return node;
    }

    std::string_view m_src;
    std::string m_name;
    std::size_t m_pos = 0;
};

const XmlNode* child(const XmlNode& n, std::string_view name)
{
    for (const auto& c : n.children) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

void collect(const XmlNode& n, std::string_view name, std::vector<const XmlNode*>& out)
{
    for (const auto& c : n.children) {
        if (c.name == name) {
            out.push_back(&c);
        } else {
            collect(c, name, out);
        }
    }
}

/// Splits a t1 block into articles on lines that start with "Article <n>"
/// (or "第<n>条" for Japanese text). A block without headings becomes a single
/// article keyed by the pair id.
std::vector<Article> articles_from_block(const std::string& block, const std::string& pair_id)
{
    std::vector<Article> out;
    std::vector<std::string> lines;
    {
        std::string cur;
        for (char c : block) {
            if (c == '\n') {
                lines.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        lines.push_back(cur);
    }
    auto heading_number = [](const std::string& line) -> std::optional<std::string> {
        auto t = trim(line);
        if (t.starts_with("Article ")) {
            auto rest = t.substr(8);
            std::size_t e = 0;
            while (e < rest.size() && !std::isspace(static_cast<unsigned char>(rest[e]))) {
                ++e;
            }
            if (e > 0 && std::isdigit(static_cast<unsigned char>(rest[0]))) {
                return rest.substr(0, e);
            }
        }
        if (t.starts_with("第")) {
            auto pos = t.find("条");
            if (pos != std::string::npos && pos < 24) {
                return t.substr(3, pos - 3);
            }
        }
        return std::nullopt;
    };
    Article* cur = nullptr;
    std::vector<std::string> loose;
    for (const auto& line : lines) {
        if (auto num = heading_number(line)) {
            Article a;
            a.number = *num;
            a.id = *num;
            auto t = trim(line);
            auto after = t.find(*num) + num->size();
            auto remainder = trim(t.substr(after));
            // Statute headings put the caption in parentheses on the heading line.
            if (remainder.starts_with("(") && remainder.find(')') != std::string::npos &&
                !std::isdigit(static_cast<unsigned char>(remainder[1]))) {
                auto close = remainder.find(')');
                a.caption = remainder.substr(1, close - 1);
                remainder = trim(remainder.substr(close + 1));
            }
            a.text = remainder;
            out.push_back(std::move(a));
            cur = &out.back();
            continue;
        }
        auto t = trim(line);
        if (t.empty()) {
            continue;
        }
        if (cur == nullptr) {
            loose.push_back(t);
        } else {
            cur->text += cur->text.empty() ? t : "\n" + t;
        }
    }
    if (out.empty() && !loose.empty()) {
        Article a;
        a.id = pair_id + "-t1";
        a.number = a.id;
        a.text = join(loose, "\n");
        out.push_back(std::move(a));
    }
    for (auto& a : out) {
        a.lang = detect_lang(a.text);
    }
    return out;
}

Corpus load_statute_xml(const fs::path& path)
{
    XmlReader reader(read_file(path), path.string());
    auto root = reader.parse_document();
    auto manifest = manifest_in(path.parent_path());

    std::vector<const XmlNode*> pairs;
    collect(root, "pair", pairs);

    std::vector<Article> articles;
    std::map<std::string, std::size_t> article_pos;
    std::vector<Query> queries;
    GoldLabels gold;
    AnswerLabels answers;
    for (const auto* p : pairs) {
        auto id_it = p->attrs.find("id");
        if (id_it == p->attrs.end() || id_it->second.empty()) {
            throw Error(ErrorKind::parse, path.string() + ": <pair> without id attribute");
        }
        const auto& qid = id_it->second;
        const auto* t1 = child(*p, "t1");
        const auto* t2 = child(*p, "t2");
        if (t2 == nullptr) {
            throw Error(ErrorKind::parse, path.string() + ": pair '" + qid + "' has no <t2>");
        }
        Query q;
        q.id = qid;
        q.text = trim(t2->text);
        q.lang = detect_lang(q.text);
        q.split = manifest.assign(qid);
        queries.push_back(std::move(q));
        if (t1 != nullptr) {
            for (auto& a : articles_from_block(t1->text, qid)) {
                gold[qid].insert(a.id);
                auto [it, fresh] = article_pos.emplace(a.id, articles.size());
                if (fresh) {
                    articles.push_back(std::move(a));
                } else if (articles[it->second].text != a.text) {
                    throw Error(ErrorKind::integrity,
                                "article '" + a.id + "' appears with different texts");
                }
            }
        }
        if (auto lab = p->attrs.find("label"); lab != p->attrs.end() && !lab->second.empty()) {
            answers[qid] = parse_answer(lab->second);
        }
    }
    return Corpus::build(std::move(articles), {}, std::move(queries), std::move(gold),
                         std::move(answers));
}

}  // namespace

std::vector<Article> load_articles_jsonl(const fs::path& path)
{
    std::vector<Article> out;
    for_each_jsonl(path, [&](std::size_t line, const json& rec) {
        with_location(path, line, [&] {
            Article a;
            a.id = get_string(rec, "id");
            a.number = get_string(rec, "number", false);
            a.caption = get_string(rec, "caption", false);
            a.text = get_string(rec, "text");
            auto lang = get_string(rec, "lang", false);
            a.lang = lang.empty() ? Lang::en : parse_lang(lang);
            out.push_back(std::move(a));
        });
    });
    return out;
}

GoldLabels load_gold(const fs::path& path)
{
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::parse, path.string() + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw Error(ErrorKind::parse, path.string() + ": expected an object of id lists");
    }
    GoldLabels gold;
    for (const auto& [qid, ids] : doc.items()) {
        if (!ids.is_array()) {
            throw Error(ErrorKind::parse, path.string() + ": gold for '" + qid + "' is not a list");
        }
        auto& set = gold[qid];
        for (const auto& d : ids) {
            set.insert(d.get<std::string>());
        }
    }
    return gold;
}

AnswerLabels load_answers(const fs::path& path)
{
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::parse, path.string() + ": " + e.what());
    }
    AnswerLabels out;
    for (const auto& [qid, v] : doc.items()) {
        out[qid] = parse_answer(v.get<std::string>());
    }
    return out;
}

Corpus load_corpus(const fs::path& path, CorpusFormat format)
{
    if (!fs::exists(path)) {
        throw Error(ErrorKind::io, "no such path " + path.string());
    }
    switch (format) {
    case CorpusFormat::canonical_jsonl: return load_canonical(path);
    case CorpusFormat::coliee_task2_dir: return load_task2_dir(path);
    case CorpusFormat::coliee_statute_xml: return load_statute_xml(path);
    }
    throw Error(ErrorKind::config, "unsupported corpus format");
}

std::string serialize_articles(const std::vector<Article>& articles)
{
    std::vector<json> rows;
    for (const auto& a : articles) {
        rows.push_back({{"id", a.id},
                        {"number", a.number},
                        {"caption", a.caption},
                        {"text", a.text},
                        {"lang", to_string(a.lang)}});
    }
    return to_jsonl(rows);
}

std::string serialize_queries(const std::vector<Query>& queries)
{
    std::vector<json> rows;
    for (const auto& q : queries) {
        rows.push_back({{"id", q.id}, {"text", q.text}, {"lang", to_string(q.lang)}});
    }
    return to_jsonl(rows);
}

std::string serialize_gold(const GoldLabels& gold)
{
    json doc = json::object();
    for (const auto& [qid, docs] : gold) {
        doc[qid] = std::vector<std::string>(docs.begin(), docs.end());
    }
    return doc.dump(2) + "\n";
}

std::string serialize_answers(const AnswerLabels& answers)
{
    json doc = json::object();
    for (const auto& [qid, a] : answers) {
        doc[qid] = to_string(a);
    }
    return doc.dump(2) + "\n";
}

DatasetStats compute_stats(const Corpus& corpus, std::optional<Split> split)
{
    if (corpus.queries().empty()) {
        throw Error(ErrorKind::empty_input, "corpus has no queries");
    }
    DatasetStats s;
    std::size_t n = 0;
    double candidates = 0.0;
    double entailments = 0.0;
    for (const auto& q : corpus.queries()) {
        switch (q.split) {
        case Split::train: ++s.n_train; break;
        case Split::validation: ++s.n_validation; break;
        case Split::test: ++s.n_test; break;
        }
        if (split && q.split != *split) {
            continue;
        }
        ++n;
        candidates += static_cast<double>(corpus.candidate_pool(q.id).size());
        if (auto it = corpus.gold().find(q.id); it != corpus.gold().end()) {
            entailments += static_cast<double>(it->second.size());
        }
    }
    if (n == 0) {
        throw Error(ErrorKind::empty_input, "no queries in the requested split");
    }
    s.candidates_per_case = candidates / static_cast<double>(n);
    s.entailments_per_case = entailments / static_cast<double>(n);
    return s;
}

// ---------------------------------------------------------------------------
// Sentence splitting

const std::vector<std::string>& abbreviation_guards()
{
    static const std::vector<std::string> guards{"Mr.", "No.", "Art.", "e.g.", "i.e."};
    return guards;
}

namespace {

bool is_space_byte(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool guarded(std::string_view text, std::size_t dot)
{
    std::size_t b = dot;
    while (b > 0 && !is_space_byte(text[b - 1])) {
        --b;
    }
    auto word = text.substr(b, dot + 1 - b);
    while (!word.empty() && (word.front() == '(' || word.front() == '"' || word.front() == '\'')) {
        word.remove_prefix(1);
    }
    const auto& g = abbreviation_guards();
    return std::find(g.begin(), g.end(), word) != g.end();
}

constexpr std::string_view kIdeographicFullStop = "\xE3\x80\x82";  // 。

}  // namespace

std::vector<SentenceSpan> sentence_spans(std::string_view text, Lang /*lang*/)
{
    std::vector<SentenceSpan> spans;
    std::size_t i = 0;
    const std::size_t n = text.size();
    auto skip_ws = [&] {
        while (i < n && is_space_byte(text[i])) {
            ++i;
        }
    };
    skip_ws();
    std::size_t start = i;
    while (i < n) {
        std::size_t end = 0;
        if (text.substr(i).starts_with(kIdeographicFullStop)) {
            // Japanese punctuation is not followed by spaces, so the full stop
            // terminates on its own.
            end = i + kIdeographicFullStop.size();
        } else if ((text[i] == '.' || text[i] == '!' || text[i] == '?') &&
                   (i + 1 == n || is_space_byte(text[i + 1])) &&
                   !(text[i] == '.' && guarded(text, i))) {
            end = i + 1;
        }
        if (end == 0) {
            ++i;
            continue;
        }
        spans.push_back({start, end});
        i = end;
        skip_ws();
        start = i;
    }
    if (start < n) {
        std::size_t e = n;
        while (e > start && is_space_byte(text[e - 1])) {
            --e;
        }
        if (e > start) {
            spans.push_back({start, e});
        }
    }
    return spans;
}

std::vector<std::string> split_sentences(std::string_view text, Lang lang)
{
    std::vector<std::string> out;
    for (const auto& s : sentence_spans(text, lang)) {
        out.emplace_back(text.substr(s.begin, s.end - s.begin));
    }
    return out;
}

}  // namespace coliee
