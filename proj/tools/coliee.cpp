// Command-line entry point: one pipeline stage per invocation.
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coliee/corpus.hpp"
#include "coliee/ensemble.hpp"
#include "coliee/entail.hpp"
#include "coliee/error.hpp"
#include "coliee/eval.hpp"
#include "coliee/lexical.hpp"
#include "coliee/mining.hpp"
#include "coliee/predict.hpp"
#include "coliee/scores.hpp"
#include "coliee/util.hpp"

namespace fs = std::filesystem;
using namespace coliee;

namespace {

std::string digest_path(const fs::path& path)
{
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::recursive_directory_iterator(path)) {
            if (e.is_regular_file()) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        std::string listing;
        for (const auto& f : files) {
            listing += fs::relative(f, path).generic_string();
            listing += '\t';
            listing += sha256_hex(read_file(f));
            listing += '\n';
        }
        return sha256_hex(listing);
    }
    if (!fs::exists(path)) throw Error(ErrorKind::io, "input '" + path.string() + "' does not exist");
    return sha256_hex(read_file(path));
}

/// Tracks what one invocation read and wrote, and emits the run manifest
/// next to its first output.
class Run {
  public:
    Run(std::string command, std::string config) : m_command(std::move(command)), m_config(std::move(config)) {}

    void input(const std::string& path)
    {
        if (!path.empty()) m_inputs[path] = digest_path(path);
    }

    void output(const std::string& path, std::string_view contents)
    {
        if (path.empty()) throw Error(ErrorKind::config, m_command + ": an output path is required");
        write_file_atomic(path, contents);
        m_outputs[path] = sha256_hex(contents);
        if (m_primary.empty()) m_primary = path;
    }

    void note(const std::string& key, json value) { m_notes[key] = std::move(value); }

    void finish() const
    {
        if (m_primary.empty()) return;
        json j{{"command", m_command},
               {"config", m_config},
               {"config_sha256", sha256_hex(m_command + "\n" + m_config)},
               {"inputs", m_inputs},
               {"outputs", m_outputs}};
        if (!m_notes.empty()) j["notes"] = m_notes;
        write_file_atomic(m_primary + ".manifest.json", j.dump(2) + "\n");
    }

  private:
    std::string m_command;
    std::string m_config;
    std::map<std::string, std::string> m_inputs;
    std::map<std::string, std::string> m_outputs;
    json m_notes = json::object();
    std::string m_primary;
};

struct CorpusOpts {
    std::string path;
    std::string format = "canonical-jsonl";
    std::string split;

    void add(CLI::App* sub, bool with_split = true)
    {
        sub->add_option("--corpus", path, "Corpus directory or file")->required();
        sub->add_option("--corpus-format", format, "canonical-jsonl | coliee-task2-dir | coliee-statute-xml");
        if (with_split) sub->add_option("--split", split, "train | validation | test (default: all)");
    }

    Corpus load(Run& run) const
    {
        run.input(path);
        return load_corpus(path, parse_corpus_format(format));
    }

    std::optional<Split> split_or_all() const
    {
        if (split.empty()) return std::nullopt;
        return parse_split(split);
    }
};

struct TokenizerOpts {
    std::string mode = "auto";

    void add(CLI::App* sub) { sub->add_option("--tokenizer", mode, "auto | word | char-bigram"); }

    Tokenizer make(const Corpus& corpus) const
    {
        if (mode != "auto") return Tokenizer(parse_tokenizer_mode(mode));
        Lang lang = Lang::en;
        if (!corpus.queries().empty()) {
            lang = corpus.queries().front().lang;
        } else if (!corpus.articles().empty()) {
            lang = corpus.articles().front().lang;
        }
        return Tokenizer::for_lang(lang);
    }
};

struct RuleOpts {
    std::string kind = "topk-margin";
    std::size_t k = 1;
    std::string m = "0";
    double t = 0.0;

    void add(CLI::App* sub)
    {
        sub->add_option("--rule", kind, "topk-margin | threshold");
        sub->add_option("--k", k, "Top-k of the top-k + margin rule");
        sub->add_option("--m", m, "Margin of the top-k + margin rule ('inf' for none)");
        sub->add_option("--t", t, "Score threshold of the threshold rule");
    }

    SelectionRule make() const
    {
        SelectionRule r;
        if (parse_rule_kind(kind) == RuleKind::threshold) {
            r = SelectionRule::threshold(t);
        } else {
            const double margin = (m == "inf" || m == "infinity") ? std::numeric_limits<double>::infinity() : std::stod(m);
            r = SelectionRule::topk_margin(k, margin);
        }
        r.validate();
        return r;
    }
};

GoldLabels restrict_gold(const Corpus& corpus, std::optional<Split> split)
{
    GoldLabels out;
    for (const auto& qid : corpus.query_ids(split)) {
        auto it = corpus.gold().find(qid);
        if (it != corpus.gold().end() && !it->second.empty()) out.emplace(qid, it->second);
    }
    return out;
}

ScoreMatrix load_matrix(Run& run, const std::string& path, const std::string& normalization)
{
    run.input(path);
    return normalize_per_query(load_scores(path), parse_normalization(normalization));
}

const std::string& only_checkpoint(const ScoreMatrix& m, const std::string& requested)
{
    if (!requested.empty()) {
        if (!m.checkpoint_index(requested)) {
            throw Error(ErrorKind::not_found, "checkpoint '" + requested + "' not in score matrix");
        }
        return requested;
    }
    if (m.checkpoints().size() != 1) {
        throw Error(ErrorKind::config, "score matrix has several checkpoints; pass --checkpoint or --weights");
    }
    return m.checkpoints().front();
}

json parse_json_file(const std::string& path)
{
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::parse, path + ": " + e.what());
    }
}

void print_warnings(const std::vector<std::string>& warnings)
{
    constexpr std::size_t shown = 5;
    for (std::size_t i = 0; i < warnings.size() && i < shown; ++i) std::cerr << "warning: " << warnings[i] << "\n";
    if (warnings.size() > shown) std::cerr << "warning: ... " << warnings.size() - shown << " more\n";
}

/// Documents each query is matched against in the entailment stages.
std::map<std::string, std::vector<std::string>> relevant_docs(Run& run, const Corpus& corpus,
                                                             const std::string& relevant_path,
                                                             const std::vector<std::string>& query_ids)
{
    std::map<std::string, std::vector<std::string>> out;
    if (!relevant_path.empty()) {
        run.input(relevant_path);
        for (auto& [qid, docs] : load_predictions(relevant_path)) out[qid] = docs;
    } else {
        for (const auto& qid : query_ids) {
            auto it = corpus.gold().find(qid);
            if (it != corpus.gold().end()) out[qid].assign(it->second.begin(), it->second.end());
        }
    }
    return out;
}

std::string joined_article_text(const Corpus& corpus, const std::vector<std::string>& ids)
{
    std::vector<std::string> texts;
    for (const auto& id : ids) {
        if (const Article* a = corpus.find_article(id)) texts.push_back(a->text);
    }
    return join(texts, " ");
}

std::vector<Document> article_documents(const Corpus& corpus)
{
    std::vector<Document> docs;
    for (const auto& a : corpus.articles()) docs.push_back({a.id, a.text});
    return docs;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Legal information retrieval and entailment pipelines"};
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "TOML or INI file with option values (sections name subcommands)");
    std::size_t jobs = 1;
    app.add_option("--jobs", jobs, "Worker threads (0 = hardware concurrency)");
    app.require_subcommand(1);

    std::function<void(Run&)> action;
    CLI::App* chosen = nullptr;
    auto command = [&](const std::string& name, const std::string& help) { return app.add_subcommand(name, help); };
    auto bind = [&](CLI::App* sub, std::function<void(Run&)> fn) {
        sub->callback([&chosen, &action, sub, fn] {
            chosen = sub;
            action = fn;
        });
    };

    // index ------------------------------------------------------------------
    {
        static CorpusOpts corpus;
        static TokenizerOpts tok;
        static std::string out;
        auto* sub = command("index", "Build and save an inverted index over the corpus documents");
        corpus.add(sub, false);
        tok.add(sub);
        sub->add_option("--out", out, "Index file")->required();
        bind(sub, [&](Run& run) {
            const Corpus c = corpus.load(run);
            std::vector<Document> docs = article_documents(c);
            for (const auto& cf : c.cases()) {
                for (const auto& p : cf.candidates) docs.push_back({p.id, p.text});
            }
            const auto index = InvertedIndex::build(docs, tok.make(c));
            std::ostringstream buf;
            index.save(buf);
            run.output(out, buf.str());
        });
    }

    // retrieve ---------------------------------------------------------------
    {
        static CorpusOpts corpus;
        static TokenizerOpts tok;
        static std::string scorer = "bm25";
        static Bm25Params bm25;
        static std::size_t top_k = 0;
        static std::string name;
        static std::string out;
        auto* sub = command("retrieve", "Rank every query's candidate pool lexically and write scores.tsv");
        corpus.add(sub);
        tok.add(sub);
        sub->add_option("--scorer", scorer, "bm25 | tfidf");
        sub->add_option("--k1", bm25.k1, "BM25 k1");
        sub->add_option("--b", bm25.b, "BM25 b");
        sub->add_option("--top-k", top_k, "Keep this many per query (0 = all)");
        sub->add_option("--checkpoint-name", name, "Checkpoint column written (default: the scorer name)");
        sub->add_option("--out", out, "scores.tsv")->required();
        bind(sub, [&](Run& run) {
            bm25.validate();
            const Corpus c = corpus.load(run);
            const auto pools = CandidatePools::build(c, tok.make(c));
            const auto lex = parse_lexical_scorer(scorer);
            const auto ids = c.query_ids(corpus.split_or_all());
            std::vector<std::vector<ScoredDoc>> slots(ids.size());
            parallel_for(ids.size(), [&](std::size_t i) {
                const InvertedIndex* index = pools.index_for(ids[i]);
                if (index == nullptr) return;
                const auto& text = c.find_query(ids[i])->text;
                slots[i] = top_k == 0 ? rank_all(*index, text, lex, bm25) : retrieve_top_k(*index, text, top_k, lex, bm25);
            });
            RankedLists lists;
            for (std::size_t i = 0; i < ids.size(); ++i) {
                if (!slots[i].empty()) lists[ids[i]] = std::move(slots[i]);
            }
            run.output(out, serialize_ranked(lists, name.empty() ? scorer : name));
        });
    }

    // mine -------------------------------------------------------------------
    {
        static CorpusOpts corpus;
        static TokenizerOpts tok;
        static int round = 1;
        static std::size_t n_neg = 10;
        static std::string scorer = "bm25";
        static Bm25Params bm25;
        static std::string scores;
        static std::string checkpoint;
        static std::string datflt = "none";
        static std::string embeddings;
        static std::string predictions;
        static bool missed_gold_based = false;
        static std::size_t n_near = 10;
        static std::string out;
        auto* sub = command("mine", "Mine training pairs with hard negatives");
        corpus.add(sub);
        corpus.split = "train";
        tok.add(sub);
        sub->add_option("--round", round, "1 = lexical negatives, 2 = model-ranked negatives")->check(CLI::Range(1, 2));
        sub->add_option("--n-neg", n_neg, "Negatives per query");
        sub->add_option("--scorer", scorer, "Round-1 scorer: bm25 | tfidf");
        sub->add_option("--k1", bm25.k1, "BM25 k1");
        sub->add_option("--b", bm25.b, "BM25 b");
        sub->add_option("--scores", scores, "Model scores.tsv (round 2, datflt-a)");
        sub->add_option("--checkpoint", checkpoint, "Checkpoint of --scores to rank by");
        sub->add_option("--datflt", datflt, "none | q | a");
        sub->add_option("--embeddings", embeddings, "Query embeddings.jsonl (datflt q)");
        sub->add_option("--predictions", predictions, "Predictions used to find missed queries (datflt q)");
        sub->add_flag("--missed-gold-based", missed_gold_based, "A query is missed when no prediction is gold");
        sub->add_option("--n-near", n_near, "Nearest train queries per missed query");
        sub->add_option("--out", out, "pairs.jsonl")->required();
        bind(sub, [&](Run& run) {
            bm25.validate();
            const Corpus c = corpus.load(run);
            const auto ids = c.query_ids(corpus.split_or_all());
            MiningParams params{n_neg, parse_lexical_scorer(scorer), bm25};
            TrainingPairSet set;
            if (datflt == "none") {
                if (round == 1) {
                    const auto pools = CandidatePools::build(c, tok.make(c));
                    set = mine_negatives_round1(c, c.gold(), pools, ids, params);
                } else {
                    const auto m = load_matrix(run, scores, "none");
                    set = mine_negatives_round2(c, c.gold(), m, only_checkpoint(m, checkpoint), ids, n_neg);
                }
            } else if (datflt == "a") {
                const auto m = load_matrix(run, scores, "none");
                set = build_datflt_a(c, c.gold(), m, only_checkpoint(m, checkpoint), ids, n_neg);
            } else if (datflt == "q") {
                run.input(embeddings);
                run.input(predictions);
                const auto store = EmbeddingStore::load(embeddings);
                const auto preds = load_predictions(predictions);
                const auto missed = find_missed_queries(preds, missed_gold_based ? &c.gold() : nullptr);
                const auto pools = CandidatePools::build(c, tok.make(c));
                std::optional<ScoreMatrix> m;
                NegativeSource src;
                src.pools = &pools;
                src.lexical = params;
                if (!scores.empty()) {
                    m = load_matrix(run, scores, "none");
                    src.matrix = &*m;
                    src.checkpoint = only_checkpoint(*m, checkpoint);
                }
                set = build_datflt_q(c, missed, store, c.query_ids(Split::train), c.gold(), src, n_near, n_neg);
            } else {
                throw Error(ErrorKind::config, "unknown --datflt '" + datflt + "'");
            }
            print_warnings(set.warnings());
            run.note("pairs", set.size());
            run.output(out, serialize_pairs(set));
        });
    }

    // ensemble-search --------------------------------------------------------
    {
        static std::string scores;
        static std::string normalization = "none";
        static std::string gold_path;
        static CorpusOpts corpus;
        static EnsembleConfig cfg;
        static std::string metric = "micro-f1";
        static RuleOpts rule;
        static std::string out;
        auto* sub = command("ensemble-search", "Grid-search checkpoint weights on validation queries");
        sub->add_option("--scores", scores, "Multi-checkpoint scores.tsv")->required();
        sub->add_option("--normalize", normalization, "none | minmax");
        sub->add_option("--gold", gold_path, "gold.json (default: corpus gold of --split)");
        sub->add_option("--corpus", corpus.path, "Corpus providing gold labels");
        sub->add_option("--corpus-format", corpus.format, "Corpus format");
        sub->add_option("--split", corpus.split, "Split whose gold is used")->default_val("validation");
        sub->add_option("--grid-step", cfg.grid_step, "Weight grid step");
        sub->add_option("--metric", metric, "micro-f1 | macro-f2");
        sub->add_option("--max-checkpoints", cfg.h, "Maximum number of checkpoints (h)");
        rule.add(sub);
        sub->add_option("--out", out, "ensemble.json")->required();
        bind(sub, [&](Run& run) {
            cfg.metric = parse_metric(metric);
            cfg.validate();
            const auto m = load_matrix(run, scores, normalization);
            GoldLabels gold;
            if (!gold_path.empty()) {
                run.input(gold_path);
                gold = load_gold(gold_path);
            } else {
                if (corpus.path.empty()) throw Error(ErrorKind::config, "ensemble-search needs --gold or --corpus");
                gold = restrict_gold(corpus.load(run), corpus.split_or_all());
            }
            const auto r = rule.make();
            const auto result = grid_search_weights(m, gold, cfg, r);
            auto j = ensemble_to_json(result, cfg);
            j["rule"] = r.to_json();
            j["points_evaluated"] = result.points_evaluated;
            j["normalization"] = normalization;
            run.output(out, j.dump(2) + "\n");
        });
    }

    // predict ----------------------------------------------------------------
    {
        static std::string scores;
        static std::string normalization = "none";
        static std::string weights;
        static std::string checkpoint;
        static RuleOpts rule;
        static bool search = false;
        static std::string gold_path;
        static CorpusOpts corpus;
        static std::string metric = "micro-f1";
        static std::vector<std::size_t> ks;
        static std::vector<double> grid;
        static std::string rule_out;
        static std::string out;
        auto* sub = command("predict", "Apply a selection rule to (ensembled) scores");
        sub->add_option("--scores", scores, "scores.tsv")->required();
        sub->add_option("--normalize", normalization, "none | minmax");
        sub->add_option("--weights", weights, "ensemble.json with checkpoint weights");
        sub->add_option("--checkpoint", checkpoint, "Single checkpoint to use instead of weights");
        rule.add(sub);
        sub->add_flag("--search", search, "Search k and m (or t) on gold queries before predicting");
        sub->add_option("--gold", gold_path, "gold.json for --search");
        sub->add_option("--corpus", corpus.path, "Corpus providing gold labels for --search");
        sub->add_option("--corpus-format", corpus.format, "Corpus format");
        sub->add_option("--split", corpus.split, "Split whose gold is used for --search")->default_val("validation");
        sub->add_option("--metric", metric, "Search metric: micro-f1 | macro-f2");
        sub->add_option("--k-range", ks, "Candidate k values for --search");
        sub->add_option("--grid", grid, "Candidate m (or t) values for --search");
        sub->add_option("--out", out, "predictions.jsonl")->required();
        sub->add_option("--rule-out", rule_out, "rule.json with the applied rule (default: next to --out)");
        bind(sub, [sub](Run& run) {
            const auto m = load_matrix(run, scores, normalization);
            RankedLists ranked;
            SelectionRule r = rule.make();
            if (!weights.empty()) {
                run.input(weights);
                ranked = weighted_scores(m, load_weights(weights));
                const auto doc = parse_json_file(weights);
                if (doc.contains("rule") && sub->count("--rule") + sub->count("--k") + sub->count("--m") + sub->count("--t") == 0) r = SelectionRule::from_json(doc["rule"]);
            } else {
                ranked = m.ranked(*m.checkpoint_index(only_checkpoint(m, checkpoint)));
            }
            if (search) {
                GoldLabels gold;
                if (!gold_path.empty()) {
                    run.input(gold_path);
                    gold = load_gold(gold_path);
                } else {
                    if (corpus.path.empty()) throw Error(ErrorKind::config, "--search needs --gold or --corpus");
                    gold = restrict_gold(corpus.load(run), corpus.split_or_all());
                }
                const auto restricted = restrict_to(ranked, gold);
                if (r.kind == RuleKind::topk_margin) {
                    const auto k_range = ks.empty() ? default_k_range() : ks;
                    const auto m_grid = grid.empty() ? default_m_grid() : grid;
                    const auto best = search_k_m(restricted, gold, k_range, m_grid, parse_metric(metric));
                    r = SelectionRule::topk_margin(best.k, best.m);
                    run.note("search_value", best.value);
                } else {
                    const auto t_grid = grid.empty() ? default_t_grid() : grid;
                    const auto best = search_threshold(restricted, gold, t_grid, parse_metric(metric));
                    r = SelectionRule::threshold(best.t);
                    run.note("search_value", best.value);
                }
            }
            run.output(out, serialize_predictions(predict(ranked, r)));
            const auto rule_path = rule_out.empty() ? (fs::path(out).parent_path() / "rule.json").string() : rule_out;
            run.output(rule_path, r.to_json().dump(2) + "\n");
        });
    }

    // merge ------------------------------------------------------------------
    {
        static std::string main_path;
        static std::vector<std::string> aux_paths;
        static std::string out;
        auto* sub = command("merge", "Fill queries the main run left empty from auxiliary runs");
        sub->add_option("--main", main_path, "Main predictions.jsonl")->required();
        sub->add_option("--aux", aux_paths, "Auxiliary predictions.jsonl (repeatable)")->required();
        sub->add_option("--out", out, "predictions.jsonl")->required();
        bind(sub, [&](Run& run) {
            run.input(main_path);
            const auto main_pred = load_predictions(main_path);
            std::vector<PredictionSet> aux;
            for (const auto& p : aux_paths) {
                run.input(p);
                aux.push_back(load_predictions(p));
            }
            const auto missed = find_missed_queries(main_pred);
            run.note("missed", missed.query_ids.size());
            run.output(out, serialize_predictions(main_auxiliary_merge(main_pred, aux, missed.query_ids)));
        });
    }

    // entail-extract ---------------------------------------------------------
    {
        static CorpusOpts corpus;
        static std::string srl;
        static std::string requests_out;
        static std::string out;
        auto* sub = command("entail-extract", "Extract condition/statement pairs from articles");
        corpus.add(sub, false);
        sub->add_option("--srl", srl, "srl.jsonl with one annotation per sentence");
        sub->add_option("--requests-out", requests_out, "Write the sentences needing SRL annotation");
        sub->add_option("--out", out, "Condition/statement pairs (jsonl)");
        bind(sub, [&](Run& run) {
            const Corpus c = corpus.load(run);
            if (!requests_out.empty()) {
                std::vector<json> rows;
                for (const auto& a : c.articles()) {
                    for (auto& [id, tokens] : srl_requests(a)) rows.push_back({{"sentence_id", id}, {"tokens", tokens}});
                }
                run.output(requests_out, to_jsonl(rows));
            }
            if (srl.empty()) {
                if (requests_out.empty()) throw Error(ErrorKind::config, "entail-extract needs --srl or --requests-out");
                return;
            }
            run.input(srl);
            const auto store = SrlStore::load(srl);
            std::vector<CondStatePair> pairs;
            std::size_t degraded = 0;
            for (const auto& a : c.articles()) {
                for (auto& p : extract_pairs(a, store)) {
                    degraded += p.degraded ? 1 : 0;
                    pairs.push_back(std::move(p));
                }
            }
            run.note("degraded", degraded);
            run.output(out, serialize_cs_pairs(pairs));
        });
    }

    // entail-infer -----------------------------------------------------------
    {
        static CorpusOpts corpus;
        static TokenizerOpts tok;
        static std::string pairs_path;
        static std::string relevant;
        static std::string out;
        auto* sub = command("entail-infer", "Answer YES/NO by condition/statement matching");
        corpus.add(sub);
        tok.add(sub);
        sub->add_option("--pairs", pairs_path, "Condition/statement pairs from entail-extract")->required();
        sub->add_option("--relevant", relevant, "predictions.jsonl of relevant articles (default: gold)");
        sub->add_option("--out", out, "answers.jsonl")->required();
        bind(sub, [&](Run& run) {
            const Corpus c = corpus.load(run);
            run.input(pairs_path);
            const auto pairs = load_cs_pairs(pairs_path);
            const auto idf = InvertedIndex::build(article_documents(c), tok.make(c));
            const auto ids = c.query_ids(corpus.split_or_all());
            const auto rel = relevant_docs(run, c, relevant, ids);
            std::vector<AnswerRecord> records(ids.size());
            std::vector<std::string> warnings(ids.size());
            parallel_for(ids.size(), [&](std::size_t i) {
                const Query& q = *c.find_query(ids[i]);
                std::set<std::string> docs;
                if (auto it = rel.find(q.id); it != rel.end()) docs.insert(it->second.begin(), it->second.end());
                std::vector<CondStatePair> candidates;
                for (const auto& p : pairs) {
                    if (docs.count(p.article_id) > 0) candidates.push_back(p);
                }
                if (candidates.empty()) {
                    warnings[i] = "query '" + q.id + "' has no pairs from relevant articles; matching all pairs";
                    candidates = pairs;
                }
                const auto r = infer_yes_no(decompose_query(q), candidates, idf, q.lang);
                records[i] = {q.id, r.answer, "condition-statement", r.matched_pair_id};
            });
            warnings.erase(std::remove(warnings.begin(), warnings.end(), std::string{}), warnings.end());
            print_warnings(warnings);
            run.output(out, serialize_answer_records(records));
        });
    }

    // svm-train --------------------------------------------------------------
    {
        static CorpusOpts corpus;
        static TokenizerOpts tok;
        static std::string relevant;
        static std::vector<std::string> augmented;
        static SvmParams params;
        static std::string out;
        auto* sub = command("svm-train", "Train the linear SVM on query + article texts");
        corpus.add(sub);
        corpus.split = "train";
        tok.add(sub);
        sub->add_option("--relevant", relevant, "predictions.jsonl of relevant articles (default: gold)");
        sub->add_option("--augmented", augmented, "augmented.jsonl files with extra labelled examples");
        sub->add_option("--lambda", params.lambda, "L2 regularization");
        sub->add_option("--epochs", params.epochs, "Passes over the data");
        sub->add_option("--seed", params.seed, "Shuffling seed");
        sub->add_option("--out", out, "svm.json")->required();
        bind(sub, [&](Run& run) {
            const Corpus c = corpus.load(run);
            const auto ids = c.query_ids(corpus.split_or_all());
            const auto rel = relevant_docs(run, c, relevant, ids);
            std::vector<SvmExample> examples;
            for (const auto& qid : ids) {
                auto label = c.answers().find(qid);
                if (label == c.answers().end()) continue;
                auto it = rel.find(qid);
                const std::string article = it == rel.end() ? std::string{} : joined_article_text(c, it->second);
                examples.push_back({svm_input_text(c.find_query(qid)->text, article), label->second});
            }
            for (const auto& path : augmented) {
                run.input(path);
                for_each_jsonl(path, [&](std::size_t, const json& j) {
                    const auto ex = AugmentedExample::from_json(j);
                    if (ex.label) examples.push_back({svm_input_text(ex.text, join(ex.articles, " ")), *ex.label});
                });
            }
            const auto model = svm_train(examples, tok.make(c), params);
            run.note("examples", examples.size());
            run.note("objective", svm_objective(model, examples));
            run.output(out, model.to_json().dump(2) + "\n");
        });
    }

    // svm-predict ------------------------------------------------------------
    {
        static CorpusOpts corpus;
        static std::string model_path;
        static std::string relevant;
        static std::string out;
        auto* sub = command("svm-predict", "Answer YES/NO with a trained SVM");
        corpus.add(sub);
        sub->add_option("--model", model_path, "svm.json")->required();
        sub->add_option("--relevant", relevant, "predictions.jsonl of relevant articles (default: gold)");
        sub->add_option("--out", out, "answers.jsonl")->required();
        bind(sub, [&](Run& run) {
            const Corpus c = corpus.load(run);
            run.input(model_path);
            const auto model = SvmModel::from_json(parse_json_file(model_path));
            const auto ids = c.query_ids(corpus.split_or_all());
            const auto rel = relevant_docs(run, c, relevant, ids);
            std::vector<AnswerRecord> records;
            for (const auto& qid : ids) {
                auto it = rel.find(qid);
                const std::string article = it == rel.end() ? std::string{} : joined_article_text(c, it->second);
                const auto p = svm_predict(model, c.find_query(qid)->text, article);
                records.push_back({qid, p.answer, "svm", std::nullopt});
            }
            run.output(out, serialize_answer_records(records));
        });
    }

    // augment ----------------------------------------------------------------
    {
        static CorpusOpts corpus;
        static double mask_ratio = 0.15;
        static std::size_t top_k = 5;
        static std::size_t variants = 1;
        static std::uint64_t seed = 7;
        static std::string templates_in;
        static std::string fills;
        static std::string templates_out;
        static std::string out;
        auto* sub = command("augment", "Write masked templates, or realize them from mask fills");
        corpus.add(sub);
        corpus.split = "train";
        sub->add_option("--mask-ratio", mask_ratio, "Fraction of tokens masked");
        sub->add_option("--top-k-fill", top_k, "Fill candidates sampled from");
        sub->add_option("--variants", variants, "Templates per query");
        sub->add_option("--seed", seed, "Base seed");
        sub->add_option("--templates-out", templates_out, "templates.jsonl to send to the mask filler");
        sub->add_option("--templates", templates_in, "templates.jsonl to realize");
        sub->add_option("--fills", fills, "fills.jsonl from the mask filler");
        sub->add_option("--out", out, "augmented.jsonl");
        bind(sub, [&](Run& run) {
            const Corpus c = corpus.load(run);
            if (!templates_out.empty()) {
                std::vector<json> rows;
                std::uint64_t n = 0;
                for (const auto& qid : c.query_ids(corpus.split_or_all())) {
                    for (std::size_t v = 0; v < variants; ++v) {
                        const auto t = make_masked_template(*c.find_query(qid), mask_ratio, mix_seed(seed, n++), top_k, v);
                        rows.push_back(t.to_json());
                    }
                }
                run.output(templates_out, to_jsonl(rows));
                return;
            }
            if (templates_in.empty() || fills.empty() || out.empty()) {
                throw Error(ErrorKind::config, "augment needs --templates-out, or --templates, --fills and --out");
            }
            run.input(templates_in);
            run.input(fills);
            const auto store = FillStore::load(fills);
            std::vector<json> rows;
            for_each_jsonl(templates_in, [&](std::size_t, const json& j) {
                const auto t = AugTemplate::from_json(j);
                std::vector<std::string> articles;
                if (auto g = c.gold().find(t.query_id); g != c.gold().end()) {
                    for (const auto& id : g->second) {
                        if (const Article* a = c.find_article(id)) articles.push_back(a->text);
                    }
                }
                std::optional<Answer> label;
                if (auto a = c.answers().find(t.query_id); a != c.answers().end()) label = a->second;
                rows.push_back(realize_augmented(t, store, mix_seed(seed, t.seed), articles, label).to_json());
            });
            run.output(out, to_jsonl(rows));
        });
    }

    // route ------------------------------------------------------------------
    {
        static CorpusOpts corpus;
        static std::string cs_path;
        static std::string svm_path;
        static std::string out;
        auto* sub = command("route", "Combine condition/statement and SVM answers by query kind");
        corpus.add(sub);
        sub->add_option("--cs", cs_path, "answers.jsonl from entail-infer")->required();
        sub->add_option("--svm", svm_path, "answers.jsonl from svm-predict")->required();
        sub->add_option("--out", out, "answers.jsonl")->required();
        bind(sub, [&](Run& run) {
            const Corpus c = corpus.load(run);
            run.input(cs_path);
            run.input(svm_path);
            const auto cs = load_answer_records(cs_path);
            const auto svm = load_answer_records(svm_path);
            std::vector<AnswerRecord> records;
            std::size_t specific = 0;
            for (const auto& qid : c.query_ids(corpus.split_or_all())) {
                auto a = cs.find(qid);
                auto b = svm.find(qid);
                if (a == cs.end() || b == svm.end()) {
                    throw Error(ErrorKind::completeness, "query '" + qid + "' lacks a condition/statement or SVM answer");
                }
                const auto kind = detect_query_kind(c.find_query(qid)->text);
                specific += kind.kind == QueryKindTag::specific_scenario ? 1 : 0;
                const Answer ans = route_ensemble(a->second.answer, b->second.answer, kind);
                const std::string method = a->second.answer == b->second.answer ? "agree"
                                           : kind.kind == QueryKindTag::specific_scenario ? "svm"
                                                                                          : "condition-statement";
                records.push_back({qid, ans, "route:" + method, a->second.matched_pair});
            }
            run.note("specific_scenario", specific);
            run.output(out, serialize_answer_records(records));
        });
    }

    // evaluate ---------------------------------------------------------------
    {
        static std::string pred;
        static std::string gold_path;
        static CorpusOpts corpus;
        static std::string metric = "micro-f1";
        static std::string ranked_path;
        static std::string ranked_checkpoint;
        static std::vector<std::size_t> recall_ks{5, 10, 30};
        static std::string answers_path;
        static std::string out;
        auto* sub = command("evaluate", "Score predictions and/or answers against gold labels");
        sub->add_option("--pred", pred, "predictions.jsonl");
        sub->add_option("--gold", gold_path, "gold.json (default: corpus gold of --split)");
        sub->add_option("--corpus", corpus.path, "Corpus providing gold labels and answers");
        sub->add_option("--corpus-format", corpus.format, "Corpus format");
        sub->add_option("--split", corpus.split, "Split evaluated (default: all)");
        sub->add_option("--metric", metric, "Headline metric: micro-f1 | macro-f2");
        sub->add_option("--ranked", ranked_path, "scores.tsv for MAP and R@k");
        sub->add_option("--ranked-checkpoint", ranked_checkpoint, "Checkpoint of --ranked");
        sub->add_option("--recall-k", recall_ks, "k values for R@k");
        sub->add_option("--answers", answers_path, "answers.jsonl for accuracy");
        sub->add_option("--out", out, "report.json")->required();
        bind(sub, [&](Run& run) {
            std::optional<Corpus> c;
            if (!corpus.path.empty()) c = corpus.load(run);
            GoldLabels gold;
            if (!gold_path.empty()) {
                run.input(gold_path);
                gold = load_gold(gold_path);
            } else if (c) {
                gold = restrict_gold(*c, corpus.split_or_all());
            }
            ReportInputs in;
            std::optional<PredictionSet> preds;
            std::optional<PredictionSet> ranked;
            std::optional<AnswerLabels> answers;
            AnswerLabels gold_answers;
            if (!pred.empty()) {
                run.input(pred);
                preds = load_predictions(pred);
                in.predictions = &*preds;
                in.gold = &gold;
            }
            if (!ranked_path.empty()) {
                const auto m = load_matrix(run, ranked_path, "none");
                ranked = ranked_ids(m.ranked(*m.checkpoint_index(only_checkpoint(m, ranked_checkpoint))));
                in.ranked = &*ranked;
                in.gold = &gold;
                in.recall_ks = recall_ks;
            }
            if (!answers_path.empty()) {
                if (!c) throw Error(ErrorKind::config, "--answers needs --corpus for gold answers");
                run.input(answers_path);
                answers = answers_of(load_answer_records(answers_path));
                for (const auto& qid : c->query_ids(corpus.split_or_all())) {
                    if (auto it = c->answers().find(qid); it != c->answers().end()) gold_answers.emplace(qid, it->second);
                }
                in.answers = &*answers;
                in.gold_answers = &gold_answers;
            }
            if (in.predictions == nullptr && in.ranked == nullptr && in.answers == nullptr) {
                throw Error(ErrorKind::config, "evaluate needs --pred, --ranked or --answers");
            }
            const auto report = build_report(in);
            auto j = report.to_json();
            if (preds) {
                j["metric"] = metric;
                j["value"] = evaluate_metric(*preds, gold, parse_metric(metric));
            }
            print_warnings(report.warnings);
            std::cout << report.to_table();
            run.output(out, j.dump(2) + "\n");
        });
    }

    // stats ------------------------------------------------------------------
    {
        static CorpusOpts corpus;
        static std::string out;
        auto* sub = command("stats", "Dataset statistics");
        corpus.add(sub);
        sub->add_option("--out", out, "stats.json")->required();
        bind(sub, [&](Run& run) {
            const Corpus c = corpus.load(run);
            const auto s = compute_stats(c, corpus.split_or_all());
            json j{{"n_train", s.n_train},
                   {"n_validation", s.n_validation},
                   {"n_test", s.n_test},
                   {"candidates_per_case", s.candidates_per_case},
                   {"entailments_per_case", s.entailments_per_case}};
            std::cout << j.dump(2) << "\n";
            run.output(out, j.dump(2) + "\n");
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        set_max_jobs(jobs);
        Run run(chosen->get_name(), chosen->config_to_str(true, false));
        action(run);
        run.finish();
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
