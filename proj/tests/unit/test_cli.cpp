#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "coliee/util.hpp"
#include "support.hpp"

using coliee::json;
using testing_support::TempDir;

namespace {

const std::filesystem::path kStatute = testing_support::source_dir() / "data" / "statute";
const std::filesystem::path kCase = testing_support::source_dir() / "data" / "case";

struct Result {
    int code = -1;
    std::string output;
};

Result run(const TempDir& dir, const std::string& args)
{
    const auto log = dir / "cli.log";
    const std::string cmd = std::string(COLIEE_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = coliee::read_file(log);
    return r;
}

json read_json(const std::filesystem::path& p) { return json::parse(coliee::read_file(p)); }

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(Cli, UsageErrorsExitTwo)
{
    TempDir dir;
    EXPECT_EQ(run(dir, "").code, 2);
    EXPECT_EQ(run(dir, "no-such-command").code, 2);
    EXPECT_EQ(run(dir, "stats").code, 2);
    EXPECT_EQ(run(dir, "stats --corpus x --out y --bogus").code, 2);
    EXPECT_EQ(run(dir, "mine --corpus " + q(kStatute) + " --round 3 --out x").code, 2);
    EXPECT_EQ(run(dir, "--help").code, 0);
}

TEST(Cli, RuntimeErrorsExitOne)
{
    TempDir dir;
    const auto r = run(dir, "stats --corpus " + q(dir / "missing") + " --out " + q(dir / "s.json"));
    EXPECT_EQ(r.code, 1);
    EXPECT_FALSE(r.output.empty());
    EXPECT_FALSE(std::filesystem::exists(dir / "s.json"));
    EXPECT_EQ(run(dir, "retrieve --corpus " + q(kStatute) + " --scorer nope --out " + q(dir / "s.tsv")).code, 1);
    EXPECT_EQ(run(dir, "mine --corpus " + q(kStatute) + " --round 2 --out " + q(dir / "p.jsonl")).code, 1);
}

TEST(Cli, StatsAndManifest)
{
    TempDir dir;
    const auto r = run(dir, "stats --corpus " + q(kStatute) + " --out " + q(dir / "stats.json"));
    ASSERT_EQ(r.code, 0) << r.output;
    const auto stats = read_json(dir / "stats.json");
    EXPECT_EQ(stats.at("n_train"), 60);
    EXPECT_EQ(stats.at("n_validation"), 15);
    EXPECT_EQ(stats.at("n_test"), 15);
    const auto m = read_json(dir / "stats.json.manifest.json");
    EXPECT_EQ(m.at("command"), "stats");
    EXPECT_NE(m.at("config").get<std::string>().find("corpus"), std::string::npos);
    EXPECT_EQ(m.at("config_sha256").get<std::string>().size(), 64u);
    ASSERT_FALSE(m.at("inputs").empty());
    EXPECT_EQ(m.at("inputs").at(kStatute.string()).get<std::string>().size(), 64u);
    EXPECT_EQ(m.at("outputs").at((dir / "stats.json").string()),
              coliee::sha256_hex(coliee::read_file(dir / "stats.json")));
    EXPECT_FALSE(m.at("outputs").empty());

    // Manifests carry no timestamps, so a rerun is byte-identical.
    const auto first = coliee::read_file(dir / "stats.json.manifest.json");
    ASSERT_EQ(run(dir, "stats --corpus " + q(kStatute) + " --out " + q(dir / "stats.json")).code, 0);
    EXPECT_EQ(coliee::read_file(dir / "stats.json.manifest.json"), first);
}

TEST(Cli, ConfigFileSuppliesOptions)
{
    TempDir dir;
    testing_support::write(dir / "run.toml", "[stats]\ncorpus = \"" + kStatute.string() + "\"\nsplit = \"test\"\nout = \"" +
                                                 (dir / "stats.json").string() + "\"\n");
    const auto r = run(dir, "--config " + q(dir / "run.toml") + " stats");
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_TRUE(std::filesystem::exists(dir / "stats.json"));
}

TEST(Cli, RetrievalPipeline)
{
    TempDir dir;
    const auto corpus = "--corpus " + q(kStatute);
    ASSERT_EQ(run(dir, "index " + corpus + " --out " + q(dir / "index.bin")).code, 0);
    EXPECT_EQ(coliee::read_file(dir / "index.bin").substr(0, 6), "LXIDX1");
    ASSERT_EQ(run(dir, "retrieve " + corpus + " --top-k 5 --out " + q(dir / "bm25.tsv")).code, 0);
    ASSERT_EQ(run(dir, "mine " + corpus + " --out " + q(dir / "r1.jsonl")).code, 0);
    ASSERT_EQ(run(dir, "mine " + corpus + " --round 2 --scores " + q(kStatute / "scores.tsv") +
                           " --checkpoint ckpt-a --out " + q(dir / "r2.jsonl"))
                  .code,
              0);
    auto r = run(dir, "ensemble-search --scores " + q(kStatute / "scores.tsv") + " " + corpus + " --grid-step 0.5 --out " +
                          q(dir / "ensemble.json"));
    ASSERT_EQ(r.code, 0) << r.output;
    const auto ens = read_json(dir / "ensemble.json");
    EXPECT_EQ(ens.at("points_evaluated"), 26);
    r = run(dir, "predict --scores " + q(kStatute / "scores.tsv") + " --weights " + q(dir / "ensemble.json") +
                     " --search " + corpus + " --out " + q(dir / "pred.jsonl"));
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_TRUE(std::filesystem::exists(dir / "rule.json"));
    r = run(dir, "evaluate --pred " + q(dir / "pred.jsonl") + " " + corpus + " --split test --ranked " +
                     q(kStatute / "scores.tsv") + " --ranked-checkpoint ckpt-a --out " + q(dir / "report.json"));
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("F1"), std::string::npos);
    const auto rep = read_json(dir / "report.json");
    EXPECT_GE(rep.at("micro_f1").get<double>(), 0.0);
    EXPECT_TRUE(rep.contains("map"));

    ASSERT_EQ(run(dir, "predict --scores " + q(kStatute / "scores.tsv") + " --checkpoint ckpt-b --rule threshold --t 0.99 --out " +
                           q(dir / "aux.jsonl"))
                  .code,
              0);
    ASSERT_EQ(run(dir, "merge --main " + q(dir / "aux.jsonl") + " --aux " + q(dir / "pred.jsonl") + " --out " +
                           q(dir / "merged.jsonl"))
                  .code,
              0);
    ASSERT_EQ(run(dir, "mine " + corpus + " --datflt q --embeddings " + q(kStatute / "embeddings.jsonl") +
                           " --predictions " + q(dir / "aux.jsonl") + " --out " + q(dir / "dq.jsonl"))
                  .code,
              0);
    ASSERT_EQ(run(dir, "mine " + corpus + " --datflt a --scores " + q(kStatute / "scores.tsv") +
                           " --checkpoint ckpt-a --out " + q(dir / "da.jsonl"))
                  .code,
              0);
}

TEST(Cli, CaseCorpus)
{
    TempDir dir;
    const auto corpus = "--corpus " + q(kCase) + " --corpus-format coliee-task2-dir";
    ASSERT_EQ(run(dir, "stats " + corpus + " --out " + q(dir / "stats.json")).code, 0);
    const auto r = run(dir, "mine " + corpus + " --round 2 --scores " + q(kCase / "scores.tsv") +
                                " --checkpoint ckpt-a --out " + q(dir / "r2.jsonl"));
    ASSERT_EQ(r.code, 0) << r.output;
}

TEST(Cli, EntailmentPipeline)
{
    TempDir dir;
    const auto corpus = "--corpus " + q(kStatute);
    ASSERT_EQ(run(dir, "entail-extract " + corpus + " --srl " + q(kStatute / "srl.jsonl") + " --out " +
                           q(dir / "cs.jsonl"))
                  .code,
              0);
    ASSERT_EQ(run(dir, "entail-infer " + corpus + " --split test --pairs " + q(dir / "cs.jsonl") + " --out " +
                           q(dir / "cs_answers.jsonl"))
                  .code,
              0);
    ASSERT_EQ(run(dir, "augment " + corpus + " --mask-ratio 0.2 --templates-out " + q(dir / "templates.jsonl")).code, 0);

    // Stand-in for the mask filler: three candidates per mask.
    std::string fills;
    std::ifstream in(dir / "templates.jsonl");
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        const auto t = json::parse(line);
        for (const auto& p : t.at("mask_positions")) {
            json rec{{"template_id", t.at("template_id")},
                     {"mask_index", p},
                     {"candidates", {{{"token", "alpha"}, {"prob", 0.6}}, {{"token", "beta"}, {"prob", 0.3}},
                                     {{"token", "gamma"}, {"prob", 0.1}}}}};
            fills += rec.dump() + "\n";
        }
    }
    testing_support::write(dir / "fills.jsonl", fills);
    ASSERT_EQ(run(dir, "augment " + corpus + " --templates " + q(dir / "templates.jsonl") + " --fills " +
                           q(dir / "fills.jsonl") + " --out " + q(dir / "aug.jsonl"))
                  .code,
              0);
    ASSERT_EQ(run(dir, "svm-train " + corpus + " --augmented " + q(dir / "aug.jsonl") + " --out " + q(dir / "svm.json"))
                  .code,
              0);
    ASSERT_EQ(run(dir, "svm-predict " + corpus + " --split test --model " + q(dir / "svm.json") + " --out " +
                           q(dir / "svm_answers.jsonl"))
                  .code,
              0);
    ASSERT_EQ(run(dir, "route " + corpus + " --split test --cs " + q(dir / "cs_answers.jsonl") + " --svm " +
                           q(dir / "svm_answers.jsonl") + " --out " + q(dir / "answers.jsonl"))
                  .code,
              0);
    const auto r = run(dir, "evaluate " + corpus + " --split test --answers " + q(dir / "answers.jsonl") + " --out " +
                                q(dir / "report.json"));
    ASSERT_EQ(r.code, 0) << r.output;
    const auto rep = read_json(dir / "report.json");
    EXPECT_GE(rep.at("accuracy").get<double>(), 0.5);
}
