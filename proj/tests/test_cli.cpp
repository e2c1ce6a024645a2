#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "support/synth.hpp"
#include "textseam/corpus.hpp"

#ifndef TEXTSEAM_CLI
#error "TEXTSEAM_CLI must name the textseam executable"
#endif

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " '" TEXTSEAM_CLI "' " + args + " 2>/dev/null";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Corpus JSONL and traces for `samples` synthetic passages under dir.
fs::path workspace(const std::string& name, std::size_t samples) {
  const fs::path dir = synth::temp_dir(name);
  const auto set = synth::make_set({.samples = samples});
  std::ofstream out(dir / "corpus.jsonl");
  textseam::write_corpus_jsonl(set.corpus, out);
  synth::write_traces(set.traces, dir / "traces");
  return dir;
}

std::size_t count_after(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + " ");
  return pos == std::string::npos ? 0 : std::stoul(text.substr(pos + key.size() + 1));
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(cli("--help").code, 0);
  EXPECT_EQ(cli("run").code, 2);
  EXPECT_EQ(cli("--bogus").code, 2);
}

TEST(Cli, MissingInputExitsTwo) {
  const fs::path dir = synth::temp_dir("cli_missing");
  EXPECT_EQ(cli("ingest --in " + (dir / "nope.csv").string() + " --out " + (dir / "c.jsonl").string()).code, 2);
}

TEST(Cli, IngestCountsReconcile) {
  const fs::path dir = synth::temp_dir("cli_ingest");
  {
    std::ofstream csv(dir / "in.csv");
    csv << "id,label,topic,generator,s1,s2,s3,s4,s5,s6,s7,s8,s9,s10\n";
    for (int i = 0; i < 12; ++i) {
      const int body = i % 5;
      csv << "r" << i << "," << body % 10 << ",Recipes,gpt2";
      for (int s = 0; s < 10; ++s) csv << ",Passage " << body << " sentence number " << s;
      csv << "\n";
    }
    csv << "short,3,Recipes,gpt2,Hi";
    for (int s = 1; s < 10; ++s) csv << ",A sentence with words " << s;
    csv << "\n";
  }
  const CliResult r = cli("ingest --in " + (dir / "in.csv").string() + " --out " + (dir / "c.jsonl").string() +
                    " --drop-short-samples");
  ASSERT_EQ(r.code, 0) << r.out;
  const std::size_t input = count_after(r.out, "input"), retained = count_after(r.out, "retained"),
                    dropped = count_after(r.out, "dropped");
  EXPECT_EQ(input, 13u);
  EXPECT_EQ(retained, 5u);
  EXPECT_EQ(retained + dropped, input);
  std::ifstream in(dir / "c.jsonl");
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) lines += !line.empty();
  EXPECT_EQ(lines, retained);
}

TEST(Cli, RunIsRepeatableAndCrossTopicHasFourFolds) {
  const fs::path dir = workspace("cli_run", 80);
  const std::string base = "--workdir " + dir.string() + " --seed 3 run --corpus corpus.jsonl --traces traces "
                           "--pipeline perplexity-logreg --mode cross-topic --hyper \"l2=1e-3;epochs=100\" --out ";
  const CliResult a = cli(base + "a");
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(cli(base + "b").code, 0);
  const std::string report = slurp(dir / "a" / "report.csv");
  EXPECT_EQ(report, slurp(dir / "b" / "report.csv"));
  std::size_t in_rows = 0;
  std::stringstream lines(report);
  for (std::string line; std::getline(lines, line);) in_rows += line.find(",IN,") != std::string::npos;
  EXPECT_EQ(in_rows, 4u);
  EXPECT_TRUE(fs::exists(dir / "a" / "models" / "recipes.json"));
}

TEST(Cli, IncompatiblePipelineExitsTwo) {
  const fs::path dir = workspace("cli_incompatible", 12);
  const std::string base = "--workdir " + dir.string() + " run --corpus corpus.jsonl --traces traces ";
  EXPECT_EQ(cli(base + "--pipeline nope").code, 2);
  EXPECT_EQ(cli(base + "--pipeline perplexity-gb --hyper sigma=1").code, 2);
  EXPECT_EQ(cli(base + "--pipeline perplexity-gb --mode sideways").code, 2);
}

TEST(Cli, SeedComesFromEnvironment) {
  const fs::path dir = workspace("cli_env", 60);
  const auto run = [&](const std::string& global, const std::string& out) {
    return "--workdir " + dir.string() + " " + global +
           " run --corpus corpus.jsonl --traces traces --pipeline perplexity-gb --hyper \"trees=10;depth=2\" --out " +
           out;
  };
  ASSERT_EQ(cli(run("--seed 17", "flag")).code, 0);
  ASSERT_EQ(cli(run("", "env"), "TEXTSEAM_SEED=17").code, 0);
  ASSERT_EQ(cli(run("", "other"), "TEXTSEAM_SEED=18").code, 0);
  const auto model = [&](const char* sub) { return slurp(dir / sub / "models" / "in_domain.json"); };
  EXPECT_EQ(model("flag"), model("env"));
  EXPECT_NE(model("env"), model("other"));
}

TEST(Cli, FlagsOverrideConfigFile) {
  const fs::path dir = workspace("cli_config", 60);
  {
    std::ofstream cfg(dir / "run.toml");
    cfg << "seed = 17\n\n[run]\npipeline = \"perplexity-gb\"\nhyper = \"trees=10;depth=2\"\n";
  }
  const std::string base = "--workdir " + dir.string() + " --config " + (dir / "run.toml").string();
  ASSERT_EQ(cli(base + " run --corpus corpus.jsonl --traces traces --out cfg").code, 0);
  ASSERT_EQ(cli(base + " --seed 18 run --corpus corpus.jsonl --traces traces --out flag").code, 0);
  ASSERT_EQ(cli("--workdir " + dir.string() + " --seed 18 run --corpus corpus.jsonl --traces traces "
                "--pipeline perplexity-gb --hyper \"trees=10;depth=2\" --out plain")
                .code,
            0);
  const auto model = [&](const char* sub) { return slurp(dir / sub / "models" / "in_domain.json"); };
  EXPECT_NE(model("cfg"), model("flag"));
  EXPECT_EQ(model("flag"), model("plain"));
}

TEST(Cli, SeriesFeaturesAndAnalysis) {
  const fs::path dir = workspace("cli_series", 16);
  const std::string base = "--workdir " + dir.string() + " ";
  ASSERT_EQ(cli(base + "build-series --corpus corpus.jsonl --traces traces --out series.jsonl --estimator tle").code,
            0);
  ASSERT_EQ(cli(base + "export-features --corpus corpus.jsonl --traces traces --out f.csv --kind length").code, 0);
  ASSERT_EQ(cli(base + "analyze --corpus corpus.jsonl --traces traces --series series.jsonl --out an").code, 0);
  EXPECT_TRUE(fs::exists(dir / "an" / "window_id_generator_gpt2.csv"));
  EXPECT_EQ(cli(base + "run --corpus corpus.jsonl --series series.jsonl --pipeline phd-gak-svm").code, 2);
}
