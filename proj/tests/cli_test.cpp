#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "fnmt/checkpoint.hpp"
#include "fnmt/cli.hpp"
#include "fnmt/text_io.hpp"

using namespace fnmt;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result fnmt_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fnmt_cli_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    setenv("FNMT_LOG", "quiet", 1);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void synth(const std::string& out_dir, std::size_t train = 40) {
    auto r = fnmt_run({"synth", "--out-dir", path(out_dir), "--lemmas", "30", "--train",
                       std::to_string(train), "--valid", "8", "--test", "8", "--seed", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  std::vector<std::string> train_args(const std::string& data, const std::string& ckpt) {
    return {"train", "--src", path(data + "/train.src"), "--tgt", path(data + "/train.tgt"),
            "--valid-src", path(data + "/valid.src"), "--valid-tgt", path(data + "/valid.tgt"),
            "--lexicon", path(data + "/lexicon.tsv"), "--checkpoint", path(ckpt), "--desk-scale",
            "--emb", "8", "--hid", "12", "--epochs", "3", "--validation-interval", "5", "--seed", "5"};
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(fnmt_run({}).code, cli::kUsage);
  EXPECT_EQ(fnmt_run({"bogus"}).code, cli::kUsage);
  EXPECT_EQ(fnmt_run({"translate", "--src", "x"}).code, cli::kUsage);
  auto help = fnmt_run({"--help"});
  EXPECT_EQ(help.code, cli::kOk);
  EXPECT_NE(help.out.find("translate"), std::string::npos);
}

TEST_F(CliTest, SynthIsDeterministic) {
  synth("a");
  synth("b");
  for (const char* f : {"train.src", "train.tgt", "train.fac", "test.tgt", "lexicon.tsv"}) {
    EXPECT_EQ(read_file(path(std::string("a/") + f)), read_file(path(std::string("b/") + f))) << f;
  }
  EXPECT_EQ(read_lines(path("a/train.src")).size(), 40u);
}

TEST_F(CliTest, FactorizeFrenchExample) {
  write_file_atomic(path("in.txt"), "la lignée devient simple\nxyz peut\n");
  auto r = fnmt_run({"factorize", "--lexicon", std::string(FNMT_TEST_DATA_DIR) + "/french_lexicon.tsv",
                     "--input", path("in.txt"), "--output", path("out.fac"), "--report",
                     path("report.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(path("out.fac")),
            "le|d##fs lignée|n##fs devenir|vP3#s simple|a###s\nxyz|##### pouvoir|vP3#s\n");
  EXPECT_NE(read_file(path("report.txt")).find("oov_tokens: 1"), std::string::npos);
  auto reject = fnmt_run({"factorize", "--lexicon",
                          std::string(FNMT_TEST_DATA_DIR) + "/french_lexicon.tsv", "--input",
                          path("in.txt"), "--output", path("rejected.fac"), "--reject-oov"});
  EXPECT_EQ(reject.code, cli::kData);
  EXPECT_FALSE(fs::exists(path("rejected.fac")));
}

TEST_F(CliTest, MissingLexiconLeavesNoOutputs) {
  synth("d");
  auto args = train_args("d", "model.ckpt");
  args[10] = path("d/missing.tsv");
  auto r = fnmt_run(args);
  EXPECT_EQ(r.code, cli::kData);
  EXPECT_NE(r.err.find("missing.tsv"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("model.ckpt")));
  EXPECT_FALSE(fs::exists(path("model.ckpt.log")));

  auto f = fnmt_run({"factorize", "--lexicon", path("d/missing.tsv"), "--input",
                     path("d/train.tgt"), "--output", path("x.fac")});
  EXPECT_EQ(f.code, cli::kData);
  EXPECT_FALSE(fs::exists(path("x.fac")));
}

TEST_F(CliTest, TrainTranslateEvaluateDeterministic) {
  synth("d");
  ASSERT_EQ(fnmt_run(train_args("d", "m1.ckpt")).code, 0);
  ASSERT_EQ(fnmt_run(train_args("d", "m2.ckpt")).code, 0);
  EXPECT_EQ(read_file(path("m1.ckpt")), read_file(path("m2.ckpt")));
  EXPECT_EQ(read_file(path("m1.ckpt.log")), read_file(path("m2.ckpt.log")));
  EXPECT_NE(read_file(path("m1.ckpt.log")).find("validation=1 bleu="), std::string::npos);

  auto translate = [&](const std::string& out, const std::string& workers) {
    return fnmt_run({"translate", "--checkpoint", path("m1.ckpt"), "--src", path("d/test.src"),
                     "--lexicon", path("d/lexicon.tsv"), "--output", path(out), "--factored-output",
                     path(out + ".fac"), "--nbest", path(out + ".nbest"), "--beam", "3",
                     "--workers", workers});
  };
  ASSERT_EQ(translate("t1", "1").code, 0);
  ASSERT_EQ(translate("t2", "2").code, 0);
  EXPECT_EQ(read_file(path("t1")), read_file(path("t2")));
  EXPECT_EQ(read_file(path("t1.fac")), read_file(path("t2.fac")));
  EXPECT_EQ(read_file(path("t1.nbest")), read_file(path("t2.nbest")));
  EXPECT_EQ(read_lines(path("t1")).size(), 8u);

  auto ev = fnmt_run({"evaluate", "--hyp", path("t1"), "--ref", path("d/test.tgt"),
                      "--hyp-factored", path("t1.fac"), "--ref-factored", path("d/test.fac"),
                      "--lexicon", path("d/lexicon.tsv"), "--checkpoint", path("m1.ckpt"), "--json",
                      path("report.json")});
  ASSERT_EQ(ev.code, 0) << ev.err;
  for (const char* key : {"bleu_word:", "bleu_lemma:", "bleu_factors:", "oov_count:", "coverage:",
                          "oracle_bleu_word:"})
    EXPECT_NE(ev.out.find(key), std::string::npos) << key;
  EXPECT_NE(read_file(path("report.json")).find("\"oracle_bleu_word\""), std::string::npos);
}

TEST_F(CliTest, WordLevelBaselineNeedsNoLexicon) {
  synth("d");
  auto args = train_args("d", "w.ckpt");
  args.erase(args.begin() + 9, args.begin() + 11);  // --lexicon <path>
  args.push_back("--word-level");
  auto r = fnmt_run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(model::load_checkpoint(path("w.ckpt")).word_level);
  auto t = fnmt_run({"translate", "--checkpoint", path("w.ckpt"), "--src", path("d/test.src"),
                     "--output", path("w.out")});
  EXPECT_EQ(t.code, 0) << t.err;
}

TEST_F(CliTest, LexiconMismatchIsCompatibilityError) {
  synth("d");
  ASSERT_EQ(fnmt_run(train_args("d", "m.ckpt")).code, 0);
  auto r = fnmt_run({"translate", "--checkpoint", path("m.ckpt"), "--src", path("d/test.src"),
                     "--lexicon", std::string(FNMT_TEST_DATA_DIR) + "/french_lexicon.tsv",
                     "--output", path("t.out")});
  EXPECT_EQ(r.code, cli::kData);
  EXPECT_NE(r.err.find("does not match"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(path("t.out")));
}

TEST_F(CliTest, EvaluateLineCountMismatch) {
  write_file_atomic(path("h.txt"), "a b\nc d\nе\n");
  write_file_atomic(path("r.txt"), "a b\n");
  auto r = fnmt_run({"evaluate", "--hyp", path("h.txt"), "--ref", path("r.txt")});
  EXPECT_EQ(r.code, cli::kData);
  EXPECT_NE(r.err.find("3"), std::string::npos);
  EXPECT_NE(r.err.find("1"), std::string::npos);
}

TEST_F(CliTest, ConfigFileAndOverrides) {
  synth("d");
  write_file_atomic(path("run.cfg"), "feedback=tanh\ndependency=true\nfactor_weight=0.5\n");
  auto args = train_args("d", "c.ckpt");
  args.insert(args.end(), {"--config", path("run.cfg"), "--lambda-fac", "0.25"});
  ASSERT_EQ(fnmt_run(args).code, 0);
  auto ck = model::load_checkpoint(path("c.ckpt"));
  EXPECT_EQ(ck.config.feedback, model::FeedbackMode::kTanh);
  EXPECT_TRUE(ck.config.dependency);
  EXPECT_EQ(ck.config.factor_weight, 0.25);
  EXPECT_EQ(ck.config.emb_dim, 8u);

  write_file_atomic(path("bad.cfg"), "patience=0\n");
  auto bad = train_args("d", "bad.ckpt");
  bad.insert(bad.end(), {"--config", path("bad.cfg")});
  EXPECT_EQ(fnmt_run(bad).code, cli::kUsage);
  EXPECT_FALSE(fs::exists(path("bad.ckpt")));
}

TEST_F(CliTest, NonFiniteLossExitsWithNumericCode) {
  synth("d");
  auto args = train_args("d", "n.ckpt");
  args.insert(args.end(), {"--lambda-fac", "1e308"});
  auto r = fnmt_run(args);
  EXPECT_EQ(r.code, cli::kNumeric) << r.err;
  EXPECT_NE(r.err.find("non-finite"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("n.ckpt")));
  EXPECT_TRUE(fs::exists(path("n.ckpt.diagnostic")));
}
