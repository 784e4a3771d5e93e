// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fnmt/cli.hpp"
#include "fnmt/corpus.hpp"
#include "fnmt/decoding.hpp"
#include "fnmt/evaluation.hpp"
#include "fnmt/model.hpp"
#include "fnmt/pipeline.hpp"
#include "fnmt/text_io.hpp"
#include "fnmt/training.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"
#include "support/search_oracle.hpp"

using namespace fnmt;
namespace fs = std::filesystem;
using fnmt::testing::random_batch;
using fnmt::testing::random_model;
using fnmt::testing::tiny_config;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

constexpr model::FeedbackMode kModes[] = {model::FeedbackMode::kLemma, model::FeedbackMode::kSum,
                                          model::FeedbackMode::kLinear, model::FeedbackMode::kTanh};

// Word BLEU and oracle BLEU of every factored decode, gathered across runs.
// The length-matched figures are diagnostics only.
struct OracleRecord {
  std::string run;
  double word = 0.0;
  double oracle = 0.0;
  std::size_t length_mismatches = 0;
  double matched_word = 0.0;
  double matched_oracle = 0.0;
};
std::vector<OracleRecord> g_oracle_records;

void record_oracle(const std::string& run, const std::vector<Sentence>& hyp,
                   const std::vector<morph::FactoredSentence>& hyp_fac,
                   const std::vector<Sentence>& ref, const morph::MorphLexicon& lexicon) {
  const auto ref_fac = morph::factorize_corpus(ref, lexicon);
  OracleRecord r{run, eval::bleu(hyp, ref), eval::oracle_word_bleu(hyp_fac, ref_fac, lexicon)};
  std::vector<Sentence> mh, mr;
  std::vector<morph::FactoredSentence> mhf, mrf;
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    if (hyp[i].size() != ref[i].size()) {
      ++r.length_mismatches;
      continue;
    }
    mh.push_back(hyp[i]);
    mr.push_back(ref[i]);
    mhf.push_back(hyp_fac[i]);
    mrf.push_back(ref_fac[i]);
  }
  if (!mh.empty()) {
    r.matched_word = eval::bleu(mh, mr);
    r.matched_oracle = eval::oracle_word_bleu(mhf, mrf, lexicon);
  }
  g_oracle_records.push_back(r);
}

void record_oracle(const std::string& run, const std::vector<decoding::Translation>& out,
                   const std::vector<Sentence>& ref, const morph::MorphLexicon& lexicon) {
  std::vector<Sentence> hyp;
  std::vector<morph::FactoredSentence> hyp_fac;
  for (const auto& t : out) {
    hyp.push_back(t.words);
    hyp_fac.push_back(t.factored);
  }
  record_oracle(run, hyp, hyp_fac, ref, lexicon);
}

std::vector<Sentence> words_of(const std::vector<decoding::Translation>& out) {
  std::vector<Sentence> w;
  for (const auto& t : out) w.push_back(t.words);
  return w;
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / name) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& f) const { return (path_ / f).string(); }

 private:
  fs::path path_;
};

int cli_run(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::fprintf(stderr, "fnmt %s failed (%d): %s\n", args[0].c_str(), code, e.str().c_str());
  return code;
}

// ---------------------------------------------------------------------------

Outcome gradient_correctness() {
  double worst = 0.0;
  std::string where;
  double analytic = 0.0, numeric = 0.0;
  std::size_t checked = 0;
  for (auto mode : kModes) {
    for (bool dependency : {false, true}) {
      auto c = tiny_config(8, 12, 20, 18, 14);
      c.feedback = mode;
      c.dependency = dependency;
      auto m = random_model(c, 100 + checked);
      m.set_trainable(true);
      auto b = random_batch(c, 200 + checked, {4, 3}, {3, 4});
      std::vector<std::pair<std::string, Tensor>> inputs;
      for (auto& [name, t] : m.params.named()) inputs.emplace_back(name, t);
      auto r = fnmt::testing::grad_check([&] { return model::sequence_loss(m, b); }, inputs, 1e-5,
                                         1e-5);
      checked += r.checked;
      if (r.max_rel_error > worst) {
        worst = r.max_rel_error;
        where = std::string(to_string(mode)) + (dependency ? "+dep " : " ") + r.worst;
        analytic = r.worst_analytic;
        numeric = r.worst_numeric;
      }
    }
  }
  return {worst < 1e-4, "8 configs, " + std::to_string(checked) + " entries, max rel err " +
                            fmt("%.2e", worst) + " at " + where + " (analytic " + fmt("%.6e", analytic) +
                            ", numeric " + fmt("%.6e", numeric) + "; floor 1e-5, limit 1e-4)"};
}

Outcome normalization() {
  Rng rng(7);
  double worst = 0.0;
  std::size_t instances = 0;
  auto check_rows = [&](const Tensor& p, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < cols; ++c) s += p.values()[r * cols + c];
      worst = std::max(worst, std::abs(s - 1.0));
    }
    ++instances;
  };
  for (int i = 0; i < 400; ++i) {
    const std::size_t rows = 1 + rng.index(4), cols = 1 + rng.index(40);
    const double scale = std::pow(10.0, rng.uniform(-2.0, 2.5));
    std::vector<double> v(rows * cols);
    for (double& x : v) x = rng.uniform(-scale, scale);
    check_rows(softmax(Tensor({rows, cols}, v)), rows, cols);
  }
  for (int i = 0; i < 300; ++i) {
    const std::size_t rows = 1 + rng.index(4), cols = 1 + rng.index(30);
    std::vector<double> v(rows * cols), mask(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t len = 1 + rng.index(cols);
      for (std::size_t c = 0; c < cols; ++c) mask[r * cols + c] = c < len ? 1.0 : 0.0;
    }
    for (double& x : v) x = rng.uniform(-30.0, 30.0);
    check_rows(masked_softmax(Tensor({rows, cols}, v), mask), rows, cols);
  }
  for (int i = 0; i < 300; ++i) {
    auto c = tiny_config(4 + rng.index(4), 4 + rng.index(5), 15, 9, 7);
    auto m = random_model(c, 1000 + i, 0.2 + rng.uniform(0.0, 2.0));
    std::vector<std::size_t> lengths;
    for (std::size_t r = 0, n = 1 + rng.index(4); r < n; ++r) lengths.push_back(1 + rng.index(8));
    Rng ids(i);
    auto src = fnmt::testing::random_ids(ids, lengths, corpus::kReserved, 15);
    auto enc = model::encode(m, src);
    auto att = model::attend(m, model::initial_state(m, enc), enc);
    check_rows(att.weights, src.rows, src.cols);
  }

  double delta = 0.0;
  for (int i = 0; i < 100; ++i) {
    auto c = tiny_config(4, 6, 12, 9, 7);
    c.feedback = kModes[i % 4];
    c.dependency = i % 2;
    auto m = random_model(c, 5000 + i);
    std::vector<std::size_t> s_len, t_len;
    for (int r = 0; r < 3; ++r) {
      s_len.push_back(1 + rng.index(6));
      t_len.push_back(1 + rng.index(6));
    }
    auto b = random_batch(c, 6000 + i, s_len, t_len);
    auto padded = b;
    auto widen = [&](corpus::IndexMatrix& x, int hi) {
      const std::size_t extra = 1 + rng.index(4);
      corpus::IndexMatrix y{x.rows, x.cols + extra, {}, {}};
      for (std::size_t r = 0; r < x.rows; ++r)
        for (std::size_t col = 0; col < y.cols; ++col) {
          y.ids.push_back(col < x.cols ? x.at(r, col) : static_cast<int>(rng.index(hi)));
          y.mask.push_back(col < x.cols ? x.mask_at(r, col) : 0.0);
        }
      x = y;
    };
    widen(padded.source, 12);
    const std::size_t extra_before = padded.lemmas.cols;
    widen(padded.lemmas, 9);
    padded.factors = padded.lemmas;
    for (std::size_t r = 0; r < padded.factors.rows; ++r)
      for (std::size_t col = 0; col < padded.factors.cols; ++col)
        padded.factors.ids[r * padded.factors.cols + col] =
            col < extra_before ? b.factors.at(r, col) : static_cast<int>(rng.index(7));
    delta = std::max(delta, std::abs(model::sequence_loss(m, b).item() -
                                     model::sequence_loss(m, padded).item()));
  }
  return {worst <= 1e-9 && delta < 1e-12,
          std::to_string(instances) + " instances, max |sum-1| " + fmt("%.1e", worst) +
              " (limit 1e-9); padding delta " + fmt("%.1e", delta) + " over 100 batches (limit 1e-12)"};
}

Outcome beam_oracle() {
  Rng rng(11);
  std::size_t models = 0, exact = 0, greedy_equal = 0;
  double worst_score = 0.0;
  for (int i = 0; i < 120; ++i) {
    const std::size_t v_lem = 4 + rng.index(3), v_fac = 1 + rng.index(4);
    auto c = tiny_config(4, 5, 10, v_lem, v_fac);
    c.feedback = kModes[i % 4];
    c.dependency = (i / 4) % 2;
    auto m = random_model(c, 300 + i, 1.5);
    std::vector<int> src;
    for (std::size_t t = 0, n = 1 + rng.index(4); t < n; ++t)
      src.push_back(corpus::kReserved + static_cast<int>(rng.index(7)));
    src.push_back(corpus::kEos);
    const std::size_t max_len = 3;
    const auto oracle = fnmt::testing::exhaustive_best(m, src, max_len);
    const auto beam = decoding::beam_decode(m, src, fnmt::testing::exhaustive_beam(c, max_len));
    const auto& best = beam.best();
    const double d = std::abs(best.score - oracle.score);
    worst_score = std::max(worst_score, d);
    if (!beam.unfinished && best.lemmas == oracle.lemmas && best.factors == oracle.factors &&
        d <= 1e-9)
      ++exact;
    decoding::BeamConfig one;
    one.beam_size = 1;
    one.per_head = 1;
    one.max_length = 10;
    const auto b1 = decoding::beam_decode(m, src, one).best();
    const auto g = decoding::greedy_decode(m, src, 10);
    if (b1.lemmas == g.lemmas && b1.factors == g.factors && std::abs(b1.score - g.score) <= 1e-9)
      ++greedy_equal;
    ++models;
  }
  return {exact == models && greedy_equal == models,
          std::to_string(exact) + "/" + std::to_string(models) +
              " exhaustive beams match enumeration (max score diff " + fmt("%.1e", worst_score) +
              "), " + std::to_string(greedy_equal) + "/" + std::to_string(models) +
              " beam(1,1) == greedy"};
}

Outcome morphology_round_trip() {
  auto check = [](const morph::MorphLexicon& lex, std::size_t& failures) {
    for (const auto& e : lex.entries()) {
      const auto a = lex.factorize(e.word);
      if (!a || lex.reconstruct(a->lemma, a->tag) != e.word) ++failures;
      if (lex.reconstruct(e.lemma, e.tag) != e.word) ++failures;
    }
  };
  const auto french = morph::MorphLexicon::load(std::string(FNMT_TEST_DATA_DIR) + "/french_lexicon.tsv");
  std::size_t failures = 0;
  check(french, failures);
  const auto devient = french.factorize("devient");
  const bool example = devient && devient->lemma == "devenir" && devient->tag.str() == "vP3#s" &&
                       french.factorize("actualisée") &&
                       french.reconstruct("actualiser", french.factorize("actualisée")->tag) ==
                           "actualisée";
  std::string sizes;
  std::size_t min_size = SIZE_MAX;
  for (std::uint64_t seed : {1, 2}) {
    corpus::SyntheticLanguageSpec spec;
    spec.lemma_count = 700;
    spec.train_sentences = 10;
    spec.valid_sentences = 1;
    spec.test_sentences = 1;
    spec.seed = seed;
    const auto data = corpus::generate_synthetic(spec);
    check(data.lexicon, failures);
    min_size = std::min(min_size, data.lexicon.size());
    sizes += (sizes.empty() ? "" : ", ") + std::to_string(data.lexicon.size());
  }
  return {failures == 0 && example && min_size >= 5000,
          "French fixture " + std::to_string(french.size()) + " entries, synthetic " + sizes +
              " entries, " + std::to_string(failures) + " failures, devient example " +
              (example ? "ok" : "wrong")};
}

Outcome overfit() {
  TempDir dir("fnmt_acceptance_overfit");
  if (cli_run({"synth", "--out-dir", dir / "data", "--lemmas", "40", "--train", "50", "--valid",
               "5", "--test", "5", "--seed", "1"}) != 0)
    return {false, "synth failed"};
  const auto t0 = std::chrono::steady_clock::now();
  std::string summary;
  // Validation on the training pairs themselves, once per 10 epochs (7 updates each).
  if (cli_run({"train", "--src", dir / "data/train.src", "--tgt", dir / "data/train.tgt",
               "--valid-src", dir / "data/train.src", "--valid-tgt", dir / "data/train.tgt",
               "--lexicon", dir / "data/lexicon.tsv", "--checkpoint", dir / "model.ckpt",
               "--desk-scale", "--epochs", "300", "--validation-interval", "70", "--stop-bleu",
               "90", "--seed", "1"},
              &summary) != 0)
    return {false, "train failed"};
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (cli_run({"translate", "--checkpoint", dir / "model.ckpt", "--src", dir / "data/train.src",
               "--lexicon", dir / "data/lexicon.tsv", "--output", dir / "train.hyp",
               "--factored-output", dir / "train.hyp.fac", "--beam", "4"}) != 0)
    return {false, "translate failed"};
  const auto hyp = read_corpus(dir / "train.hyp");
  const auto ref = read_corpus(dir / "data/train.tgt");
  const double score = eval::bleu(hyp, ref);
  const auto lexicon = morph::MorphLexicon::load(dir / "data/lexicon.tsv");
  record_oracle("overfit", hyp, morph::read_factored_corpus(dir / "train.hyp.fac"), ref, lexicon);
  const auto ck = model::load_checkpoint(dir / "model.ckpt");
  const double epochs = std::stod(ck.info.at("best_update")) / 7.0;
  return {score >= 90.0 && epochs <= 300.0 && seconds < 600.0,
          "train-set BLEU " + fmt("%.2f", score) + " (need >= 90) at epoch " + fmt("%.0f", epochs) +
              " (limit 300), training " + fmt("%.1f", seconds) + " s (limit 600)"};
}

// Factored and word-level systems trained on the same synthetic language.
struct ToySystems {
  corpus::SyntheticData data;
  model::Checkpoint fnmt, nmt;
  std::vector<decoding::Translation> fnmt_out, nmt_out;
};

training::TrainConfig toy_config(std::uint64_t seed) {
  training::TrainConfig c;
  c.apply_desk_scale();
  c.source_shortlist = 100000;
  c.lemma_shortlist = 60;  // output layer size shared by both systems
  c.max_epochs = 12;
  c.validation_interval = 1000000;
  c.seed = seed;
  return c;
}

corpus::SyntheticData toy_language(std::uint64_t seed) {
  corpus::SyntheticLanguageSpec spec;
  spec.lemma_count = 120;
  spec.train_sentences = 600;
  spec.valid_sentences = 10;
  spec.test_sentences = 100;
  spec.seed = seed;
  return corpus::generate_synthetic(spec);
}

const ToySystems& toy_systems(std::uint64_t seed) {
  static std::map<std::uint64_t, ToySystems> cache;
  auto it = cache.find(seed);
  if (it != cache.end()) return it->second;
  ToySystems s;
  s.data = toy_language(seed);
  const auto config = toy_config(seed);
  decoding::BeamConfig beam = pipeline::beam_config(config);
  auto fit = [&](const morph::MorphLexicon* lex) {
    auto prep = pipeline::prepare_training(s.data.train, lex, config);
    return training::train(prep.initial, prep.batches, config, {}).best;
  };
  s.fnmt = fit(&s.data.lexicon);
  s.nmt = fit(nullptr);
  s.fnmt_out = decoding::translate_corpus(s.fnmt, s.data.test.source, &s.data.lexicon, beam);
  s.nmt_out = decoding::translate_corpus(s.nmt, s.data.test.source, nullptr, beam);
  record_oracle("toy seed " + std::to_string(seed), s.fnmt_out, s.data.test.target,
                s.data.lexicon);
  return cache.emplace(seed, std::move(s)).first->second;
}

Outcome new_word_generation() {
  const auto& s = toy_systems(1);
  std::set<std::string> train_words;
  for (const auto& sent : s.data.train.target) train_words.insert(sent.begin(), sent.end());

  std::size_t novel_correct = 0;
  std::string example;
  for (std::size_t i = 0; i < s.fnmt_out.size(); ++i) {
    const std::set<std::string> ref(s.data.test.target[i].begin(), s.data.test.target[i].end());
    for (const auto& w : s.fnmt_out[i].words) {
      if (!train_words.count(w) && ref.count(w)) {
        ++novel_correct;
        if (example.empty()) example = w;
      }
    }
  }
  // The baseline's output layer lists training words only, so its outputs must too.
  bool vocab_subset = true, outputs_subset = true;
  for (const auto& t : s.nmt.lemma_vocab.shortlist()) vocab_subset &= train_words.count(t) > 0;
  for (const auto& t : s.nmt_out)
    for (const auto& w : t.words)
      outputs_subset &= train_words.count(w) > 0 || w == corpus::kUnkToken;
  return {novel_correct >= 1 && vocab_subset && outputs_subset,
          "FNMT emitted " + std::to_string(novel_correct) +
              " correct unseen words (e.g. '" + example + "'); baseline vocabulary subset " +
              (vocab_subset ? "yes" : "no") + ", outputs subset " +
              (outputs_subset ? "yes" : "no")};
}

Outcome coverage_direction() {
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto& s = toy_systems(seed);
    const auto f_vocab = eval::effective_vocabulary(s.fnmt, &s.data.lexicon);
    const auto n_vocab = eval::effective_vocabulary(s.nmt, nullptr);
    const double f_cov = eval::coverage(s.data.test.target, f_vocab);
    const double n_cov = eval::coverage(s.data.test.target, n_vocab);
    const auto f_unk = eval::count_oov(words_of(s.fnmt_out));
    const auto n_unk = eval::count_oov(words_of(s.nmt_out));
    pass &= f_cov >= n_cov && f_unk <= n_unk;
    detail += (detail.empty() ? "" : "; ") + std::string("seed ") + std::to_string(seed) +
              ": coverage " + fmt("%.2f", f_cov) + " vs " + fmt("%.2f", n_cov) + ", UNK " +
              std::to_string(f_unk) + " vs " + std::to_string(n_unk);
  }
  return {pass, "K=60 outputs, FNMT vs NMT, " + detail};
}

Outcome determinism();

Outcome oracle_dominance() {
  if (g_oracle_records.empty()) toy_systems(1);
  std::size_t ok = 0;
  std::string detail;
  for (const auto& r : g_oracle_records) {
    ok += r.oracle >= r.word;
    detail += "; " + r.run + " oracle " + fmt("%.2f", r.oracle) + " vs word " + fmt("%.2f", r.word) +
              " (" + std::to_string(r.length_mismatches) + " length mismatches, matched-length " +
              fmt("%.2f", r.matched_oracle) + " vs " + fmt("%.2f", r.matched_word) + ")";
  }
  return {ok == g_oracle_records.size(),
          std::to_string(ok) + "/" + std::to_string(g_oracle_records.size()) +
              " decodes with oracle >= word BLEU" + detail};
}

Outcome bleu_correctness() {
  const std::vector<Sentence> hyp = {split_tokens("the cat sat on the mat"),
                                     split_tokens("a dog runs"), split_tokens("hello world")};
  const std::vector<Sentence> ref = {split_tokens("the cat sat on a mat"),
                                     split_tokens("a dog runs fast"),
                                     split_tokens("hello there world")};
  // By hand: clipped matches 10/11, 5/8, 3/5, 1/3; hyp 11 vs ref 13 words.
  const double expected =
      100.0 * std::exp(1.0 - 13.0 / 11.0) *
      std::pow((10.0 / 11.0) * (5.0 / 8.0) * (3.0 / 5.0) * (1.0 / 3.0), 0.25);
  const double got = eval::bleu(hyp, ref);
  const double identity = eval::bleu(ref, ref);
  return {std::abs(got - expected) <= 0.01 && std::abs(got - 48.41) <= 0.01 &&
              std::abs(identity - 100.0) < 1e-9,
          "fixture " + fmt("%.4f", got) + " (hand " + fmt("%.4f", expected) + ", tol 0.01), identity " +
              fmt("%.4f", identity)};
}

Outcome determinism() {
  std::vector<std::string> runs[2];
  for (int r = 0; r < 2; ++r) {
    TempDir dir("fnmt_acceptance_det" + std::to_string(r));
    if (cli_run({"synth", "--out-dir", dir / "data", "--lemmas", "30", "--train", "60", "--valid",
                 "8", "--test", "10", "--seed", "4"}) != 0)
      return {false, "synth failed"};
    if (cli_run({"train", "--src", dir / "data/train.src", "--tgt", dir / "data/train.tgt",
                 "--valid-src", dir / "data/valid.src", "--valid-tgt", dir / "data/valid.tgt",
                 "--lexicon", dir / "data/lexicon.tsv", "--checkpoint", dir / "m.ckpt",
                 "--desk-scale", "--epochs", "6", "--validation-interval", "16", "--seed", "9",
                 "--feedback", "tanh", "--dependency"}) != 0)
      return {false, "train failed"};
    if (cli_run({"translate", "--checkpoint", dir / "m.ckpt", "--src", dir / "data/test.src",
                 "--lexicon", dir / "data/lexicon.tsv", "--output", dir / "t.out",
                 "--factored-output", dir / "t.fac", "--nbest", dir / "t.nbest", "--workers",
                 r == 0 ? "1" : "2"}) != 0)
      return {false, "translate failed"};
    for (const char* f : {"m.ckpt", "m.ckpt.log", "t.out", "t.fac", "t.nbest"})
      runs[r].push_back(read_file(dir / f));
    if (r == 0) {
      const auto lexicon = morph::MorphLexicon::load(dir / "data/lexicon.tsv");
      record_oracle("determinism", read_corpus(dir / "t.out"),
                    morph::read_factored_corpus(dir / "t.fac"), read_corpus(dir / "data/test.tgt"),
                    lexicon);
    }
  }
  std::size_t same = 0;
  for (std::size_t i = 0; i < runs[0].size(); ++i) same += runs[0][i] == runs[1][i];
  return {same == runs[0].size(),
          std::to_string(same) + "/" + std::to_string(runs[0].size()) +
              " artifacts byte-identical (checkpoint, log, translations, factored, n-best; " +
              "1 vs 2 translate workers)"};
}

}  // namespace

int main(int argc, char** argv) {
  setenv("FNMT_LOG", "quiet", 1);
  // Criterion 8 runs last so it sees every toy decode.
  const std::vector<std::tuple<int, const char*, std::function<Outcome()>>> criteria = {
      {1, "gradient correctness", gradient_correctness},
      {2, "normalization", normalization},
      {3, "beam oracle", beam_oracle},
      {4, "morphology round trip", morphology_round_trip},
      {5, "overfit", overfit},
      {6, "new-word generation", new_word_generation},
      {7, "coverage/UNK direction", coverage_direction},
      {9, "BLEU correctness", bleu_correctness},
      {10, "determinism", determinism},
      {8, "oracle dominance", oracle_dominance},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& [id, name, run] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name,
                o.detail.c_str(), s);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
