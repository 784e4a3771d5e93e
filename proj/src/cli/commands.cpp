#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fnmt/cli.hpp"
#include "fnmt/decoding.hpp"
#include "fnmt/error.hpp"
#include "fnmt/evaluation.hpp"
#include "fnmt/pipeline.hpp"
#include "fnmt/training.hpp"

namespace fnmt::cli {

namespace fs = std::filesystem;

namespace {

enum class Verbosity { kQuiet, kInfo, kDebug };

Verbosity verbosity() {
  const char* v = std::getenv("FNMT_LOG");
  if (v == nullptr) return Verbosity::kInfo;
  const std::string s = v;
  if (s == "quiet" || s == "0" || s == "error") return Verbosity::kQuiet;
  if (s == "debug" || s == "2") return Verbosity::kDebug;
  return Verbosity::kInfo;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string(what) + " path is required");
  if (!fs::is_regular_file(path)) {
    throw IoError(std::string(what) + " '" + path + "' does not exist or is not a file");
  }
}

void require_parent(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string(what) + " path is required");
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw IoError(std::string(what) + " directory '" + parent.string() + "' does not exist");
  }
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  std::string out_dir;
  corpus::SyntheticLanguageSpec spec;
};

void cmd_synth(const SynthOptions& o, std::ostream& out) {
  if (o.out_dir.empty()) throw ConfigError("--out-dir is required");
  fs::create_directories(o.out_dir);
  const auto data = corpus::generate_synthetic(o.spec);
  const fs::path dir = o.out_dir;
  AtomicOutputs files;
  const std::pair<const char*, const corpus::ParallelText*> splits[] = {
      {"train", &data.train}, {"valid", &data.valid}, {"test", &data.test}};
  for (const auto& [name, text] : splits) {
    files.stage(dir / (std::string(name) + ".src"), format_corpus(text->source));
    files.stage(dir / (std::string(name) + ".tgt"), format_corpus(text->target));
    std::string factored;
    for (const auto& s : morph::factorize_corpus(text->target, data.lexicon)) {
      factored += morph::format_factored(s) + "\n";
    }
    files.stage(dir / (std::string(name) + ".fac"), factored);
  }
  files.stage(dir / "lexicon.tsv", data.lexicon.to_tsv());
  files.commit();
  out << "lexicon_entries: " << data.lexicon.size() << "\n"
      << "train_sentences: " << data.train.source.size() << "\n"
      << "valid_sentences: " << data.valid.source.size() << "\n"
      << "test_sentences: " << data.test.source.size() << "\n";
}

// ---------------------------------------------------------------------------
// factorize

struct FactorizeOptions {
  std::string lexicon, input, output, report;
  bool reject_oov = false;
};

void cmd_factorize(const FactorizeOptions& o, std::ostream& out) {
  require_file(o.lexicon, "lexicon");
  require_file(o.input, "input corpus");
  require_parent(o.output, "output");
  const auto lexicon = morph::MorphLexicon::load(o.lexicon);
  morph::FactorizeReport report;
  const auto factored = morph::factorize_corpus(
      read_corpus(o.input), lexicon,
      o.reject_oov ? morph::OovPolicy::kReject : morph::OovPolicy::kPassThrough, &report);
  std::string text;
  for (const auto& s : factored) text += morph::format_factored(s) + "\n";
  AtomicOutputs files;
  files.stage(o.output, text);
  if (!o.report.empty()) files.stage(o.report, report.to_text());
  files.commit();
  out << report.to_text();
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string src, tgt, valid_src, valid_tgt, lexicon, checkpoint, log, config_file;
  bool word_level = false;
  bool desk_scale = false;
  std::size_t workers = 1;
  std::vector<std::pair<std::string, std::string>> overrides;
};

void cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  require_file(o.src, "training source");
  require_file(o.tgt, "training target");
  require_file(o.valid_src, "validation source");
  require_file(o.valid_tgt, "validation target");
  if (o.word_level) {
    if (!o.lexicon.empty()) throw ConfigError("--word-level models do not use a lexicon");
  } else {
    require_file(o.lexicon, "lexicon");
  }
  require_parent(o.checkpoint, "checkpoint");
  const std::string log_path = o.log.empty() ? o.checkpoint + ".log" : o.log;
  require_parent(log_path, "log");

  training::TrainConfig config;
  if (!o.config_file.empty()) {
    require_file(o.config_file, "config");
    config = training::TrainConfig::parse(read_file(o.config_file), o.config_file);
  }
  if (o.desk_scale) config.apply_desk_scale();
  for (const auto& [k, v] : o.overrides) config.set(k, v);
  config.validate();

  std::optional<morph::MorphLexicon> lexicon;
  if (!o.word_level) lexicon = morph::MorphLexicon::load(o.lexicon);
  const auto* lex = lexicon ? &*lexicon : nullptr;
  corpus::ParallelText train{read_corpus(o.src), read_corpus(o.tgt)};
  corpus::ParallelText valid{read_corpus(o.valid_src), read_corpus(o.valid_tgt)};

  auto prepared = pipeline::prepare_training(train, lex, config);
  const auto level = verbosity();
  if (level != Verbosity::kQuiet) err << prepared.report.to_text();

  training::TrainHooks hooks;
  auto beam = pipeline::beam_config(config);
  hooks.validate = pipeline::bleu_validator(prepared.initial, valid, lex, beam, o.workers);
  hooks.log = [&](const std::string& line) {
    const bool is_validation = line.rfind("validation=", 0) == 0;
    if (level == Verbosity::kDebug || (level == Verbosity::kInfo && is_validation)) {
      err << line << "\n";
    }
  };
  hooks.diagnostic_checkpoint = o.checkpoint + ".diagnostic";

  auto result = training::train(prepared.initial, prepared.batches, config, hooks);
  AtomicOutputs files;
  files.stage(o.checkpoint, serialize_checkpoint(result.best));
  files.stage(log_path, result.log);
  files.commit();
  out << "updates: " << result.updates << "\n"
      << "epochs: " << result.epochs << "\n"
      << "validations: " << result.validation_bleu.size() << "\n"
      << "best_bleu: "
      << (result.best.info.count("best_bleu") ? result.best.info.at("best_bleu") : "n/a") << "\n"
      << "early_stopped: " << (result.early_stopped ? "true" : "false") << "\n";
}

// ---------------------------------------------------------------------------
// translate

struct TranslateOptions {
  std::string checkpoint, src, lexicon, output, factored_output, nbest;
  std::size_t workers = 1;
  decoding::BeamConfig beam;
  bool unnormalized = false;
};

void cmd_translate(TranslateOptions o, std::ostream& out) {
  require_file(o.checkpoint, "checkpoint");
  require_file(o.src, "source");
  require_parent(o.output, "output");
  if (!o.factored_output.empty()) require_parent(o.factored_output, "factored output");
  if (!o.nbest.empty()) require_parent(o.nbest, "n-best output");
  const auto ck = model::load_checkpoint(o.checkpoint);
  std::optional<morph::MorphLexicon> lexicon;
  if (!ck.word_level) {
    require_file(o.lexicon, "lexicon");
    lexicon = morph::MorphLexicon::load(o.lexicon);
    const auto hash = hex64(lexicon->fingerprint());
    if (hash != ck.lexicon_hash) {
      throw CompatibilityError("lexicon '" + o.lexicon + "' (hash " + hash +
                               ") does not match the one the checkpoint was trained with (hash " +
                               ck.lexicon_hash + ")");
    }
  }
  o.beam.normalize = !o.unnormalized;
  const auto translations = decoding::translate_corpus(ck, read_corpus(o.src),
                                                       lexicon ? &*lexicon : nullptr, o.beam,
                                                       o.workers);
  std::string words, factored;
  std::size_t unfinished = 0;
  for (const auto& t : translations) {
    words += join_tokens(t.words) + "\n";
    factored += morph::format_factored(t.factored) + "\n";
    unfinished += t.unfinished;
  }
  AtomicOutputs files;
  files.stage(o.output, words);
  if (!o.factored_output.empty()) files.stage(o.factored_output, factored);
  if (!o.nbest.empty()) files.stage(o.nbest, decoding::format_nbest(translations));
  files.commit();
  out << "sentences: " << translations.size() << "\n"
      << "unfinished: " << unfinished << "\n";
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
  std::string hyp, ref, hyp_factored, ref_factored, lexicon, checkpoint, json;
  bool smooth = false;
};

void cmd_evaluate(const EvaluateOptions& o, std::ostream& out) {
  require_file(o.hyp, "hypothesis");
  require_file(o.ref, "reference");
  if (!o.hyp_factored.empty()) require_file(o.hyp_factored, "hypothesis factored stream");
  if (!o.ref_factored.empty()) require_file(o.ref_factored, "reference factored stream");
  if (!o.lexicon.empty()) require_file(o.lexicon, "lexicon");
  if (!o.checkpoint.empty()) require_file(o.checkpoint, "checkpoint");
  if (!o.json.empty()) require_parent(o.json, "JSON report");
  if (o.hyp_factored.empty() != o.ref_factored.empty()) {
    throw ConfigError("--hyp-factored and --ref-factored must be given together");
  }

  const auto hyp = read_corpus(o.hyp);
  const auto ref = read_corpus(o.ref);
  std::optional<morph::MorphLexicon> lexicon;
  if (!o.lexicon.empty()) lexicon = morph::MorphLexicon::load(o.lexicon);
  std::vector<morph::FactoredSentence> hyp_f, ref_f;
  const morph::TagSchema schema = lexicon ? lexicon->schema() : morph::TagSchema{};
  if (!o.hyp_factored.empty()) {
    hyp_f = morph::read_factored_corpus(o.hyp_factored, schema);
    ref_f = morph::read_factored_corpus(o.ref_factored, schema);
  }
  std::unordered_set<std::string> vocab;
  if (!o.checkpoint.empty()) {
    const auto ck = model::load_checkpoint(o.checkpoint);
    if (!ck.word_level && !lexicon) throw ConfigError("coverage of a factored model needs --lexicon");
    vocab = eval::effective_vocabulary(ck, lexicon ? &*lexicon : nullptr);
  }
  eval::EvalInputs in;
  in.hypotheses = &hyp;
  in.references = &ref;
  if (!o.hyp_factored.empty()) {
    in.hypothesis_factors = &hyp_f;
    in.reference_factors = &ref_f;
  }
  in.lexicon = lexicon ? &*lexicon : nullptr;
  in.vocabulary = o.checkpoint.empty() ? nullptr : &vocab;
  in.smooth = o.smooth;
  const auto report = eval::evaluate(in);
  if (!o.json.empty()) write_file_atomic(o.json, report.to_json());
  out << report.to_text();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Factored neural machine translation toolkit", "fnmt"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  SynthOptions synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic parallel corpus and lexicon");
  s->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  s->add_option("--lemmas", synth.spec.lemma_count, "Number of target lemmas");
  s->add_option("--train", synth.spec.train_sentences, "Training sentences");
  s->add_option("--valid", synth.spec.valid_sentences, "Validation sentences");
  s->add_option("--test", synth.spec.test_sentences, "Test sentences");
  s->add_option("--min-length", synth.spec.min_length, "Shortest sentence");
  s->add_option("--max-length", synth.spec.max_length, "Longest sentence");
  s->add_option("--zipf", synth.spec.zipf_exponent, "Zipf exponent of lemma frequencies");
  s->add_option("--held-out", synth.spec.held_out_fraction, "Share of held-out inflections");
  s->add_option("--seed", synth.spec.seed, "Random seed");

  FactorizeOptions fac;
  auto* f = app.add_subcommand("factorize", "Split a word corpus into lemma|tag tokens");
  f->add_option("--lexicon", fac.lexicon, "Morphological lexicon (TSV)")->required();
  f->add_option("--input,--src", fac.input, "Word corpus")->required();
  f->add_option("--output", fac.output, "Factored corpus to write")->required();
  f->add_option("--report", fac.report, "Also write the OOV report here");
  f->add_flag("--reject-oov", fac.reject_oov, "Fail on words missing from the lexicon");

  TrainOptions tr;
  std::string feedback;
  std::optional<double> lambda;
  std::optional<std::size_t> beam_size, per_head, seed, batch, epochs, patience, interval, shortlist,
      emb, hid, max_len;
  std::optional<double> stop_bleu;
  bool dependency = false;
  auto* t = app.add_subcommand("train", "Train a factored (or word-level) model");
  t->add_option("--src", tr.src, "Training source corpus")->required();
  t->add_option("--tgt", tr.tgt, "Training target corpus (words)")->required();
  t->add_option("--valid-src", tr.valid_src, "Validation source corpus")->required();
  t->add_option("--valid-tgt", tr.valid_tgt, "Validation target corpus (words)")->required();
  t->add_option("--lexicon", tr.lexicon, "Morphological lexicon (TSV)");
  t->add_option("--checkpoint", tr.checkpoint, "Where to write the best checkpoint")->required();
  t->add_option("--log", tr.log, "Training log (default <checkpoint>.log)");
  t->add_option("--config", tr.config_file, "key=value training config file");
  t->add_flag("--word-level", tr.word_level, "Train the word-level baseline (no factors)");
  t->add_flag("--desk-scale", tr.desk_scale, "Dims 32/64, batch 8, beam 4");
  t->add_option("--feedback", feedback, "lemma|sum|linear|tanh");
  t->add_flag("--dependency", dependency, "Condition the factor head on the lemma");
  t->add_option("--lambda-fac", lambda, "Weight of the factor loss");
  t->add_option("--beam", beam_size, "Validation beam size");
  t->add_option("--per-head-candidates", per_head, "Per-head candidates before the cross product");
  t->add_option("--seed", seed, "Random seed");
  t->add_option("--batch-size", batch, "Sentences per batch");
  t->add_option("--epochs", epochs, "Maximum epochs");
  t->add_option("--patience", patience, "Early-stopping patience");
  t->add_option("--validation-interval", interval, "Updates between validations");
  t->add_option("--stop-bleu", stop_bleu, "Stop once validation BLEU reaches this value");
  t->add_option("--shortlist", shortlist, "Output (and source) vocabulary shortlist");
  t->add_option("--emb", emb, "Embedding size");
  t->add_option("--hid", hid, "Hidden size");
  t->add_option("--max-len", max_len, "Drop training pairs longer than this");
  t->add_option("--workers", tr.workers, "Threads for validation decoding");

  TranslateOptions tl;
  auto* x = app.add_subcommand("translate", "Translate a source corpus");
  x->add_option("--checkpoint", tl.checkpoint, "Trained checkpoint")->required();
  x->add_option("--src", tl.src, "Source corpus")->required();
  x->add_option("--lexicon", tl.lexicon, "Lexicon the model was trained with");
  x->add_option("--output", tl.output, "Word output")->required();
  x->add_option("--factored-output", tl.factored_output, "lemma|tag output");
  x->add_option("--nbest", tl.nbest, "n-best list output");
  x->add_option("--beam", tl.beam.beam_size, "Beam size");
  x->add_option("--per-head-candidates", tl.beam.per_head, "Per-head candidates (0: beam size)");
  x->add_option("--max-length", tl.beam.max_length, "Maximum output length");
  x->add_flag("--unnormalized", tl.unnormalized, "Rank by raw score instead of score/length");
  x->add_option("--workers", tl.workers, "Translation threads");

  EvaluateOptions ev;
  auto* e = app.add_subcommand("evaluate", "Score translations against references");
  e->add_option("--hyp", ev.hyp, "Hypothesis words")->required();
  e->add_option("--ref", ev.ref, "Reference words")->required();
  e->add_option("--hyp-factored", ev.hyp_factored, "Hypothesis lemma|tag stream");
  e->add_option("--ref-factored", ev.ref_factored, "Reference lemma|tag stream");
  e->add_option("--lexicon", ev.lexicon, "Lexicon (enables the oracle score)");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint (enables coverage)");
  e->add_option("--json", ev.json, "Also write the report as JSON");
  e->add_flag("--smooth", ev.smooth, "Smoothed BLEU for tiny corpora");

  std::vector<const char*> argv = {"fnmt"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kUsage;
  }

  auto fail = [&](const std::exception& ex, int code) {
    err << "fnmt: error: " << ex.what() << "\n";
    return code;
  };
  try {
    if (s->parsed()) {
      cmd_synth(synth, out);
    } else if (f->parsed()) {
      cmd_factorize(fac, out);
    } else if (t->parsed()) {
      auto put = [&](const char* key, const auto& opt) {
        if (opt) tr.overrides.emplace_back(key, std::to_string(*opt));
      };
      if (!feedback.empty()) tr.overrides.emplace_back("feedback", feedback);
      if (dependency) tr.overrides.emplace_back("dependency", "true");
      if (lambda) {
        std::ostringstream v;
        v.precision(17);
        v << *lambda;
        tr.overrides.emplace_back("factor_weight", v.str());
      }
      if (stop_bleu) {
        std::ostringstream v;
        v.precision(17);
        v << *stop_bleu;
        tr.overrides.emplace_back("stop_bleu", v.str());
      }
      put("beam_size", beam_size);
      put("per_head_candidates", per_head);
      put("seed", seed);
      put("batch_size", batch);
      put("max_epochs", epochs);
      put("patience", patience);
      put("validation_interval", interval);
      put("source_shortlist", shortlist);
      put("lemma_shortlist", shortlist);
      put("emb_dim", emb);
      put("hid_dim", hid);
      put("max_len", max_len);
      cmd_train(tr, out, err);
    } else if (x->parsed()) {
      cmd_translate(tl, out);
    } else if (e->parsed()) {
      cmd_evaluate(ev, out);
    }
  } catch (const ConfigError& ex) {
    return fail(ex, kUsage);
  } catch (const NumericError& ex) {
    return fail(ex, kNumeric);
  } catch (const Error& ex) {
    return fail(ex, kData);
  } catch (const fs::filesystem_error& ex) {
    return fail(ex, kData);
  }
  return kOk;
}

}  // namespace fnmt::cli
