// Copyright 2026 synmt authors
// Licensed under the Apache License, Version 2.0; see LICENSE for details.
//
// synmt: preprocess | train | translate | evaluate | ablate | gradcheck.
// All state lives under --out; every command echoes its effective config.

#include "synmt/ablate.hpp"
#include "synmt/beam.hpp"
#include "synmt/bleu.hpp"
#include "synmt/checkpoint.hpp"
#include "synmt/config.hpp"
#include "synmt/conllu.hpp"
#include "synmt/preprocess.hpp"
#include "synmt/train.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace synmt;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

KVConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  KVConfig kv = path.empty() ? KVConfig() : KVConfig::load_file(path);
  for (const auto& o : overrides) kv.apply_override(o);
  return kv;
}

void echo_config(const KVConfig& kv, const std::string& out_dir) {
  const std::string text = kv.to_text();
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file((fs::path(out_dir) / "effective.config").string(), text);
  }
  std::cout << "# effective config\n" << text;
}

struct DataDir {
  std::vector<Record> records;
  Vocabulary src_vocab, tgt_vocab, label_vocab;
  BpeModel bpe;
};

DataDir load_data_dir(const std::string& dir) {
  DataDir d;
  d.records = read_records_file((fs::path(dir) / "records.bin").string());
  d.src_vocab = Vocabulary::load(read_file((fs::path(dir) / "src.vocab").string()));
  d.tgt_vocab = Vocabulary::load(read_file((fs::path(dir) / "tgt.vocab").string()));
  d.label_vocab = Vocabulary::load(read_file((fs::path(dir) / "labels.vocab").string()));
  d.bpe = BpeModel::load(read_file((fs::path(dir) / "bpe.merges").string()));
  return d;
}

// Fills the vocabulary-dependent fields from the loaded artifacts and
// refuses configs that pin different sizes.
void reconcile_vocab_sizes(TransformerConfig& cfg, const DataDir& data) {
  auto fit = [](int& slot, int actual, const char* what) {
    if (slot != 0 && slot != actual)
      throw ConfigError(std::string("config ") + what + " = " + std::to_string(slot) +
                        " does not match data (" + std::to_string(actual) + ")");
    slot = actual;
  };
  fit(cfg.src_vocab, data.src_vocab.size(), "src_vocab");
  fit(cfg.tgt_vocab, data.tgt_vocab.size(), "tgt_vocab");
  fit(cfg.n_labels, data.label_vocab.size(), "n_labels");
}

int cmd_preprocess(const std::string& src_conllu, const std::string& tgt_txt,
                   const std::string& out_dir, const KVConfig& base_kv, PreprocessOptions opt) {
  auto sents = parse_conllu(read_file(src_conllu));
  auto tgt_lines = read_lines(tgt_txt);
  if (sents.size() != tgt_lines.size())
    throw std::runtime_error("line-count mismatch: " + src_conllu + " has " +
                             std::to_string(sents.size()) + " sentences, " + tgt_txt + " has " +
                             std::to_string(tgt_lines.size()) + " lines");

  std::vector<ParallelExample> examples(sents.size());
  for (size_t i = 0; i < sents.size(); ++i) {
    examples[i].source = sents[i];
    examples[i].target = split_ws(tgt_lines[i]);
    if (examples[i].target.empty())
      throw std::runtime_error("empty target line " + std::to_string(i + 1) + " in " + tgt_txt);
  }

  auto data = preprocess(examples, opt);

  fs::create_directories(out_dir);
  write_records_file((fs::path(out_dir) / "records.bin").string(), data.records);
  write_file((fs::path(out_dir) / "src.vocab").string(), data.src_vocab.save());
  write_file((fs::path(out_dir) / "tgt.vocab").string(), data.tgt_vocab.save());
  write_file((fs::path(out_dir) / "labels.vocab").string(), data.label_vocab.save());
  write_file((fs::path(out_dir) / "bpe.merges").string(), data.bpe.save());
  write_file((fs::path(out_dir) / "records.jsonl").string(), records_to_jsonl(data.records));

  std::ostringstream manifest;
  manifest << "records\t" << data.records.size() << "\n"
           << "src_vocab\t" << data.src_vocab.size() << "\n"
           << "tgt_vocab\t" << data.tgt_vocab.size() << "\n"
           << "labels\t" << data.label_vocab.size() << "\n"
           << "bpe_merges\t" << data.bpe.merges().size() << "\n";
  write_file((fs::path(out_dir) / "manifest.txt").string(), manifest.str());
  std::cout << manifest.str();

  KVConfig kv = base_kv;
  kv.set("preprocess.bpe_merges", std::to_string(opt.bpe_merges));
  kv.set("preprocess.min_freq", std::to_string(opt.min_freq));
  kv.set("preprocess.multitask", opt.multitask ? "true" : "false");
  kv.set("preprocess.seed", std::to_string(opt.seed));
  echo_config(kv, out_dir);
  return 0;
}

int cmd_train(const std::string& data_dir, const std::string& out_dir, const KVConfig& kv,
              std::uint64_t seed) {
  DataDir data = load_data_dir(data_dir);
  TransformerConfig mcfg = transformer_config_from(kv);
  reconcile_vocab_sizes(mcfg, data);
  mcfg.validate();
  TrainConfig tcfg = train_config_from(kv);
  tcfg.seed = seed;
  tcfg.validate();

  KVConfig echo = to_kv(mcfg);
  merge_train_config(echo, tcfg);
  echo_config(echo, out_dir);
  const std::string config_text = echo.to_text();

  Model model = build_model(mcfg, seed);
  AdamOptimizer opt(tcfg.beta1, tcfg.beta2, tcfg.adam_eps);
  long start_step = 0;

  const std::string ckpt_path = (fs::path(out_dir) / "checkpoint.bin").string();
  if (fs::exists(ckpt_path)) {
    auto loaded = load_checkpoint(ckpt_path, mcfg);
    model = std::move(loaded.model);
    start_step = loaded.step;
    if (loaded.has_optimizer)
      opt.restore(std::move(loaded.opt_m), std::move(loaded.opt_v), loaded.opt_steps);
    std::cout << "resuming from step " << start_step << "\n";
  }
  if (start_step >= tcfg.max_steps) {
    std::cout << "already at step " << start_step << ", nothing to do\n";
    return 0;
  }

  std::ofstream log((fs::path(out_dir) / "train.log").string(), std::ios::app);
  auto result = train(model, opt, data.records, tcfg, start_step, [&](const TrainLogEntry& e) {
    std::ostringstream line;
    line << e.step << "\t" << e.loss << "\t" << e.parse_loss << "\t" << e.lr;
    log << line.str() << "\n";
    std::cout << "step " << line.str() << "\n";
  });
  save_checkpoint(ckpt_path, model, config_text, result.steps, &opt);
  std::cout << "final step " << result.steps << " loss " << result.final_loss << "\n";
  return 0;
}

int cmd_translate(const std::string& ckpt_path, const std::string& input,
                  const std::string& data_dir, const std::string& out_path,
                  const DecodeConfig& dc) {
  DataDir data = load_data_dir(data_dir);
  KVConfig saved = KVConfig::parse(read_checkpoint_config(ckpt_path));
  TransformerConfig mcfg = transformer_config_from(saved);
  if (mcfg.src_vocab != data.src_vocab.size() || mcfg.tgt_vocab != data.tgt_vocab.size())
    throw ConfigError("checkpoint vocabulary sizes do not match --data artifacts");
  Model model = load_checkpoint(ckpt_path, mcfg).model;

  std::vector<Record> sources;
  if (input.size() > 4 && input.substr(input.size() - 4) == ".bin") {
    sources = read_records_file(input);
  } else {
    for (const auto& dep : parse_conllu(read_file(input)))
      sources.push_back(make_source_record(dep, data.bpe, data.src_vocab, data.label_vocab));
  }

  std::ostringstream out;
  for (const auto& src : sources) {
    auto res = beam_search(model, src, dc);
    auto words = BpeModel::unapply(data.tgt_vocab.decode(res.ids, /*strip_special=*/true));
    for (size_t i = 0; i < words.size(); ++i) out << (i ? " " : "") << words[i];
    out << "\n";
  }
  if (out_path.empty() || out_path == "-")
    std::cout << out.str();
  else
    write_file(out_path, out.str());

  KVConfig echo = saved;
  merge_decode_config(echo, dc);
  std::cout << "# effective config\n" << echo.to_text();
  return 0;
}

int cmd_evaluate(const std::string& hyp_path, const std::string& ref_path,
                 const std::string& src_path, const std::string& buckets_arg,
                 const std::string& out_dir) {
  auto hyps = read_lines(hyp_path);
  auto refs = read_lines(ref_path);
  if (hyps.size() != refs.size())
    throw std::runtime_error("line-count mismatch: " + hyp_path + " has " +
                             std::to_string(hyps.size()) + ", " + ref_path + " has " +
                             std::to_string(refs.size()));

  auto report = bleu_13a(hyps, refs);
  std::cout << report.to_tsv();
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file((fs::path(out_dir) / "bleu.tsv").string(), report.to_tsv());
  }

  if (!buckets_arg.empty()) {
    if (src_path.empty())
      throw CLI::ValidationError("--buckets requires --src for source lengths");
    auto srcs = read_lines(src_path);
    if (srcs.size() != refs.size())
      throw std::runtime_error("line-count mismatch between --src and --ref");
    std::vector<int> lens;
    for (const auto& s : srcs) lens.push_back(static_cast<int>(split_ws(s).size()));
    std::vector<int> bounds;
    std::istringstream in(buckets_arg);
    std::string tok;
    while (std::getline(in, tok, ',')) bounds.push_back(std::stoi(tok));
    auto buckets = length_bucket_report({{"system", hyps}}, refs, lens, bounds, "system");
    std::cout << buckets.to_tsv();
    if (!out_dir.empty())
      write_file((fs::path(out_dir) / "buckets.tsv").string(), buckets.to_tsv());
  }
  return 0;
}

int cmd_ablate(const std::string& data_dir, const std::string& refs_path, const std::string& grid,
               const std::string& out_dir, const KVConfig& kv, std::uint64_t seed) {
  DataDir data = load_data_dir(data_dir);
  TransformerConfig base = transformer_config_from(kv);
  reconcile_vocab_sizes(base, data);
  base.syntax_mode = SyntaxMode::kPascal;
  if (base.attention.n_pascal == 0) base.attention.n_pascal = 1;
  base.validate();
  TrainConfig tcfg = train_config_from(kv);
  tcfg.seed = seed;
  DecodeConfig dcfg = decode_config_from(kv);

  std::vector<AblationVariant> variants;
  if (grid == "sigma2")
    variants = sigma2_grid(base);
  else if (grid == "layer")
    variants = layer_grid(base);
  else if (grid == "combine")
    variants = combine_grid(base);
  else
    throw CLI::ValidationError("--grid must be sigma2, layer or combine");

  auto refs = read_lines(refs_path);
  // Hold the last fifth of the data out for validation BLEU.
  const size_t split = data.records.size() - data.records.size() / 5;
  std::vector<Record> train_data(data.records.begin(), data.records.begin() + split);
  std::vector<Record> valid_data(data.records.begin() + split, data.records.end());
  std::vector<std::string> valid_refs(refs.end() - static_cast<long>(valid_data.size()),
                                      refs.end());

  auto cells =
      ablation_run(variants, tcfg, dcfg, train_data, valid_data, valid_refs, data.tgt_vocab, seed);
  const std::string tsv = ablation_to_tsv(cells);
  std::cout << tsv;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file((fs::path(out_dir) / "ablation.tsv").string(), tsv);
  }

  KVConfig echo = to_kv(base);
  merge_train_config(echo, tcfg);
  merge_decode_config(echo, dcfg);
  echo.set("ablate.grid", grid);
  echo_config(echo, out_dir);
  return 0;
}

int cmd_gradcheck(const KVConfig& kv, double tolerance, std::uint64_t seed) {
  TransformerConfig cfg = transformer_config_from(kv);
  if (cfg.src_vocab == 0) {  // tiny default when no config is given
    cfg.layers_enc = cfg.layers_dec = 2;
    cfg.d_model = cfg.attention.d_model = 16;
    cfg.d_ff = 32;
    cfg.attention.heads = 2;
    cfg.src_vocab = 23;
    cfg.tgt_vocab = 19;
    cfg.n_labels = 7;
    cfg.max_len = 32;
  }
  cfg.validate();
  Model model = build_model(cfg, seed);

  Record rec;
  rec.src_ids = {1, 5, 6, 7, 2};
  rec.tgt_ids = {1, 4, 8, 2};
  rec.parent_middle = {0.0, 2.0, 2.0, 2.0, 4.0};
  rec.parent_first = {0, 2, 2, 2, 4};
  rec.label_ids = {0, 2, 3, std::min(4, cfg.n_labels - 1), 0};

  bool all_ok = true;
  std::cout << "weight\tmax_rel_err\tstatus\n";
  for (auto& [name, tensor] : model.params) {
    auto f = [&](Tensor& x) {
      (void)x;  // x aliases the parameter; the loss rebuilds from its value
      return forward_loss(model, {rec}, 0.1, false).total;
    };
    Tensor& t = const_cast<Tensor&>(tensor);
    const double err = grad_check(f, t);
    const bool ok = err < tolerance;
    all_ok &= ok;
    std::cout << name << "\t" << err << "\t" << (ok ? "pass" : "FAIL") << "\n";
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"syntax-aware transformer NMT"};
  app.require_subcommand(1);
  app.fallthrough();  // common flags may appear after the subcommand name

  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  app.add_option("--config", config_path, "key=value config file")->capture_default_str();
  app.add_option("--seed", seed, "run seed")->capture_default_str();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--override", overrides, "dotted key=value, applied after the file");

  auto* pre = app.add_subcommand("preprocess", "build records + vocabularies");
  std::string src_conllu, tgt_txt;
  PreprocessOptions popt;
  pre->add_option("--src-conllu", src_conllu, "parsed source")->required();
  pre->add_option("--tgt", tgt_txt, "target text, one sentence per line")->required();
  pre->add_option("--bpe-merges", popt.bpe_merges)->capture_default_str();
  pre->add_option("--min-freq", popt.min_freq)->capture_default_str();
  pre->add_flag("--multitask", popt.multitask, "duplicate examples with parse targets");

  auto* tr = app.add_subcommand("train", "train a model on preprocessed data");
  std::string data_dir;
  tr->add_option("--data", data_dir, "preprocess output directory")->required();

  auto* tl = app.add_subcommand("translate", "decode with a trained checkpoint");
  std::string ckpt_path, input_path, hyp_out;
  DecodeConfig dc;
  tl->add_option("--checkpoint", ckpt_path)->required();
  tl->add_option("--input", input_path, "CoNLL-U source or records .bin")->required();
  tl->add_option("--data", data_dir, "preprocess output directory")->required();
  tl->add_option("--output", hyp_out, "hypotheses file ('-' = stdout)");
  tl->add_option("--beam", dc.beam_size)->capture_default_str();
  tl->add_option("--alpha", dc.alpha)->capture_default_str();
  tl->add_option("--max-len", dc.max_out_len)->capture_default_str();

  auto* ev = app.add_subcommand("evaluate", "BLEU and length buckets");
  std::string hyp_path, ref_path, src_path, buckets_arg;
  ev->add_option("--hyp", hyp_path)->required();
  ev->add_option("--ref", ref_path)->required();
  ev->add_option("--src", src_path, "source text for length buckets");
  ev->add_option("--buckets", buckets_arg, "comma-separated upper bounds");

  auto* ab = app.add_subcommand("ablate", "grid runs on the toy task");
  std::string refs_path, grid = "sigma2";
  ab->add_option("--data", data_dir)->required();
  ab->add_option("--refs", refs_path, "reference text aligned with the records")->required();
  ab->add_option("--grid", grid, "sigma2 | layer | combine")->capture_default_str();

  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient audit");
  double tolerance = 1e-4;
  gc->add_option("--tolerance", tolerance)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    KVConfig kv = load_config(config_path, overrides);
    popt.seed = seed;
    if (pre->parsed()) return cmd_preprocess(src_conllu, tgt_txt, out_dir, kv, popt);
    if (tr->parsed()) return cmd_train(data_dir, out_dir, kv, seed);
    if (tl->parsed()) {
      // Config file first, explicit flags win.
      DecodeConfig dcfg = decode_config_from(kv);
      if (tl->count("--beam")) dcfg.beam_size = dc.beam_size;
      if (tl->count("--alpha")) dcfg.alpha = dc.alpha;
      if (tl->count("--max-len")) dcfg.max_out_len = dc.max_out_len;
      dcfg.validate();
      return cmd_translate(ckpt_path, input_path, data_dir, hyp_out, dcfg);
    }
    if (ev->parsed()) return cmd_evaluate(hyp_path, ref_path, src_path, buckets_arg, out_dir);
    if (ab->parsed()) return cmd_ablate(data_dir, refs_path, grid, out_dir, kv, seed);
    if (gc->parsed()) return cmd_gradcheck(kv, tolerance, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
