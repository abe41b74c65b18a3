#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "chartfc/errors.hpp"
#include "chartfc/pipeline.hpp"
#include "chartfc/rng.hpp"

using namespace chartfc;

namespace {

RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return RunConfig::from_file(path);
}

bool given(const CLI::App* sub, const std::string& name) {
  const CLI::Option* opt = sub->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

int dispatch(CLI::App& app, CLI::App* generate, CLI::App* render, CLI::App* read,
             CLI::App* seqgen, CLI::App* encode, CLI::App* train, CLI::App* eval_cmd,
             CLI::App* report, CLI::App* curve, const std::string& config_path,
             uint64_t seed, const std::string& template_name,
             const std::string& reader_name, const std::string& endpoint,
             const std::string& model_name, const std::string& only_id,
             const std::string& split_name, const std::string& out_file, bool grid,
             const std::string& arg1, const std::string& arg2, const std::string& arg3) {
  CLI::App* sub = app.get_subcommands().front();
  RunConfig cfg = load_config(config_path);
  const bool seed_given = given(sub, "--seed");

  // Command-line flags override values from the config file.
  if (given(sub, "--reader")) cfg.set("reader.kind", reader_name);
  if (given(sub, "--ocr-endpoint")) cfg.set("reader.ocr_endpoint", endpoint);
  if (given(sub, "--model")) cfg.set("train.model", model_name);
  if (sub == seqgen && given(sub, "--template")) cfg.set("seqgen.template", template_name);
  if ((sub == encode || sub == train || sub == curve) && given(sub, "--template"))
    cfg.set("encode.template", template_name);

  if (sub == generate) {
    // --seed is a master seed; the style and split streams are derived from it.
    if (seed_given) {
      cfg.set("generate.style_seed", std::to_string(mix_seed(seed, 1)));
      cfg.set("generate.split_seed", std::to_string(mix_seed(seed, 2)));
    }
    const GenerateStats st = generate_dataset(arg1, arg2, cfg);
    std::cout << "style_seed = " << st.style_seed << "\n";
    std::cout << "split_seed = " << st.split_seed << "\n";
    std::cout << "written " << st.written << " samples, rejected " << st.rejected
              << "\n";
    return 0;
  }
  if (sub == render) {
    const size_t n = render_dataset(arg1, only_id);
    std::cout << "rendered " << n << " images\n";
    return 0;
  }

  if (seed_given) cfg.set("reader.noise_seed", std::to_string(seed));
  if (sub == read) {
    const ReaderChoice choice = reader_from_config(cfg);
    std::cout << "noise_seed = " << choice.noise_seed << "\n";
    const size_t n = read_dataset(arg1, choice, only_id);
    std::cout << "read " << n << " charts with the "
              << (choice.use_ocr ? "ocr" : "oracle") << " reader\n";
    return 0;
  }
  if (sub == seqgen) {
    const std::string name = cfg.get_str("seqgen.template", "tmp1");
    const ReaderChoice choice = reader_from_config(cfg);
    const SeqgenStats st = seqgen_dataset(arg1, template_from_string(name), choice);
    std::cout << "template " << name << ": wrote " << st.written << " sequences, "
              << st.failed << " failed\n";
    return 0;
  }
  if (sub == encode) {
    const std::string name = cfg.get_str("encode.template", "tmp1");
    const int max_len = static_cast<int>(cfg.get_int("encode.max_len", 256));
    const int min_count = static_cast<int>(cfg.get_int("encode.min_count", 1));
    const ReaderChoice choice = reader_from_config(cfg);
    const EncodeStats st = encode_dataset(arg1, name, max_len, min_count, choice);
    std::cout << "template " << name << ": encoded " << st.written
              << " samples, vocab size " << st.vocab_size << ", max length "
              << st.max_len << "\n";
    return 0;
  }

  if (seed_given) cfg.set("train.seed", std::to_string(seed));
  if (sub == train) {
    if (grid) {
      const auto rows = train_grid_command(arg1, arg2, cfg);
      std::cout << "train_seed = " << cfg.get_u64("train.seed", 1) << "\n";
      std::cout << "batch  lr        best epoch  best valid acc\n";
      for (const GridRow& r : rows)
        std::cout << r.batch_size << "\t" << r.lr << "\t" << r.best_epoch << "\t"
                  << r.best_valid_acc << "\n";
      std::cout << "best checkpoint: " << arg2 << "/checkpoint.cfck\n";
      return 0;
    }
    const TrainArtifacts art = train_command(arg1, arg2, cfg);
    std::cout << "train_seed = " << cfg.get_u64("train.seed", 1) << "\n";
    std::cout << "baseline valid acc " << art.result.baseline_valid_acc << "\n";
    for (const EpochStats& e : art.result.history)
      std::cout << "epoch " << e.epoch << ": loss " << e.train_loss << ", valid acc "
                << e.valid_acc << "\n";
    std::cout << "best epoch " << art.result.best_epoch << " (valid acc "
              << art.result.best_valid_acc << ")\n";
    std::cout << "checkpoint: " << art.checkpoint_path << "\n";
    return 0;
  }
  if (sub == eval_cmd) {
    const Metrics m = eval_command(arg1, arg2, split_name, out_file);
    std::cout << format_metrics_table(m);
    return 0;
  }
  if (sub == report) {
    const auto rows = report_command(arg1, arg2, arg3, out_file);
    std::cout << format_reasoning_table(rows);
    return 0;
  }
  if (sub == curve) {
    std::cout << "train_seed = " << cfg.get_u64("train.seed", 1) << "\n";
    const auto points = curve_command(arg1, arg2, cfg);
    std::cout << format_curve_table(points);
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bar chart fact checking pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed = 0;
  std::string template_name, reader_name, endpoint, model_name, only_id;
  std::string split_name = "test";
  std::string out_file;
  bool grid = false;
  std::string arg1, arg2, arg3;

  const auto add_common = [&](CLI::App* sub, bool with_seed) {
    sub->add_option("--config", config_path, "key = value config file");
    if (with_seed) sub->add_option("--seed", seed, "primary random seed");
  };
  const auto add_reader = [&](CLI::App* sub) {
    sub->add_option("--reader", reader_name, "chart text reader")
        ->check(CLI::IsMember({"oracle", "ocr"}));
    sub->add_option("--ocr-endpoint", endpoint, "ocr adapter endpoint url");
  };

  CLI::App* generate = app.add_subcommand("generate", "build a chart dataset from seed tables");
  add_common(generate, true);
  generate->add_option("seed_dir", arg1, "directory with tables.jsonl and claims.jsonl")
      ->required();
  generate->add_option("out_dir", arg2, "dataset output directory")->required();

  CLI::App* render = app.add_subcommand("render", "re-render chart images from sidecars");
  add_common(render, false);
  render->add_option("dataset_dir", arg1, "dataset directory")->required();
  render->add_option("--id", only_id, "render a single sample");

  CLI::App* read = app.add_subcommand("read", "extract text regions from charts");
  add_common(read, true);
  add_reader(read);
  read->add_option("dataset_dir", arg1, "dataset directory")->required();
  read->add_option("--id", only_id, "read a single sample");

  CLI::App* seqgen = app.add_subcommand("seqgen", "serialize read output to sequences");
  add_common(seqgen, true);
  add_reader(seqgen);
  seqgen->add_option("dataset_dir", arg1, "dataset directory")->required();
  seqgen->add_option("--template", template_name, "serialization template")
      ->check(CLI::IsMember({"concat", "tmp1", "tmp2", "tmp3"}));

  CLI::App* encode = app.add_subcommand("encode", "encode claims and sequences as model input");
  add_common(encode, true);
  add_reader(encode);
  encode->add_option("dataset_dir", arg1, "dataset directory")->required();
  encode->add_option("--template", template_name, "serialization template")
      ->check(CLI::IsMember({"concat", "tmp1", "tmp2", "tmp3", "none"}));

  CLI::App* train = app.add_subcommand("train", "train a verification model");
  add_common(train, true);
  train->add_option("dataset_dir", arg1, "dataset directory")->required();
  train->add_option("out_dir", arg2, "checkpoint output directory")->required();
  train->add_option("--model", model_name, "model kind")
      ->check(CLI::IsMember({"chartbert", "vl", "claim-only"}));
  train->add_option("--template", template_name, "encoded inputs to train on")
      ->check(CLI::IsMember({"concat", "tmp1", "tmp2", "tmp3", "none"}));
  train->add_flag("--grid", grid, "sweep the batch size and learning rate grids");

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  add_common(eval_cmd, false);
  eval_cmd->add_option("checkpoint", arg1, "checkpoint file")->required();
  eval_cmd->add_option("dataset_dir", arg2, "dataset directory")->required();
  eval_cmd->add_option("--split", split_name, "split to evaluate")
      ->check(CLI::IsMember({"train", "valid", "test"}));
  eval_cmd->add_option("--out", out_file, "write metrics json here");

  CLI::App* report = app.add_subcommand("report", "accuracy broken down by reasoning type");
  add_common(report, false);
  report->add_option("checkpoint", arg1, "checkpoint file")->required();
  report->add_option("dataset_dir", arg2, "dataset directory")->required();
  report->add_option("annotations", arg3, "reasoning type annotation file")->required();
  report->add_option("--out", out_file, "write report rows here");

  CLI::App* curve = app.add_subcommand("curve", "accuracy as a function of train set size");
  add_common(curve, true);
  curve->add_option("dataset_dir", arg1, "dataset directory")->required();
  curve->add_option("out_dir", arg2, "curve output directory")->required();
  curve->add_option("--model", model_name, "model kind")
      ->check(CLI::IsMember({"chartbert", "vl", "claim-only"}));
  curve->add_option("--template", template_name, "encoded inputs to train on")
      ->check(CLI::IsMember({"concat", "tmp1", "tmp2", "tmp3", "none"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return dispatch(app, generate, render, read, seqgen, encode, train, eval_cmd, report,
                    curve, config_path, seed, template_name, reader_name, endpoint,
                    model_name, only_id, split_name, out_file, grid, arg1, arg2, arg3);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
