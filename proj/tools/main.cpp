#include <malloc.h>

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "ppg2ecg/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace ppg2ecg;
using namespace ppg2ecg::cli;
namespace fs = std::filesystem;

namespace {

void add_model_source(CLI::App* cmd, ModelSource& src, std::string& ckpt, std::string& run) {
  cmd->add_option("--checkpoint", ckpt, "checkpoint file");
  cmd->add_option("--run", run, "run directory; uses its best validation checkpoint");
  cmd->callback([&src, &ckpt, &run] {
    if (!ckpt.empty()) src.checkpoint = ckpt;
    if (!run.empty()) src.run = run;
  });
}

void add_train_options(CLI::App* cmd, TrainOptions& o, std::optional<int>& epochs, std::optional<int>& constant,
                       std::optional<int>& batch, std::optional<double>& lr_g, std::optional<double>& lr_d,
                       std::optional<double>& lambda, std::optional<std::string>& loss) {
  cmd->add_option("--pairs", o.pairs, "preprocess output directory")->required();
  cmd->add_option("--objective", o.objectives, "gan or gan_freq (repeatable)");
  cmd->add_option("--seeds", o.seeds, "seed list: 7, 0..30 or 1,4,9");
  cmd->add_option("--epochs", epochs);
  cmd->add_option("--lr-constant-epochs", constant);
  cmd->add_option("--batch-size", batch);
  cmd->add_option("--lr-g", lr_g);
  cmd->add_option("--lr-d", lr_d);
  cmd->add_option("--lambda-freq", lambda);
  cmd->add_option("--generator-loss", loss, "non_saturating or minimax");
  cmd->add_flag("--no-validation", o.no_validation, "skip per-epoch validation scoring");
}

}  // namespace

int main(int argc, char** argv) {
  // Training reallocates the same large activation buffers every iteration;
  // keep them on the heap instead of returning them to the kernel each time.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);

  CLI::App app{"PPG to ECG translation: preprocessing, adversarial training and heart-rate evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::uint64_t seed = 0;
  std::string out, config;
  app.add_option("--seed", seed, "random seed");
  app.add_option("--jobs", g.jobs, "worker threads, or concurrent processes for sweep")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "output directory");
  app.add_option("--config", config, "JSON configuration; flags override its values");

  ImportOptions import_o;
  auto* import_cmd = app.add_subcommand("import", "convert raw archives to the interchange format");
  import_cmd->add_option("--in", import_o.archives, "archive files")->required();
  import_cmd->add_option("--converter", import_o.converter, "converter command line");

  PreprocessOptions pre_o;
  auto* pre_cmd = app.add_subcommand("preprocess", "build split and pair stores from interchange data");
  pre_cmd->add_option("--in", pre_o.input, "interchange root directory")->required();
  pre_cmd->add_option("--window", pre_o.window_s, "training window (s)");
  pre_cmd->add_option("--hop", pre_o.hop_s, "training hop (s)");
  pre_cmd->add_option("--eval-window", pre_o.eval_window_s, "evaluation window (s)");
  pre_cmd->add_option("--eval-hop", pre_o.eval_hop_s, "evaluation hop (s)");

  TrainOptions train_o;
  std::optional<int> epochs, constant, batch;
  std::optional<double> lr_g, lr_d, lambda;
  std::optional<std::string> loss;
  auto* train_cmd = app.add_subcommand("train", "train one run per objective and seed");
  add_train_options(train_cmd, train_o, epochs, constant, batch, lr_g, lr_d, lambda, loss);
  auto* sweep_cmd = app.add_subcommand("sweep", "seed sweep in parallel worker processes");
  add_train_options(sweep_cmd, train_o, epochs, constant, batch, lr_g, lr_d, lambda, loss);

  SynthesizeOptions syn_o;
  std::string syn_ckpt, syn_run;
  auto* syn_cmd = app.add_subcommand("synthesize", "write synthetic ECG for a pair store");
  add_model_source(syn_cmd, syn_o.model, syn_ckpt, syn_run);
  syn_cmd->add_option("--pairs", syn_o.pairs, "pair store file")->required();

  EvaluateOptions eval_o;
  std::string eval_ckpt, eval_run;
  auto* eval_cmd = app.add_subcommand("evaluate", "heart-rate MAPE report for a checkpoint");
  add_model_source(eval_cmd, eval_o.model, eval_ckpt, eval_run);
  eval_cmd->add_option("--pairs", eval_o.pairs, "pair store file (10 s windows)")->required();
  eval_cmd->add_flag("--baseline", eval_o.baseline, "add the PPG peak-detector baseline");
  eval_cmd->add_flag("--self-test", eval_o.self_test, "score the real ECG against itself");

  ReportOptions report_o;
  auto* report_cmd = app.add_subcommand("report", "figures and tables from sweep and evaluation outputs");
  report_cmd->add_option("--inputs", report_o.inputs, "sweep or evaluation directories")->required();
  report_cmd->add_option("--bins", report_o.bins, "histogram bins")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  auto* cmd = app.get_subcommands().front();
  if (app.count("--seed")) g.seed = seed;
  if (!config.empty()) g.config = config;
  if (out.empty()) {
    std::cerr << "error: --out is required\n";
    return kExitInput;
  }
  g.out = out;
  train_o.epochs = epochs;
  train_o.lr_constant_epochs = constant;
  train_o.batch_size = batch;
  train_o.lr_g = lr_g;
  train_o.lr_d = lr_d;
  train_o.lambda_freq = lambda;
  train_o.generator_loss = loss;
#ifdef _OPENMP
  if (cmd != sweep_cmd) omp_set_num_threads(g.jobs);
#endif

  Manifest manifest;
  manifest.command = cmd->get_name();
  int code = 1;
  try {
    if (cmd == import_cmd) {
      code = cmd_import(g, import_o, manifest);
    } else if (cmd == pre_cmd) {
      code = cmd_preprocess(g, pre_o, manifest);
    } else if (cmd == train_cmd) {
      code = cmd_train(g, train_o, manifest);
    } else if (cmd == sweep_cmd) {
      code = cmd_sweep(g, train_o, manifest, fs::read_symlink("/proc/self/exe"));
    } else if (cmd == syn_cmd) {
      code = cmd_synthesize(g, syn_o, manifest);
    } else if (cmd == eval_cmd) {
      code = cmd_evaluate(g, eval_o, manifest);
    } else if (cmd == report_cmd) {
      code = cmd_report(g, report_o, manifest);
    }
  } catch (const FingerprintMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kExitFingerprint;
  } catch (const NumericalAbort& e) {
    std::cerr << "error: numerical abort: " << e.what() << "\n";
    code = kExitNumerical;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    code = 1;
  }
  append_manifest(g.out, manifest, code, std::vector<std::string>(argv, argv + argc));
  return code;
}
