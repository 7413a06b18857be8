#include "commands.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "figures.hpp"
#include "ppg2ecg/dataset/interchange.hpp"
#include "ppg2ecg/dataset/pairs.hpp"
#include "ppg2ecg/dataset/split.hpp"
#include "ppg2ecg/error.hpp"
#include "ppg2ecg/eval/evaluate.hpp"
#include "ppg2ecg/eval/metrics.hpp"
#include "ppg2ecg/model/checkpoint.hpp"
#include "ppg2ecg/model/config.hpp"
#include "ppg2ecg/model/generator.hpp"
#include "ppg2ecg/signal/segment.hpp"
#include "ppg2ecg/training/config.hpp"
#include "ppg2ecg/training/sweep.hpp"
#include "ppg2ecg/training/trainer.hpp"

extern char** environ;

namespace ppg2ecg::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Published per-split segment counts for the 15-subject recording set.
constexpr std::size_t kReferenceCounts[3] = {40675, 11276, 12796};
constexpr const char* kSplitNames[3] = {"train", "validation", "test"};

json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open " + file.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("cannot parse " + file.string() + ": " + e.what());
  }
}

void write_json(const fs::path& file, const json& j) {
  fs::create_directories(file.parent_path());
  std::ofstream(file) << j.dump(2) << '\n';
}

json config_file(const Globals& g) {
  if (!g.config) return json::object();
  auto j = read_json(*g.config);
  if (!j.is_object()) throw InputError("config " + g.config->string() + " must be a JSON object");
  return j;
}

std::uint64_t base_seed(const Globals& g, const json& file) {
  if (g.seed) return *g.seed;
  return file.value("seed", std::uint64_t{0});
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

// posix_spawnp with optional stdout/stderr redirection; returns the pid.
pid_t spawn(const std::vector<std::string>& args, const std::optional<fs::path>& log) {
  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  if (log) {
    posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log->c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
  }
  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw InputError("cannot start '" + args[0] + "': " + std::strerror(rc));
  return pid;
}

int exit_status(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
}

training::TrainConfig train_config(const json& file, const TrainOptions& o, const std::string& objective) {
  json j = file;
  j["objective"] = objective;
  auto c = j.get<training::TrainConfig>();
  if (o.epochs) {
    c.epochs = *o.epochs;
    // Keep the decay phase proportionate when only the length is overridden.
    if (!o.lr_constant_epochs && !file.contains("lr_constant_epochs")) {
      c.lr_constant_epochs = std::min(c.lr_constant_epochs, c.epochs - 1);
    }
  }
  if (o.lr_constant_epochs) c.lr_constant_epochs = *o.lr_constant_epochs;
  if (o.batch_size) c.batch_size = *o.batch_size;
  if (o.lr_g) c.lr_g = *o.lr_g;
  if (o.lr_d) c.lr_d = *o.lr_d;
  if (o.lambda_freq) c.lambda_freq = *o.lambda_freq;
  if (o.generator_loss) {
    if (*o.generator_loss == "non_saturating") {
      c.generator_loss = training::GeneratorLoss::NonSaturating;
    } else if (*o.generator_loss == "minimax") {
      c.generator_loss = training::GeneratorLoss::Minimax;
    } else {
      throw InputError("unknown generator loss '" + *o.generator_loss + "'");
    }
  }
  c.validate();
  return c;
}

std::vector<std::string> objectives_of(const TrainOptions& o, const json& file) {
  std::vector<std::string> out = o.objectives;
  if (out.empty()) out.push_back(file.value("objective", std::string("gan_freq")));
  for (auto& s : out) s = training::to_string(training::parse_objective(s));
  std::set<std::string> unique(out.begin(), out.end());
  if (unique.size() != out.size()) throw InputError("objective listed twice");
  return out;
}

std::vector<std::uint64_t> seeds_of(const Globals& g, const TrainOptions& o, const json& file) {
  if (!o.seeds.empty()) return parse_seeds(o.seeds);
  return {base_seed(g, file)};
}

dataset::PairSet load_store(const fs::path& dir, const std::string& name) {
  const auto file = dir / (name + ".pairs");
  if (!fs::exists(file)) throw InputError("missing pair store " + file.string() + " (run preprocess first)");
  return dataset::load_pairs(file);
}

struct LoadedModel {
  fs::path checkpoint;
  model::Checkpoint ckpt;
  training::TrainConfig config;
};

// Resolves the checkpoint and checks that its architecture matches both the
// configuration stored with it and any configuration the caller supplied.
LoadedModel load_model(const ModelSource& src, const json& file) {
  if (src.checkpoint.has_value() == src.run.has_value()) {
    throw InputError("give exactly one of --checkpoint or --run");
  }
  LoadedModel lm;
  std::optional<training::TrainConfig> run_config;
  if (src.run) {
    const auto summary = read_json(*src.run / "summary.json");
    if (!summary.contains("best_checkpoint") || summary["best_checkpoint"].is_null()) {
      throw InputError("run " + src.run->string() + " has no best checkpoint (trained without validation?)");
    }
    lm.checkpoint = *src.run / summary["best_checkpoint"].get<std::string>();
    run_config = read_json(*src.run / "config.json").get<training::TrainConfig>();
  } else {
    lm.checkpoint = *src.checkpoint;
  }
  lm.ckpt = model::load_checkpoint(lm.checkpoint);
  if (!lm.ckpt.meta.contains("config")) throw InputError(lm.checkpoint.string() + " carries no training config");
  lm.config = lm.ckpt.meta["config"].get<training::TrainConfig>();
  model::require_fingerprint(lm.ckpt, training::architecture_fingerprint(lm.config.generator, lm.config.discriminator));
  if (run_config) {
    model::require_fingerprint(lm.ckpt,
                               training::architecture_fingerprint(run_config->generator, run_config->discriminator));
  }
  if (file.contains("generator") || file.contains("discriminator")) {
    const auto expected = file.get<training::TrainConfig>();
    model::require_fingerprint(lm.ckpt,
                               training::architecture_fingerprint(expected.generator, expected.discriminator));
  }
  return lm;
}

model::Generator<float> build_generator(const LoadedModel& lm) {
  model::Generator<float> g(lm.config.generator);
  model::restore(lm.ckpt, "G/", g.parameters());
  return g;
}

void check_length(const model::Generator<float>& g, const dataset::PairSet& pairs) {
  const int multiple = g.config().length_multiple();
  if (pairs.length % multiple != 0) {
    throw InputError("window length " + std::to_string(pairs.length) + " is not a multiple of " +
                     std::to_string(multiple) + " required by the generator");
  }
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

}  // namespace

void append_manifest(const fs::path& out, const Manifest& m, int exit_code, const std::vector<std::string>& argv) {
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - m.started).count();
  const json line = {{"command", m.command},
                     {"config_fingerprint", m.config_fingerprint},
                     {"inputs", m.inputs},
                     {"out", out.string()},
                     {"seeds", m.seeds},
                     {"wall_clock_s", wall},
                     {"exit_code", exit_code},
                     {"argv", argv}};
  std::error_code ec;
  fs::create_directories(out, ec);
  const std::string text = line.dump() + "\n";
  const int fd = ::open((out / "manifest.jsonl").c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) {
    std::cerr << "warning: cannot write manifest in " << out << "\n";
    return;
  }
  const auto written = ::write(fd, text.data(), text.size());
  ::close(fd);
  if (written != static_cast<ssize_t>(text.size())) std::cerr << "warning: short manifest write\n";
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  auto number = [&](const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw InputError("bad seed list '" + text + "'");
    }
    return std::stoull(s);
  };
  std::vector<std::uint64_t> out;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto a = number(text.substr(0, dots)), b = number(text.substr(dots + 2));
    if (b < a) throw InputError("empty seed range '" + text + "'");
    for (auto s = a; s <= b; ++s) out.push_back(s);
  } else {
    std::istringstream in(text);
    for (std::string part; std::getline(in, part, ',');) out.push_back(number(part));
  }
  std::set<std::uint64_t> unique(out.begin(), out.end());
  if (out.empty() || unique.size() != out.size()) throw InputError("seeds must be distinct: '" + text + "'");
  return out;
}

// import ------------------------------------------------------------------------

int cmd_import(const Globals& g, const ImportOptions& o, Manifest& m) {
  const auto converter = split_words(o.converter);
  if (converter.empty()) throw InputError("empty converter command");
  m.inputs = {{"archives", json::array()}, {"converter", o.converter}};
  for (const auto& a : o.archives) m.inputs["archives"].push_back(a.string());
  fs::create_directories(g.out);
  std::set<std::string> stems;
  for (const auto& archive : o.archives) {
    if (!fs::exists(archive)) throw InputError("archive not found: " + archive.string());
    const std::string stem = archive.stem().string();
    if (!stems.insert(stem).second) throw InputError("two archives map to subject directory " + stem);
    const fs::path dir = g.out / stem;
    auto args = converter;
    args.insert(args.end(), {"--in", archive.string(), "--out", dir.string()});
    int status = 0;
    const pid_t pid = spawn(args, std::nullopt);
    waitpid(pid, &status, 0);
    if (const int code = exit_status(status); code != 0) {
      throw InputError("converter failed for " + archive.string() + " (exit " + std::to_string(code) + ")");
    }
    // The converted directory must satisfy the interchange contract.
    const auto rec = dataset::load_subject(dir, {64.0, 700.0});
    std::cout << stem << ": " << rec.ppg.size() << " PPG / " << rec.ecg.size() << " ECG samples\n";
  }
  return 0;
}

// preprocess -----------------------------------------------------------------------

int cmd_preprocess(const Globals& g, const PreprocessOptions& o, Manifest& m) {
  const json file = config_file(g);
  const json pre = file.value("preprocess", json::object());
  const double window_s = pre.value("window_s", o.window_s), hop_s = pre.value("hop_s", o.hop_s);
  const double eval_window_s = pre.value("eval_window_s", o.eval_window_s);
  const double eval_hop_s = pre.value("eval_hop_s", o.eval_hop_s);
  const std::uint64_t seed = base_seed(g, file);
  m.seeds = {seed};
  m.inputs = {{"interchange", o.input.string()}};
  const json settings = {{"window_s", window_s}, {"hop_s", hop_s}, {"eval_window_s", eval_window_s},
                         {"eval_hop_s", eval_hop_s}, {"seed", seed}};
  m.config_fingerprint = model::fingerprint(settings);

  const auto dirs = dataset::find_subjects(o.input);
  if (dirs.empty()) throw InputError("no subject directories under " + o.input.string());
  const auto train_len = static_cast<int>(signal::window_samples(dataset::kModelRate, window_s, hop_s).window);
  const auto eval_len =
      static_cast<int>(signal::window_samples(dataset::kModelRate, eval_window_s, eval_hop_s).window);

  std::map<std::string, dataset::PairSet> train_pairs, eval_pairs;
  json subjects = json::array();
  std::vector<std::string> ids;
  for (const auto& dir : dirs) {
    const auto rec = dataset::load_subject(dir);
    if (train_pairs.count(rec.subject)) throw InputError("duplicate subject id " + rec.subject);
    dataset::PreprocessReport rep, rep_eval;
    train_pairs[rec.subject] = dataset::to_pair_set(dataset::build_pairs(rec, window_s, hop_s, &rep), train_len);
    eval_pairs[rec.subject] =
        dataset::to_pair_set(dataset::build_pairs(rec, eval_window_s, eval_hop_s, &rep_eval), eval_len);
    ids.push_back(rec.subject);
    subjects.push_back({{"subject", rec.subject},
                        {"ppg_samples", rec.ppg.size()},
                        {"ecg_samples", rec.ecg.size()},
                        {"windows", rep.windows},
                        {"excluded_flat_ecg", rep.excluded_flat_ecg},
                        {"pairs", train_pairs[rec.subject].size()},
                        {"eval_windows", rep_eval.windows},
                        {"eval_excluded_flat_ecg", rep_eval.excluded_flat_ecg},
                        {"eval_pairs", eval_pairs[rec.subject].size()}});
    std::cerr << rec.subject << ": " << train_pairs[rec.subject].size() << " pairs\n";
  }

  json warnings = json::array();
  dataset::SplitAssignment split;
  if (ids.size() >= 3) {
    split = dataset::make_split(ids, seed);
  } else {
    const std::string w = "only " + std::to_string(ids.size()) +
                          " subject(s): everything assigned to train; validation and test are empty";
    std::cerr << "warning: " << w << "\n";
    warnings.push_back(w);
    split.train = ids;
    std::sort(split.train.begin(), split.train.end());
  }
  dataset::check_disjoint(split);

  const std::vector<std::string>* members[3] = {&split.train, &split.validation, &split.test};
  json counts = json::object();
  std::size_t totals[3] = {0, 0, 0};
  fs::create_directories(g.out);
  for (int s = 0; s < 3; ++s) {
    dataset::PairSet set, eval_set;
    set.length = train_len;
    eval_set.length = eval_len;
    for (const auto& id : *members[s]) {
      set.append(train_pairs[id]);
      eval_set.append(eval_pairs[id]);
    }
    dataset::save_pairs(g.out / (std::string(kSplitNames[s]) + ".pairs"), set);
    dataset::save_pairs(g.out / (std::string(kSplitNames[s]) + "_eval.pairs"), eval_set);
    totals[s] = set.size();
    counts[kSplitNames[s]] = {{"subjects", members[s]->size()}, {"pairs", set.size()}, {"eval_pairs", eval_set.size()}};
  }
  for (auto& subj : subjects) {
    const auto id = subj["subject"].get<std::string>();
    for (int s = 0; s < 3; ++s) {
      if (std::count(members[s]->begin(), members[s]->end(), id)) subj["split"] = kSplitNames[s];
    }
  }

  json report = {{"settings", settings}, {"split", split}, {"counts", counts}, {"subjects", subjects},
                 {"warnings", warnings}};
  for (int s = 0; s < 3; ++s) {
    std::cout << kSplitNames[s] << ": " << members[s]->size() << " subjects, " << totals[s] << " pairs\n";
  }
  if (ids.size() == 15) {
    json cmp = json::object();
    std::cout << "comparison with the reference segment counts:\n";
    for (int s = 0; s < 3; ++s) {
      const auto diff = static_cast<long long>(totals[s]) - static_cast<long long>(kReferenceCounts[s]);
      cmp[kSplitNames[s]] = {{"reference", kReferenceCounts[s]}, {"actual", totals[s]}, {"difference", diff}};
      std::cout << "  " << kSplitNames[s] << ": " << totals[s] << " vs " << kReferenceCounts[s] << " ("
                << (diff >= 0 ? "+" : "") << diff << ")\n";
    }
    report["reference_comparison"] = cmp;
  }
  write_json(g.out / "split.json", report);
  return 0;
}

// train ----------------------------------------------------------------------------

int cmd_train(const Globals& g, const TrainOptions& o, Manifest& m) {
  const json file = config_file(g);
  const auto objectives = objectives_of(o, file);
  const auto seeds = seeds_of(g, o, file);
  m.seeds = seeds;
  m.inputs = {{"pairs", o.pairs.string()}, {"objectives", objectives}};
  const auto train = load_store(o.pairs, "train");
  std::optional<dataset::PairSet> val;
  if (!o.no_validation && fs::exists(o.pairs / "validation_eval.pairs")) {
    val = load_store(o.pairs, "validation_eval");
    if (val->size() == 0) val.reset();
  }
  if (!val) std::cerr << "warning: no validation windows; best-epoch selection disabled\n";

  json fingerprints = json::array();
  for (const auto& objective : objectives) {
    const auto base = train_config(file, o, objective);
    fingerprints.push_back(model::fingerprint(json(base)));
    if (train.length != base.generator.input_length) {
      throw InputError("pair length " + std::to_string(train.length) + " differs from generator input_length " +
                       std::to_string(base.generator.input_length));
    }
    for (auto seed : seeds) {
      auto cfg = base;
      cfg.seed = seed;
      const fs::path run_dir = g.out / objective / ("seed_" + std::to_string(seed));
      training::Trainer trainer(cfg);
      try {
        const auto r = trainer.fit(train, val ? &*val : nullptr, run_dir);
        std::cout << objective << " seed " << seed << ": " << r.epochs.size() << " epochs";
        if (r.best_epoch) std::cout << ", best epoch " << *r.best_epoch << " (MAPE " << fmt(*r.best_validation_mape) << "%)";
        std::cout << "\n";
      } catch (const NumericalAbort& e) {
        std::ofstream(run_dir / "abort.json") << e.what() << '\n';
        throw;
      }
    }
  }
  m.config_fingerprint = fingerprints.size() == 1 ? fingerprints[0].get<std::string>() : model::fingerprint(fingerprints);
  return 0;
}

// synthesize / evaluate -------------------------------------------------------------------

int cmd_synthesize(const Globals& g, const SynthesizeOptions& o, Manifest& m) {
  const json file = config_file(g);
  const auto lm = load_model(o.model, file);
  m.config_fingerprint = lm.ckpt.fingerprint;
  m.seeds = {lm.ckpt.seed};
  m.inputs = {{"checkpoint", lm.checkpoint.string()}, {"pairs", o.pairs.string()}};
  auto pairs = dataset::load_pairs(o.pairs);
  const auto gen = build_generator(lm);
  check_length(gen, pairs);
  pairs.ecg = eval::synthesize(gen, pairs);
  fs::create_directories(g.out);
  dataset::save_pairs(g.out / "synthetic.pairs", pairs);
  std::cout << "wrote " << pairs.size() << " synthetic windows to " << (g.out / "synthetic.pairs") << "\n";
  return 0;
}

int cmd_evaluate(const Globals& g, const EvaluateOptions& o, Manifest& m) {
  const json file = config_file(g);
  const auto pairs = dataset::load_pairs(o.pairs);
  m.inputs = {{"pairs", o.pairs.string()}, {"baseline", o.baseline}, {"self_test", o.self_test}};
  json extra = {{"pairs", o.pairs.string()}, {"baseline", o.baseline}};
  std::vector<float> synth;
  if (o.self_test) {
    if (o.model.checkpoint || o.model.run) throw InputError("--self-test takes no model");
    synth = pairs.ecg;
    extra["self_test"] = true;
  } else {
    const auto lm = load_model(o.model, file);
    m.config_fingerprint = lm.ckpt.fingerprint;
    m.seeds = {lm.ckpt.seed};
    m.inputs["checkpoint"] = lm.checkpoint.string();
    const auto gen = build_generator(lm);
    check_length(gen, pairs);
    synth = eval::synthesize(gen, pairs);
    extra.update({{"checkpoint", lm.checkpoint.string()},
                  {"fingerprint", lm.ckpt.fingerprint},
                  {"objective", training::to_string(lm.config.objective)},
                  {"seed", lm.ckpt.seed},
                  {"epoch", lm.ckpt.epoch}});
  }
  const auto records = eval::evaluate_windows(pairs, synth, o.baseline);
  eval::write_report(g.out, records, o.baseline, extra);
  const auto summary = eval::summary_json(records, o.baseline);
  std::cout << "subset       MAPE%    failures";
  if (o.baseline) std::cout << "  PPG-baseline%";
  std::cout << "\n";
  for (const auto& [name, s] : summary["subsets"].items()) {
    std::printf("%-12s %-8s %-9s", name.c_str(),
                s["mape_percent"].is_null() ? "n/a" : fmt(s["mape_percent"].get<double>()).c_str(),
                s.contains("n_failures") ? std::to_string(s["n_failures"].get<std::size_t>()).c_str() : "-");
    if (o.baseline && s.contains("ppg_baseline_mape_percent")) {
      std::printf(" %s", fmt(s["ppg_baseline_mape_percent"].get<double>()).c_str());
    }
    std::printf("\n");
  }
  return 0;
}

// sweep -------------------------------------------------------------------------------------

int cmd_sweep(const Globals& g, const TrainOptions& o, Manifest& m, const fs::path& self) {
  const json file = config_file(g);
  const auto objectives = objectives_of(o, file);
  if (o.seeds.empty()) throw InputError("sweep needs --seeds");
  const auto seeds = parse_seeds(o.seeds);
  m.seeds = seeds;
  m.inputs = {{"pairs", o.pairs.string()}, {"objectives", objectives}};
  if (!fs::exists(o.pairs / "train.pairs")) throw InputError("missing pair store " + (o.pairs / "train.pairs").string());
  const int jobs = std::max(1, g.jobs);

  struct Task {
    std::string objective;
    std::uint64_t seed;
    fs::path run_dir;
    fs::path log;
    int exit_code = -1;
  };
  std::vector<Task> tasks;
  json fingerprints = json::array();
  for (const auto& objective : objectives) {
    const auto cfg = train_config(file, o, objective);
    fingerprints.push_back(model::fingerprint(json(cfg)));
    const fs::path dir = g.out / objective;
    fs::create_directories(dir);
    write_json(dir / "sweep_config.json", cfg);
    for (auto seed : seeds) {
      tasks.push_back({objective, seed, dir / ("seed_" + std::to_string(seed)),
                       dir / ("seed_" + std::to_string(seed) + ".log")});
    }
  }
  m.config_fingerprint = fingerprints.size() == 1 ? fingerprints[0].get<std::string>() : model::fingerprint(fingerprints);

  // Workers are independent processes; at most `jobs` run at once.
  std::map<pid_t, std::size_t> running;
  auto reap_one = [&] {
    int status = 0;
    const pid_t pid = ::wait(&status);
    if (pid <= 0) throw std::runtime_error("wait failed");
    auto& t = tasks[running.at(pid)];
    t.exit_code = exit_status(status);
    std::cout << t.objective << " seed " << t.seed << (t.exit_code == 0 ? " done" : " FAILED (exit " + std::to_string(t.exit_code) + ")")
              << "\n";
    running.erase(pid);
  };
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    while (static_cast<int>(running.size()) >= jobs) reap_one();
    const auto& t = tasks[i];
    std::vector<std::string> args = {self.string(), "--out", g.out.string(), "--seed", std::to_string(t.seed), "--jobs",
                                     "1", "--config", (g.out / t.objective / "sweep_config.json").string(), "train",
                                     "--pairs", o.pairs.string(), "--objective", t.objective};
    if (o.no_validation) args.push_back("--no-validation");
    running[spawn(args, t.log)] = i;
  }
  while (!running.empty()) reap_one();

  int first_failure = 0;
  bool any_ok = false;
  for (const auto& objective : objectives) {
    std::vector<fs::path> dirs;
    std::vector<const Task*> mine;
    for (const auto& t : tasks) {
      if (t.objective == objective) {
        dirs.push_back(t.run_dir);
        mine.push_back(&t);
      }
    }
    auto result = training::collect_sweep(dirs);
    json runs = json::array();
    std::ofstream csv(g.out / objective / "sweep.csv");
    csv << "seed,ok,validation_mape,validation_failures,best_checkpoint,error\n";
    std::vector<double> mapes;
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
      auto& r = result.runs[i];
      r.seed = mine[i]->seed;
      if (mine[i]->exit_code != 0) {
        r.ok = false;
        r.error = "exit code " + std::to_string(mine[i]->exit_code) + "; see " + mine[i]->log.string();
        if (!first_failure) first_failure = mine[i]->exit_code;
      }
      if (r.ok && r.validation_mape) mapes.push_back(*r.validation_mape);
      any_ok = any_ok || r.ok;
      json entry = {{"seed", r.seed},
                    {"ok", r.ok},
                    {"error", r.error},
                    {"run_dir", r.run_dir.string()},
                    {"best_checkpoint", r.best_checkpoint ? json(r.best_checkpoint->string()) : json()},
                    {"validation_mape", r.validation_mape ? json(*r.validation_mape) : json()},
                    {"validation_failures", r.validation_failures ? json(*r.validation_failures) : json()}};
      runs.push_back(entry);
      csv << r.seed << ',' << r.ok << ',' << (r.validation_mape ? fmt(*r.validation_mape, 8) : "") << ','
          << (r.validation_failures ? std::to_string(*r.validation_failures) : "") << ','
          << (r.best_checkpoint ? r.best_checkpoint->string() : "") << ",\"" << r.error << "\"\n";
    }
    const auto d = eval::describe(mapes);
    write_json(g.out / objective / "sweep.json",
               {{"objective", objective}, {"seeds", seeds}, {"runs", runs},
                {"mape", {{"mean", d.mean}, {"std", d.std}, {"n", d.n}}}});
    std::cout << objective << ": " << d.n << "/" << seeds.size() << " runs with a validation MAPE, mean "
              << fmt(d.mean) << "%, std " << fmt(d.std) << "\n";
  }
  return any_ok ? 0 : (first_failure ? first_failure : 1);
}

// report ---------------------------------------------------------------------------------------

int cmd_report(const Globals& g, const ReportOptions& o, Manifest& m) {
  if (o.inputs.empty()) throw InputError("report needs at least one input directory");
  m.inputs = {{"inputs", json::array()}};
  for (const auto& i : o.inputs) m.inputs["inputs"].push_back(i.string());

  std::vector<Series> mape_series, failure_series;
  json tables = json::array();
  std::ostringstream eval_rows;
  for (const auto& dir : o.inputs) {
    if (fs::exists(dir / "sweep.json")) {
      const auto j = read_json(dir / "sweep.json");
      try {
        Series mapes{j.at("objective").get<std::string>(), {}}, fails{mapes.label, {}};
        for (const auto& r : j.at("runs")) {
          if (!r.at("ok").get<bool>()) continue;
          if (!r.at("validation_mape").is_null()) mapes.values.push_back(r["validation_mape"].get<double>());
          if (!r.at("validation_failures").is_null()) {
            fails.values.push_back(static_cast<double>(r["validation_failures"].get<std::size_t>()));
          }
        }
        mape_series.push_back(std::move(mapes));
        failure_series.push_back(std::move(fails));
      } catch (const json::exception& e) {
        throw InputError("malformed " + (dir / "sweep.json").string() + ": " + e.what());
      }
    } else if (fs::exists(dir / "report.json")) {
      const auto j = read_json(dir / "report.json");
      try {
        for (const auto& [subset, s] : j.at("subsets").items()) {
          auto opt = [&](const char* key) {
            return s.contains(key) && !s[key].is_null() ? fmt(s[key].get<double>(), 6) : std::string();
          };
          eval_rows << dir.string() << ',' << subset << ',' << opt("mape_percent") << ','
                    << opt("mape_percent_failures_as_100") << ',' << s.at("n_windows").get<std::size_t>() << ','
                    << (s.contains("n_failures") ? std::to_string(s["n_failures"].get<std::size_t>()) : "") << ','
                    << opt("ppg_baseline_mape_percent") << '\n';
        }
        tables.push_back({{"input", dir.string()}, {"subsets", j.at("subsets")}});
      } catch (const json::exception& e) {
        throw InputError("malformed " + (dir / "report.json").string() + ": " + e.what());
      }
    } else {
      throw InputError("no sweep.json or report.json in " + dir.string());
    }
  }

  fs::create_directories(g.out);
  json out = {{"inputs", m.inputs["inputs"]}, {"evaluations", tables}};
  if (!mape_series.empty()) {
    std::string annotation;
    json comparisons = json::array();
    std::ofstream cmp(g.out / "comparison.csv");
    cmp << "objective,n,mape_mean,mape_std,failures_mean,failures_std\n";
    for (std::size_t i = 0; i < mape_series.size(); ++i) {
      const auto a = eval::describe(mape_series[i].values), f = eval::describe(failure_series[i].values);
      cmp << mape_series[i].label << ',' << a.n << ',' << fmt(a.mean, 8) << ',' << fmt(a.std, 8) << ','
          << fmt(f.mean, 8) << ',' << fmt(f.std, 8) << '\n';
      comparisons.push_back({{"objective", mape_series[i].label},
                             {"mape", {{"mean", a.mean}, {"std", a.std}, {"n", a.n}}},
                             {"failures", {{"mean", f.mean}, {"std", f.std}, {"n", f.n}}}});
    }
    out["distributions"] = comparisons;
    if (mape_series.size() == 2 && mape_series[0].values.size() >= 2 && mape_series[1].values.size() >= 2) {
      const auto t = eval::compare_distributions(mape_series[0].values, mape_series[1].values);
      annotation = "t(" + fmt(t.df) + ") = " + fmt(t.t, 3) + ", p = " + fmt(t.p, 3);
      json tests = {{"mape", {{"t", t.t}, {"df", t.df}, {"p", t.p}, {"degenerate", t.degenerate}}},
                    {"caveat", eval::kNormalityCaveat}};
      if (failure_series[0].values.size() >= 2 && failure_series[1].values.size() >= 2) {
        const auto tf = eval::compare_distributions(failure_series[0].values, failure_series[1].values);
        tests["failures"] = {{"t", tf.t}, {"df", tf.df}, {"p", tf.p}, {"degenerate", tf.degenerate}};
      }
      out["t_tests"] = tests;
      cmp << "# t-test on MAPE: " << annotation << " (" << eval::kNormalityCaveat << ")\n";
    }
    write_histogram(g.out / "mape_histogram.svg", mape_series, "Validation MAPE across seeds", "MAPE (%)",
                    annotation, o.bins);
    bool any_failures = false;
    for (const auto& s : failure_series) any_failures = any_failures || !s.values.empty();
    if (any_failures) {
      write_histogram(g.out / "failures_histogram.svg", failure_series, "Heart-rate failures across seeds",
                      "failed windows", "", o.bins);
    }
  }
  if (!tables.empty()) {
    std::ofstream csv(g.out / "table.csv");
    csv << "input,subset,mape_percent,mape_percent_failures_as_100,n_windows,n_failures,ppg_baseline_mape_percent\n"
        << eval_rows.str();
  }
  write_json(g.out / "report_summary.json", out);
  m.config_fingerprint = model::fingerprint(m.inputs);
  std::cout << "report written to " << g.out << "\n";
  return 0;
}

}  // namespace ppg2ecg::cli
