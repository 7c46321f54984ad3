#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "cmsense/cmsense.hpp"

namespace {

using namespace cmsense;

ChannelSet load_set(const std::string& path) { return load_channel_set(path); }

Dictionary dictionary_for(const ChannelSet& set) { return dictionary_for_model(set.model); }

void add_gen_data(CLI::App& app) {
  auto* cmd = app.add_subcommand("gen-data", "Generate a channel data set");
  auto model = std::make_shared<std::string>("canonical-sparse");
  auto spec = std::make_shared<ChannelModelSpec>();
  auto count = std::make_shared<std::int64_t>(1000);
  auto seed = std::make_shared<std::uint64_t>(0);
  auto norm = std::make_shared<std::string>("raw");
  auto out = std::make_shared<std::string>();
  cmd->add_option("--model", *model, "canonical-sparse | dft-sparse | multipath")
      ->default_val("canonical-sparse");
  cmd->add_option("--n", spec->n, "ambient dimension")->required();
  cmd->add_option("--p", spec->p, "sparsity / path count")->required();
  cmd->add_option("--grid", spec->L, "dictionary grid size (multipath, 0 = 16n)");
  cmd->add_option("--count", *count, "number of samples")->required();
  cmd->add_option("--seed", *seed, "RNG seed")->required();
  cmd->add_option("--normalization", *norm, "raw | per-sample | average")->default_val("raw");
  cmd->add_option("--out", *out, "output file")->required();
  cmd->callback([=] {
    spec->model = channel_model_from_string(*model);
    ChannelSet set = generate_channels(*spec, *count, SeededRng(*seed, "data"));
    set = apply_normalization(std::move(set), normalization_from_string(*norm));
    save_channel_set(set, *out);
    std::cout << "wrote " << set.count() << " samples (n=" << set.dim() << ", model=" << *model
              << ", normalization=" << *norm << ") to " << *out << '\n';
  });
}

void add_train(CLI::App& app) {
  auto* cmd = app.add_subcommand("train", "Learn measurement phases on a training set");
  struct Opts {
    std::string train_path, val_path, out_phases, out_report, init_path;
    int m = 0;
    TrainConfig cfg;
    SearchSpace space;
    int trials = 1;
    std::vector<double> bandwidths = {2, 5, 10, 20, 40, 80};
    std::string normalization = "average";
    std::string sphere_mode = "fresh";
    std::uint64_t seed = 0;
    int threads = 1;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--train", o->train_path, "training channel set")->required();
  cmd->add_option("--val", o->val_path, "validation channel set")->required();
  cmd->add_option("--m", o->m, "number of measurements")->required();
  cmd->add_option("--seed", o->seed, "RNG seed")->required();
  cmd->add_option("--batch", o->cfg.batch_size, "batch size");
  cmd->add_option("--lr", o->cfg.learning_rate, "learning rate");
  cmd->add_option("--decay", o->cfg.decay, "per-epoch learning-rate decay");
  cmd->add_option("--max-iters", o->cfg.max_iterations, "iteration budget");
  cmd->add_option("--val-interval", o->cfg.validation_interval, "iterations between checks");
  cmd->add_option("--patience", o->cfg.patience, "non-improving checks before stopping");
  cmd->add_option("--normalization", o->normalization, "per-sample | average");
  cmd->add_option("--sphere-mode", o->sphere_mode, "fresh | paired");
  cmd->add_option("--init-phases", o->init_path, "phase matrix file used as initialization");
  cmd->add_option("--trials", o->trials, "random-search trials (1 = train once as configured)");
  cmd->add_option("--batch-min", o->space.batch_min, "search: smallest batch size");
  cmd->add_option("--batch-max", o->space.batch_max, "search: largest batch size");
  cmd->add_option("--lr-min", o->space.lr_min, "search: smallest learning rate");
  cmd->add_option("--lr-max", o->space.lr_max, "search: largest learning rate");
  cmd->add_option("--decay-min", o->space.decay_min, "search: smallest decay");
  cmd->add_option("--decay-max", o->space.decay_max, "search: largest decay");
  cmd->add_option("--bandwidths", o->bandwidths, "kernel bandwidths");
  cmd->add_option("--out-phases", o->out_phases, "output phase matrix file")->required();
  cmd->add_option("--out-report", o->out_report, "output training report file");
  cmd->add_option("--threads", o->threads, "worker threads");
  cmd->callback([o] {
    const ChannelSet train_set = load_set(o->train_path);
    const ChannelSet val_set = load_set(o->val_path);
    const KernelSpec kernel{o->bandwidths};
    o->cfg.normalization = normalization_from_string(o->normalization);
    o->cfg.sphere_mode = o->sphere_mode == "paired" ? SphereMode::Paired : SphereMode::Fresh;
    o->cfg.seed = o->seed;
    if (!o->init_path.empty()) {
      const StoredMatrix stored = load_matrix(o->init_path);
      o->cfg.init = InitMode::FromPhases;
      o->cfg.init_phases = stored.is_phase
                               ? stored.phases
                               : PhaseMatrix(stored.entries.array().arg().matrix());
    }
    TrainReport report;
    if (o->trials <= 1) {
      report = train(train_set, val_set, o->cfg, kernel, o->m);
    } else {
      o->space.trials = o->trials;
      const SearchResult search =
          random_search(train_set, val_set, o->space, o->cfg, kernel, o->m,
                        SeededRng(o->seed, "search"), o->threads);
      report = search.best;
      std::cout << "best trial " << search.best_trial << " of " << o->trials << '\n';
    }
    save_phase_matrix(report.phases, o->out_phases);
    if (!o->out_report.empty()) save_train_report(report, o->out_report);
    std::cout << "best validation objective " << report.best_validation << " after "
              << report.iterations_run << " iterations; phases written to " << o->out_phases
              << '\n';
  });
}

void add_lbcs(CLI::App& app) {
  auto* cmd = app.add_subcommand("lbcs", "Monte-Carlo constant modulus basis subsampling");
  struct Opts {
    std::string train_path, val_path, out_path;
    int m = 0;
    double snr_db = 20.0;
    int iterations = 100;
    int sparsity = 0;
    std::uint64_t seed = 0;
    int threads = 1;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--train", o->train_path, "row-scoring channel set")->required();
  cmd->add_option("--val", o->val_path, "validation channel set")->required();
  cmd->add_option("--m", o->m, "number of rows to keep")->required();
  cmd->add_option("--snr", o->snr_db, "validation SNR in dB")->required();
  cmd->add_option("--iterations", o->iterations, "Monte-Carlo candidates");
  cmd->add_option("--sparsity", o->sparsity, "recovery sparsity (default: the model's p)");
  cmd->add_option("--seed", o->seed, "RNG seed")->required();
  cmd->add_option("--out", o->out_path, "output matrix file")->required();
  cmd->add_option("--threads", o->threads, "worker threads");
  cmd->callback([o] {
    const ChannelSet train_set = load_set(o->train_path);
    const ChannelSet val_set = load_set(o->val_path);
    const Dictionary psi = dictionary_for(val_set);
    const int sparsity = o->sparsity > 0 ? o->sparsity : val_set.model.p;
    const McLbcsResult mc = mc_lbcs(train_set, val_set, o->snr_db, o->m, o->iterations, sparsity,
                                    psi, SeededRng(o->seed, "lbcs"), o->threads);
    save_complex_matrix(mc.matrix, o->out_path);
    std::cout << "best candidate " << mc.best_index << " with validation MSE " << mc.best_mse
              << "; matrix written to " << o->out_path << '\n';
  });
}

void add_evaluate(CLI::App& app) {
  auto* cmd = app.add_subcommand("evaluate", "Sweep a matrix over an SNR grid with OMP recovery");
  struct Opts {
    std::string matrix_path, data_path, out_path, label = "fixed";
    std::vector<double> snrs;
    int sparsity = 0;
    std::uint64_t seed = 0;
    int threads = 1;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--matrix", o->matrix_path, "matrix file (phase or complex)")->required();
  cmd->add_option("--data", o->data_path, "channel set to evaluate on")->required();
  cmd->add_option("--snr", o->snrs, "SNR grid in dB")->required();
  cmd->add_option("--sparsity", o->sparsity, "recovery sparsity (default: the model's p)");
  cmd->add_option("--seed", o->seed, "noise seed")->required();
  cmd->add_option("--label", o->label, "algorithm label for the CSV");
  cmd->add_option("--out", o->out_path, "output CSV")->required();
  cmd->add_option("--threads", o->threads, "worker threads");
  cmd->callback([o] {
    const ChannelSet data = load_set(o->data_path);
    const Eigen::MatrixXcd a = load_matrix(o->matrix_path).as_complex();
    const Dictionary psi = dictionary_for(data);
    const int sparsity = o->sparsity > 0 ? o->sparsity : data.model.p;
    const SeededRng noise(o->seed, "noise");
    std::vector<EvalRecord> records;
    for (std::size_t s = 0; s < o->snrs.size(); ++s)
      records.push_back(
          evaluate(a, data, o->snrs[s], sparsity, psi, noise, s, o->label, o->threads));
    write_csv(records, o->out_path);
    for (const EvalRecord& rec : records)
      std::cout << rec.algorithm << " snr=" << rec.snr_db << " mean=" << rec.relative_mse << '\n';
    std::cout << "wrote " << o->out_path << '\n';
  });
}

void add_rip_report(CLI::App& app) {
  auto* cmd = app.add_subcommand("rip-report", "Isometry statistics of a matrix on a probe set");
  struct Opts {
    std::string matrix_path, data_path, out_path;
  };
  auto o = std::make_shared<Opts>();
  cmd->add_option("--matrix", o->matrix_path, "matrix file (phase or complex)")->required();
  cmd->add_option("--data", o->data_path, "probe channel set")->required();
  cmd->add_option("--out", o->out_path, "optional JSON output");
  cmd->callback([o] {
    ChannelSet probe = load_set(o->data_path);
    // |A h / |h|| ignores any global scale, so renormalize from scratch.
    probe.normalization = Normalization::Raw;
    probe = normalize_per_sample(std::move(probe));
    const Eigen::MatrixXcd a = load_matrix(o->matrix_path).as_complex();
    const RipReport rep = rip_report(a, probe);
    nlohmann::json j;
    j["delta"] = rep.delta;
    j["mean"] = rep.mean;
    j["min"] = rep.min;
    j["q25"] = rep.q25;
    j["median"] = rep.median;
    j["q75"] = rep.q75;
    j["max"] = rep.max;
    if (!o->out_path.empty()) {
      std::ofstream out(o->out_path);
      if (!out) throw std::runtime_error("cannot open for writing: " + o->out_path);
      out << j.dump(2) << '\n';
    }
    std::cout << j.dump(2) << '\n';
  });
}

void add_run_experiment(CLI::App& app) {
  auto* cmd = app.add_subcommand("run-experiment", "Full benchmark pipeline");
  cmd->fallthrough();  // lets the top-level --config appear after the subcommand
  auto cfg = std::make_shared<ExperimentConfig>();
  auto model = std::make_shared<std::string>("canonical-sparse");
  auto norm = std::make_shared<std::string>("average");
  auto sphere = std::make_shared<std::string>("fresh");
  auto metric = std::make_shared<std::string>("mmd2");
  cmd->add_option("--model", *model, "canonical-sparse | dft-sparse | multipath");
  cmd->add_option("--n", cfg->model.n, "ambient dimension")->required();
  cmd->add_option("--p", cfg->model.p, "sparsity / path count")->required();
  cmd->add_option("--grid", cfg->model.L, "dictionary grid size (multipath, 0 = 16n)");
  cmd->add_option("--m", cfg->m, "number of measurements")->required();
  cmd->add_option("--snr", cfg->snr_grid_db, "SNR grid in dB")->required();
  cmd->add_option("--algorithms", cfg->algorithms,
                  "subset of: random lbcs learned learned-lbcs-init")
      ->required();
  cmd->add_option("--test-count", cfg->test_count, "test samples");
  cmd->add_option("--train-count", cfg->train_count, "learner training samples");
  cmd->add_option("--val-count", cfg->val_count, "validation samples");
  cmd->add_option("--lbcs-train-count", cfg->lbcs_train_count, "row-scoring samples");
  cmd->add_option("--lbcs-iterations", cfg->lbcs_iterations, "Monte-Carlo candidates per SNR");
  cmd->add_option("--lbcs-init-snr", cfg->lbcs_init_snr_db, "SNR for the warm-start matrix");
  cmd->add_option("--bandwidths", cfg->kernel_bandwidths, "kernel bandwidths");
  cmd->add_option("--trials", cfg->search.trials, "random-search trials");
  cmd->add_option("--batch-min", cfg->search.batch_min, "search: smallest batch size");
  cmd->add_option("--batch-max", cfg->search.batch_max, "search: largest batch size");
  cmd->add_option("--lr-min", cfg->search.lr_min, "search: smallest learning rate");
  cmd->add_option("--lr-max", cfg->search.lr_max, "search: largest learning rate");
  cmd->add_option("--decay-min", cfg->search.decay_min, "search: smallest decay");
  cmd->add_option("--decay-max", cfg->search.decay_max, "search: largest decay");
  cmd->add_option("--max-iters", cfg->max_iterations, "iteration budget per trial");
  cmd->add_option("--val-interval", cfg->validation_interval, "iterations between checks");
  cmd->add_option("--patience", cfg->patience, "non-improving checks before stopping");
  cmd->add_option("--normalization", *norm, "per-sample | average");
  cmd->add_option("--sphere-mode", *sphere, "fresh | paired");
  cmd->add_option("--metric", *metric, "trial selection: mmd2 | recovery-mse");
  cmd->add_option("--metric-snr", cfg->metric_snr_db, "SNR for the recovery-mse metric");
  cmd->add_option("--out", cfg->output_dir, "output directory");
  cmd->add_option("--threads", cfg->threads, "worker threads");
  cmd->add_option("--seed", cfg->seed, "master seed")->required();
  cmd->callback([cfg, model, norm, sphere, metric] {
    cfg->model.model = channel_model_from_string(*model);
    cfg->normalization = normalization_from_string(*norm);
    cfg->sphere_mode = *sphere == "paired" ? SphereMode::Paired : SphereMode::Fresh;
    cfg->validation_metric =
        *metric == "recovery-mse" ? ValidationMetric::RecoveryMse : ValidationMetric::Mmd2;
    cfg->seed_set = true;
    const ExperimentResult result = run_experiment(*cfg);
    std::cout << "csv: " << result.csv_path << '\n';
    std::cout << "metadata: " << result.metadata_path << '\n';
    for (const std::string& p : result.matrix_paths) std::cout << "artifact: " << p << '\n';
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constant modulus measurement design and benchmarking"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI file (use a [run-experiment] section)");
  add_gen_data(app);
  add_train(app);
  add_lbcs(app);
  add_evaluate(app);
  add_rip_report(app);
  add_run_experiment(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
