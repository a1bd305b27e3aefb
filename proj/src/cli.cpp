#include "ldu/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <ostream>

#include "ldu/data_io.hpp"
#include "ldu/ensemble.hpp"
#include "ldu/kernels.hpp"
#include "ldu/metrics.hpp"
#include "ldu/run_config.hpp"
#include "ldu/svg_chart.hpp"

namespace ldu {
namespace {

namespace fs = std::filesystem;

struct Context {
  RunConfig config;
  fs::path out_dir;
  std::ostream& out;
  std::ostream& err;

  fs::path input(const std::string& key, const std::string& fallback) const {
    const std::string& v = config.get(key);
    return v.empty() ? out_dir / fallback : fs::path(v);
  }
  fs::path output(const std::string& name) const { return out_dir / name; }
  fs::path ensemble_dir() const { return out_dir / "ensemble"; }
  bool holdout() const { return config.get_double("stage2_holdout") > 0.0; }
};

void require(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("missing input " + path.string());
}

void announce(const Context& ctx, const fs::path& path, const std::string& what) {
  ctx.out << "wrote " << path.string() << " (" << what << ")\n";
}

std::string describe(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

void gen_data(const Context& ctx) {
  const SyntheticData data = generate_synthetic(ctx.config.synthetic());
  const fs::path path = ctx.output("dataset.csv");
  write_dataset_csv(path, data.dataset);
  announce(ctx, path, std::to_string(data.dataset.size()) + " rows, " +
                          std::to_string(data.flipped) + " confound flips");
}

void split(const Context& ctx) {
  const fs::path source = ctx.input("dataset_file", "dataset.csv");
  require(source);
  const auto [train, test] = split_dataset(read_dataset_csv(source),
                                           ctx.config.get_double("split_ratio"),
                                           ctx.config.split_seed());
  write_dataset_csv(ctx.output("train.csv"), train);
  announce(ctx, ctx.output("train.csv"), std::to_string(train.size()) + " rows");
  write_dataset_csv(ctx.output("test.csv"), test);
  announce(ctx, ctx.output("test.csv"), std::to_string(test.size()) + " rows");
}

LabeledDataset load_train(const Context& ctx) {
  const fs::path path = ctx.input("train_file", "train.csv");
  require(path);
  return read_dataset_csv(path);
}

LabeledDataset load_test(const Context& ctx) {
  const fs::path path = ctx.input("test_file", "test.csv");
  require(path);
  return read_dataset_csv(path);
}

void train_ensemble_cmd(const Context& ctx) {
  LabeledDataset train = load_train(ctx);
  const double holdout = ctx.config.get_double("stage2_holdout");
  if (holdout > 0.0) {
    auto [ensemble_part, stage2_part] =
        split_dataset(train, 1.0 - holdout, ctx.config.holdout_seed());
    write_dataset_csv(ctx.output("stage2.csv"), stage2_part);
    announce(ctx, ctx.output("stage2.csv"),
             std::to_string(stage2_part.size()) + " rows held out for stage two");
    train = std::move(ensemble_part);
  }
  const EnsembleSpec spec = ctx.config.ensemble(train.dim());
  const auto members = train_ensemble(train.features, train.labels, spec);
  save_ensemble(ctx.ensemble_dir(), members, spec.base_seed);
  announce(ctx, ctx.ensemble_dir() / "manifest.txt",
           std::to_string(members.size()) + " members, kernels " +
               std::string(kernels::backend_name(kernels::active().backend)));
}

void featurize(const Context& ctx) {
  require(ctx.ensemble_dir() / "manifest.txt");
  const auto members = load_ensemble(ctx.ensemble_dir());
  LabeledDataset stage2;
  if (ctx.holdout()) {
    require(ctx.output("stage2.csv"));
    stage2 = read_dataset_csv(ctx.output("stage2.csv"));
  } else {
    stage2 = load_train(ctx);
  }
  const LabeledDataset test = load_test(ctx);
  const bool sort = ctx.config.get_bool("sort_members");
  for (const auto& [name, data] :
       {std::pair<std::string, const LabeledDataset*>{"train", &stage2}, {"test", &test}}) {
    const PredictionMatrix preds = predict_matrix(members, *data);
    const DeferFeatures features = build_defer_features(preds, sort);
    write_preds_csv(ctx.output("preds_" + name + ".csv"), preds);
    announce(ctx, ctx.output("preds_" + name + ".csv"),
             std::to_string(preds.samples()) + " x " + std::to_string(preds.members()));
    write_features_csv(ctx.output("features_" + name + ".csv"), features);
    announce(ctx, ctx.output("features_" + name + ".csv"),
             "DT ceiling " + describe(dt_ceiling(preds)));
  }
}

std::vector<MetricsRow> collect(const Context& ctx, const std::vector<SweepPoint>& points,
                                const std::string& strategy) {
  std::vector<MetricsRow> rows;
  for (const auto& p : points) {
    if (p.row) {
      rows.push_back(*p.row);
    } else {
      ctx.err << strategy << " alpha " << p.param << " failed: " << p.error << "\n";
    }
  }
  return rows;
}

void write_curve(const Context& ctx, const std::string& name,
                 const std::vector<MetricsRow>& rows) {
  const fs::path path = ctx.output(name);
  write_curve_csv(path, rows);
  std::optional<double> best;
  for (const auto& r : rows) {
    if (r.f1 && (!best || *r.f1 > *best)) best = r.f1;
  }
  announce(ctx, path, std::to_string(rows.size()) + " points, best F1 " + describe(best));
}

void maybe_write_decisions(const Context& ctx, const std::string& strategy, std::size_t index,
                           const std::vector<std::int64_t>& ids,
                           const std::vector<Verdict>& verdicts) {
  if (!ctx.config.get_bool("write_decisions")) return;
  fs::create_directories(ctx.out_dir / "decisions");
  write_decisions_csv(ctx.out_dir / "decisions" /
                          (strategy + "_" + std::to_string(index) + ".csv"),
                      ids, verdicts);
}

void sweep_ldu_cmd(const Context& ctx) {
  require(ctx.output("features_train.csv"));
  require(ctx.output("features_test.csv"));
  const DeferFeatures train = read_features_csv(ctx.output("features_train.csv"));
  const DeferFeatures test = read_features_csv(ctx.output("features_test.csv"));
  const auto grid = ctx.config.get_doubles("alpha_grid");
  const TrainConfig config = ctx.config.train_config("ldu", ctx.config.ldu_seed());
  const LduOptions options = ctx.config.ldu_options();
  const auto points = sweep_ldu(train, test, grid, config, options, ctx.config.threads());
  if (ctx.config.get_bool("write_decisions")) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!points[i].row) continue;
      const auto net = train_ldu(train, points[i].param, config, options);
      maybe_write_decisions(ctx, "ldu", i, test.ids, decide_ldu(net, test));
    }
  }
  write_curve(ctx, "curve_ldu.csv", collect(ctx, points, "LDU"));
}

void sweep_ld_cmd(const Context& ctx) {
  const LabeledDataset train = load_train(ctx);
  const LabeledDataset test = load_test(ctx);
  const auto grid = ctx.config.get_doubles("alpha_grid");
  const TrainConfig config = ctx.config.train_config("ld", ctx.config.ld_seed());
  LdOptions options = ctx.config.ld_options();
  if (ctx.config.get_bool("ld_warm_start")) {
    require(ctx.ensemble_dir() / "manifest.txt");
    options.warm_start = load_ensemble(ctx.ensemble_dir()).front();
  }
  const auto points = sweep_ld(train, test, grid, config, options, ctx.config.threads());
  if (ctx.config.get_bool("write_decisions")) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!points[i].row) continue;
      const auto net = train_ld(train.features, train.labels, points[i].param, config, options);
      maybe_write_decisions(ctx, "ld", i, test.ids, decide_ld(net, test.features));
    }
  }
  write_curve(ctx, "curve_ld.csv", collect(ctx, points, "LD"));
}

void sweep_dt_cmd(const Context& ctx) {
  require(ctx.output("features_test.csv"));
  const PredictionMatrix test = read_features_csv(ctx.output("features_test.csv")).predictions();
  const EntropyMeasure measure = ctx.config.dt_measure();
  const auto grid = ctx.config.get_doubles("tau_grid");
  if (measure == EntropyMeasure::kDiagnostic && dt_ceiling(test) == 0.0) {
    ctx.err << "warning: DT ceiling is zero: every test row has unanimous ensemble votes, "
               "so thresholding the diagnostic entropy cannot defer any sample\n";
  }
  const auto rows = sweep_threshold(test, grid, measure);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    maybe_write_decisions(ctx, "dt", i, test.ids, decide_dt(test, {grid[i], measure}));
  }
  write_curve(ctx, "curve_dt.csv", rows);
}

void report(const Context& ctx) {
  std::optional<double> baseline;
  if (fs::exists(ctx.output("features_test.csv"))) {
    const PredictionMatrix test =
        read_features_csv(ctx.output("features_test.csv")).predictions();
    if (test.labels) baseline = evaluate(majority_verdicts(test), *test.labels, 0.0).f1;
    ctx.out << "no-defer ensemble F1 " << describe(baseline) << "\n";
  }
  const std::pair<const char*, const char*> curves[] = {
      {"ldu", "LDU: F1 and defer rate vs defer-loss weight"},
      {"ld", "LD: F1 and defer rate vs defer-loss weight"},
      {"dt", "DT: F1 and defer rate vs entropy threshold"}};
  std::size_t rendered = 0;
  for (const auto& [name, title] : curves) {
    const fs::path csv = ctx.output(std::string("curve_") + name + ".csv");
    if (!fs::exists(csv)) continue;
    const auto rows = read_curve_csv(csv);
    const fs::path svg = ctx.output(std::string("curve_") + name + ".svg");
    const std::string label = std::string(name) == "dt" ? "entropy threshold" : "alpha";
    write_file_atomic(svg, render_curve_svg(rows, title, label, baseline));
    announce(ctx, svg, std::to_string(rows.size()) + " points");
    ++rendered;
  }
  if (rendered == 0) throw IoError("no curve_*.csv files in " + ctx.out_dir.string());
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learning-to-defer triage pipeline"};
  app.require_subcommand(1, 1);
  std::string config_file;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_file, "key = value config file");
  app.add_option("-o,--out", out_dir, "output directory");
  app.add_option("-D,--set", overrides, "override a config key (key=value)");

  using Handler = void (*)(const Context&);
  const std::pair<const char*, std::pair<const char*, Handler>> commands[] = {
      {"gen-data", {"generate the synthetic diagnostic dataset", gen_data}},
      {"split", {"70/30 train/test split", split}},
      {"train-ensemble", {"train the stage-one deep ensemble", train_ensemble_cmd}},
      {"featurize", {"ensemble predictions and entropy features", featurize}},
      {"sweep-ldu", {"LDU alpha sweep", sweep_ldu_cmd}},
      {"sweep-ld", {"LD alpha sweep", sweep_ld_cmd}},
      {"sweep-dt", {"DT threshold sweep", sweep_dt_cmd}},
      {"report", {"render curve CSVs as SVG charts", report}},
  };
  for (const auto& [name, entry] : commands) {
    app.add_subcommand(name, entry.first)->fallthrough();
  }

  std::vector<std::string> argv_rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    Context ctx{RunConfig{}, fs::path(out_dir), out, err};
    if (!config_file.empty()) ctx.config.load_file(config_file);
    ctx.config.apply_environment();
    for (const auto& o : overrides) ctx.config.set_override(o);
    fs::create_directories(ctx.out_dir);
    const std::string chosen = app.get_subcommands().front()->get_name();
    for (const auto& [name, entry] : commands) {
      if (chosen == name) entry.second(ctx);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace ldu
