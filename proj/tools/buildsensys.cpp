// Command-line front end: generate synthetic data, analyze building-traffic
// correlations, train and evaluate forecasters, run ablations, and export
// attention weights.

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "bsx/baselines.hpp"
#include "bsx/checkpoint.hpp"
#include "bsx/correlation.hpp"
#include "bsx/dataset.hpp"
#include "bsx/errors.hpp"
#include "bsx/metrics.hpp"
#include "bsx/model.hpp"
#include "bsx/run_config.hpp"
#include "bsx/synthetic.hpp"
#include "bsx/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  std::string data_path;
  std::string routes_path;
  std::string checkpoint_path;
  std::string road = "road-a";
  std::string models;
  long long seed = -1;
  long long horizon = 0;
  long long window_index = 0;
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config_path, "flat key=value config file");
  cmd->add_option("--seed", opt.seed, "override gen.seed and train.seed");
  cmd->add_option("--out", opt.out_dir, "output directory");
}

bsx::RunConfig resolve_config(const Options& opt) {
  bsx::RunConfig cfg;
  if (!opt.config_path.empty())
    cfg = bsx::RunConfig::from_file(opt.config_path);
  if (!opt.data_path.empty()) cfg.set("data.path", opt.data_path);
  if (!opt.routes_path.empty()) cfg.set("data.routes", opt.routes_path);
  if (opt.seed >= 0) {
    cfg.set("gen.seed", std::to_string(opt.seed));
    cfg.set("train.seed", std::to_string(opt.seed));
  }
  if (opt.horizon > 0) cfg.set("eval.horizon", std::to_string(opt.horizon));
  if (!opt.models.empty()) cfg.set("eval.models", opt.models);
  if (!opt.road.empty()) cfg.set("eval.road", opt.road);
  return cfg;
}

json config_block(const bsx::RunConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.entries()) j[k] = v;
  return j;
}

void stamp(json& j, const bsx::RunConfig& cfg) {
  j["tool_version"] = BSX_VERSION;
  j["config_fingerprint"] = cfg.fingerprint();
  j["config"] = config_block(cfg);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw bsx::DataError("cannot write " + path.string());
  out << text;
  if (text.empty() || text.back() != '\n') out << "\n";
}

// Frames come from data.path when set, otherwise from the seeded benchmark
// suite (pick with --road).
bsx::TimeSeriesFrame acquire_frame(const bsx::RunConfig& cfg,
                                   const std::string& road) {
  if (cfg.has("data.path")) {
    bsx::TimeSeriesFrame frame = bsx::load_csv(cfg.get_string("data.path", ""));
    if (!frame.is_hourly()) frame = bsx::synchronize_hourly(frame);
    return frame;
  }
  const auto suite = bsx::benchmark_suite(cfg.get_u64("gen.seed", 42),
                                          cfg.get_index("gen.days", 90));
  for (const auto& named : suite)
    if (named.name == road) return named.frame;
  throw bsx::ConfigError("unknown synthetic road '" + road +
                         "' (expected road-a..road-d or data.path)");
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// ---------------------------------------------------------------------------

int cmd_generate(const Options& opt) {
  const bsx::RunConfig cfg = resolve_config(opt);
  fs::create_directories(opt.out_dir);
  const auto suite = bsx::benchmark_suite(cfg.get_u64("gen.seed", 42),
                                          cfg.get_index("gen.days", 90));
  json manifest;
  stamp(manifest, cfg);
  manifest["files"] = json::array();
  for (const auto& named : suite) {
    const fs::path path = fs::path(opt.out_dir) / (named.name + ".csv");
    bsx::write_csv(named.frame, path.string());
    manifest["files"].push_back({{"road", named.name},
                                 {"path", path.string()},
                                 {"rows", named.frame.rows()},
                                 {"coupling", named.config.coupling},
                                 {"lag_hours", named.config.lag_hours}});
    std::cout << "wrote " << path.string() << " (" << named.frame.rows()
              << " rows)\n";
  }
  write_text(fs::path(opt.out_dir) / "manifest.json", manifest.dump(2));
  return 0;
}

int cmd_analyze(const Options& opt) {
  const bsx::RunConfig cfg = resolve_config(opt);
  fs::create_directories(opt.out_dir);
  const std::string road = cfg.get_string("eval.road", "road-a");
  const bsx::TimeSeriesFrame frame = acquire_frame(cfg, road);
  const int utc_off =
      static_cast<int>(cfg.get_index("data.utc_offset_hours", 0));

  json j;
  stamp(j, cfg);

  const auto days = bsx::extract_days(frame, utc_off);
  const auto cos = bsx::cosine_daily(days);
  json daily = json::array();
  for (std::size_t i = 0; i < days.size(); ++i) {
    json d;
    d["day_start"] = days[i].day_start;
    d["cosine"] = std::isnan(cos[i]) ? json() : json(cos[i]);
    try {
      d["pearson"] = bsx::pearson(days[i].building, days[i].traffic);
    } catch (const bsx::NumericError&) {
      d["pearson"] = json();
    }
    daily.push_back(d);
  }
  j["daily"] = daily;

  auto group_json = [](const bsx::GroupedReport& r) {
    json g;
    for (const auto& [name, s] : r.groups)
      g[name] = {{"cosine_mean", s.cosine_mean},
                 {"cosine_std", s.cosine_std},
                 {"pearson_mean", s.pearson_mean},
                 {"pearson_std", s.pearson_std},
                 {"days", s.days}};
    g["skipped_days"] = r.skipped_days;
    return g;
  };
  j["grouped"]["weekday_weekend"] = group_json(bsx::grouped_similarity(
      frame, bsx::Grouping::kWeekdayWeekend, bsx::default_rush_hours(),
      utc_off));
  j["grouped"]["rush_normal"] = group_json(bsx::grouped_similarity(
      frame, bsx::Grouping::kRushNormal, bsx::default_rush_hours(), utc_off));

  if (cfg.has("data.routes")) {
    const auto probs = bsx::passing_probability(
        bsx::load_routes(cfg.get_string("data.routes", "")));
    json p = json::object();
    for (const auto& [seg, frac] : probs) p[seg] = frac;
    j["passing_probability"] = p;
  }

  const fs::path out = fs::path(opt.out_dir) / "analysis.json";
  write_text(out, j.dump(2));
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_train(const Options& opt) {
  const bsx::RunConfig cfg = resolve_config(opt);
  fs::create_directories(opt.out_dir);
  const std::string road = cfg.get_string("eval.road", "road-a");
  const bsx::TimeSeriesFrame frame = acquire_frame(cfg, road);

  const auto occ = frame.occupancy_columns();
  const auto env = frame.environmental_columns();
  const bsx::ModelConfig mc = cfg.model_config(
      static_cast<bsx::Index>(occ.size()), static_cast<bsx::Index>(env.size()));
  const bsx::TrainConfig tc = cfg.train_config();

  const bsx::TrainResult result = bsx::train(frame, mc, tc);

  const fs::path ck_path = fs::path(opt.out_dir) / "checkpoint.json";
  result.checkpoint.save(ck_path.string());
  json report = json::parse(result.report.to_json());
  stamp(report, cfg);
  report["road"] = road;
  write_text(fs::path(opt.out_dir) / "train_report.json", report.dump(2));

  std::cout << "trained " << bsx::to_string(mc.variant) << " on " << road
            << ": best val loss " << result.report.best_val_loss
            << " at epoch " << result.report.best_epoch + 1 << " ("
            << result.report.epochs_run << " epochs, "
            << result.report.wall_seconds << " s)\n";
  std::cout << "wrote " << ck_path.string() << "\n";
  return 0;
}

bsx::EvalContext make_context(const bsx::RunConfig& cfg,
                              const std::string& road,
                              const bsx::TimeSeriesFrame& frame) {
  bsx::EvalContext ctx;
  ctx.road = road;
  const auto occ = frame.occupancy_columns();
  const auto env = frame.environmental_columns();
  ctx.model_cfg = cfg.model_config(static_cast<bsx::Index>(occ.size()),
                                   static_cast<bsx::Index>(env.size()));
  ctx.train_cfg = cfg.train_config();
  ctx.horizon = cfg.get_index("eval.horizon", 1);
  ctx.utc_offset_hours =
      static_cast<int>(cfg.get_index("data.utc_offset_hours", 0));
  ctx.baselines.arima_p = cfg.get_index("baseline.arima_p", 3);
  ctx.baselines.arima_d = cfg.get_index("baseline.arima_d", 1);
  ctx.baselines.var_lag = cfg.get_index("baseline.var_lag", 24);
  return ctx;
}

void write_eval_report(const bsx::EvalReport& report,
                       const bsx::RunConfig& cfg, const std::string& out_dir,
                       const std::string& stem) {
  json j = json::parse(report.to_json());
  stamp(j, cfg);
  write_text(fs::path(out_dir) / (stem + ".json"), j.dump(2));
  write_text(fs::path(out_dir) / (stem + ".csv"), report.to_csv());
  std::cout << report.to_csv();
}

int cmd_evaluate(const Options& opt) {
  const bsx::RunConfig cfg = resolve_config(opt);
  fs::create_directories(opt.out_dir);
  const std::vector<std::string> models = split_csv_list(
      cfg.get_string("eval.models", "ha,arima,var,lwr,lstm,seq2seq,"
                                    "seq2seq-attn,buildsensys"));
  for (const auto& m : models) {
    const auto& known = bsx::known_models();
    if (std::find(known.begin(), known.end(), m) == known.end())
      throw bsx::ConfigError("unknown model '" + m + "'");
  }

  const std::string road = cfg.get_string("eval.road", "road-a");
  const bsx::TimeSeriesFrame frame = acquire_frame(cfg, road);

  bsx::EvalReport report;
  report.config_fingerprint = cfg.fingerprint();
  report.tool_version = BSX_VERSION;
  const bsx::EvalContext ctx = make_context(cfg, road, frame);
  for (const auto& name : models) {
    report.entries.push_back(bsx::evaluate_named_model(name, frame, ctx));
    const auto& e = report.entries.back();
    std::cerr << name << " on " << road << ": RMSE " << e.rmse << ", MAE "
              << e.mae << ", MAPE " << bsx::format_percent(e.mape_percent)
              << "\n";
  }
  write_eval_report(report, cfg, opt.out_dir, "eval_report");
  return 0;
}

int cmd_ablate(const Options& opt) {
  const bsx::RunConfig cfg = resolve_config(opt);
  fs::create_directories(opt.out_dir);
  const std::string road = cfg.get_string("eval.road", "road-a");
  const bsx::TimeSeriesFrame frame = acquire_frame(cfg, road);

  bsx::EvalReport report;
  report.config_fingerprint = cfg.fingerprint();
  report.tool_version = BSX_VERSION;
  const std::vector<bsx::Variant> variants = {
      bsx::Variant::kFull, bsx::Variant::kNoOccupancy,
      bsx::Variant::kNoEnvironment, bsx::Variant::kNoCrossDomainAttention,
      bsx::Variant::kNoTemporalAttention};
  for (bsx::Variant v : variants) {
    bsx::EvalContext ctx = make_context(cfg, road, frame);
    ctx.model_cfg.variant = v;
    bsx::EvalEntry e = bsx::evaluate_named_model("buildsensys", frame, ctx);
    e.model = bsx::to_string(v);
    report.entries.push_back(e);
    std::cerr << e.model << " on " << road << ": RMSE " << e.rmse << ", MAE "
              << e.mae << ", MAPE " << bsx::format_percent(e.mape_percent)
              << "\n";
  }
  write_eval_report(report, cfg, opt.out_dir, "ablation_report");
  return 0;
}

int cmd_dump_attention(const Options& opt) {
  const bsx::RunConfig cfg = resolve_config(opt);
  fs::create_directories(opt.out_dir);
  if (opt.checkpoint_path.empty())
    throw bsx::ConfigError("dump-attention requires --checkpoint");
  const bsx::Checkpoint ck = bsx::Checkpoint::load(opt.checkpoint_path);

  const std::string road = cfg.get_string("eval.road", "road-a");
  const bsx::TimeSeriesFrame frame = acquire_frame(cfg, road);
  const auto occ_cols = frame.occupancy_columns();
  const auto env_cols = frame.environmental_columns();
  if (static_cast<bsx::Index>(occ_cols.size()) != ck.config.n_occ ||
      static_cast<bsx::Index>(env_cols.size()) != ck.config.n_env)
    throw bsx::DataError("dump-attention: frame channels do not match the "
                         "checkpoint config");

  const bsx::SplitFrames split = bsx::chronological_split(frame);
  const bsx::TimeSeriesFrame test_norm = bsx::apply_norm(split.test, ck.norm);
  const auto windows =
      bsx::make_windows(test_norm, ck.config.window, 1, 1);
  const std::size_t index = static_cast<std::size_t>(opt.window_index);
  if (index >= windows.size())
    throw bsx::DataError("dump-attention: window index " +
                         std::to_string(index) + " out of range (" +
                         std::to_string(windows.size()) + " test windows)");

  const bsx::Index tau =
      opt.horizon > 0 ? static_cast<bsx::Index>(opt.horizon) : 1;
  const bsx::Prediction pred = bsx::predict(
      ck.params, ck.config, windows[index], tau, ck.norm, occ_cols, env_cols);

  json j;
  stamp(j, cfg);
  j["road"] = road;
  j["window_index"] = opt.window_index;
  j["anchor"] = windows[index].anchor;
  j["forecast"] = std::vector<double>(pred.forecast.begin(),
                                      pred.forecast.end());

  auto matrix_rows = [](const bsx::Matrix& m) {
    json rows = json::array();
    for (bsx::Index i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (bsx::Index jx = 0; jx < m.cols(); ++jx) row.push_back(m(i, jx));
      rows.push_back(row);
    }
    return rows;
  };
  auto quantiles = [](bsx::Vector v) {
    std::sort(v.begin(), v.end());
    auto q = [&](double f) {
      const double pos = f * static_cast<double>(v.size() - 1);
      const bsx::Index lo = static_cast<bsx::Index>(pos);
      const bsx::Index hi = std::min<bsx::Index>(lo + 1, v.size() - 1);
      return v(lo) + (pos - static_cast<double>(lo)) * (v(hi) - v(lo));
    };
    return json{{"min", v(0)},        {"q25", q(0.25)}, {"median", q(0.5)},
                {"q75", q(0.75)},     {"max", v(v.size() - 1)}};
  };

  const bsx::AttentionTrace& trace = pred.traces.front();
  json summary = json::object();
  std::string channels_csv;
  if (trace.occupancy.size() > 0 || trace.environmental.size() > 0) {
    j["occupancy_weights"] = matrix_rows(trace.occupancy);
    j["environmental_weights"] = matrix_rows(trace.environmental);
    std::vector<std::string> names;
    for (bsx::Index c : occ_cols)
      names.push_back(frame.channel_meta[static_cast<std::size_t>(c)].name);
    for (bsx::Index c : env_cols)
      names.push_back(frame.channel_meta[static_cast<std::size_t>(c)].name);
    for (std::size_t c = 0; c < names.size(); ++c) {
      const bool is_occ = c < static_cast<std::size_t>(trace.occupancy.cols());
      const bsx::Matrix& m = is_occ ? trace.occupancy : trace.environmental;
      const bsx::Index col =
          is_occ ? static_cast<bsx::Index>(c)
                 : static_cast<bsx::Index>(c) - trace.occupancy.cols();
      if (m.size() > 0) summary[names[c]] = quantiles(m.col(col));
    }
    // channels CSV: one row per encoder step, occupancy block then
    // environmental block.
    for (std::size_t c = 0; c < names.size(); ++c)
      channels_csv += (c ? "," : "") + names[c];
    channels_csv += "\n";
    for (bsx::Index t = 0; t < ck.config.window; ++t) {
      std::string row;
      for (bsx::Index c = 0; c < trace.occupancy.cols(); ++c)
        row += (row.empty() ? "" : ",") + std::to_string(trace.occupancy(t, c));
      for (bsx::Index c = 0; c < trace.environmental.cols(); ++c)
        row +=
            (row.empty() ? "" : ",") + std::to_string(trace.environmental(t, c));
      channels_csv += row + "\n";
    }
  }
  j["channel_weight_summary"] = summary;

  if (trace.temporal.size() > 0) {
    json gammas = json::array();
    for (const auto& tr : pred.traces) gammas.push_back(matrix_rows(tr.temporal));
    j["temporal_weights"] = gammas;
    std::string heat;
    for (bsx::Index r = 0; r < trace.temporal.rows(); ++r) {
      for (bsx::Index c = 0; c < trace.temporal.cols(); ++c)
        heat += (c ? "," : "") + std::to_string(trace.temporal(r, c));
      heat += "\n";
    }
    write_text(fs::path(opt.out_dir) / "attention_temporal.csv", heat);
  }
  if (!channels_csv.empty())
    write_text(fs::path(opt.out_dir) / "attention_channels.csv", channels_csv);

  const fs::path out = fs::path(opt.out_dir) / "attention.json";
  write_text(out, j.dump(2));
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"building-sensing traffic forecaster"};
  app.require_subcommand(1);
  Options opt;

  CLI::App* generate = app.add_subcommand(
      "generate", "write the seeded synthetic benchmark CSVs");
  add_common(generate, opt);

  CLI::App* analyze = app.add_subcommand(
      "analyze", "building-traffic correlation report");
  add_common(analyze, opt);
  analyze->add_option("--data", opt.data_path, "input CSV");
  analyze->add_option("--routes", opt.routes_path, "route file");
  analyze->add_option("--road", opt.road, "synthetic road");

  CLI::App* train = app.add_subcommand("train", "train a forecaster");
  add_common(train, opt);
  train->add_option("--data", opt.data_path, "input CSV");
  train->add_option("--road", opt.road, "synthetic road");

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "score models on the test split");
  add_common(evaluate, opt);
  evaluate->add_option("--data", opt.data_path, "input CSV");
  evaluate->add_option("--road", opt.road, "road to evaluate");
  evaluate->add_option("--models", opt.models, "comma-separated model list");
  evaluate->add_option("--horizon", opt.horizon, "forecast horizon");

  CLI::App* ablate = app.add_subcommand(
      "ablate", "evaluate the five ablation variants");
  add_common(ablate, opt);
  ablate->add_option("--data", opt.data_path, "input CSV");
  ablate->add_option("--road", opt.road, "road to evaluate");
  ablate->add_option("--horizon", opt.horizon, "forecast horizon");

  CLI::App* dump = app.add_subcommand(
      "dump-attention", "export attention weights for one window");
  add_common(dump, opt);
  dump->add_option("--checkpoint", opt.checkpoint_path, "checkpoint JSON")
      ->required();
  dump->add_option("--data", opt.data_path, "input CSV");
  dump->add_option("--road", opt.road, "synthetic road");
  dump->add_option("--window-index", opt.window_index, "test window index");
  dump->add_option("--horizon", opt.horizon, "forecast steps to trace");

  try {
    app.parse(argc, argv);
    if (generate->parsed()) return cmd_generate(opt);
    if (analyze->parsed()) return cmd_analyze(opt);
    if (train->parsed()) return cmd_train(opt);
    if (evaluate->parsed()) return cmd_evaluate(opt);
    if (ablate->parsed()) return cmd_ablate(opt);
    if (dump->parsed()) return cmd_dump_attention(opt);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const bsx::ConfigError& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return 2;
  } catch (const bsx::DataError& e) {
    std::cerr << "error: data: " << e.what() << "\n";
    return 3;
  } catch (const bsx::NumericError& e) {
    std::cerr << "error: numeric: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
