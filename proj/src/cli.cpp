#include "lbto/cli.hpp"

#include <cstdio>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "lbto/bounds.hpp"
#include "lbto/ftle.hpp"
#include "lbto/io.hpp"
#include "lbto/metrics.hpp"

namespace lbto {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string numbered(const char* prefix, int n, const char* suffix = "") {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%04d%s", prefix, n, suffix);
  return buf;
}

fs::path run_dir(const ExperimentSpec& spec, Strategy s) { return spec.output_path() / to_string(s); }

ExperimentSpec portable(const ExperimentSpec& spec) {
  ExperimentSpec copy = spec;
  if (copy.field.kind == FieldKind::Gridded) copy.field.velocity_dir = fs::absolute(spec.velocity_path()).lexically_normal().string();
  return copy;
}

Vec lattice_spacing(const FlowMapDataset& ds, const SeedLattice& lattice) {
  Vec h{1, 1, 1};
  const auto& decomp = ds.config.decomp;
  for (int a = 0; a < decomp.dims(); ++a)
    h[a] = decomp.domain().extent(a) / (decomp.global_dims()[a] - 1) * lattice.stride;
  return h;
}

std::map<Strategy, double> read_bench_summary(const ExperimentSpec& spec) {
  std::map<Strategy, double> out;
  const auto path = spec.output_path() / "bench" / "summary.csv";
  if (!fs::exists(path)) return out;
  std::map<Strategy, std::pair<double, int>> acc;
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) continue;
    const Strategy s = parse_strategy(line.substr(0, c1));
    acc[s].first += std::stod(line.substr(c2 + 1));
    acc[s].second += 1;
  }
  for (const auto& [s, v] : acc) out[s] = v.first / v.second;
  return out;
}

int cmd_extract(const ExperimentSpec& spec, std::ostream& out) {
  for (Strategy s : spec.strategies) {
    const FlowMapDataset ds = run_extraction(make_extraction_config(spec, s));
    write_run(ds, spec, run_dir(spec, s));
    out << to_string(s) << ": " << ds.config.interval_count() << " intervals, " << ds.config.decomp.rank_count()
        << " ranks, discarded " << format_metric(discarded_pct(ds)) << "%, messages " << ds.total_messages() << " -> "
        << run_dir(spec, s).string() << "\n";
  }
  return 0;
}

int cmd_reconstruct(const ExperimentSpec& spec, ReconMode mode, std::ostream& out) {
  const auto seeds = pathline_seeds(spec);
  for (Strategy s : spec.strategies) {
    const LoadedRun run = read_run(run_dir(spec, s));
    const Reconstructor recon(run.dataset, mode);
    std::vector<Pathline> lines;
    for (const Vec& seed : seeds) lines.push_back(trace_pathline(recon, seed, 0, run.dataset.config.interval_count()));
    const auto path = run_dir(spec, s) / (std::string("pathlines_") + to_string(mode) + ".csv");
    write_file(path, pathlines_csv(lines));
    out << to_string(s) << ": " << lines.size() << " pathlines -> " << path.string() << "\n";
  }
  return 0;
}

int cmd_truth(const ExperimentSpec& spec, std::ostream& out) {
  const auto seeds = pathline_seeds(spec);
  const auto lines =
      ground_truth_pathlines(make_field(spec), make_loader(spec), seeds, 0, spec.total_cycles, spec.interval);
  const auto path = spec.output_path() / "truth" / "pathlines.csv";
  write_file(path, pathlines_csv(lines));
  out << "truth: " << lines.size() << " pathlines -> " << path.string() << "\n";
  return 0;
}

MetricsRow base_row(const FlowMapDataset& ds, const std::map<Strategy, double>& bench) {
  MetricsRow row;
  const double nan = std::nan("");
  row.interval = ds.config.interval;
  row.reduction = ds.config.reduction;
  row.strategy = to_string(ds.config.strategy);
  row.ranks = ds.config.decomp.rank_count();
  row.bto_s = bench.count(Strategy::Bto) ? bench.at(Strategy::Bto) : nan;
  row.exchange_s = bench.count(Strategy::Exchange) ? bench.at(Strategy::Exchange) : nan;
  row.speedup = row.exchange_s / row.bto_s;
  row.discarded_pct = row.greatest_max_l2 = row.avg_max_l2 = row.total_avg_l2 = row.accuracy_pct = nan;
  return row;
}

void fill_accuracy(MetricsRow& row, const AccuracyReport& rep) {
  row.greatest_max_l2 = rep.greatest_max_l2;
  row.avg_max_l2 = rep.avg_max_l2;
  row.total_avg_l2 = rep.total_avg_l2;
  row.accuracy_pct = rep.accuracy_pct;
}

int cmd_metrics(const ExperimentSpec& spec, std::ostream& out) {
  const Strategy ref_strategy =
      std::find(spec.strategies.begin(), spec.strategies.end(), Strategy::Exchange) != spec.strategies.end()
          ? Strategy::Exchange
          : spec.strategies.front();
  const LoadedRun ref = read_run(run_dir(spec, ref_strategy));
  const auto bench = read_bench_summary(spec);
  std::vector<MetricsRow> rows;
  for (Strategy s : spec.strategies) {
    const LoadedRun run = s == ref_strategy ? LoadedRun{} : read_run(run_dir(spec, s));
    const FlowMapDataset& ds = s == ref_strategy ? ref.dataset : run.dataset;
    MetricsRow row = base_row(ds, bench);
    if (spec.wants_metric("discard")) row.discarded_pct = discarded_pct(ds);
    if (spec.wants_metric("accuracy")) {
      const AccuracyReport rep = compare_datasets(ref.dataset, ds, spec.recon_mode);
      fill_accuracy(row, rep);
      write_file(spec.output_path() / (std::string("accuracy_") + to_string(s) + ".csv"),
                 interval_accuracy_csv(rep.per_interval));
    }
    rows.push_back(row);
  }
  emit_metrics(rows, spec.output_path() / "metrics.csv");

  if (spec.wants_metric("pathline")) {
    const auto seeds = pathline_seeds(spec);
    const auto truth =
        ground_truth_pathlines(make_field(spec), make_loader(spec), seeds, 0, spec.total_cycles, spec.interval);
    std::string csv = "strategy,mode,seeds,compared,mean_l2,mean_common_samples\n";
    for (Strategy s : spec.strategies) {
      const LoadedRun run = read_run(run_dir(spec, s));
      const Reconstructor recon(run.dataset, spec.recon_mode);
      double sum = 0, common = 0;
      std::size_t compared = 0;
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        const Pathline line = trace_pathline(recon, seeds[i], 0, run.dataset.config.interval_count());
        if (line.samples.empty() || truth[i].samples.empty()) continue;
        const auto e = pathline_error(line, truth[i]);
        sum += e.mean_l2;
        common += static_cast<double>(e.common_samples);
        ++compared;
      }
      csv += std::string(to_string(s)) + ',' + to_string(spec.recon_mode) + ',' + std::to_string(seeds.size()) + ',' +
             std::to_string(compared) + ',' + format_metric(compared ? sum / compared : std::nan("")) + ',' +
             format_metric(compared ? common / compared : std::nan("")) + '\n';
    }
    write_file(spec.output_path() / "pathline_errors.csv", csv);
  }
  out << metrics_csv(rows);
  return 0;
}

int cmd_ftle(const ExperimentSpec& spec, int interval, std::ostream& out) {
  if (interval < 0 || interval >= spec.total_cycles / spec.interval)
    throw Error(ErrorCode::ValidationError, "--interval must name an existing interval");
  for (Strategy s : spec.strategies) {
    const LoadedRun run = read_run(run_dir(spec, s));
    FillReport fill;
    const LatticeMap map = global_lattice_map(run.dataset, interval, &fill);
    const SeedLattice lattice = SeedLattice::for_decomposition(run.dataset.config.decomp, run.dataset.config.reduction);
    const FtleField f =
        compute_ftle(map, lattice_spacing(run.dataset, lattice), spec.interval * spec.field.cycle_dt);
    const auto path = run_dir(spec, s) / numbered("ftle_i", interval, ".lsfd");
    write_scalar_field(f, path);
    out << to_string(s) << ": FTLE over " << f.values.size() << " nodes (" << fill.filled << " filled, "
        << fill.unfillable << " copied, " << f.degenerate << " degenerate) -> " << path.string() << "\n";
  }
  return 0;
}

int cmd_bench(const ExperimentSpec& spec, std::ostream& out) {
  const auto dir = spec.output_path() / "bench";
  std::string summary = "strategy,repetition,mean_cycle_s\n";
  std::map<Strategy, double> mean;
  for (int rep = 0; rep < spec.bench_repetitions; ++rep)
    for (Strategy s : spec.strategies) {
      ExtractionConfig c = make_extraction_config(spec, s);
      c.record_timing = true;
      const FlowMapDataset ds = run_extraction(c);
      const double t = mean_cycle_seconds(ds.timing);
      mean[s] += t / spec.bench_repetitions;
      write_file(dir / (std::string("timing_") + to_string(s) + numbered("_r", rep, ".csv")), timing_csv(ds.timing));
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.9g", t);
      summary += std::string(to_string(s)) + ',' + std::to_string(rep) + ',' + buf + '\n';
    }
  write_file(dir / "summary.csv", summary);
  for (const auto& [s, t] : mean) out << to_string(s) << ": mean per-cycle time " << format_metric(t) << " s\n";
  if (mean.count(Strategy::Bto) && mean.count(Strategy::Exchange))
    out << "speed-up " << format_metric(mean[Strategy::Exchange] / mean[Strategy::Bto])
        << " (desk-scale, not paper-scale)\n";
  return 0;
}

int cmd_compare(const fs::path& a, const fs::path& b, std::optional<ReconMode> mode, const std::string& out_path,
                std::ostream& out) {
  const LoadedRun ref = read_run(a);
  const LoadedRun cand = read_run(b);
  const ReconMode m = mode.value_or(cand.spec.recon_mode);
  const AccuracyReport rep = compare_datasets(ref.dataset, cand.dataset, m);
  MetricsRow row = base_row(cand.dataset, {});
  row.discarded_pct = discarded_pct(cand.dataset);
  fill_accuracy(row, rep);
  const std::vector<MetricsRow> rows{row};
  if (!out_path.empty()) emit_metrics(rows, out_path);
  out << metrics_csv(rows);
  return 0;
}

}  // namespace

void write_run(const FlowMapDataset& ds, const ExperimentSpec& spec, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t k = 0; k < ds.sets.size(); ++k)
    for (const auto& set : ds.sets[k])
      write_basis_flows(set, dir / numbered("interval_", static_cast<int>(k)) / numbered("rank_", set.rank, ".lbfm"));
  write_file(dir / "stats.csv", stats_csv(ds));
  write_file(dir / "messages.csv", messages_csv(ds.message_log));

  ordered_json prov;
  prov["spec"] = ordered_json::parse(serialize_spec(portable(spec)));
  prov["strategy"] = to_string(ds.config.strategy);
  prov["ranks"] = ds.config.decomp.rank_count();
  prov["intervals"] = ds.sets.size();
  prov["abc_period"] = effective_period(spec);
  prov["stage_time"] = spec.field.kind == FieldKind::Gridded ? "frozen cycle snapshot" : "exact analytic time";
  FlowStats total;
  for (int k = 0; k < static_cast<int>(ds.sets.size()); ++k) {
    const auto s = ds.interval_stats(k);
    total.seeded += s.seeded;
    total.stored += s.stored;
    total.discarded += s.discarded;
    total.terminated_boundary += s.terminated_boundary;
    total.exited_domain += s.exited_domain;
  }
  prov["totals"] = {{"seeded", total.seeded},
                    {"stored", total.stored},
                    {"discarded", total.discarded},
                    {"terminated_boundary", total.terminated_boundary},
                    {"exited_domain", total.exited_domain},
                    {"messages", ds.total_messages()}};
  write_file(dir / "provenance.json", prov.dump(2) + "\n");
}

LoadedRun read_run(const fs::path& dir) {
  const auto prov_path = dir / "provenance.json";
  if (!fs::exists(prov_path)) throw Error(ErrorCode::IoError, "not a run directory (no provenance.json): " + dir.string());
  ordered_json prov;
  try {
    prov = ordered_json::parse(read_file(prov_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, prov_path.string() + ": " + e.what());
  }
  LoadedRun run;
  run.spec = parse_spec(prov.at("spec").dump(), dir);
  const Strategy strategy = parse_strategy(prov.at("strategy").get<std::string>());
  run.dataset.config = make_extraction_config(run.spec, strategy);
  const int ranks = run.dataset.config.decomp.rank_count();
  const int intervals = run.dataset.config.interval_count();
  const auto stats = parse_stats_csv(read_file(dir / "stats.csv"));
  run.dataset.sets.resize(static_cast<std::size_t>(intervals));
  for (int k = 0; k < intervals; ++k)
    for (int r = 0; r < ranks; ++r) {
      BasisFlowSet set = read_basis_flows(dir / numbered("interval_", k) / numbered("rank_", r, ".lbfm"));
      if (set.strategy != strategy || set.rank != r || set.interval_index != k)
        throw Error(ErrorCode::ParseError, "basis-flow file header disagrees with its location in " + dir.string());
      if (static_cast<std::size_t>(k) < stats.size() && static_cast<std::size_t>(r) < stats[k].size())
        set.stats = stats[k][r];
      run.dataset.sets[static_cast<std::size_t>(k)].push_back(std::move(set));
    }
  run.dataset.message_log = parse_messages_csv(read_file(dir / "messages.csv"));
  return run;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lagrangian flow-map extraction with boundary termination"};
  app.require_subcommand(1);

  std::string spec_path;
  auto* extract = app.add_subcommand("extract", "run extraction for every strategy in the spec");
  extract->add_option("spec", spec_path, "experiment spec (JSON)")->required();

  std::string mode_name = "gridfill";
  auto* reconstruct = app.add_subcommand("reconstruct", "stitch pathlines from stored basis flows");
  reconstruct->add_option("spec", spec_path, "experiment spec (JSON)")->required();
  reconstruct->add_option("--mode", mode_name, "delaunay or gridfill")->check(CLI::IsMember({"delaunay", "gridfill"}));

  auto* metrics = app.add_subcommand("metrics", "accuracy and discard metrics against the exchange run");
  metrics->add_option("spec", spec_path, "experiment spec (JSON)")->required();

  int interval = 0;
  auto* ftle = app.add_subcommand("ftle", "FTLE field of one interval");
  ftle->add_option("spec", spec_path, "experiment spec (JSON)")->required();
  ftle->add_option("--interval", interval, "interval index")->required();

  auto* bench = app.add_subcommand("bench", "time extraction per cycle");
  bench->add_option("spec", spec_path, "experiment spec (JSON)")->required();

  auto* truth = app.add_subcommand("truth", "ground-truth pathlines by full-resolution RK4");
  truth->add_option("spec", spec_path, "experiment spec (JSON)")->required();

  std::string run_a, run_b, compare_out, compare_mode;
  auto* compare = app.add_subcommand("compare", "accuracy of run B reconstructed against run A");
  compare->add_option("run_a", run_a, "reference run directory")->required();
  compare->add_option("run_b", run_b, "candidate run directory")->required();
  compare->add_option("--mode", compare_mode, "delaunay or gridfill")->check(CLI::IsMember({"delaunay", "gridfill"}));
  compare->add_option("--out", compare_out, "also write the CSV here");

  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "reserved");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (compare->parsed()) {
      std::optional<ReconMode> m;
      if (!compare_mode.empty()) m = parse_recon_mode(compare_mode);
      return cmd_compare(run_a, run_b, m, compare_out, out);
    }
    const ExperimentSpec spec = load_spec(spec_path);
    if (extract->parsed()) return cmd_extract(spec, out);
    if (reconstruct->parsed()) return cmd_reconstruct(spec, parse_recon_mode(mode_name), out);
    if (metrics->parsed()) return cmd_metrics(spec, out);
    if (ftle->parsed()) return cmd_ftle(spec, interval, out);
    if (bench->parsed()) return cmd_bench(spec, out);
    if (truth->parsed()) return cmd_truth(spec, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::ParseError:
      case ErrorCode::ValidationError:
      case ErrorCode::InvalidArgument: return 1;
      default: return 2;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace lbto
