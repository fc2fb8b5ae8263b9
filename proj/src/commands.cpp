#include "earncast/commands.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "earncast/error.hpp"

namespace earncast {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  return out;
}

void write_artifacts(const SubsetResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_model(r.model, dir / "model.txt");
  save_pca(r.pca, dir / "pca.txt");
  {
    auto out = open_out(dir / "fill.jsonl");
    write_fill_report(r.fill, out);
  }
  {
    auto out = open_out(dir / "trials.jsonl");
    write_trials(r.trials, out);
  }
}

std::string subset_dir_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", index);
  return buf;
}

}  // namespace

std::filesystem::path cmd_synth(const ExperimentConfig& config) {
  const auto dir = config.resolve(config.synth_output_dir);
  write_synthetic(generate_panel(config.synth), dir);
  return dir;
}

PipelineInputs load_inputs(const ExperimentConfig& config) {
  const Schema schema = load_schema(config.resolve(config.schema));
  RawPanel raw = load_panel(config.resolve(config.panel), schema);
  if (!config.companies.empty()) raw = raw.with_meta(load_company_meta(config.resolve(config.companies)));
  std::optional<ConsensusTable> consensus;
  const auto consensus_path = config.resolve(config.consensus);
  if (!config.consensus.empty() && std::filesystem::exists(consensus_path)) {
    consensus = load_consensus(consensus_path);
  }
  return prepare_inputs(schema, raw, config.filters, config.pipeline.variant, std::move(consensus));
}

std::vector<SubsetSplit> select_subsets(const ExperimentConfig& config, const PipelineInputs& inputs) {
  const auto quarters = inputs.panel.quarters();
  auto splits = enumerate_subsets(quarters, config.train_len);
  const auto start = static_cast<std::size_t>(config.subset_start - 1);
  if (start >= splits.size()) {
    throw Error(ErrorKind::kInvalidConfig, "subset_start " + std::to_string(config.subset_start) + " exceeds the " +
                                               std::to_string(splits.size()) + " available subsets");
  }
  auto end = splits.size();
  if (config.max_subsets) end = std::min(end, start + static_cast<std::size_t>(*config.max_subsets));
  return {splits.begin() + static_cast<std::ptrdiff_t>(start), splits.begin() + static_cast<std::ptrdiff_t>(end)};
}

BacktestOutput cmd_backtest(const ExperimentConfig& config,
                            const std::function<void(const SubsetResult&)>& on_done) {
  config.validate();
  const PipelineInputs inputs = load_inputs(config);
  const auto splits = select_subsets(config, inputs);

  BacktestOutput output;
  output.dir = config.resolve(config.output_dir);
  std::filesystem::create_directories(output.dir);
  {
    auto out = open_out(output.dir / "config.txt");
    write_config(config, out);
  }

  const auto echo = config_echo(config);
  auto done = [&](const SubsetResult& r) {
    if (config.save_models) write_artifacts(r, output.dir / "subsets" / subset_dir_name(r.split.index));
    if (on_done) on_done(r);
  };
  const auto results = run_backtest(splits, inputs, config.pipeline, config.jobs, done);

  for (const auto& r : results) output.records.push_back(make_record(r, config.pipeline, echo));
  {
    auto out = open_out(output.dir / "report.jsonl");
    for (const auto& rec : output.records) out << record_to_json(rec) << '\n';
  }
  {
    auto out = open_out(output.dir / "report.txt");
    out << render_report(aggregate_report(output.records));
  }
  return output;
}

std::string cmd_report(const std::filesystem::path& results_dir) {
  const auto path = results_dir / "report.jsonl";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kMissingRecords, "no records at " + path.string());
  const auto records = read_records(in);
  std::string text = render_report(aggregate_report(records));
  auto out = open_out(results_dir / "report.txt");
  out << text;
  return text;
}

}  // namespace earncast
