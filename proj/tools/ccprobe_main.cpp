// ccprobe command-line driver.

#include <CLI11.hpp>

#include <iostream>

#include "ccprobe/errors.hpp"
#include "ccprobe/pipeline.hpp"
#include "ccprobe/report.hpp"
#include "ccprobe/synthetic.hpp"

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kData = 3, kBackend = 4 };

struct CommonFlags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  std::optional<std::size_t> jobs;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("-c,--config", f.config, "key = value config file");
  cmd->add_option("--set", f.sets, "override one config key (key=value), repeatable");
  cmd->add_option("--seed", f.seed, "global seed (required for extract and score)");
  cmd->add_option("-o,--output-dir", f.output_dir, "run directory");
  cmd->add_option("-j,--jobs", f.jobs, "worker threads");
}

ccprobe::RunConfig build_config(const CommonFlags& f) {
  ccprobe::RunConfig config =
      f.config.empty() ? ccprobe::parse_config_text("") : ccprobe::load_config(f.config);
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ccprobe::ConfigError("--set expects key=value, got " + kv);
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) config.seed = *f.seed;
  if (!f.output_dir.empty()) config.output_dir = f.output_dir;
  if (f.jobs) config.jobs = *f.jobs;
  ccprobe::apply_environment(config);
  return config;
}

void print_manifest(const ccprobe::RunManifest& m) {
  for (const auto& s : m.stages) std::cout << s.stage << "\t" << s.counts.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ccprobe: conceptual consistency probing"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ccprobe::kToolVersion));

  CommonFlags common;
  std::string stages = "all";
  auto* run = app.add_subcommand("run", "run the selected stages in order");
  add_common(run, common);
  run->add_option("--stages", stages, "all | stage | a,b | from-to");

  std::vector<std::pair<CLI::App*, ccprobe::Stage>> stage_cmds;
  for (auto s : ccprobe::kAllStages) {
    if (s == ccprobe::Stage::Report) continue;
    auto* cmd = app.add_subcommand(std::string(ccprobe::stage_name(s)),
                                   "run only the " + std::string(ccprobe::stage_name(s)) + " stage");
    add_common(cmd, common);
    stage_cmds.emplace_back(cmd, s);
  }

  std::string report_dir;
  auto* report = app.add_subcommand("report", "write report tables and plots for a run directory");
  add_common(report, common);
  report->add_option("run_dir", report_dir, "run directory (default: output_dir of the config)");

  ccprobe::SynthOptions synth_opts;
  std::string synth_out = "synthetic";
  std::uint64_t synth_run_seed = 7;
  auto* synth = app.add_subcommand("synth", "write a synthetic corpus and run.conf");
  synth->add_option("-o,--out", synth_out, "output directory");
  synth->add_option("--corpus-seed", synth_opts.seed, "generator seed");
  synth->add_option("--run-seed", synth_run_seed, "seed written into run.conf");
  synth->add_option("--concepts", synth_opts.concepts);
  synth->add_option("--edges", synth_opts.edges);
  synth->add_option("--anchors", synth_opts.anchors);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (synth->parsed()) {
      auto files = ccprobe::write_synthetic(ccprobe::generate_synthetic(synth_opts), synth_out,
                                            synth_run_seed);
      std::cout << files.config.string() << "\n";
      return kOk;
    }
    if (report->parsed()) {
      std::filesystem::path dir = report_dir;
      if (dir.empty()) dir = build_config(common).output_dir;
      for (const auto& p : ccprobe::write_report(dir)) std::cout << (dir / p).string() << "\n";
      return kOk;
    }
    auto config = build_config(common);
    if (run->parsed()) {
      config.stages = ccprobe::parse_stage_selection(stages);
    } else {
      for (auto& [cmd, stage] : stage_cmds) {
        if (cmd->parsed()) config.stages = {stage};
      }
    }
    ccprobe::Pipeline pipeline(config);
    print_manifest(pipeline.run());
    return kOk;
  } catch (const ccprobe::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ccprobe::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const ccprobe::BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kBackend;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
}
