// Copyright 2026 The StreamGate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// streamgate: replay traces through the response/silence gate, sweep gate
// parameters, export training sequences and generate scripted streams.
//
// Exit codes: 0 ok, 2 usage or config, 3 trace, 4 scorer, 5 internal.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "streamgate/datagen.h"
#include "streamgate/error.h"
#include "streamgate/format.h"
#include "streamgate/log.h"
#include "streamgate/replay.h"
#include "streamgate/synth.h"

namespace {

using streamgate::RunConfig;

void add_run_flags(CLI::App* cmd, RunConfig& c, std::string& diff_ref, bool& no_cache) {
  cmd->add_option("--window-frames", c.window_frames, "Peak-end window W in frames");
  cmd->add_option("--pool-size", c.pool_size, "Caption pool size M");
  cmd->add_option("--tokens-per-frame", c.tokens_per_frame, "Tokens per frame block");
  cmd->add_option("--fps", c.fps, "Frame rate of the trace");
  cmd->add_option("--context-budget", c.context_budget, "Context budget in tokens");
  cmd->add_option("--scorer", c.scorer,
                  "reference:PATH | reference:auto | bridge:tcp://HOST:PORT | bridge:cmd:CMD");
  cmd->add_option("--seed", c.seed, "Root seed for all random streams");
  cmd->add_option("--max-generation-len", c.max_generation_len, "Caption length cap");
  cmd->add_flag("--no-cache", no_cache, "Disable the streaming cache");
  cmd->add_flag("--scam-at-inference", c.scam_at_inference,
                "Pass the streaming causal mask to the scorer");
  cmd->add_option("--diff-reference", diff_ref, "anchor | start")
      ->check(CLI::IsMember({"anchor", "start"}));
}

void finish_config(RunConfig& c, const std::string& diff_ref, bool no_cache) {
  c.use_cache = !no_cache;
  c.diff_reference = diff_ref == "start" ? streamgate::DiffReference::kSceneStart
                                         : streamgate::DiffReference::kAnchor;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming response/silence decoding harness"};
  app.require_subcommand(1);

  RunConfig config;
  std::string diff_ref = "anchor";
  bool no_cache = false;
  std::string out_dir = "out";

  auto* replay = app.add_subcommand("replay", "Run one trace end to end");
  std::string trace;
  replay->add_option("trace", trace, "Trace file (NDJSON)")->required();
  replay->add_option("--alpha", config.alpha, "Gate scaling factor (>= 1)");
  replay->add_option("--out-dir", out_dir, "Artifact directory");
  add_run_flags(replay, config, diff_ref, no_cache);

  auto* sweep = app.add_subcommand("sweep", "Grid of alpha x window over traces");
  std::vector<std::string> traces;
  std::vector<double> alphas = {config.alpha};
  std::vector<int> windows = {config.window_frames};
  int jobs = 1;
  sweep->add_option("traces", traces, "Trace files")->required();
  sweep->add_option("--alpha", alphas, "Comma-separated alpha list")->delimiter(',');
  sweep->add_option("--window-frames", windows, "Comma-separated window list")
      ->delimiter(',');
  sweep->add_option("--jobs", jobs, "Parallel runs");
  sweep->add_option("--out-dir", out_dir, "Directory for sweep.csv");
  {
    // Shared flags apart from the list-valued ones above.
    RunConfig& c = config;
    sweep->add_option("--pool-size", c.pool_size, "Caption pool size M");
    sweep->add_option("--tokens-per-frame", c.tokens_per_frame, "Tokens per frame block");
    sweep->add_option("--fps", c.fps, "Frame rate of the traces");
    sweep->add_option("--context-budget", c.context_budget, "Context budget in tokens");
    sweep->add_option("--scorer", c.scorer, "Scorer spec, see replay --help");
    sweep->add_option("--seed", c.seed, "Root seed");
    sweep->add_option("--max-generation-len", c.max_generation_len, "Caption length cap");
    sweep->add_flag("--no-cache", no_cache, "Disable the streaming cache");
  }

  auto* datagen = app.add_subcommand("datagen", "Export training sequences");
  streamgate::DatagenConfig dg;
  std::string dg_trace;
  datagen->add_option("trace", dg_trace, "Trace file (NDJSON)")->required();
  datagen->add_option("--pool-size", dg.pool_size, "Caption pool size M");
  datagen->add_option("--context-budget", dg.context_budget, "Tokens per sequence");
  datagen->add_option("--seed", dg.seed, "Root seed");
  datagen->add_option("--out-dir", out_dir, "Output directory");

  auto* synth = app.add_subcommand("synth", "Write a scripted trace and scenario");
  std::string kind = "two-clip";
  std::uint64_t synth_seed = 0;
  int frames = 1800;
  std::string stem;
  synth->add_option("--kind", kind, "two-clip | monotone | long")
      ->check(CLI::IsMember({"two-clip", "monotone", "long"}));
  synth->add_option("--seed", synth_seed, "Seed for randomized kinds");
  synth->add_option("--frames", frames, "Frame count for --kind long");
  synth->add_option("--name", stem, "File stem (default: the kind)");
  synth->add_option("--out-dir", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(streamgate::ExitCode::kUsage);
  }

  try {
    if (replay->parsed()) {
      finish_config(config, diff_ref, no_cache);
      const auto r = streamgate::run_replay(config, trace, out_dir);
      std::cerr << "frames=" << r.frames << " responses=" << r.responses.size()
                << " prunes=" << r.prunes.size() << " -> " << out_dir << "\n";
    } else if (sweep->parsed()) {
      finish_config(config, diff_ref, no_cache);
      streamgate::SweepGrid grid{alphas, windows, {}};
      for (const auto& t : traces) grid.traces.emplace_back(t);
      const auto rows = streamgate::run_sweep(config, grid, jobs);
      std::filesystem::create_directories(out_dir);
      const std::filesystem::path path = std::filesystem::path(out_dir) / "sweep.csv";
      std::ofstream f(path, std::ios::binary);
      f << streamgate::sweep_csv(rows);
      if (!f) throw streamgate::InvalidArgument("cannot write " + path.string());
      std::size_t failed = 0;
      for (const auto& r : rows) failed += r.ok ? 0 : 1;
      std::cerr << rows.size() << " rows (" << failed << " failed) -> " << path.string()
                << "\n";
    } else if (datagen->parsed()) {
      const auto parsed = streamgate::parse_trace(dg_trace);
      const auto result = streamgate::build_training_sequences(parsed.trace, dg);
      const auto paths = streamgate::write_sequences(result, out_dir);
      std::cerr << paths.size() << " sequences -> " << out_dir << "\n";
    } else if (synth->parsed()) {
      streamgate::ScriptConfig sc;
      if (kind == "two-clip") {
        sc = streamgate::two_clip_config();
      } else if (kind == "monotone") {
        streamgate::Rng rng = streamgate::Rng::stream(synth_seed, "synth");
        sc = streamgate::random_monotone_config(rng);
      } else {
        sc = streamgate::long_stream_config(synth_seed, frames);
      }
      const auto stream = streamgate::make_scripted_stream(sc);
      streamgate::write_scripted_stream(stream, out_dir, stem.empty() ? kind : stem);
    }
  } catch (const streamgate::Error& e) {
    streamgate::log().error("{}", e.what());
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    streamgate::log().error("internal error: {}", e.what());
    return static_cast<int>(streamgate::ExitCode::kInternal);
  }
  return 0;
}
