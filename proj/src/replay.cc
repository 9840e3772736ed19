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

#include "streamgate/replay.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "streamgate/bridge_scorer.h"
#include "streamgate/error.h"
#include "streamgate/format.h"
#include "streamgate/log.h"
#include "streamgate/peak_end.h"
#include "streamgate/table_scorer.h"

namespace streamgate {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr TokenId kNoToken = std::numeric_limits<TokenId>::max();

std::string render(const TokenSeq& tokens) {
  std::string out;
  for (TokenId t : tokens) {
    if (!out.empty()) out += ' ';
    out += std::to_string(t);
  }
  return out;
}

ordered_json opt(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json scores_json(const std::optional<JudgeScores>& s) {
  if (!s) return nullptr;
  ordered_json dims = ordered_json::object();
  for (const auto& [name, value] : s->dimensions) dims[name] = value;
  return {{"dimensions", dims}, {"mean", s->mean}};
}

std::optional<JudgeScores> try_judge(Judge& judge, JudgeTask task, const std::string& resp,
                                     const std::string& ref) {
  try {
    return judge.score(task, resp, ref);
  } catch (const InvalidArgument& e) {
    log().warn("judge skipped: {}", e.what());
    return std::nullopt;
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write " + path.string());
  f << content;
  if (!f) throw InvalidArgument("write failed: " + path.string());
}

}  // namespace

void validate(const RunConfig& c) {
  if (!std::isfinite(c.alpha) || c.alpha < 1.0) {
    throw InvalidArgument("--alpha must be >= 1.0, got " + format_double(c.alpha));
  }
  if (c.window_frames < 1) throw InvalidArgument("--window-frames must be >= 1");
  if (c.pool_size < 1) throw InvalidArgument("--pool-size must be >= 1");
  if (c.tokens_per_frame < 1) throw InvalidArgument("--tokens-per-frame must be >= 1");
  if (!std::isfinite(c.fps) || c.fps <= 0.0) throw InvalidArgument("--fps must be positive");
  if (c.max_generation_len < 1) throw InvalidArgument("max generation length must be >= 1");
  if (c.context_budget < static_cast<std::size_t>(c.tokens_per_frame + c.max_generation_len)) {
    throw InvalidArgument("--context-budget cannot hold one frame and one caption");
  }
  if (c.scorer.rfind("reference:", 0) != 0 && c.scorer.rfind("bridge:", 0) != 0) {
    throw InvalidArgument("--scorer must be reference:PATH or bridge:ENDPOINT, got '" +
                          c.scorer + "'");
  }
}

std::filesystem::path auto_scenario_path(const std::filesystem::path& trace_path) {
  std::filesystem::path p = trace_path;
  p.replace_extension(".scenario.json");
  return p;
}

std::unique_ptr<Scorer> make_scorer(const RunConfig& config,
                                    const std::filesystem::path& trace_path) {
  if (config.scorer.rfind("reference:", 0) == 0) {
    std::string path = config.scorer.substr(10);
    if (path.empty() || path == "auto") path = auto_scenario_path(trace_path).string();
    if (!std::filesystem::exists(path)) {
      throw InvalidArgument("cannot open scenario file: " + path);
    }
    return std::make_unique<TableScorer>(Scenario::load(path));
  }
  if (config.scorer.rfind("bridge:", 0) == 0) {
    BridgeOptions opts;
    opts.max_generation_len = config.max_generation_len;
    opts.context_limit = config.context_budget;
    return BridgeScorer::open(config.scorer.substr(7), opts);
  }
  throw InvalidArgument("unknown scorer '" + config.scorer + "'");
}

std::optional<double> teacher_forced_accuracy(const Trace& trace, Scorer& scorer) {
  TokenSeq predicted;
  TokenSeq reference;
  const std::size_t limit = scorer.config().context_limit;
  for (const SemanticClip& clip : trace.timeline.clips) {
    auto it = trace.caption_tokens.find(clip.clip_id);
    if (it == trace.caption_tokens.end() || it->second.empty() || it->second[0].empty()) {
      continue;
    }
    const TokenSeq& ref = it->second[0];
    TokenSeq ctx;
    const FrameBlock* first = nullptr;
    for (const FrameBlock& f : trace.frames) {
      if (!clip.contains(f.timestamp_s)) continue;
      if (first == nullptr) first = &f;
      if (f.timestamp_s <= clip.anchor_s + kTimeEpsilon) {
        ctx.insert(ctx.end(), f.tokens.begin(), f.tokens.end());
      }
    }
    if (first == nullptr) continue;
    if (ctx.empty()) ctx = first->tokens;
    if (ctx.size() + ref.size() > limit) {
      const std::size_t keep = limit > ref.size() ? limit - ref.size() : 0;
      ctx.erase(ctx.begin(), ctx.end() - static_cast<std::ptrdiff_t>(std::min(keep, ctx.size())));
    }
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const Generation g = scorer.generate(ctx, 1);
      predicted.push_back(g.tokens.empty() ? kNoToken : g.tokens[0]);
      reference.push_back(ref[i]);
      ctx.push_back(ref[i]);
    }
  }
  if (reference.empty()) return std::nullopt;
  return token_accuracy(predicted, reference);
}

RunResult run_session(const RunConfig& config, const Trace& trace, Scorer& scorer,
                      Judge& judge) {
  validate(config);
  SvedConfig sc;
  sc.alpha = config.alpha;
  sc.tokens_per_frame = config.tokens_per_frame;
  sc.context_budget = config.context_budget;
  sc.max_generation_len = std::min(config.max_generation_len, scorer.config().max_generation_len);
  sc.use_cache = config.use_cache;
  sc.scam_at_inference = config.scam_at_inference;

  PeakEndConfig pc;
  pc.window_frames = config.window_frames;
  pc.fps = config.fps;
  validate(pc);

  RunResult out;
  SvedSession session(sc);
  Rng prune_rng = Rng::stream(config.seed, "pruning");

  for (const FrameBlock& frame : trace.frames) {
    if (frame.tokens.size() != static_cast<std::size_t>(config.tokens_per_frame)) {
      throw TraceError(0, "frame " + std::to_string(frame.frame_index) + " has " +
                              std::to_string(frame.tokens.size()) +
                              " tokens, --tokens-per-frame is " +
                              std::to_string(config.tokens_per_frame));
    }
    try {
      session.ingest(frame, scorer);
    } catch (const BudgetExceeded&) {
      PruneEvent e = session.prune(pc, prune_rng, frame.timestamp_s);
      log().info("t={} pruned {} frames", format_double(frame.timestamp_s),
                 e.pruned_frames.size());
      out.events.push_back(to_json_line(e));
      out.prunes.push_back(std::move(e));
      try {
        session.ingest(frame, scorer);
      } catch (const BudgetExceeded& again) {
        throw InvariantError("frame " + std::to_string(frame.frame_index) +
                             ": context budget exceeded after prune (" + again.what() + ")");
      }
    }
    out.events.push_back(to_json_line(session.decisions().back()));
    ++out.frames;
  }
  out.decisions = session.decisions();
  out.responses = session.finalize();
  out.cache = session.state().cache.stats();

  if (!trace.timeline.empty()) {
    out.timing = score_timing(response_times(out.responses), trace.timeline,
                              config.diff_reference);
    out.tok_acc = teacher_forced_accuracy(trace, scorer);

    out.judge_name = judge.name();
    std::string all_resp;
    std::string all_ref;
    for (std::size_t k = 0; k < trace.timeline.clips.size(); ++k) {
      const SemanticClip& clip = trace.timeline.clips[k];
      std::string resp;
      for (const ResponseEntry& r : out.responses) {
        if (!clip.contains(r.t)) continue;
        if (!resp.empty()) resp += ' ';
        resp += render(r.tokens);
      }
      const std::string& ref = clip.caption_pool.front();
      out.semcor.push_back({clip.clip_id, try_judge(judge, JudgeTask::kSemCor, resp, ref)});
      if (!all_ref.empty()) all_ref += ' ';
      all_ref += ref;
    }
    for (const ResponseEntry& r : out.responses) {
      if (!all_resp.empty()) all_resp += ' ';
      all_resp += render(r.tokens);
    }
    out.sumfluen = try_judge(judge, JudgeTask::kSumFluen, all_resp, all_ref);
  }
  return out;
}

std::string report_json(const RunConfig& c, const RunResult& r) {
  ordered_json config = {{"alpha", c.alpha},
                         {"window_frames", c.window_frames},
                         {"pool_size", c.pool_size},
                         {"tokens_per_frame", c.tokens_per_frame},
                         {"fps", c.fps},
                         {"context_budget", c.context_budget},
                         {"scorer", c.scorer},
                         {"seed", c.seed},
                         {"max_generation_len", c.max_generation_len},
                         {"use_cache", c.use_cache},
                         {"scam_at_inference", c.scam_at_inference},
                         {"diff_reference",
                          c.diff_reference == DiffReference::kAnchor ? "anchor" : "start"}};
  ordered_json per_scene = ordered_json::array();
  if (r.timing) {
    for (std::size_t k = 0; k < r.timing->per_scene.size(); ++k) {
      const SceneScore& s = r.timing->per_scene[k];
      per_scene.push_back({{"clip_id", s.clip_id},
                           {"t_start", s.t_start},
                           {"t_end", s.t_end},
                           {"anchor", s.anchor},
                           {"responses", s.responses},
                           {"orphans", s.orphans},
                           {"diff", s.diff},
                           {"redundant", s.redundant},
                           {"covered", s.covered},
                           {"semcor", scores_json(r.semcor.at(k).semcor)}});
    }
  }
  ordered_json report = {
      {"config", config},
      {"frames", r.frames},
      {"responses", r.responses.size()},
      {"prunes", r.prunes.size()},
      {"tim_diff", r.timing ? ordered_json(r.timing->tim_diff) : ordered_json(nullptr)},
      {"tim_redun", r.timing ? ordered_json(r.timing->tim_redun) : ordered_json(nullptr)},
      {"tim_cover", r.timing ? ordered_json(r.timing->tim_cover) : ordered_json(nullptr)},
      {"tok_acc", opt(r.tok_acc)},
      {"per_scene", per_scene},
      {"judge",
       {{"client", r.judge_name.empty() ? ordered_json(nullptr) : ordered_json(r.judge_name)},
        {"sumfluen", scores_json(r.sumfluen)}}},
      {"cache",
       {{"tokens_scored_total", r.cache.tokens_scored_total},
        {"tokens_served_from_cache", r.cache.tokens_served_from_cache},
        {"recompute_ratio", r.cache.recompute_ratio()}}}};
  return report.dump(2) + "\n";
}

std::string per_scene_csv(const RunResult& r) {
  std::ostringstream out;
  out << "clip_id,t_start,t_end,anchor,responses,orphans,diff,redundant,covered,semcor\n";
  if (!r.timing) return out.str();
  for (std::size_t k = 0; k < r.timing->per_scene.size(); ++k) {
    const SceneScore& s = r.timing->per_scene[k];
    const auto& j = r.semcor.at(k).semcor;
    out << s.clip_id << ',' << format_double(s.t_start) << ',' << format_double(s.t_end) << ','
        << format_double(s.anchor) << ',' << s.responses.size() << ',' << s.orphans.size()
        << ',' << format_double(s.diff) << ',' << format_double(s.redundant) << ','
        << (s.covered ? 1 : 0) << ',' << (j ? format_double(j->mean) : "") << '\n';
  }
  return out.str();
}

std::string responses_ndjson(const RunResult& r) {
  std::string out;
  for (const ResponseEntry& e : r.responses) {
    const ordered_json j = {{"t", e.t},
                            {"frame_index", e.frame_index},
                            {"kind", e.kind == ResponseKind::kInitial ? "initial" : "redecode"},
                            {"tokens", e.tokens},
                            {"ppl", e.ppl}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_artifacts(const RunConfig& config, const RunResult& result,
                     const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::string events;
  for (const std::string& line : result.events) {
    events += line;
    events += '\n';
  }
  write_file(out_dir / "events.ndjson", events);
  write_file(out_dir / "responses.ndjson", responses_ndjson(result));
  write_file(out_dir / "report.json", report_json(config, result));
  write_file(out_dir / "per_scene.csv", per_scene_csv(result));
}

RunResult run_replay(const RunConfig& config, const std::filesystem::path& trace_path,
                     const std::filesystem::path& out_dir) {
  validate(config);
  ParsedTrace parsed = parse_trace(trace_path);
  for (const std::string& w : parsed.warnings) log().warn("{}: {}", trace_path.string(), w);
  std::unique_ptr<Scorer> scorer = make_scorer(config, trace_path);
  OverlapJudge judge;
  RunResult result = run_session(config, parsed.trace, *scorer, judge);
  write_artifacts(config, result, out_dir);
  return result;
}

std::vector<SweepRow> run_sweep(const RunConfig& base, const SweepGrid& grid, int jobs) {
  if (grid.alphas.empty() || grid.windows.empty()) throw InvalidArgument("empty sweep grid");
  if (grid.traces.empty()) throw InvalidArgument("empty trace set");
  if (jobs < 1) throw InvalidArgument("--jobs must be >= 1");
  for (double a : grid.alphas) {
    RunConfig c = base;
    c.alpha = a;
    validate(c);
  }
  for (int w : grid.windows) {
    RunConfig c = base;
    c.window_frames = w;
    validate(c);
  }

  // Traces are parsed once; scorers that allow concurrent use are shared.
  struct Loaded {
    std::optional<Trace> trace;
    std::shared_ptr<Scorer> shared;
    std::string error;
  };
  std::vector<Loaded> loaded(grid.traces.size());
  for (std::size_t i = 0; i < grid.traces.size(); ++i) {
    try {
      loaded[i].trace = parse_trace(grid.traces[i]).trace;
      std::unique_ptr<Scorer> s = make_scorer(base, grid.traces[i]);
      if (s->config().concurrent) loaded[i].shared = std::move(s);
    } catch (const std::exception& e) {
      loaded[i].error = e.what();
    }
  }

  const std::size_t per_trace = grid.alphas.size() * grid.windows.size();
  std::vector<SweepRow> rows(grid.traces.size() * per_trace);
  const auto total = static_cast<std::int64_t>(rows.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (std::int64_t idx = 0; idx < total; ++idx) {
    const auto u = static_cast<std::size_t>(idx);
    const std::size_t t = u / per_trace;
    const std::size_t a = (u % per_trace) / grid.windows.size();
    const std::size_t w = u % grid.windows.size();
    SweepRow& row = rows[u];
    row.trace = grid.traces[t].string();
    row.alpha = grid.alphas[a];
    row.window_frames = grid.windows[w];
    if (!loaded[t].trace) {
      row.error = loaded[t].error;
      continue;
    }
    try {
      RunConfig c = base;
      c.alpha = row.alpha;
      c.window_frames = row.window_frames;
      std::shared_ptr<Scorer> scorer = loaded[t].shared;
      if (!scorer) scorer = make_scorer(c, grid.traces[t]);
      OverlapJudge judge;
      const RunResult r = run_session(c, *loaded[t].trace, *scorer, judge);
      row.ok = true;
      row.frames = r.frames;
      row.responses = r.responses.size();
      row.prunes = r.prunes.size();
      if (r.timing) {
        row.tim_diff = r.timing->tim_diff;
        row.tim_redun = r.timing->tim_redun;
        row.tim_cover = r.timing->tim_cover;
      }
      row.tok_acc = r.tok_acc;
      row.recompute_ratio = r.cache.recompute_ratio();
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : ""; };
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  };
  std::ostringstream out;
  out << "trace,alpha,window_frames,status,frames,responses,prunes,tim_diff,tim_redun,"
         "tim_cover,tok_acc,recompute_ratio,error\n";
  for (const SweepRow& r : rows) {
    out << quote(r.trace) << ',' << format_double(r.alpha) << ',' << r.window_frames << ','
        << (r.ok ? "ok" : "error") << ',' << r.frames << ',' << r.responses << ',' << r.prunes
        << ',' << cell(r.tim_diff) << ',' << cell(r.tim_redun) << ',' << cell(r.tim_cover)
        << ',' << cell(r.tok_acc) << ',' << (r.ok ? format_double(r.recompute_ratio) : "")
        << ',' << (r.error.empty() ? "" : quote(r.error)) << '\n';
  }
  return out.str();
}

}  // namespace streamgate
