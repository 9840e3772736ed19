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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "oracles.h"
#include "streamgate/judge.h"
#include "streamgate/metrics.h"
#include "streamgate/peak_end.h"
#include "streamgate/reference.h"
#include "streamgate/replay.h"
#include "streamgate/scam.h"
#include "streamgate/scorer.h"
#include "streamgate/sved.h"
#include "streamgate/synth.h"
#include "streamgate/table_scorer.h"
#include "test_util.h"

namespace sg = streamgate;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failure.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && out_.pass) {
      out_.pass = false;
      out_.detail = what;
    }
  }
  bool failed() const { return !out_.pass; }
  Outcome done(const std::string& summary) {
    if (out_.pass) out_.detail = summary;
    return out_;
  }

 private:
  Outcome out_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

Outcome scam_oracle() {
  Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto layouts = sg::testing::small_layouts();
  std::size_t cells = 0;
  for (const sg::InterleavedSequence& seq : layouts) {
    const sg::SequenceLayout& layout = seq.layout;
    const sg::AttentionMask mask = sg::build_scam_mask(layout);
    const std::vector<bool> kept = sg::testing::reduced_causal_keep(layout);
    const std::size_t n = layout.size();
    for (std::size_t q = 0; q < n && !c.failed(); ++q) {
      for (std::size_t k = 0; k < n; ++k) {
        ++cells;
        c.expect(mask.allowed(q, k) == sg::testing::rule_allows(layout, q, k),
                 "rule mismatch at (" + std::to_string(q) + "," + std::to_string(k) + ")");
        if (kept[q] && kept[k]) {
          c.expect(mask.allowed(q, k) == (k <= q), "reduced-causal mismatch");
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  c.expect(layouts.size() == 8420, "expected 8420 layouts, got " + std::to_string(layouts.size()));
  c.expect(secs < 5.0, "took " + fmt(secs) + " s");
  return c.done(std::to_string(layouts.size()) + " layouts, " + std::to_string(cells) +
                " cells in " + fmt(secs) + " s");
}

Outcome perplexity_formula() {
  Checker c;
  const double two = sg::perplexity(std::vector<double>{std::log(0.5), std::log(0.5)});
  c.expect(two == 2.0, "perplexity([ln .5, ln .5]) = " + fmt(two));
  sg::Rng rng(2026);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> a(1 + rng.below(50));
    std::vector<double> b(1 + rng.below(50));
    for (double& x : a) x = -5.0 * rng.uniform();
    for (double& x : b) x = -5.0 * rng.uniform();
    std::vector<double> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double expect = std::exp((na * std::log(sg::perplexity(a)) +
                                    nb * std::log(sg::perplexity(b))) / (na + nb));
    const double rel = std::abs(sg::perplexity(ab) - expect) / expect;
    worst = std::max(worst, rel);
  }
  c.expect(worst <= 1e-9, "concatenation identity off by " + fmt(worst));
  return c.done("exact 2.0, worst relative error " + fmt(worst) + " over 1000 pairs");
}

sg::RunResult run_two_clip(const sg::ScriptedStream& s) {
  sg::TableScorer scorer(s.scenario);
  sg::OverlapJudge judge;
  sg::RunConfig config;
  config.alpha = 1.03;
  return sg::run_session(config, s.trace, scorer, judge);
}

Outcome gate_scenario() {
  Checker c;
  const sg::ScriptConfig cfg = sg::two_clip_config();
  const sg::ScriptedStream s = sg::make_scripted_stream(cfg);
  const sg::RunResult first = run_two_clip(s);
  c.expect(first.responses.size() == 2,
           std::to_string(first.responses.size()) + " responses, expected 2");
  for (std::size_t k = 0; k < first.responses.size() && k < 2; ++k) {
    c.expect(std::abs(first.responses[k].t - s.trace.timeline.clips[k].t_start) < 1e-9,
             "response " + std::to_string(k) + " not at its clip onset");
  }
  c.expect(first.timing.has_value(), "no timing scores");
  if (first.timing) {
    c.expect(first.timing->tim_diff <= 1.0 / cfg.fps + 1e-12,
             "tim_diff " + fmt(first.timing->tim_diff));
    c.expect(first.timing->tim_cover == 1.0, "tim_cover " + fmt(first.timing->tim_cover));
    c.expect(first.timing->tim_redun == 0.0, "tim_redun " + fmt(first.timing->tim_redun));
  }
  for (int i = 0; i < 100; ++i) {
    c.expect(run_two_clip(s).decisions == first.decisions, "rerun " + std::to_string(i) +
                                                               " differs");
  }
  return c.done("2 responses at clip onsets, tim_diff " +
                fmt(first.timing ? first.timing->tim_diff : -1) +
                ", cover 1, redun 0, 100 identical reruns");
}

std::size_t response_count(const sg::ScriptedStream& s, int tpf, double alpha) {
  sg::TableScorer scorer(s.scenario);
  sg::SvedConfig cfg;
  cfg.alpha = alpha;
  cfg.tokens_per_frame = tpf;
  sg::SvedSession session(cfg);
  for (const sg::FrameBlock& f : s.trace.frames) session.ingest(f, scorer);
  return session.finalize().size();
}

Outcome gate_monotonicity() {
  Checker c;
  std::size_t flips = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    sg::Rng rng = sg::Rng::stream(seed, "synth");
    const sg::ScriptConfig cfg = sg::random_monotone_config(rng);
    const sg::ScriptedStream s = sg::make_scripted_stream(cfg);
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (int step = 0; step <= 10; ++step) {
      const double alpha = 1.0 + 0.01 * step;
      const std::size_t n = response_count(s, cfg.tokens_per_frame, alpha);
      c.expect(n <= prev, "trace " + std::to_string(seed) + ": count rises at alpha " +
                              fmt(alpha));
      if (n < prev && step > 0) ++flips;
      prev = n;
    }
  }
  return c.done("50 traces x 11 alphas, non-increasing (" + std::to_string(flips) +
                " strict drops)");
}

Outcome cache_semantics() {
  Checker c;
  std::vector<std::pair<sg::ScriptConfig, std::string>> configs = {
      {sg::two_clip_config(), "two-clip"}, {sg::long_stream_config(7, 600), "long"}};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    sg::Rng rng = sg::Rng::stream(seed, "synth");
    configs.emplace_back(sg::random_monotone_config(rng), "monotone-" + std::to_string(seed));
  }
  double worst = 0.0;
  for (const auto& [cfg, name] : configs) {
    const sg::ScriptedStream s = sg::make_scripted_stream(cfg);
    sg::TableScorer scorer(s.scenario);
    sg::OverlapJudge judge;
    for (double alpha : {1.0, 1.03, 1.1}) {
      sg::RunConfig run;
      run.alpha = alpha;
      run.tokens_per_frame = cfg.tokens_per_frame;
      run.use_cache = true;
      const sg::RunResult on = sg::run_session(run, s.trace, scorer, judge);
      run.use_cache = false;
      const sg::RunResult off = sg::run_session(run, s.trace, scorer, judge);
      c.expect(on.decisions == off.decisions && on.prunes == off.prunes,
               name + ": cached decisions differ at alpha " + fmt(alpha));
      if (s.trace.frames.size() >= 2) {
        c.expect(on.cache.recompute_ratio() < 1.0,
                 name + ": recompute_ratio " + fmt(on.cache.recompute_ratio()));
        worst = std::max(worst, on.cache.recompute_ratio());
      }
    }
  }
  return c.done(std::to_string(configs.size()) +
                " traces x 3 alphas identical, max recompute_ratio " + fmt(worst));
}

Outcome peak_end_statistics() {
  Checker c;
  const sg::PeakEndConfig cfg;
  c.expect(cfg.window_frames == 40, "default W is " + std::to_string(cfg.window_frames));
  // Three completed clips with varied ppls, all frames well past the window,
  // plus an open clip.
  sg::ContextBuffer ctx(100000);
  std::vector<sg::MemoryRecord> records;
  sg::Rng setup(11);
  std::int64_t index = 0;
  for (std::size_t clip = 0; clip < 4; ++clip) {
    for (int i = 0; i < 5; ++i, ++index) {
      sg::MemoryRecord r;
      r.frame_index = index;
      r.timestamp_s = static_cast<double>(index) / cfg.fps;
      r.clip = clip;
      r.frame_ppl = 1.0 + 2.0 * setup.uniform();
      r.block_id = ctx.append(sg::testing::frame(r.timestamp_s, index, {1, 1}));
      records.push_back(r);
    }
    if (clip < 3) ctx.append(sg::testing::caption({2}));
  }
  sg::protect_keyframes(records, 3);
  const double now = static_cast<double>(index + 60) / cfg.fps;
  const std::int64_t trials = 100000;
  const auto survival = sg::prune_survival(ctx, records, cfg, now, 40, trials);
  const auto ranges = sg::clip_ppl_ranges(records);
  std::size_t protected_count = 0;
  double worst_z = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double p = sg::deletion_probability(records[i], ranges.at(records[i].clip), now, cfg);
    if (records[i].is_protected) {
      ++protected_count;
      c.expect(survival[i] == 1.0, "protected frame " + std::to_string(i) + " pruned");
      continue;
    }
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(trials));
    const double dev = std::abs(survival[i] - (1 - p));
    if (sigma > 0) worst_z = std::max(worst_z, dev / sigma);
    c.expect(sigma > 0 ? dev <= 3 * sigma : dev == 0.0,
             "frame " + std::to_string(i) + " survival " + fmt(survival[i]) + " vs " +
                 fmt(1 - p));
  }
  c.expect(protected_count == 3, std::to_string(protected_count) + " keyframes, expected 3");
  return c.done(std::to_string(protected_count) + " keyframes always survive; worst |z| " +
                fmt(worst_z) + " over " + std::to_string(records.size() - protected_count) +
                " frames, 1e5 trials");
}

Outcome metric_golden_values() {
  Checker c;
  sg::Timeline tl;
  for (auto [id, t0, t1, a] : {std::tuple{0, 0.0, 10.0, 4.0}, std::tuple{1, 10.0, 20.0, 15.0}}) {
    sg::SemanticClip clip;
    clip.clip_id = static_cast<sg::ClipId>(id);
    clip.t_start = t0;
    clip.t_end = t1;
    clip.anchor_s = a;
    clip.caption_pool = {"x"};
    tl.clips.push_back(clip);
  }
  auto score = [&](std::vector<double> r) { return sg::score_timing(r, tl); };
  c.expect(score({5, 16}).tim_diff == 1.0, "tim_diff {5,16}");
  c.expect(score({5}).tim_diff == 5.5, "tim_diff {5}");
  c.expect(score({4, 15}).tim_diff == 0.0, "tim_diff at anchors");
  c.expect(score({5, 16}).tim_redun == 0.0, "tim_redun one per scene");
  c.expect(score({1, 2, 3, 16}).tim_redun == 1.0, "tim_redun 3+1");
  c.expect(score({}).tim_redun == 0.0, "tim_redun none");
  c.expect(score({5, 16}).tim_cover == 1.0, "tim_cover all");
  c.expect(score({5}).tim_cover == 0.5, "tim_cover half");
  c.expect(score({}).tim_cover == 0.0, "tim_cover none");
  const std::vector<double> s = {3, 1, 1, 3};
  const sg::WindowPick p = sg::otg_localize(s, 2);
  c.expect(p.begin == 1 && p.end == 3, "otg [3,1,1,3] w2");

  sg::Rng rng(5);
  std::size_t checked = 0;
  for (std::size_t n = 1; n <= 20; ++n) {
    for (int iter = 0; iter < 100; ++iter) {
      std::vector<double> series(n);
      for (double& x : series) x = 1.0 + static_cast<double>(rng.below(4));
      for (std::size_t w = 1; w <= n; ++w) {
        std::size_t best = 0;
        double best_sum = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b + w <= n; ++b) {
          double sum = 0;
          for (std::size_t i = b; i < b + w; ++i) sum += series[i];
          if (sum < best_sum) {
            best_sum = sum;
            best = b;
          }
        }
        const sg::WindowPick got = sg::otg_localize(series, w);
        c.expect(got.begin == best && got.end == best + w,
                 "otg mismatch n=" + std::to_string(n) + " w=" + std::to_string(w));
        ++checked;
      }
    }
  }
  return c.done("9 timing examples exact, " + std::to_string(checked) +
                " window searches match enumeration");
}

Outcome pipeline_determinism() {
  Checker c;
  sg::testing::TempDir dir;
  const sg::ScriptConfig cfg = sg::long_stream_config(0, 1800);
  sg::write_scripted_stream(sg::make_scripted_stream(cfg), dir.path(), "ten_minutes");
  const sg::RunConfig config;
  const auto t0 = std::chrono::steady_clock::now();
  sg::RunResult r;
  try {
    r = sg::run_replay(config, dir / "ten_minutes.ndjson", dir / "a");
  } catch (const std::exception& e) {
    c.expect(false, std::string("replay failed: ") + e.what());
    return c.done("");
  }
  const double secs = seconds_since(t0);
  sg::run_replay(config, dir / "ten_minutes.ndjson", dir / "b");
  c.expect(r.frames == 1800, std::to_string(r.frames) + " frames");
  c.expect(secs < 60.0, "took " + fmt(secs) + " s");
  for (const char* f : {"events.ndjson", "responses.ndjson", "report.json", "per_scene.csv"}) {
    c.expect(sg::testing::slurp(dir / "a" / f) == sg::testing::slurp(dir / "b" / f),
             std::string(f) + " differs between runs");
  }
  return c.done("1800 frames x 16 tokens in " + fmt(secs) + " s, " +
                std::to_string(r.responses.size()) + " responses, " +
                std::to_string(r.prunes.size()) + " prunes, artifacts byte-identical");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
      {"scam_oracle_equivalence", scam_oracle},
      {"perplexity_formula", perplexity_formula},
      {"gate_scenario", gate_scenario},
      {"gate_monotonicity", gate_monotonicity},
      {"cache_semantics_freedom", cache_semantics},
      {"peak_end_statistics", peak_end_statistics},
      {"metric_golden_values", metric_golden_values},
      {"pipeline_determinism", pipeline_determinism},
  };
  int failures = 0;
  for (const auto& [name, fn] : checks) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
