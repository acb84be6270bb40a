/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The RaPro Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
/**
 * @file rapro.cc
 * @brief Command-line entry point: emulate, serve, budget, score and
 * dump-constellation.
 */
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rapro/analytics/budget.h"
#include "rapro/analytics/score.h"
#include "rapro/common/error.h"
#include "rapro/config/system_config.h"
#include "rapro/frontend/streamer.h"
#include "rapro/server/pipeline.h"

namespace {

using nlohmann::json;

std::atomic<bool> g_stop{false};

void OnSignal(int) { g_stop.store(true); }

void EmitJson(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw rapro::ConfigError("cannot write " + path);
  out << j.dump(2) << "\n";
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rapro::ConfigError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw rapro::ConfigError(path + ": " + e.what());
  }
}

int ReportError(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
  return 1;
}

struct EmulateArgs {
  std::string config;
  std::string dest;
  std::size_t frames = 10;
  double realtime_factor = 1.0;
  std::optional<std::uint64_t> seed;
  std::uint32_t first_frame = 0;
  std::string report;
  double drop_probability = 0.0;
  double duplicate_probability = 0.0;
  std::optional<std::size_t> stop_after;
};

int RunEmulate(const EmulateArgs& a) {
  rapro::SystemConfig cfg = rapro::LoadSystemConfig(a.config);
  if (a.seed) cfg.ReseedRun(*a.seed);
  rapro::frontend::StreamOptions opt;
  opt.realtime_factor = a.realtime_factor;
  opt.num_frames = a.frames;
  opt.first_frame_seq = a.first_frame;
  opt.faults.drop_probability = a.drop_probability;
  opt.faults.duplicate_probability = a.duplicate_probability;
  opt.faults.stop_after_packets = a.stop_after;
  rapro::UdpSink sink(rapro::Endpoint::ParseList(a.dest));
  const auto report = rapro::frontend::StreamFrames(cfg, opt, sink);
  EmitJson(rapro::frontend::ToJson(report), a.report);
  return 0;
}

struct ServeArgs {
  std::string config;
  std::string listen;
  std::string out;
  std::optional<std::size_t> frames;
  std::string report;
  std::string capture;
  std::optional<std::uint64_t> seed;
  double realtime_factor = 1.0;
  double idle_timeout = 2.0;
  std::optional<double> startup_timeout;
  std::optional<double> duration;
  std::string affinity = "none";
  bool score_truth = false;
  bool no_symbols = false;
};

int RunServe(const ServeArgs& a) {
  rapro::SystemConfig cfg = rapro::LoadSystemConfig(a.config);
  if (a.seed) cfg.ReseedRun(*a.seed);
  rapro::server::PipelineConfig p;
  p.listen = rapro::Endpoint::ParseList(a.listen);
  p.num_receive_workers = p.listen.size();
  if (!a.out.empty()) p.output = rapro::Endpoint::Parse(a.out);
  p.frame_budget = a.frames;
  p.realtime_factor = a.realtime_factor;
  p.idle_timeout_s = a.idle_timeout;
  p.startup_timeout_s = a.startup_timeout;
  p.duration_s = a.duration;
  p.affinity = rapro::server::ParseAffinityPolicy(a.affinity);
  p.score_truth = a.score_truth;
  p.dump_symbols = !a.no_symbols;
  if (!a.capture.empty()) p.capture_path = a.capture;
  std::signal(SIGINT, OnSignal);
  std::signal(SIGTERM, OnSignal);
  const auto report = rapro::server::RunServer(cfg, p, &g_stop);
  EmitJson(rapro::server::ToJson(report), a.report);
  return 0;
}

int RunBudget(const std::string& config, std::size_t ports,
              std::optional<double> cycles, std::optional<double> clock) {
  const rapro::SystemConfig cfg = rapro::LoadSystemConfig(config);
  json out = {{"rate", rapro::analytics::ToJson(rapro::analytics::RateBudget(cfg.frame, ports))}};
  if (cycles) {
    const double hz = clock ? *clock : cfg.frame.cpu_clock_hz;
    out["duty"] = rapro::analytics::ToJson(
        rapro::analytics::DutyCycle(*cycles, hz, cfg.frame.frame_duration));
    out["duty"]["cycles"] = *cycles;
    out["duty"]["clock_hz"] = hz;
  }
  EmitJson(out, "");
  return 0;
}

int RunScore(const std::string& server_report, const std::string& stream_report,
             const std::string& capture, const std::string& out) {
  const json server = ReadJsonFile(server_report);
  const auto stream = rapro::frontend::StreamReportFromJson(ReadJsonFile(stream_report));
  std::optional<std::filesystem::path> cap;
  if (!capture.empty()) cap = capture;
  EmitJson(rapro::analytics::ToJson(rapro::analytics::ScoreRun(server, stream, cap)), out);
  return 0;
}

int RunDump(const std::string& capture, std::size_t user, const std::string& out,
            const std::string& config) {
  std::optional<std::size_t> users;
  if (!config.empty()) users = rapro::LoadSystemConfig(config).frame.num_users;
  const auto records = rapro::analytics::LoadCapture(capture);
  const std::size_t rows = rapro::analytics::DumpConstellation(records, user, out, users);
  EmitJson({{"rows", rows}, {"user", user}, {"out", out}}, "");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rapro: uplink baseband pipeline emulator, server and analytics"};
  app.require_subcommand(1);

  EmulateArgs em;
  auto* emulate = app.add_subcommand("emulate", "Stream synthesized uplink frames over UDP");
  emulate->add_option("--config", em.config, "Config file")->required();
  emulate->add_option("--dest", em.dest, "ip:port[,ip:port]; antennas split by index")
      ->required();
  emulate->add_option("--frames", em.frames, "Number of frames")->check(CLI::NonNegativeNumber);
  emulate->add_option("--realtime-factor", em.realtime_factor, "1.0 = 10 ms frames")
      ->check(CLI::PositiveNumber);
  emulate->add_option("--seed", em.seed, "Run seed for payload, channel and noise");
  emulate->add_option("--first-frame", em.first_frame, "First frame_seq");
  emulate->add_option("--report", em.report, "StreamReport path (default stdout)");
  emulate->add_option("--drop-prob", em.drop_probability, "Fault: packet drop probability")
      ->check(CLI::Range(0.0, 1.0));
  emulate->add_option("--dup-prob", em.duplicate_probability,
                      "Fault: packet duplication probability")
      ->check(CLI::Range(0.0, 1.0));
  emulate->add_option("--stop-after", em.stop_after, "Fault: stop after N datagrams");

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "Run the baseband server");
  serve->add_option("--config", sv.config, "Config file")->required();
  serve->add_option("--listen", sv.listen, "ip:port[,ip:port], one per receive worker")
      ->required();
  serve->add_option("--out", sv.out, "ip:port for result datagrams");
  serve->add_option("--frames", sv.frames, "Stop after N frames are decided");
  serve->add_option("--report", sv.report, "ServerReport path (default stdout)");
  serve->add_option("--capture", sv.capture, "Also write result datagrams to this file");
  serve->add_option("--seed", sv.seed, "Run seed, as given to emulate");
  serve->add_option("--realtime-factor", sv.realtime_factor, "Sets the deadline")
      ->check(CLI::PositiveNumber);
  serve->add_option("--idle-timeout", sv.idle_timeout, "Seconds without packets before stopping");
  serve->add_option("--startup-timeout", sv.startup_timeout, "Seconds to wait for a first packet");
  serve->add_option("--duration", sv.duration, "Stop after this many seconds");
  serve->add_option("--affinity", sv.affinity, "none | one-core-per-worker");
  serve->add_flag("--score-truth", sv.score_truth, "Score against seeded ground truth");
  serve->add_flag("--no-symbols", sv.no_symbols, "Omit equalized symbols from results");

  std::string b_config;
  std::size_t b_ports = 1;
  std::optional<double> b_cycles, b_clock;
  auto* budget = app.add_subcommand("budget", "Fronthaul rate and duty-cycle arithmetic");
  budget->add_option("--config", b_config, "Config file")->required();
  budget->add_option("--ports", b_ports, "Number of ports")->check(CLI::PositiveNumber);
  budget->add_option("--cycles", b_cycles, "Cycles per subframe, for the duty cycle");
  budget->add_option("--clock", b_clock, "Clock in Hz (default: config cpu_clock_hz)");

  std::string s_server, s_stream, s_capture, s_out;
  auto* score = app.add_subcommand("score", "Score a loopback run against ground truth");
  score->add_option("--server-report", s_server, "ServerReport JSON")->required();
  score->add_option("--stream-report", s_stream, "StreamReport JSON")->required();
  score->add_option("--capture", s_capture, "Server result capture");
  score->add_option("--out", s_out, "ScoreReport path (default stdout)");

  std::string d_capture, d_out, d_config;
  std::size_t d_user = 0;
  auto* dump = app.add_subcommand("dump-constellation", "Export equalized symbols as CSV");
  dump->add_option("--capture", d_capture, "Server result capture")->required();
  dump->add_option("--user", d_user, "User index")->required();
  dump->add_option("--out", d_out, "CSV path")->required();
  dump->add_option("--config", d_config, "Config file, to range-check the user");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << json{{"error", {{"kind", "usage"}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  }

  try {
    if (*emulate) return RunEmulate(em);
    if (*serve) return RunServe(sv);
    if (*budget) return RunBudget(b_config, b_ports, b_cycles, b_clock);
    if (*score) return RunScore(s_server, s_stream, s_capture, s_out);
    if (*dump) return RunDump(d_capture, d_user, d_out, d_config);
  } catch (const rapro::Error& e) {
    return ReportError(e.kind(), e.what());
  } catch (const std::exception& e) {
    return ReportError("internal", e.what());
  }
  return 1;
}
