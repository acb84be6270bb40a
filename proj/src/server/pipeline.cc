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
#include "rapro/server/pipeline.h"

#include <pthread.h>
#include <sched.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>
#include <variant>

#include "rapro/common/error.h"
#include "rapro/common/mailbox.h"
#include "rapro/frontend/uplink.h"
#include "rapro/phy/metrics.h"
#include "rapro/phy/modulation.h"
#include "rapro/wire/result_packet.h"

namespace rapro::server {
namespace {

using Clock = wire::Clock;

double Seconds(Clock::duration d) { return std::chrono::duration<double>(d).count(); }

void PinToCore(std::size_t core) {
  const unsigned n = std::max(1u, std::thread::hardware_concurrency());
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(static_cast<int>(core % n), &set);
  pthread_setaffinity_np(pthread_self(), sizeof(set), &set);
}

// Control words sent to the main scheduler.
struct PartComplete {
  std::size_t part;
  std::unique_ptr<wire::SubframeBuffer> buffer;
  TimePoint at;
};
struct PartIncomplete {
  std::size_t part;
  wire::IncompleteSubframe info;
};
struct FrameSeen {
  std::size_t part;
  std::uint32_t frame_seq;
  TimePoint at;
};
struct WorkerDone {
  std::size_t worker;
  SubframeKey key;
  std::unique_ptr<DetectionResult> result;  // null if processing threw
  bool late;
};
struct ResultSent {
  SubframeKey key;
  TimePoint at;
};
struct ReceiverExit {
  std::size_t part;
};
using Control = std::variant<PartComplete, PartIncomplete, FrameSeen, WorkerDone,
                             ResultSent, ReceiverExit>;

bool Terminal(SubframeOutcome o) {
  return o != SubframeOutcome::kPending && o != SubframeOutcome::kInFlight;
}

nlohmann::json KeyJson(const SubframeKey& k) {
  return {{"frame_seq", k.frame_seq}, {"subframe_idx", k.subframe_idx}};
}

nlohmann::json TimelineJson(const WorkerTimeline& t) {
  return {{"name", t.name},
          {"wall_s", t.wall_s},
          {"busy_s", t.busy_s},
          {"idle_s", t.idle_s},
          {"jobs", t.jobs},
          {"deadline_misses", t.deadline_misses},
          {"durations_s", t.durations_s}};
}

}  // namespace

std::string_view ToString(AffinityPolicy p) {
  return p == AffinityPolicy::kNone ? "none" : "one-core-per-worker";
}

AffinityPolicy ParseAffinityPolicy(std::string_view name) {
  if (name == "none") return AffinityPolicy::kNone;
  if (name == "one-core-per-worker") return AffinityPolicy::kOneCorePerWorker;
  throw ConfigError("unknown affinity policy '" + std::string(name) + "'");
}

std::string_view ToString(SubframeOutcome o) {
  switch (o) {
    case SubframeOutcome::kPending: return "pending";
    case SubframeOutcome::kInFlight: return "in_flight";
    case SubframeOutcome::kProcessed: return "processed";
    case SubframeOutcome::kLate: return "late";
    case SubframeOutcome::kDropped: return "dropped";
    case SubframeOutcome::kIncomplete: return "incomplete";
  }
  return "unknown";
}

void PipelineConfig::Validate() const {
  if (num_receive_workers < 1) throw ConfigError("need at least one receive worker");
  if (!(realtime_factor > 0.0)) throw ConfigError("realtime_factor must be > 0");
  if (deadline_s && !(*deadline_s > 0.0)) throw ConfigError("deadline must be > 0");
  if (window_frames < 1) throw ConfigError("window_frames must be >= 1");
  for (std::size_t i = 0; i < listen.size(); ++i) {
    for (std::size_t j = i + 1; j < listen.size(); ++j) {
      if (listen[i] == listen[j]) throw ConfigError("listen endpoints must be distinct");
    }
    if (output && *output == listen[i]) {
      throw ConfigError("output endpoint must differ from listen endpoints");
    }
  }
}

struct Pipeline::Impl {
  struct Receiver {
    std::size_t part = 0;
    std::unique_ptr<DatagramSource> source;
    std::unique_ptr<wire::Assembler> assembler;
    std::size_t datagrams = 0;
    std::size_t malformed = 0;
    std::size_t truncated = 0;
    std::size_t range_errors = 0;
    WorkerTimeline timeline;
    std::thread thread;
  };

  struct Worker {
    std::size_t id = 0;
    Mailbox<std::unique_ptr<SubframeBundle>> inbox;
    WorkerTimeline timeline;
    std::thread thread;
  };

  struct FrameState {
    TimePoint first_packet;
    std::vector<SubframeOutcome> sub;
    std::vector<std::uint32_t> reported;  // bitmask of parts per subframe
    std::map<std::size_t, std::vector<wire::FragmentId>> missing;
    std::optional<TimePoint> last_result;
    std::size_t results = 0;
    bool decided = false;
  };

  struct UserTally {
    std::size_t bits = 0;
    std::size_t errors = 0;
    EvmAccumulator truth_evm;
    EvmAccumulator decision_evm;
  };

  SystemConfig config;
  PipelineConfig pcfg;
  DatagramSink* output = nullptr;
  SubframeProcessor processor;
  PilotSet pilots;
  std::size_t num_parts;
  std::size_t num_workers;
  double deadline_s;
  TimePoint run_start;

  Mailbox<Control> control;
  std::vector<std::unique_ptr<Receiver>> receivers;
  std::vector<std::unique_ptr<Worker>> workers;  // index 0 unused
  std::atomic<bool> stop_receivers{false};
  std::atomic<std::int64_t> last_packet_ns{0};
  std::atomic<bool> any_packet{false};

  // Transmit worker state; read by the main thread only after join.
  Mailbox<std::unique_ptr<DetectionResult>> transmit_inbox;
  std::thread transmit_thread;
  WorkerTimeline transmit_timeline;
  std::size_t result_datagrams = 0;
  std::size_t result_bytes = 0;
  std::size_t result_send_failures = 0;
  std::vector<UserTally> tallies;

  // Main-thread state.
  DispatchScheduler scheduler;
  std::map<std::uint32_t, FrameState> frames;
  std::vector<std::optional<std::uint32_t>> receiver_newest;
  std::uint32_t resolved_before = 0;
  std::size_t frames_decided = 0;
  std::size_t receivers_exited = 0;
  std::size_t processing_errors = 0;
  std::size_t index_affinity_violations = 0;
  std::vector<SubframeKey> late_keys;
  std::vector<SubframeKey> dropped_keys;
  std::vector<double> processing_times;
  std::vector<double> tsc_cycles;
  std::vector<double> derived_cycles;

  Impl(SystemConfig cfg, PipelineConfig p, std::vector<std::unique_ptr<DatagramSource>> sources,
       DatagramSink* out, SubframeProcessor proc)
      : config(std::move(cfg)),
        pcfg(std::move(p)),
        output(out),
        processor(std::move(proc)),
        pilots(config.frame, config.seeds.pilot),
        num_parts(sources.size()),
        num_workers(config.frame.DataSubframes()),
        deadline_s(pcfg.Deadline(config.frame)),
        scheduler(std::max<std::size_t>(sources.size(), 1), config.frame.num_bs_antennas,
                  config.frame.DataSubframes()) {
    config.Validate();
    pcfg.Validate();
    if (sources.empty()) throw ConfigError("pipeline needs at least one source");
    if (!processor) {
      processor = [this](const SubframeBundle& b) {
        return ProcessSubframe(b, config.frame, pilots, config.receiver);
      };
    }
    for (std::size_t r = 0; r < sources.size(); ++r) {
      auto rx = std::make_unique<Receiver>();
      rx->part = r;
      rx->source = std::move(sources[r]);
      auto acfg = wire::AssemblerConfig::From(config.frame, config.wire.samples_per_packet,
                                              num_parts, r);
      acfg.window_frames = pcfg.window_frames;
      rx->assembler = std::make_unique<wire::Assembler>(acfg);
      rx->timeline.name = "receive_" + std::to_string(r);
      receivers.push_back(std::move(rx));
    }
    receiver_newest.resize(num_parts);
    workers.resize(num_workers + 1);
    for (std::size_t w = 1; w <= num_workers; ++w) {
      workers[w] = std::make_unique<Worker>();
      workers[w]->id = w;
      workers[w]->timeline.name = "subframe_" + std::to_string(w);
    }
    transmit_timeline.name = "transmit";
    tallies.resize(config.frame.num_users);
  }

  void MaybePin(std::size_t core) {
    if (pcfg.affinity == AffinityPolicy::kOneCorePerWorker) PinToCore(core);
  }

  // ---- receive workers ----------------------------------------------------

  void ReceiveLoop(Receiver& rx) {
    MaybePin(1 + rx.part);
    std::vector<std::uint8_t> buf(65536);
    std::vector<std::uint32_t> announced;  // frames already reported, recent first
    const auto start = Clock::now();
    while (!stop_receivers.load(std::memory_order_relaxed)) {
      const auto wait_start = Clock::now();
      const auto n = rx.source->Receive(buf, std::chrono::milliseconds(20));
      const auto now = Clock::now();
      rx.timeline.idle_s += Seconds(now - wait_start);
      if (!n) continue;
      ++rx.datagrams;
      any_packet.store(true, std::memory_order_relaxed);
      last_packet_ns.store(now.time_since_epoch().count(), std::memory_order_relaxed);

      wire::FeedOutcome outcome;
      std::uint32_t frame_seq = 0;
      try {
        const wire::DecodedPacket pkt =
            wire::DecodePacket({buf.data(), *n}, rx.assembler->config().limits);
        frame_seq = pkt.header.frame_seq;
        outcome = rx.assembler->Feed(pkt, now);
      } catch (const wire::WireError& e) {
        switch (e.wire_kind()) {
          case wire::WireError::Kind::kMalformed: ++rx.malformed; break;
          case wire::WireError::Kind::kTruncated: ++rx.truncated; break;
          case wire::WireError::Kind::kRange: ++rx.range_errors; break;
        }
        rx.timeline.busy_s += Seconds(Clock::now() - now);
        continue;
      }
      for (auto& inc : outcome.evicted) control.Push(PartIncomplete{rx.part, std::move(inc)});
      if (outcome.event != wire::FeedEvent::kStale &&
          std::find(announced.begin(), announced.end(), frame_seq) == announced.end()) {
        announced.insert(announced.begin(), frame_seq);
        if (announced.size() > 8) announced.pop_back();
        control.Push(FrameSeen{rx.part, frame_seq, now});
      }
      if (outcome.completed) {
        control.Push(PartComplete{rx.part, std::move(outcome.completed), now});
      }
      ++rx.timeline.jobs;
      rx.timeline.busy_s += Seconds(Clock::now() - now);
    }
    for (auto& inc : rx.assembler->Drain()) control.Push(PartIncomplete{rx.part, std::move(inc)});
    rx.timeline.wall_s = Seconds(Clock::now() - start);
    control.Push(ReceiverExit{rx.part});
  }

  // ---- subframe workers ---------------------------------------------------

  void WorkerLoop(Worker& w) {
    MaybePin(1 + num_parts + w.id);
    const auto start = Clock::now();
    for (;;) {
      const auto wait_start = Clock::now();
      auto job = w.inbox.Pop();
      const auto t0 = Clock::now();
      w.timeline.idle_s += Seconds(t0 - wait_start);
      if (!job) break;
      std::unique_ptr<SubframeBundle> bundle = std::move(*job);
      std::unique_ptr<DetectionResult> result;
      try {
        result = std::make_unique<DetectionResult>(processor(*bundle));
      } catch (const std::exception&) {
        result.reset();
      }
      const auto t1 = Clock::now();
      const double duration = Seconds(t1 - t0);
      const bool late = Seconds(t1 - bundle->completed_at()) > deadline_s;
      w.timeline.busy_s += duration;
      w.timeline.durations_s.push_back(duration);
      w.timeline.starts_s.push_back(Seconds(t0 - run_start));
      ++w.timeline.jobs;
      if (late) ++w.timeline.deadline_misses;
      const SubframeKey key = bundle->key();
      bundle.reset();
      control.Push(WorkerDone{w.id, key, std::move(result), late});
    }
    w.timeline.wall_s = Seconds(Clock::now() - start);
  }

  // ---- transmit worker ----------------------------------------------------

  void TransmitLoop() {
    MaybePin(2 + num_parts + num_workers);
    std::optional<wire::CaptureWriter> capture;
    if (pcfg.capture_path) capture.emplace(*pcfg.capture_path);
    std::optional<frontend::PayloadCache> truth;
    if (pcfg.score_truth) truth.emplace(config.frame, config.seeds.payload);
    const auto start = Clock::now();
    for (;;) {
      const auto wait_start = Clock::now();
      auto item = transmit_inbox.Pop();
      const auto t0 = Clock::now();
      transmit_timeline.idle_s += Seconds(t0 - wait_start);
      if (!item) break;
      const DetectionResult& r = **item;
      for (const auto& rec : ToResultRecords(r, config.frame, pcfg.dump_symbols)) {
        const auto dg = wire::EncodeResult(rec);
        if (output) {
          if (output->Send(0, dg)) {
            ++result_datagrams;
            result_bytes += dg.size();
          } else {
            ++result_send_failures;
          }
        }
        if (capture) capture->Append(dg);
      }
      for (std::size_t k = 0; k < r.users.size(); ++k) {
        const UserDetection& u = r.users[k];
        std::vector<cdouble> decided(u.symbols.size());
        for (std::size_t i = 0; i < decided.size(); ++i) {
          decided[i] = NearestPoint(u.symbols[i], u.modulation);
        }
        tallies[k].decision_evm.Add(u.symbols, decided);
        if (truth) {
          const auto ref = truth->Subframe(r.key.frame_seq, r.key.subframe_idx, k);
          tallies[k].bits += ref.size();
          tallies[k].errors += CountBitErrors(u.bits, ref);
          tallies[k].truth_evm.Add(u.symbols, QamModulate(ref, u.modulation));
        }
      }
      if (capture) capture->Flush();
      const auto t1 = Clock::now();
      transmit_timeline.busy_s += Seconds(t1 - t0);
      transmit_timeline.durations_s.push_back(Seconds(t1 - t0));
      ++transmit_timeline.jobs;
      control.Push(ResultSent{r.key, t1});
    }
    transmit_timeline.wall_s = Seconds(Clock::now() - start);
  }

  // ---- main scheduler -----------------------------------------------------

  FrameState& Frame(std::uint32_t frame_seq, TimePoint at) {
    auto [it, inserted] = frames.try_emplace(frame_seq);
    if (inserted) {
      it->second.first_packet = at;
      it->second.sub.assign(num_workers + 1, SubframeOutcome::kPending);
      it->second.reported.assign(num_workers + 1, 0);
    } else if (at < it->second.first_packet) {
      it->second.first_packet = at;
    }
    return it->second;
  }

  void SetOutcome(const SubframeKey& key, SubframeOutcome o) {
    auto it = frames.find(key.frame_seq);
    FrameState& f = it != frames.end() ? it->second : Frame(key.frame_seq, Clock::now());
    f.sub[key.subframe_idx] = o;
    if (!f.decided &&
        std::all_of(f.sub.begin() + 1, f.sub.end(), [](auto s) { return Terminal(s); })) {
      f.decided = true;
      ++frames_decided;
    }
  }

  void Execute(SchedulerActions actions) {
    for (Dispatch& d : actions.dispatches) {
      if (d.worker != d.bundle->key().subframe_idx) ++index_affinity_violations;
      SetOutcome(d.bundle->key(), SubframeOutcome::kInFlight);
      workers.at(d.worker)->inbox.Push(std::move(d.bundle));
    }
    for (const SubframeKey& k : actions.dropped) {
      dropped_keys.push_back(k);
      SetOutcome(k, SubframeOutcome::kDropped);
    }
    for (const SubframeKey& k : actions.abandoned) SetOutcome(k, SubframeOutcome::kIncomplete);
  }

  // Frames older than every receiver's window can no longer complete.
  void ResolveWindow() {
    std::optional<std::uint32_t> low;
    for (const auto& n : receiver_newest) {
      if (!n) return;
      low = low ? std::min(*low, *n) : *n;
    }
    if (*low + 1 < pcfg.window_frames) return;
    const std::uint32_t bound = *low + 1 - pcfg.window_frames;
    if (bound <= resolved_before) return;
    resolved_before = bound;
    Execute(scheduler.AbandonBefore(bound));
    for (auto& [seq, f] : frames) {
      if (seq >= bound) break;
      for (std::size_t i = 1; i <= num_workers; ++i) {
        if (f.sub[i] == SubframeOutcome::kPending) {
          SetOutcome({seq, static_cast<std::uint8_t>(i)}, SubframeOutcome::kIncomplete);
        }
      }
    }
  }

  void Handle(Control& msg) {
    std::visit(
        [this](auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, FrameSeen>) {
            Frame(m.frame_seq, m.at);
            auto& newest = receiver_newest[m.part];
            if (!newest || m.frame_seq > *newest) newest = m.frame_seq;
            ResolveWindow();
          } else if constexpr (std::is_same_v<T, PartComplete>) {
            const SubframeKey key = m.buffer->key();
            Frame(key.frame_seq, m.buffer->first_arrival()).reported[key.subframe_idx] |=
                1u << m.part;
            Execute(scheduler.OnPartComplete(m.part, std::move(m.buffer), m.at));
          } else if constexpr (std::is_same_v<T, PartIncomplete>) {
            const SubframeKey key = m.info.key;
            FrameState& f = Frame(key.frame_seq, Clock::now());
            f.reported[key.subframe_idx] |= 1u << m.part;
            auto& missing = f.missing[key.subframe_idx];
            missing.insert(missing.end(), m.info.missing.begin(), m.info.missing.end());
            Execute(scheduler.OnPartIncomplete(key));
          } else if constexpr (std::is_same_v<T, WorkerDone>) {
            if (m.result) {
              processing_times.push_back(m.result->processing_time_s);
              derived_cycles.push_back(m.result->derived_cycles);
              if (m.result->tsc_cycles) {
                tsc_cycles.push_back(static_cast<double>(*m.result->tsc_cycles));
              }
              if (m.late) late_keys.push_back(m.key);
              SetOutcome(m.key, m.late ? SubframeOutcome::kLate : SubframeOutcome::kProcessed);
              transmit_inbox.Push(std::move(m.result));
            } else {
              ++processing_errors;
              dropped_keys.push_back(m.key);
              SetOutcome(m.key, SubframeOutcome::kDropped);
            }
            Execute(scheduler.OnWorkerDone(m.worker));
          } else if constexpr (std::is_same_v<T, ResultSent>) {
            auto it = frames.find(m.key.frame_seq);
            if (it != frames.end()) {
              auto& last = it->second.last_result;
              if (!last || m.at > *last) last = m.at;
              ++it->second.results;
            }
          } else if constexpr (std::is_same_v<T, ReceiverExit>) {
            ++receivers_exited;
          }
        },
        msg);
  }

  std::string ShouldStop(const Pipeline& owner) const {
    const auto now = Clock::now();
    if (owner.StopRequested()) return "stop_requested";
    if (pcfg.frame_budget && frames_decided >= *pcfg.frame_budget) return "frame_budget";
    if (pcfg.duration_s && Seconds(now - run_start) >= *pcfg.duration_s) return "duration";
    if (any_packet.load(std::memory_order_relaxed)) {
      const TimePoint last{Clock::duration(last_packet_ns.load(std::memory_order_relaxed))};
      if (Seconds(now - last) >= pcfg.idle_timeout_s && scheduler.Idle()) return "idle_timeout";
    } else if (pcfg.startup_timeout_s && Seconds(now - run_start) >= *pcfg.startup_timeout_s) {
      return "startup_timeout";
    }
    return {};
  }

  // Fragments a receive part would have delivered for one subframe.
  std::vector<wire::FragmentId> AllFragments(std::size_t part) const {
    const auto acfg = wire::AssemblerConfig::From(
        config.frame, config.wire.samples_per_packet, num_parts, part);
    const std::size_t per_row = wire::PacketsPerSubframe(config.frame,
                                                         config.wire.samples_per_packet) /
                                (config.frame.num_bs_antennas * config.frame.SymbolsPerSubframe());
    std::vector<wire::FragmentId> out;
    for (std::uint8_t m : acfg.OwnedAntennas()) {
      for (std::size_t s = 0; s < config.frame.SymbolsPerSubframe(); ++s) {
        for (std::size_t j = 0; j < per_row; ++j) {
          out.push_back({m, static_cast<std::uint8_t>(s), static_cast<std::uint16_t>(j)});
        }
      }
    }
    return out;
  }

  ServerReport Run(const Pipeline& owner) {
    run_start = Clock::now();
    for (auto& rx : receivers) rx->thread = std::thread([this, r = rx.get()] { ReceiveLoop(*r); });
    for (std::size_t w = 1; w <= num_workers; ++w) {
      workers[w]->thread = std::thread([this, w] { WorkerLoop(*workers[w]); });
    }
    transmit_thread = std::thread([this] { TransmitLoop(); });
    MaybePin(0);

    std::string reason;
    while (reason.empty()) {
      if (auto msg = control.PopFor(std::chrono::milliseconds(10))) Handle(*msg);
      reason = ShouldStop(owner);
    }

    // Drain: receivers flush their assemblers, in-flight work finishes.
    stop_receivers = true;
    while (receivers_exited < receivers.size() || !scheduler.Idle()) {
      if (auto msg = control.PopFor(std::chrono::milliseconds(10))) Handle(*msg);
    }
    for (auto& rx : receivers) rx->thread.join();
    while (auto msg = control.PopFor(std::chrono::milliseconds(0))) Handle(*msg);
    Execute(scheduler.AbandonAll());
    for (auto& [seq, f] : frames) {
      for (std::size_t i = 1; i <= num_workers; ++i) {
        if (f.sub[i] == SubframeOutcome::kPending) {
          SetOutcome({seq, static_cast<std::uint8_t>(i)}, SubframeOutcome::kIncomplete);
        }
      }
    }
    for (std::size_t w = 1; w <= num_workers; ++w) workers[w]->inbox.Close();
    for (std::size_t w = 1; w <= num_workers; ++w) workers[w]->thread.join();
    while (auto msg = control.PopFor(std::chrono::milliseconds(0))) Handle(*msg);
    transmit_inbox.Close();
    transmit_thread.join();
    while (auto msg = control.PopFor(std::chrono::milliseconds(0))) Handle(*msg);

    return BuildReport(reason);
  }

  ServerReport BuildReport(const std::string& reason) {
    ServerReport rep;
    rep.link_fingerprint = config.LinkFingerprint();
    rep.seeds = config.seeds;
    rep.frame_period_s = pcfg.FramePeriod(config.frame);
    rep.deadline_s = deadline_s;
    rep.wall_time_s = Seconds(Clock::now() - run_start);
    rep.stop_reason = reason;

    std::vector<double> latencies;
    for (auto& [seq, f] : frames) {
      FrameRecord fr;
      fr.frame_seq = seq;
      fr.subframes = f.sub;
      fr.first_packet_s = Seconds(f.first_packet - run_start);
      bool incomplete = false;
      bool misses = false;
      for (std::size_t i = 1; i <= num_workers; ++i) {
        switch (f.sub[i]) {
          case SubframeOutcome::kProcessed: ++rep.subframes_processed; break;
          case SubframeOutcome::kLate:
            ++rep.subframes_processed;
            ++rep.subframes_late;
            misses = true;
            break;
          case SubframeOutcome::kDropped:
            ++rep.subframes_dropped;
            misses = true;
            break;
          default: {
            ++rep.subframes_incomplete;
            incomplete = true;
            IncompleteRecord rec{{seq, static_cast<std::uint8_t>(i)}, f.missing[i]};
            for (std::size_t p = 0; p < num_parts; ++p) {
              if (!(f.reported[i] & (1u << p))) {
                const auto all = AllFragments(p);
                rec.missing.insert(rec.missing.end(), all.begin(), all.end());
              }
            }
            std::sort(rec.missing.begin(), rec.missing.end());
            rep.incomplete.push_back(std::move(rec));
          }
        }
      }
      ++rep.frames_in;
      if (incomplete) {
        ++rep.frames_incomplete;
        fr.outcome = "incomplete";
      } else if (misses) {
        ++rep.frames_with_misses;
        fr.outcome = "with_misses";
      } else {
        ++rep.frames_completed;
        fr.outcome = "completed";
      }
      if (!incomplete && !misses && f.last_result && f.results == num_workers) {
        fr.latency_s = Seconds(*f.last_result - f.first_packet);
        latencies.push_back(*fr.latency_s);
      }
      rep.frames.push_back(std::move(fr));
    }
    rep.processing_errors = processing_errors;
    rep.late = late_keys;
    rep.dropped = dropped_keys;
    std::sort(rep.dropped.begin(), rep.dropped.end());

    for (auto& rx : receivers) {
      rep.datagrams_received += rx->datagrams;
      rep.malformed += rx->malformed;
      rep.truncated += rx->truncated;
      rep.range_errors += rx->range_errors;
      const auto& s = rx->assembler->stats();
      auto& a = rep.assembly;
      a.packets += s.packets;
      a.accepted += s.accepted;
      a.duplicates += s.duplicates;
      a.stale += s.stale;
      a.markers += s.markers;
      a.completed_subframes += s.completed_subframes;
      a.incomplete_subframes += s.incomplete_subframes;
      a.accepted_payload_bytes += s.accepted_payload_bytes;
      a.completed_payload_bytes += s.completed_payload_bytes;
      a.incomplete_payload_bytes += s.incomplete_payload_bytes;
      rep.receive_workers.push_back(rx->timeline);
    }
    rep.scheduler = scheduler.stats();
    rep.index_affinity_violations = index_affinity_violations;
    for (std::size_t w = 1; w <= num_workers; ++w) {
      rep.subframe_workers.push_back(workers[w]->timeline);
    }
    rep.transmit_worker = transmit_timeline;

    rep.processing_time_s = Summary::Of(processing_times);
    rep.latency_s = Summary::Of(latencies);
    if (!tsc_cycles.empty()) rep.mean_tsc_cycles = Summary::Of(tsc_cycles).mean;
    rep.mean_derived_cycles = Summary::Of(derived_cycles).mean;
    rep.predicted_duty = rep.processing_time_s.mean / rep.frame_period_s;

    // Busy fraction over each worker's steady-state span: the jobs before
    // the last one, divided by the time from the first to the last start.
    double duty_sum = 0.0;
    std::size_t duty_n = 0;
    for (const auto& t : rep.subframe_workers) {
      if (t.jobs < 2 || t.starts_s.back() <= t.starts_s.front()) {
        rep.measured_duty.push_back(std::nullopt);
        continue;
      }
      double busy = 0.0;
      for (std::size_t j = 0; j + 1 < t.jobs; ++j) busy += t.durations_s[j];
      const double duty = busy / (t.starts_s.back() - t.starts_s.front());
      rep.measured_duty.push_back(duty);
      duty_sum += duty;
      ++duty_n;
    }
    if (duty_n) rep.measured_duty_mean = duty_sum / static_cast<double>(duty_n);

    rep.result_datagrams = result_datagrams;
    rep.result_bytes = result_bytes;
    rep.result_send_failures = result_send_failures;
    rep.truth_scored = pcfg.score_truth;
    for (std::size_t k = 0; k < tallies.size(); ++k) {
      UserScore u;
      u.user = k;
      u.modulation = config.frame.UserModulation(k);
      u.bits = tallies[k].bits;
      u.bit_errors = tallies[k].errors;
      u.ber = u.bits ? static_cast<double>(u.bit_errors) / static_cast<double>(u.bits) : 0.0;
      u.evm_percent = tallies[k].truth_evm.Percent();
      u.decision_evm_percent = tallies[k].decision_evm.Percent();
      rep.users.push_back(u);
    }
    return rep;
  }
};

Pipeline::Pipeline(SystemConfig config, PipelineConfig pipeline,
                   std::vector<std::unique_ptr<DatagramSource>> sources, DatagramSink* output,
                   SubframeProcessor processor)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(pipeline), std::move(sources),
                                   output, std::move(processor))) {}

Pipeline::~Pipeline() = default;

bool Pipeline::StopRequested() const {
  return stop_requested_.load(std::memory_order_relaxed) ||
         (external_stop_ && external_stop_->load(std::memory_order_relaxed));
}

ServerReport Pipeline::Run() { return impl_->Run(*this); }

ServerReport RunServer(const SystemConfig& config, const PipelineConfig& pipeline,
                       const std::atomic<bool>* stop) {
  pipeline.Validate();
  if (pipeline.listen.size() != pipeline.num_receive_workers) {
    throw ConfigError("need one listen endpoint per receive worker (" +
                      std::to_string(pipeline.num_receive_workers) + "), got " +
                      std::to_string(pipeline.listen.size()));
  }
  std::vector<std::unique_ptr<DatagramSource>> sources;
  for (const Endpoint& ep : pipeline.listen) sources.push_back(UdpSource::Listen(ep));
  std::unique_ptr<UdpSink> sink;
  if (pipeline.output) sink = std::make_unique<UdpSink>(std::vector<Endpoint>{*pipeline.output});
  Pipeline p(config, pipeline, std::move(sources), sink.get());
  p.WatchStopFlag(stop);
  return p.Run();
}

nlohmann::json ToJson(const ServerReport& r) {
  using nlohmann::json;
  json incomplete = json::array();
  for (const auto& rec : r.incomplete) {
    json missing = json::array();
    for (const auto& f : rec.missing) missing.push_back({f.antenna, f.symbol, f.fragment});
    json entry = KeyJson(rec.key);
    entry["missing_count"] = rec.missing.size();
    entry["missing"] = std::move(missing);
    incomplete.push_back(std::move(entry));
  }
  json late = json::array();
  for (const auto& k : r.late) late.push_back(KeyJson(k));
  json dropped = json::array();
  for (const auto& k : r.dropped) dropped.push_back(KeyJson(k));
  json frames = json::array();
  for (const auto& f : r.frames) {
    json subs = json::array();
    for (std::size_t i = 1; i < f.subframes.size(); ++i) subs.push_back(ToString(f.subframes[i]));
    frames.push_back({{"frame_seq", f.frame_seq},
                      {"outcome", f.outcome},
                      {"first_packet_s", f.first_packet_s},
                      {"latency_s", f.latency_s ? json(*f.latency_s) : json(nullptr)},
                      {"subframes", std::move(subs)}});
  }
  json rx = json::array();
  for (const auto& t : r.receive_workers) rx.push_back(TimelineJson(t));
  json sw = json::array();
  for (std::size_t i = 0; i < r.subframe_workers.size(); ++i) {
    json t = TimelineJson(r.subframe_workers[i]);
    t["worker"] = i + 1;
    t["measured_duty"] = r.measured_duty[i] ? json(*r.measured_duty[i]) : json(nullptr);
    sw.push_back(std::move(t));
  }
  json users = json::array();
  for (const auto& u : r.users) {
    json j = {{"user", u.user},
              {"modulation", ToString(u.modulation)},
              {"decision_evm_percent", u.decision_evm_percent}};
    if (r.truth_scored) {
      j["bits"] = u.bits;
      j["bit_errors"] = u.bit_errors;
      j["ber"] = u.ber;
      j["evm_percent"] = u.evm_percent;
    }
    users.push_back(std::move(j));
  }
  const auto& a = r.assembly;
  const auto& s = r.scheduler;
  return {
      {"link_fingerprint", r.link_fingerprint},
      {"seeds",
       {{"pilot", r.seeds.pilot},
        {"payload", r.seeds.payload},
        {"channel", r.seeds.channel},
        {"noise", r.seeds.noise}}},
      {"frame_period_s", r.frame_period_s},
      {"deadline_s", r.deadline_s},
      {"wall_time_s", r.wall_time_s},
      {"stop_reason", r.stop_reason},
      {"frames",
       {{"frames_in", r.frames_in},
        {"frames_completed", r.frames_completed},
        {"frames_with_misses", r.frames_with_misses},
        {"frames_incomplete", r.frames_incomplete},
        {"accounting_holds", r.AccountingHolds()}}},
      {"subframes",
       {{"processed", r.subframes_processed},
        {"late", r.subframes_late},
        {"dropped", r.subframes_dropped},
        {"incomplete", r.subframes_incomplete},
        {"processing_errors", r.processing_errors}}},
      {"late", std::move(late)},
      {"dropped", std::move(dropped)},
      {"incomplete", std::move(incomplete)},
      {"packets",
       {{"datagrams_received", r.datagrams_received},
        {"malformed", r.malformed},
        {"truncated", r.truncated},
        {"range_errors", r.range_errors},
        {"fed", a.packets},
        {"accepted", a.accepted},
        {"duplicates", a.duplicates},
        {"stale", a.stale},
        {"markers", a.markers}}},
      {"bytes",
       {{"accepted_payload", a.accepted_payload_bytes},
        {"completed_payload", a.completed_payload_bytes},
        {"incomplete_payload", a.incomplete_payload_bytes}}},
      {"scheduler",
       {{"dispatches", s.dispatches},
        {"dropped", s.dropped},
        {"abandoned", s.abandoned},
        {"late_parts", s.late_parts},
        {"max_queue_depth", s.max_queue_depth},
        {"dispatches_per_worker",
         std::vector<std::size_t>(s.dispatches_per_worker.begin() + 1,
                                  s.dispatches_per_worker.end())},
        {"index_affinity_violations", r.index_affinity_violations}}},
      {"timelines",
       {{"receive_workers", std::move(rx)},
        {"subframe_workers", std::move(sw)},
        {"transmit_worker", TimelineJson(r.transmit_worker)}}},
      {"processing",
       {{"time_s", ToJson(r.processing_time_s)},
        {"mean_tsc_cycles", r.mean_tsc_cycles ? json(*r.mean_tsc_cycles) : json(nullptr)},
        {"mean_derived_cycles", r.mean_derived_cycles},
        {"predicted_duty", r.predicted_duty},
        {"measured_duty_mean",
         r.measured_duty_mean ? json(*r.measured_duty_mean) : json(nullptr)}}},
      {"latency_s", ToJson(r.latency_s)},
      {"frame_records", std::move(frames)},
      {"results",
       {{"datagrams", r.result_datagrams},
        {"bytes", r.result_bytes},
        {"send_failures", r.result_send_failures}}},
      {"truth_scored", r.truth_scored},
      {"users", std::move(users)},
  };
}

}  // namespace rapro::server
