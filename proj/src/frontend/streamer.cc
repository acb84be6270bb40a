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
#include "rapro/frontend/streamer.h"

#include <algorithm>
#include <chrono>
#include <atomic>
#include <exception>
#include <semaphore>
#include <set>
#include <thread>

#include "rapro/common/error.h"
#include "rapro/common/mailbox.h"
#include "rapro/common/rng.h"
#include "rapro/common/stats.h"
#include "rapro/frontend/uplink.h"
#include "rapro/wire/packet.h"

namespace rapro::frontend {
namespace {

using Clock = std::chrono::steady_clock;
using Datagram = std::vector<std::uint8_t>;

struct PreparedFrame {
  std::uint32_t frame_seq = 0;
  // Index 0 is unused; subframes 1-9 hold their packets.
  std::vector<std::vector<Datagram>> subframes;
};

// Builds frames ahead of the sender. At most two prepared frames exist at a
// time: `slots_` is acquired before building and released by the sender.
class FrameProducer {
 public:
  FrameProducer(const SystemConfig& config, const StreamOptions& options)
      : synth_(config), options_(options) {
    thread_ = std::thread([this] { Run(); });
  }

  ~FrameProducer() {
    stop_ = true;
    slots_.release();
    thread_.join();
  }

  /// Next prepared frame, or nullopt when production ended. Rethrows a
  /// producer failure.
  std::optional<PreparedFrame> Next() {
    auto f = queue_.Pop();
    if (!f) {
      if (error_) std::rethrow_exception(error_);
      return std::nullopt;
    }
    slots_.release();
    return f;
  }

 private:
  void Run() {
    try {
      for (std::size_t i = 0; i < options_.num_frames; ++i) {
        slots_.acquire();
        if (stop_) break;
        const auto seq = static_cast<std::uint32_t>(options_.first_frame_seq + i);
        const SynthesizedFrame frame = synth_.Build(seq);
        PreparedFrame p;
        p.frame_seq = seq;
        p.subframes.resize(synth_.config().frame.num_subframes);
        for (std::size_t sf = 1; sf < p.subframes.size(); ++sf) {
          p.subframes[sf] = synth_.SubframePackets(frame, sf);
        }
        queue_.Push(std::move(p));
      }
    } catch (...) {
      error_ = std::current_exception();
    }
    queue_.Close();
  }

  FrameSynthesizer synth_;
  StreamOptions options_;
  Mailbox<PreparedFrame> queue_;
  std::counting_semaphore<> slots_{2};
  std::atomic<bool> stop_{false};
  std::exception_ptr error_;
  std::thread thread_;
};

class PacedSender {
 public:
  PacedSender(DatagramSink& sink, const StreamOptions& options, StreamReport& report)
      : sink_(sink), faults_(options.faults), fault_rng_(options.faults.seed),
        report_(report),
        drop_set_(options.faults.drop_one_packet_of.begin(),
                  options.faults.drop_one_packet_of.end()) {}

  bool stopped() const { return stopped_; }

  void SendMarker(const Datagram& marker) {
    for (std::size_t r = 0; r < sink_.num_routes() && !stopped_; ++r) {
      if (!Admit()) return;
      if (Deliver(r, marker)) {
        ++report_.marker_packets;
        report_.marker_bytes += marker.size();
      }
    }
  }

  void SendData(const Datagram& packet, std::uint32_t frame_seq, std::uint8_t subframe,
                bool first_of_subframe) {
    if (!Admit()) return;
    if (first_of_subframe && drop_set_.erase({frame_seq, subframe}) > 0) {
      ++report_.dropped_by_fault;
      return;
    }
    if (faults_.drop_probability > 0 && fault_rng_.Uniform() < faults_.drop_probability) {
      ++report_.dropped_by_fault;
      return;
    }
    const auto header = wire::ReadHeader(packet);
    const std::size_t route = header.antenna_idx % sink_.num_routes();
    const int copies =
        (faults_.duplicate_probability > 0 &&
         fault_rng_.Uniform() < faults_.duplicate_probability) ? 2 : 1;
    if (copies == 2) ++report_.duplicated_by_fault;
    for (int c = 0; c < copies; ++c) {
      if (Deliver(route, packet)) {
        report_.payload_bytes += packet.size() - wire::kHeaderBytes;
        report_.header_bytes += wire::kHeaderBytes;
      }
    }
  }

 private:
  // Applies the stop-after fault; false once the link is "dead".
  bool Admit() {
    if (stopped_) return false;
    if (faults_.stop_after_packets && attempted_ >= *faults_.stop_after_packets) {
      stopped_ = true;
      report_.stopped_early = true;
      return false;
    }
    ++attempted_;
    return true;
  }

  bool Deliver(std::size_t route, const Datagram& d) {
    if (!sink_.Send(route, d)) {
      ++report_.send_failures;
      return false;
    }
    ++report_.packets_sent;
    report_.bytes_sent += d.size();
    return true;
  }

  DatagramSink& sink_;
  const FaultInjection& faults_;
  Rng fault_rng_;
  StreamReport& report_;
  std::set<std::pair<std::uint32_t, std::uint8_t>> drop_set_;
  std::size_t attempted_ = 0;
  bool stopped_ = false;
};

}  // namespace

StreamReport StreamFrames(const SystemConfig& config, const StreamOptions& options,
                          DatagramSink& sink) {
  config.Validate();
  if (!(options.realtime_factor > 0.0)) {
    throw ConfigError("realtime_factor must be > 0");
  }
  if (!(options.slot_fill > 0.0 && options.slot_fill <= 1.0)) {
    throw ConfigError("slot_fill must be in (0, 1]");
  }
  if (sink.num_routes() == 0) throw ConfigError("sink has no routes");

  StreamReport report;
  report.realtime_factor = options.realtime_factor;
  report.frame_period_s = config.frame.frame_duration / options.realtime_factor;
  report.truth = {config, options.first_frame_seq, options.num_frames,
                  config.LinkFingerprint()};
  if (options.num_frames == 0) return report;

  const auto period = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(report.frame_period_s));
  const auto slot = period / static_cast<long>(config.frame.num_subframes);
  const auto spread = std::chrono::duration_cast<Clock::duration>(slot * options.slot_fill);

  FrameProducer producer(config, options);
  PacedSender sender(sink, options, report);
  std::vector<double> pacing_errors;

  std::optional<Clock::time_point> t0;
  Clock::time_point wall_start;
  for (std::size_t f = 0; !sender.stopped(); ++f) {
    auto frame = producer.Next();
    if (!frame) break;
    if (!t0) {
      // The schedule starts once the first frame is ready, so the build time
      // of frame 0 is not charged as pacing error.
      t0 = Clock::now();
      wall_start = *t0;
    }
    const auto frame_start = *t0 + period * static_cast<long>(f);
    std::this_thread::sleep_until(frame_start);
    sender.SendMarker(wire::EncodeMarker(frame->frame_seq));

    for (std::size_t sf = 1; sf < frame->subframes.size() && !sender.stopped(); ++sf) {
      const auto& packets = frame->subframes[sf];
      const auto slot_start = frame_start + slot * static_cast<long>(sf);
      const auto slot_end = slot_start + slot;
      std::optional<Clock::time_point> first_sent;
      for (std::size_t j = 0; j < packets.size() && !sender.stopped(); ++j) {
        const auto due = slot_start + spread * static_cast<long>(j) /
                                          static_cast<long>(packets.size());
        std::this_thread::sleep_until(due);
        if (!first_sent) first_sent = Clock::now();
        sender.SendData(packets[j], frame->frame_seq, static_cast<std::uint8_t>(sf),
                        j == 0);
      }
      if (first_sent) {
        const double err =
            std::chrono::duration<double>(*first_sent - slot_start).count();
        pacing_errors.push_back(std::max(0.0, err) / report.frame_period_s);
        if (Clock::now() > slot_end) ++report.pacing.overruns;
      }
    }
    ++report.frames_sent;
  }
  report.wall_time_s =
      t0 ? std::chrono::duration<double>(Clock::now() - wall_start).count() : 0.0;
  const Summary s = Summary::Of(pacing_errors);
  report.pacing.samples = s.count;
  report.pacing.mean = s.mean;
  report.pacing.p50 = s.p50;
  report.pacing.p90 = s.p90;
  report.pacing.p99 = s.p99;
  report.pacing.max = s.max;
  return report;
}

nlohmann::json ToJson(const StreamReport& r) {
  return {
      {"frames_sent", r.frames_sent},
      {"packets_sent", r.packets_sent},
      {"marker_packets", r.marker_packets},
      {"bytes_sent", r.bytes_sent},
      {"payload_bytes", r.payload_bytes},
      {"header_bytes", r.header_bytes},
      {"marker_bytes", r.marker_bytes},
      {"send_failures", r.send_failures},
      {"dropped_by_fault", r.dropped_by_fault},
      {"duplicated_by_fault", r.duplicated_by_fault},
      {"stopped_early", r.stopped_early},
      {"realtime_factor", r.realtime_factor},
      {"frame_period_s", r.frame_period_s},
      {"wall_time_s", r.wall_time_s},
      {"pacing_error",
       {{"unit", "fraction_of_frame_period"},
        {"samples", r.pacing.samples},
        {"mean", r.pacing.mean},
        {"p50", r.pacing.p50},
        {"p90", r.pacing.p90},
        {"p99", r.pacing.p99},
        {"max", r.pacing.max},
        {"overruns", r.pacing.overruns}}},
      {"ground_truth",
       {{"config", ToJson(r.truth.config)},
        {"first_frame_seq", r.truth.first_frame_seq},
        {"num_frames", r.truth.num_frames},
        {"link_fingerprint", r.truth.link_fingerprint}}},
  };
}

StreamReport StreamReportFromJson(const nlohmann::json& j) {
  StreamReport r;
  try {
    r.frames_sent = j.at("frames_sent").get<std::size_t>();
    r.packets_sent = j.at("packets_sent").get<std::size_t>();
    r.marker_packets = j.at("marker_packets").get<std::size_t>();
    r.bytes_sent = j.at("bytes_sent").get<std::size_t>();
    r.payload_bytes = j.at("payload_bytes").get<std::size_t>();
    r.header_bytes = j.at("header_bytes").get<std::size_t>();
    r.marker_bytes = j.at("marker_bytes").get<std::size_t>();
    r.send_failures = j.at("send_failures").get<std::size_t>();
    r.dropped_by_fault = j.value("dropped_by_fault", std::size_t{0});
    r.duplicated_by_fault = j.value("duplicated_by_fault", std::size_t{0});
    r.stopped_early = j.value("stopped_early", false);
    r.realtime_factor = j.at("realtime_factor").get<double>();
    r.frame_period_s = j.at("frame_period_s").get<double>();
    r.wall_time_s = j.value("wall_time_s", 0.0);
    const auto& p = j.at("pacing_error");
    r.pacing.samples = p.at("samples").get<std::size_t>();
    r.pacing.mean = p.at("mean").get<double>();
    r.pacing.p50 = p.at("p50").get<double>();
    r.pacing.p90 = p.at("p90").get<double>();
    r.pacing.p99 = p.at("p99").get<double>();
    r.pacing.max = p.at("max").get<double>();
    r.pacing.overruns = p.at("overruns").get<std::size_t>();
    const auto& t = j.at("ground_truth");
    r.truth.config = SystemConfigFromJson(t.at("config"));
    r.truth.first_frame_seq = t.at("first_frame_seq").get<std::uint32_t>();
    r.truth.num_frames = t.at("num_frames").get<std::size_t>();
    r.truth.link_fingerprint = t.at("link_fingerprint").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("stream report: ") + e.what());
  }
  return r;
}

}  // namespace rapro::frontend
