#include "uuv/link.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace uuv::link {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

std::uint16_t get_u16(std::span<const std::uint8_t> p, std::size_t at) {
  return static_cast<std::uint16_t>((p[at] << 8) | p[at + 1]);
}

std::size_t expected_payload(MsgType type) {
  switch (type) {
    case MsgType::kSetMotors:
      return 2;
    case MsgType::kPump:
      return 3;
    case MsgType::kStartSequence:
      return 1;
    case MsgType::kTelemetry:
      return 13;
  }
  return 0;
}

bool known_type(std::uint8_t t) {
  return t >= static_cast<std::uint8_t>(MsgType::kSetMotors) &&
         t <= static_cast<std::uint8_t>(MsgType::kTelemetry);
}

void check_motor(std::int8_t v, const char* name) {
  if (v < -100 || v > 100) {
    throw LinkError(LinkError::Kind::kInvalidMessage,
                    fmt::format("SetMotors.{} = {} outside [-100, 100]", name, v));
  }
}

void validate(const Message& msg) {
  std::visit(Overloaded{
                 [](const SetMotors& m) {
                   check_motor(m.left, "left");
                   check_motor(m.right, "right");
                 },
                 [](const Pump& m) {
                   if (m.mode > 2) {
                     throw LinkError(LinkError::Kind::kInvalidMessage,
                                     fmt::format("Pump.mode = {} outside [0, 2]", m.mode));
                   }
                 },
                 [](const StartSequence&) {},
                 [](const Telemetry& m) {
                   if (m.fill_est_tenth_ml > 250) {
                     throw LinkError(LinkError::Kind::kInvalidMessage,
                                     fmt::format("Telemetry.fill_est_tenth_ml = {} above 250",
                                                 m.fill_est_tenth_ml));
                   }
                 },
             },
             msg);
}

Bytes payload_of(const Message& msg) {
  Bytes p;
  std::visit(Overloaded{
                 [&](const SetMotors& m) {
                   p.push_back(static_cast<std::uint8_t>(m.left));
                   p.push_back(static_cast<std::uint8_t>(m.right));
                 },
                 [&](const Pump& m) {
                   p.push_back(m.mode);
                   put_u16(p, m.duration_ms);
                 },
                 [&](const StartSequence& m) { p.push_back(m.seq_id); },
                 [&](const Telemetry& m) {
                   put_u16(p, m.depth_mm);
                   p.insert(p.end(), m.ir.begin(), m.ir.end());
                   p.push_back(m.fill_est_tenth_ml);
                   p.push_back(m.flags);
                 },
             },
             msg);
  return p;
}

Message parse_payload(MsgType type, std::span<const std::uint8_t> p) {
  if (p.size() != expected_payload(type)) {
    throw LinkError(LinkError::Kind::kInvalidPayload,
                    fmt::format("payload of {} bytes for type 0x{:02X}, expected {}", p.size(),
                                static_cast<int>(type), expected_payload(type)));
  }
  Message msg;
  switch (type) {
    case MsgType::kSetMotors:
      msg = SetMotors{static_cast<std::int8_t>(p[0]), static_cast<std::int8_t>(p[1])};
      break;
    case MsgType::kPump:
      msg = Pump{p[0], get_u16(p, 1)};
      break;
    case MsgType::kStartSequence:
      msg = StartSequence{p[0]};
      break;
    case MsgType::kTelemetry: {
      Telemetry t;
      t.depth_mm = get_u16(p, 0);
      std::copy_n(p.begin() + 2, 9, t.ir.begin());
      t.fill_est_tenth_ml = p[11];
      t.flags = p[12];
      msg = t;
      break;
    }
  }
  try {
    validate(msg);
  } catch (const LinkError& e) {
    throw LinkError(LinkError::Kind::kInvalidPayload, e.what());
  }
  return msg;
}

enum class FrameStatus { kOk, kNeedMore, kError };

struct FrameResult {
  FrameStatus status = FrameStatus::kNeedMore;
  Message message;
  std::size_t size = 0;
  LinkError::Kind error = LinkError::Kind::kTruncated;
};

// `p` starts at a sync pattern.
FrameResult try_frame(std::span<const std::uint8_t> p) {
  FrameResult res;
  if (p.size() < kHeaderSize) return res;
  const std::uint8_t type = p[2];
  const std::size_t len = p[3];
  if (len > kMaxPayload) {
    res.status = FrameStatus::kError;
    res.error = LinkError::Kind::kInvalidPayload;
    return res;
  }
  const std::size_t total = kHeaderSize + len + kCrcSize;
  if (p.size() < total) return res;

  const std::uint16_t crc = crc16_ccitt_false(p.subspan(2, 2 + len));
  if (crc != get_u16(p, kHeaderSize + len)) {
    res.status = FrameStatus::kError;
    res.error = LinkError::Kind::kCrcMismatch;
    return res;
  }
  if (!known_type(type)) {
    res.status = FrameStatus::kError;
    res.error = LinkError::Kind::kUnknownType;
    return res;
  }
  try {
    res.message = parse_payload(static_cast<MsgType>(type), p.subspan(kHeaderSize, len));
  } catch (const LinkError& e) {
    res.status = FrameStatus::kError;
    res.error = e.kind();
    return res;
  }
  res.status = FrameStatus::kOk;
  res.size = total;
  return res;
}

std::size_t find_sync(std::span<const std::uint8_t> p, std::size_t from) {
  for (std::size_t i = from; i + 1 < p.size(); ++i) {
    if (p[i] == kSync0 && p[i + 1] == kSync1) return i;
  }
  return p.size();
}

// Scans `p` and consumes everything it can. Returns the number of bytes
// consumed; a trailing partial frame is left unconsumed unless `flush`.
std::size_t scan(std::span<const std::uint8_t> p, bool flush, DecodeReport& report) {
  std::size_t pos = 0;
  while (pos < p.size()) {
    const std::size_t sync = find_sync(p, pos);
    if (sync == p.size()) {
      // Keep a trailing 0xAA: it may be the first half of a sync pattern.
      const std::size_t keep = (!flush && p.back() == kSync0) ? 1 : 0;
      report.skipped_bytes += p.size() - pos - keep;
      return p.size() - keep;
    }
    report.skipped_bytes += sync - pos;
    const FrameResult fr = try_frame(p.subspan(sync));
    switch (fr.status) {
      case FrameStatus::kOk:
        report.messages.push_back(fr.message);
        pos = sync + fr.size;
        break;
      case FrameStatus::kError:
        report.errors.push_back(fr.error);
        pos = sync + 1;
        break;
      case FrameStatus::kNeedMore:
        if (!flush) return sync;
        report.errors.push_back(LinkError::Kind::kTruncated);
        pos = sync + 1;
        break;
    }
  }
  return p.size();
}

}  // namespace

MsgType type_of(const Message& msg) {
  return std::visit(Overloaded{
                        [](const SetMotors&) { return MsgType::kSetMotors; },
                        [](const Pump&) { return MsgType::kPump; },
                        [](const StartSequence&) { return MsgType::kStartSequence; },
                        [](const Telemetry&) { return MsgType::kTelemetry; },
                    },
                    msg);
}

std::string describe(const Message& msg) {
  return std::visit(
      Overloaded{
          [](const SetMotors& m) { return fmt::format("set_motors {} {}", m.left, m.right); },
          [](const Pump& m) {
            static constexpr const char* kModes[] = {"off", "intake", "expel"};
            return fmt::format("pump {} {}", m.mode <= 2 ? kModes[m.mode] : "?", m.duration_ms);
          },
          [](const StartSequence& m) { return fmt::format("start_sequence {}", m.seq_id); },
          [](const Telemetry& m) {
            return fmt::format("telemetry depth_mm={} fill={} flags=0x{:02X}", m.depth_mm,
                               m.fill_est_tenth_ml, m.flags);
          },
      },
      msg);
}

const char* to_string(LinkError::Kind kind) {
  switch (kind) {
    case LinkError::Kind::kPayloadTooLong: return "PayloadTooLong";
    case LinkError::Kind::kInvalidMessage: return "InvalidMessage";
    case LinkError::Kind::kCrcMismatch: return "CrcMismatch";
    case LinkError::Kind::kUnknownType: return "UnknownType";
    case LinkError::Kind::kTruncated: return "Truncated";
    case LinkError::Kind::kInvalidPayload: return "InvalidPayload";
    case LinkError::Kind::kInvalidConfig: return "InvalidConfig";
  }
  return "?";
}

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t byte : data) {
    crc ^= static_cast<std::uint16_t>(byte << 8);
    for (int bit = 0; bit < 8; ++bit) {
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                           : static_cast<std::uint16_t>(crc << 1);
    }
  }
  return crc;
}

Bytes encode_frame(std::uint8_t msg_type, std::span<const std::uint8_t> payload) {
  if (payload.size() > kMaxPayload) {
    throw LinkError(LinkError::Kind::kPayloadTooLong,
                    fmt::format("payload of {} bytes exceeds {}", payload.size(), kMaxPayload));
  }
  Bytes out(kHeaderSize + payload.size() + kCrcSize);
  out[0] = kSync0;
  out[1] = kSync1;
  out[2] = msg_type;
  out[3] = static_cast<std::uint8_t>(payload.size());
  std::copy(payload.begin(), payload.end(), out.begin() + kHeaderSize);
  out.resize(kHeaderSize + payload.size());
  put_u16(out, crc16_ccitt_false(std::span(out).subspan(2)));
  return out;
}

Bytes encode(const Message& msg) {
  validate(msg);
  const Bytes payload = payload_of(msg);
  return encode_frame(static_cast<std::uint8_t>(type_of(msg)), payload);
}

Message decode(std::span<const std::uint8_t> bytes) {
  std::optional<LinkError::Kind> first_error;
  std::size_t pos = 0;
  while (true) {
    const std::size_t sync = find_sync(bytes, pos);
    if (sync == bytes.size()) break;
    const FrameResult fr = try_frame(bytes.subspan(sync));
    if (fr.status == FrameStatus::kOk) return fr.message;
    const LinkError::Kind kind =
        fr.status == FrameStatus::kNeedMore ? LinkError::Kind::kTruncated : fr.error;
    if (!first_error) first_error = kind;
    pos = sync + 1;
  }
  const LinkError::Kind kind = first_error.value_or(LinkError::Kind::kTruncated);
  throw LinkError(kind, fmt::format("decode: no valid frame ({})", to_string(kind)));
}

void StreamDecoder::push(std::span<const std::uint8_t> bytes) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

DecodeReport StreamDecoder::poll(bool flush) {
  DecodeReport report;
  const std::size_t consumed = scan(buffer_, flush, report);
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(consumed));
  return report;
}

DecodeReport decode_stream(std::span<const std::uint8_t> bytes) {
  DecodeReport report;
  scan(bytes, true, report);
  return report;
}

void ChannelConfig::validate() const {
  if (!(d0 >= 0.0 && d0 < d1)) {
    throw LinkError(LinkError::Kind::kInvalidConfig,
                    fmt::format("channel: need 0 <= d0 < d1 (got d0={}, d1={})", d0, d1));
  }
  if (!(base_loss >= 0.0 && base_loss <= 1.0)) {
    throw LinkError(LinkError::Kind::kInvalidConfig,
                    fmt::format("channel.base_loss must lie in [0, 1] (got {})", base_loss));
  }
  if (!(latency >= 0.0)) {
    throw LinkError(LinkError::Kind::kInvalidConfig,
                    fmt::format("channel.latency must be >= 0 (got {})", latency));
  }
}

double delivery_probability(double depth, const ChannelConfig& cfg) {
  const double ramp = std::clamp((cfg.d1 - depth) / (cfg.d1 - cfg.d0), 0.0, 1.0);
  return (1.0 - cfg.base_loss) * ramp;
}

std::optional<Delivery> deliver(const Bytes& frame, double vehicle_depth, const ChannelConfig& cfg,
                                std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double draw = unit(rng);
  if (!(draw < delivery_probability(vehicle_depth, cfg))) return std::nullopt;
  return Delivery{cfg.latency, frame};
}

Channel::Channel(ChannelConfig cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {
  cfg_.validate();
}

bool Channel::send(double now, const Bytes& frame, double vehicle_depth) {
  auto delivered = deliver(frame, vehicle_depth, cfg_, rng_);
  if (!delivered) return false;
  queue_.push(InFlight{now + delivered->latency, next_seq_++, std::move(delivered->frame)});
  return true;
}

std::vector<Bytes> Channel::receive(double now) {
  std::vector<Bytes> out;
  while (!queue_.empty() && queue_.top().arrival <= now) {
    out.push_back(queue_.top().frame);
    queue_.pop();
  }
  return out;
}

}  // namespace uuv::link
