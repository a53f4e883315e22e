#pragma once

// Ground-station <-> vehicle radio link: the binary frame codec and a
// depth-attenuated lossy channel.
//
// Frame layout (all multi-byte integers big-endian):
//
//   0xAA 0x55 | msg_type u8 | length u8 (0..64) | payload | crc16
//
// crc16 is CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF, no reflection, no
// final xor) over msg_type, length and payload.

#include <array>
#include <cstdint>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace uuv::link {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint8_t kSync0 = 0xAA;
inline constexpr std::uint8_t kSync1 = 0x55;
inline constexpr std::size_t kMaxPayload = 64;
inline constexpr std::size_t kHeaderSize = 4;
inline constexpr std::size_t kCrcSize = 2;

enum class MsgType : std::uint8_t {
  kSetMotors = 0x01,
  kPump = 0x02,
  kStartSequence = 0x03,
  kTelemetry = 0x04,
};

struct SetMotors {
  std::int8_t left = 0;  // percent, -100..100
  std::int8_t right = 0;
  bool operator==(const SetMotors&) const = default;
};

struct Pump {
  std::uint8_t mode = 0;  // 0 off, 1 intake, 2 expel
  std::uint16_t duration_ms = 0;
  bool operator==(const Pump&) const = default;
};

struct StartSequence {
  std::uint8_t seq_id = 0;
  bool operator==(const StartSequence&) const = default;
};

namespace telemetry_flags {
inline constexpr std::uint8_t kIrDegraded = 0x01;
inline constexpr std::uint8_t kIrNoSignal = 0x02;
inline constexpr std::uint8_t kPumpActive = 0x04;
inline constexpr std::uint8_t kSequenceRunning = 0x08;
}  // namespace telemetry_flags

struct Telemetry {
  std::uint16_t depth_mm = 0;
  std::array<std::uint8_t, 9> ir{};  // channel * 255
  std::uint8_t fill_est_tenth_ml = 0;
  std::uint8_t flags = 0;
  bool operator==(const Telemetry&) const = default;
};

using Message = std::variant<SetMotors, Pump, StartSequence, Telemetry>;

MsgType type_of(const Message& msg);
std::string describe(const Message& msg);

class LinkError : public std::runtime_error {
 public:
  enum class Kind {
    kPayloadTooLong,
    kInvalidMessage,
    kCrcMismatch,
    kUnknownType,
    kTruncated,
    kInvalidPayload,
    kInvalidConfig,
  };

  LinkError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

const char* to_string(LinkError::Kind kind);

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data);

/// Wraps an arbitrary payload in a frame. Throws kPayloadTooLong above 64 bytes.
Bytes encode_frame(std::uint8_t msg_type, std::span<const std::uint8_t> payload);

/// Throws kInvalidMessage when a field is outside its documented range.
Bytes encode(const Message& msg);

/// Decodes the first valid frame in `bytes`, skipping anything before a sync
/// pattern and resynchronizing past corrupt frames. If no frame decodes, the
/// error of the first candidate frame is thrown (kTruncated for input that
/// holds no sync at all).
Message decode(std::span<const std::uint8_t> bytes);

struct DecodeReport {
  std::vector<Message> messages;
  std::vector<LinkError::Kind> errors;
  std::size_t skipped_bytes = 0;
};

/// Incremental decoder for a byte stream that may contain garbage, partial
/// frames and corrupted frames.
class StreamDecoder {
 public:
  void push(std::span<const std::uint8_t> bytes);

  /// Returns every message that can be decoded from the buffered bytes. A
  /// frame cut off at the end of the buffer stays buffered until more bytes
  /// arrive, unless `flush` is set, in which case it is reported as truncated.
  DecodeReport poll(bool flush = false);

  std::size_t buffered() const { return buffer_.size(); }

 private:
  Bytes buffer_;
};

/// Decodes a complete byte stream in one go.
DecodeReport decode_stream(std::span<const std::uint8_t> bytes);

struct ChannelConfig {
  double d0 = 0.3;         // m, full delivery at or above this depth
  double d1 = 1.2;         // m, no delivery at or below this depth
  double base_loss = 0.01;
  double latency = 0.05;   // s

  void validate() const;
};

/// (1 - base_loss) * clamp((d1 - depth) / (d1 - d0), 0, 1).
double delivery_probability(double depth, const ChannelConfig& cfg);

struct Delivery {
  double latency = 0.0;
  Bytes frame;
};

/// Draws one uniform sample and either drops the frame or returns it with
/// the channel latency attached.
std::optional<Delivery> deliver(const Bytes& frame, double vehicle_depth, const ChannelConfig& cfg,
                                std::mt19937_64& rng);

/// Frames in flight, ordered by arrival time then by send order.
class Channel {
 public:
  Channel(ChannelConfig cfg, std::uint64_t seed);

  /// Returns false when the frame is lost.
  bool send(double now, const Bytes& frame, double vehicle_depth);

  /// Pops every frame whose arrival time is <= now.
  std::vector<Bytes> receive(double now);

  std::size_t in_flight() const { return queue_.size(); }
  const ChannelConfig& config() const { return cfg_; }

 private:
  struct InFlight {
    double arrival;
    std::uint64_t seq;
    Bytes frame;
    bool operator>(const InFlight& o) const {
      return arrival != o.arrival ? arrival > o.arrival : seq > o.seq;
    }
  };

  ChannelConfig cfg_;
  std::mt19937_64 rng_;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<InFlight, std::vector<InFlight>, std::greater<>> queue_;
};

}  // namespace uuv::link
