#include "uuv/link.hpp"

#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>
#include <string>

using namespace uuv::link;

namespace {

Bytes read_hex(const std::string& name) {
  std::ifstream in(std::string(UUV_FIXTURE_DIR) + "/" + name + ".hex");
  REQUIRE(in.good());
  Bytes out;
  std::string tok;
  while (in >> tok) out.push_back(static_cast<std::uint8_t>(std::stoul(tok, nullptr, 16)));
  return out;
}

Message random_message(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 3), motor(-100, 100), byte(0, 255), word(0, 65535),
      mode(0, 2), fill(0, 250);
  switch (kind(rng)) {
    case 0:
      return SetMotors{static_cast<std::int8_t>(motor(rng)), static_cast<std::int8_t>(motor(rng))};
    case 1:
      return Pump{static_cast<std::uint8_t>(mode(rng)), static_cast<std::uint16_t>(word(rng))};
    case 2:
      return StartSequence{static_cast<std::uint8_t>(byte(rng))};
    default: {
      Telemetry t;
      t.depth_mm = static_cast<std::uint16_t>(word(rng));
      for (auto& c : t.ir) c = static_cast<std::uint8_t>(byte(rng));
      t.fill_est_tenth_ml = static_cast<std::uint8_t>(fill(rng));
      t.flags = static_cast<std::uint8_t>(byte(rng));
      return t;
    }
  }
}

LinkError::Kind decode_error(const Bytes& b) {
  try {
    decode(b);
  } catch (const LinkError& e) {
    return e.kind();
  }
  FAIL("decode succeeded");
  return LinkError::Kind::kInvalidConfig;
}

}  // namespace

TEST_CASE("crc16 check value") {
  const std::string s = "123456789";
  const Bytes b(s.begin(), s.end());
  CHECK(crc16_ccitt_false(b) == 0x29B1);
  CHECK(crc16_ccitt_false(Bytes{}) == 0xFFFF);
}

TEST_CASE("golden frames") {
  CHECK(encode(SetMotors{0, 0}) == read_hex("set_motors_0_0"));
  CHECK(encode(SetMotors{50, -25}) == read_hex("set_motors_50_-25"));
  CHECK(encode(Pump{1, 3000}) == read_hex("pump_intake_3000"));
  CHECK(encode(StartSequence{3}) == read_hex("start_sequence_3"));
  Telemetry t;
  t.depth_mm = 1013;
  t.ir = {255, 200, 150, 100, 50, 25, 10, 5, 0};
  t.fill_est_tenth_ml = 125;
  t.flags = telemetry_flags::kIrDegraded | telemetry_flags::kPumpActive;
  CHECK(encode(t) == read_hex("telemetry"));
  CHECK(decode(read_hex("telemetry")) == Message{t});
}

TEST_CASE("round trip") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20000; ++i) {
    const Message m = random_message(rng);
    CHECK(decode(encode(m)) == m);
  }
}

TEST_CASE("encode errors") {
  CHECK_THROWS_AS(encode(SetMotors{101, 0}), LinkError);
  CHECK_THROWS_AS(encode(Pump{3, 0}), LinkError);
  const Bytes big(65, 0);
  try {
    encode_frame(0x01, big);
    FAIL("expected PayloadTooLong");
  } catch (const LinkError& e) {
    CHECK(e.kind() == LinkError::Kind::kPayloadTooLong);
  }
  CHECK(encode_frame(0x01, Bytes(64, 0)).size() == 70);
}

TEST_CASE("decode errors") {
  CHECK(decode_error({}) == LinkError::Kind::kTruncated);
  Bytes f = encode(Pump{1, 10});
  f.pop_back();
  CHECK(decode_error(f) == LinkError::Kind::kTruncated);
  CHECK(decode_error(encode_frame(0x09, Bytes{1, 2})) == LinkError::Kind::kUnknownType);
  CHECK(decode_error(encode_frame(0x01, Bytes{1})) == LinkError::Kind::kInvalidPayload);
}

TEST_CASE("every single-byte corruption is detected") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const Bytes frame = encode(random_message(rng));
    for (std::size_t pos = 2; pos < frame.size(); ++pos) {
      for (int delta = 1; delta < 256; delta += 17) {
        Bytes bad = frame;
        bad[pos] = static_cast<std::uint8_t>(bad[pos] ^ delta);
        const LinkError::Kind k = decode_error(bad);
        if (pos == 3) {
          // a corrupted length either overruns the buffer or is out of range
          CHECK((k == LinkError::Kind::kCrcMismatch || k == LinkError::Kind::kTruncated ||
                 k == LinkError::Kind::kInvalidPayload));
        } else {
          CHECK(k == LinkError::Kind::kCrcMismatch);
        }
      }
    }
  }
}

TEST_CASE("garbage between frames") {
  const Bytes a = encode(SetMotors{10, -10});
  const Bytes b = encode(StartSequence{7});
  Bytes stream = a;
  stream.insert(stream.end(), {0x13, 0xAA, 0x00});
  stream.insert(stream.end(), b.begin(), b.end());
  const DecodeReport r = decode_stream(stream);
  REQUIRE(r.messages.size() == 2);
  CHECK(r.messages[0] == Message{SetMotors{10, -10}});
  CHECK(r.messages[1] == Message{StartSequence{7}});
  CHECK(r.skipped_bytes == 3);

  // leading garbage and a corrupted frame in front
  Bytes corrupt = a;
  corrupt[4] ^= 0x01;
  Bytes s2{0x01, 0x02};
  s2.insert(s2.end(), corrupt.begin(), corrupt.end());
  s2.insert(s2.end(), b.begin(), b.end());
  CHECK(decode(s2) == Message{StartSequence{7}});
  const DecodeReport r2 = decode_stream(s2);
  REQUIRE(r2.messages.size() == 1);
  REQUIRE(r2.errors.size() == 1);
  CHECK(r2.errors[0] == LinkError::Kind::kCrcMismatch);
}

TEST_CASE("stream decoder handles byte-at-a-time input") {
  std::mt19937_64 rng(3);
  std::vector<Message> sent;
  Bytes stream;
  for (int i = 0; i < 200; ++i) {
    sent.push_back(random_message(rng));
    const Bytes f = encode(sent.back());
    stream.insert(stream.end(), f.begin(), f.end());
  }
  StreamDecoder dec;
  std::vector<Message> got;
  std::uniform_int_distribution<std::size_t> chunk(1, 9);
  for (std::size_t pos = 0; pos < stream.size();) {
    const std::size_t n = std::min(chunk(rng), stream.size() - pos);
    dec.push(std::span<const std::uint8_t>(stream).subspan(pos, n));
    pos += n;
    for (auto& m : dec.poll().messages) got.push_back(m);
  }
  CHECK(got == sent);
  CHECK(dec.buffered() == 0);

  dec.push(Bytes{0xAA, 0x55, 0x01});
  CHECK(dec.poll().messages.empty());
  CHECK(dec.buffered() == 3);
  const DecodeReport flushed = dec.poll(true);
  REQUIRE(flushed.errors.size() == 1);
  CHECK(flushed.errors[0] == LinkError::Kind::kTruncated);
}

TEST_CASE("fuzzed input never crashes") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<std::size_t> len(0, 200);
  for (int i = 0; i < 20000; ++i) {
    Bytes b(len(rng));
    for (auto& x : b) x = static_cast<std::uint8_t>(byte(rng));
    if (i % 3 == 0 && b.size() > 4) {
      b[0] = kSync0;
      b[1] = kSync1;
    }
    try {
      decode(b);
    } catch (const LinkError&) {
    }
    const DecodeReport r = decode_stream(b);
    CHECK(r.skipped_bytes <= b.size());
  }
}

TEST_CASE("delivery probability") {
  const ChannelConfig cfg;
  CHECK(delivery_probability(0.0, cfg) == doctest::Approx(0.99));
  CHECK(delivery_probability(0.75, cfg) == doctest::Approx(0.495));
  CHECK(delivery_probability(1.2, cfg) == 0.0);
  CHECK(delivery_probability(3.0, cfg) == 0.0);
  double prev = 1.0;
  for (double d = 0.0; d < 2.0; d += 0.01) {
    const double p = delivery_probability(d, cfg);
    CHECK(p <= prev);
    prev = p;
  }

  std::mt19937_64 rng(5);
  const Bytes frame = encode(StartSequence{1});
  for (double depth : {0.0, 0.75, 1.2}) {
    int delivered = 0;
    for (int i = 0; i < 10000; ++i) {
      const auto d = deliver(frame, depth, cfg, rng);
      if (d) {
        ++delivered;
        CHECK(d->latency == cfg.latency);
        CHECK(d->frame == frame);
      }
    }
    const double expected = delivery_probability(depth, cfg);
    CHECK(std::abs(delivered / 10000.0 - expected) <= 0.02 * std::max(expected, 1e-9));
  }

  ChannelConfig bad;
  bad.d0 = 1.5;
  CHECK_THROWS_AS(bad.validate(), LinkError);
}

TEST_CASE("channel ordering and latency") {
  ChannelConfig cfg;
  cfg.base_loss = 0.0;
  Channel ch(cfg, 42);
  CHECK(ch.send(0.0, encode(StartSequence{1}), 0.0));
  CHECK(ch.send(0.0, encode(StartSequence{2}), 0.0));
  CHECK(ch.send(0.01, encode(StartSequence{3}), 0.0));
  CHECK_FALSE(ch.send(0.02, encode(StartSequence{4}), 1.3));
  CHECK(ch.receive(0.049).empty());
  auto first = ch.receive(0.05);
  REQUIRE(first.size() == 2);
  CHECK(decode(first[0]) == Message{StartSequence{1}});
  CHECK(decode(first[1]) == Message{StartSequence{2}});
  auto second = ch.receive(1.0);
  REQUIRE(second.size() == 1);
  CHECK(decode(second[0]) == Message{StartSequence{3}});
  CHECK(ch.in_flight() == 0);
}
