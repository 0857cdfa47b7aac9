// Copyright 2026 The icnap Authors
// SPDX-License-Identifier: Apache-2.0
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

#ifndef ICNAP_COAP_HPP
#define ICNAP_COAP_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace icnap::coap {

// Wire constants from RFC 7252 Section 3.
inline constexpr unsigned kVersion = 1;
inline constexpr std::size_t kMaxTokenLength = 8;
inline constexpr std::uint8_t kPayloadMarker = 0xFF;

enum class Type : std::uint8_t {
  Con = 0,
  Non = 1,
  Ack = 2,
  Rst = 3,
};

const char* toString(Type type);

/// Message code byte: 3-bit class, 5-bit detail (RFC 7252 Section 12.1).
struct Code {
  std::uint8_t raw = 0;

  constexpr Code() = default;
  constexpr Code(unsigned cls, unsigned detail)
      : raw(static_cast<std::uint8_t>(((cls & 0x07) << 5) | (detail & 0x1F))) {}

  constexpr unsigned cls() const { return raw >> 5; }
  constexpr unsigned detail() const { return raw & 0x1F; }
  constexpr bool isEmpty() const { return raw == 0; }
  constexpr bool isRequest() const { return cls() == 0 && raw != 0; }
  constexpr bool isResponse() const { return cls() >= 2; }

  /// Dotted "c.dd" form, e.g. "0.01", "2.05".
  std::string str() const;

  friend constexpr bool operator==(Code, Code) = default;
};

namespace codes {
inline constexpr Code Empty{0, 0};
inline constexpr Code Get{0, 1};
inline constexpr Code Post{0, 2};
inline constexpr Code Put{0, 3};
inline constexpr Code Delete{0, 4};
inline constexpr Code Created{2, 1};
inline constexpr Code Deleted{2, 2};
inline constexpr Code Changed{2, 4};
inline constexpr Code Content{2, 5};
inline constexpr Code BadRequest{4, 0};
inline constexpr Code NotFound{4, 4};
inline constexpr Code MethodNotAllowed{4, 5};
inline constexpr Code InternalServerError{5, 0};
}  // namespace codes

// Option numbers (RFC 7252 Section 12.2, RFC 7641 Section 2).
namespace options {
inline constexpr std::uint16_t UriHost = 3;
inline constexpr std::uint16_t Observe = 6;
inline constexpr std::uint16_t UriPath = 11;
inline constexpr std::uint16_t ContentFormat = 12;
}  // namespace options

// Observe request values (RFC 7641 Section 2).
inline constexpr std::uint32_t kObserveRegister = 0;
inline constexpr std::uint32_t kObserveDeregister = 1;
// Observe sequence numbers live in 24 bits (RFC 7641 Section 3.4).
inline constexpr std::uint32_t kObserveModulus = 1u << 24;

/// Raised when decode() meets bytes that are not a well-formed message.
struct MalformedMessage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when encode() is given a message violating a structural invariant.
struct EncodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised for strings that are not "coap://authority[/path...]".
struct InvalidUri : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Option {
  std::uint16_t number = 0;
  std::vector<std::uint8_t> value;

  friend bool operator==(const Option&, const Option&) = default;
};

/// Minimal-length big-endian uint option; value 0 encodes as empty.
Option uintOption(std::uint16_t number, std::uint32_t value);
Option stringOption(std::uint16_t number, std::string_view value);
std::uint32_t optionUint(const Option& option);
std::string optionText(const Option& option);

class Message {
 public:
  Type type = Type::Con;
  Code code;
  std::uint16_t messageId = 0;
  std::vector<std::uint8_t> token;
  std::vector<std::uint8_t> payload;

  /// Keeps options ordered by number; equal numbers keep insertion order.
  void addOption(Option option);
  const std::vector<Option>& options() const { return m_options; }
  const Option* findOption(std::uint16_t number) const;
  void removeOptions(std::uint16_t number);

  std::optional<std::uint32_t> observe() const;
  bool isEmpty() const { return code.isEmpty(); }

  friend bool operator==(const Message&, const Message&) = default;

 private:
  std::vector<Option> m_options;
};

/// Serializes per RFC 7252 Section 3. Throws EncodeError if the token
/// exceeds 8 bytes, an option delta/length is unrepresentable, or an
/// empty-code message carries a token, options or payload.
std::vector<std::uint8_t> encode(const Message& message);

/// Parses a complete datagram. Throws MalformedMessage on any violation:
/// short header, bad version, TKL > 8, truncated token/option, option
/// nibble 15 outside the payload marker, or a payload marker followed by
/// zero payload bytes.
Message decode(std::span<const std::uint8_t> bytes);

struct Uri {
  std::string authority;                  // lowercase dotted labels
  std::vector<std::string> pathSegments;  // decoded, no slashes

  /// "coap://authority/seg/seg"; no trailing slash for an empty path.
  std::string str() const;
  /// "authority/seg/seg" form used to key resources and notification ids.
  std::string canonical() const;

  friend bool operator==(const Uri&, const Uri&) = default;
};

/// Accepts "coap://authority[/segment...]", lowercasing the authority.
/// Throws InvalidUri on any other scheme, an empty authority, or empty
/// path segments.
Uri parseUri(std::string_view text);

/// Uri-Host + one Uri-Path per segment, in option-number order.
std::vector<Option> uriToOptions(const Uri& uri);

/// Rebuilds a Uri from Uri-Host/Uri-Path options. Throws InvalidUri if
/// Uri-Host is absent.
Uri uriFromOptions(const Message& message);

std::string toHex(std::span<const std::uint8_t> bytes);
/// Token as lowercase hex, or "-" for the empty token.
std::string tokenHex(std::span<const std::uint8_t> token);

/// One-line human form used by traces: method or dotted code, the URI or
/// path when present, then type/mid/token and optional obs=/pl= fields.
std::string summary(const Message& message);

}  // namespace icnap::coap

#endif  // ICNAP_COAP_HPP
