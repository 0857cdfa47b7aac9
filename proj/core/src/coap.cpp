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

#include "icnap/coap.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace icnap::coap {

namespace {

// Option delta/length nibble escapes (RFC 7252 Section 3.1).
constexpr unsigned kNibble1Byte = 13;
constexpr unsigned kNibble2Byte = 14;
constexpr unsigned kNibbleReserved = 15;
constexpr unsigned kExt1Bias = 13;
constexpr unsigned kExt2Bias = 269;
constexpr unsigned kExt2Max = 65535 + kExt2Bias;

std::string lowercase(std::string_view text)
{
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void appendNibbleExtension(std::vector<std::uint8_t>& out, unsigned value)
{
  if (value < kNibble1Byte) {
    return;
  }
  if (value < kExt2Bias) {
    out.push_back(static_cast<std::uint8_t>(value - kExt1Bias));
    return;
  }
  unsigned ext = value - kExt2Bias;
  out.push_back(static_cast<std::uint8_t>(ext >> 8));
  out.push_back(static_cast<std::uint8_t>(ext & 0xFF));
}

unsigned nibbleFor(unsigned value)
{
  if (value < kNibble1Byte) {
    return value;
  }
  return value < kExt2Bias ? kNibble1Byte : kNibble2Byte;
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : m_bytes(bytes) {}

  bool atEnd() const { return m_pos == m_bytes.size(); }
  std::size_t remaining() const { return m_bytes.size() - m_pos; }
  std::uint8_t peek() const { return m_bytes[m_pos]; }

  std::uint8_t take()
  {
    if (atEnd()) {
      throw MalformedMessage("truncated message");
    }
    return m_bytes[m_pos++];
  }

  std::vector<std::uint8_t> takeN(std::size_t n)
  {
    if (remaining() < n) {
      throw MalformedMessage("truncated message");
    }
    std::vector<std::uint8_t> out(m_bytes.begin() + static_cast<std::ptrdiff_t>(m_pos),
                                  m_bytes.begin() + static_cast<std::ptrdiff_t>(m_pos + n));
    m_pos += n;
    return out;
  }

  unsigned takeExtended(unsigned nibble, const char* what)
  {
    switch (nibble) {
    case kNibble1Byte:
      return kExt1Bias + take();
    case kNibble2Byte: {
      unsigned hi = take();
      unsigned lo = take();
      return kExt2Bias + (hi << 8) + lo;
    }
    case kNibbleReserved:
      throw MalformedMessage(std::string("reserved nibble 15 in option ") + what);
    default:
      return nibble;
    }
  }

 private:
  std::span<const std::uint8_t> m_bytes;
  std::size_t m_pos = 0;
};

}  // namespace

const char* toString(Type type)
{
  switch (type) {
  case Type::Con:
    return "con";
  case Type::Non:
    return "non";
  case Type::Ack:
    return "ack";
  case Type::Rst:
    return "rst";
  }
  return "?";
}

std::string Code::str() const
{
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%u.%02u", cls(), detail());
  return buf;
}

Option uintOption(std::uint16_t number, std::uint32_t value)
{
  Option opt{number, {}};
  // Minimal-length big-endian encoding; zero is the empty string.
  for (int shift = 24; shift >= 0; shift -= 8) {
    auto byte = static_cast<std::uint8_t>((value >> shift) & 0xFF);
    if (!opt.value.empty() || byte != 0) {
      opt.value.push_back(byte);
    }
  }
  return opt;
}

Option stringOption(std::uint16_t number, std::string_view value)
{
  Option opt{number, {}};
  opt.value.assign(value.begin(), value.end());
  return opt;
}

std::uint32_t optionUint(const Option& option)
{
  std::uint32_t value = 0;
  for (std::uint8_t byte : option.value) {
    value = (value << 8) | byte;
  }
  return value;
}

std::string optionText(const Option& option)
{
  return {option.value.begin(), option.value.end()};
}

void Message::addOption(Option option)
{
  auto pos = std::upper_bound(m_options.begin(), m_options.end(), option.number,
                              [](std::uint16_t n, const Option& o) { return n < o.number; });
  m_options.insert(pos, std::move(option));
}

const Option* Message::findOption(std::uint16_t number) const
{
  for (const Option& opt : m_options) {
    if (opt.number == number) {
      return &opt;
    }
    if (opt.number > number) {
      break;
    }
  }
  return nullptr;
}

void Message::removeOptions(std::uint16_t number)
{
  std::erase_if(m_options, [number](const Option& o) { return o.number == number; });
}

std::optional<std::uint32_t> Message::observe() const
{
  const Option* opt = findOption(options::Observe);
  if (opt == nullptr) {
    return std::nullopt;
  }
  return optionUint(*opt);
}

std::vector<std::uint8_t> encode(const Message& message)
{
  if (message.token.size() > kMaxTokenLength) {
    throw EncodeError("token longer than 8 bytes");
  }
  if (message.isEmpty()
      && (!message.token.empty() || !message.options().empty() || !message.payload.empty())) {
    throw EncodeError("empty message with token, options or payload");
  }

  std::vector<std::uint8_t> out;
  out.push_back(static_cast<std::uint8_t>((kVersion << 6)
                                          | (static_cast<unsigned>(message.type) << 4)
                                          | message.token.size()));
  out.push_back(message.code.raw);
  out.push_back(static_cast<std::uint8_t>(message.messageId >> 8));
  out.push_back(static_cast<std::uint8_t>(message.messageId & 0xFF));
  out.insert(out.end(), message.token.begin(), message.token.end());

  std::uint16_t previous = 0;
  for (const Option& opt : message.options()) {
    if (opt.number < previous) {
      throw EncodeError("options out of order");
    }
    unsigned delta = opt.number - previous;
    unsigned length = static_cast<unsigned>(opt.value.size());
    if (length > kExt2Max) {
      throw EncodeError("option value too long");
    }
    out.push_back(static_cast<std::uint8_t>((nibbleFor(delta) << 4) | nibbleFor(length)));
    appendNibbleExtension(out, delta);
    appendNibbleExtension(out, length);
    out.insert(out.end(), opt.value.begin(), opt.value.end());
    previous = opt.number;
  }

  if (!message.payload.empty()) {
    out.push_back(kPayloadMarker);
    out.insert(out.end(), message.payload.begin(), message.payload.end());
  }
  return out;
}

Message decode(std::span<const std::uint8_t> bytes)
{
  if (bytes.size() < 4) {
    throw MalformedMessage("message shorter than 4 bytes");
  }
  Reader reader(bytes);

  std::uint8_t first = reader.take();
  if ((first >> 6) != kVersion) {
    throw MalformedMessage("unknown version");
  }
  Message message;
  message.type = static_cast<Type>((first >> 4) & 0x03);
  std::size_t tokenLength = first & 0x0F;
  if (tokenLength > kMaxTokenLength) {
    throw MalformedMessage("TKL above 8");
  }
  message.code.raw = reader.take();
  std::uint16_t midHi = reader.take();
  message.messageId = static_cast<std::uint16_t>((midHi << 8) | reader.take());
  message.token = reader.takeN(tokenLength);

  std::uint16_t number = 0;
  while (!reader.atEnd() && reader.peek() != kPayloadMarker) {
    std::uint8_t head = reader.take();
    unsigned delta = reader.takeExtended(head >> 4, "delta");
    unsigned length = reader.takeExtended(head & 0x0F, "length");
    number = static_cast<std::uint16_t>(number + delta);
    Option opt{number, reader.takeN(length)};
    message.addOption(std::move(opt));
  }
  if (!reader.atEnd()) {
    reader.take();  // payload marker
    if (reader.atEnd()) {
      throw MalformedMessage("payload marker with empty payload");
    }
    message.payload = reader.takeN(reader.remaining());
  }

  if (message.isEmpty()
      && (!message.token.empty() || !message.options().empty() || !message.payload.empty())) {
    throw MalformedMessage("empty message with token, options or payload");
  }
  return message;
}

std::string Uri::str() const
{
  std::string out = "coap://" + authority;
  for (const std::string& segment : pathSegments) {
    out += '/';
    out += segment;
  }
  return out;
}

std::string Uri::canonical() const
{
  std::string out = authority;
  for (const std::string& segment : pathSegments) {
    out += '/';
    out += segment;
  }
  return out;
}

Uri parseUri(std::string_view text)
{
  constexpr std::string_view kScheme = "coap://";
  if (text.substr(0, kScheme.size()) != kScheme) {
    throw InvalidUri("expected coap:// scheme: " + std::string(text));
  }
  std::string_view rest = text.substr(kScheme.size());

  Uri uri;
  std::size_t slash = rest.find('/');
  std::string_view authority = slash == std::string_view::npos ? rest : rest.substr(0, slash);
  if (authority.empty()) {
    throw InvalidUri("empty authority: " + std::string(text));
  }
  uri.authority = lowercase(authority);

  while (slash != std::string_view::npos) {
    rest = rest.substr(slash + 1);
    slash = rest.find('/');
    std::string_view segment = slash == std::string_view::npos ? rest : rest.substr(0, slash);
    if (segment.empty()) {
      throw InvalidUri("empty path segment: " + std::string(text));
    }
    uri.pathSegments.emplace_back(segment);
  }
  return uri;
}

std::vector<Option> uriToOptions(const Uri& uri)
{
  std::vector<Option> out;
  out.push_back(stringOption(options::UriHost, uri.authority));
  for (const std::string& segment : uri.pathSegments) {
    out.push_back(stringOption(options::UriPath, segment));
  }
  return out;
}

Uri uriFromOptions(const Message& message)
{
  Uri uri;
  bool haveHost = false;
  for (const Option& opt : message.options()) {
    if (opt.number == options::UriHost) {
      uri.authority = lowercase(optionText(opt));
      haveHost = true;
    }
    else if (opt.number == options::UriPath) {
      uri.pathSegments.push_back(optionText(opt));
    }
  }
  if (!haveHost) {
    throw InvalidUri("message carries no Uri-Host");
  }
  return uri;
}

std::string toHex(std::span<const std::uint8_t> bytes)
{
  static const char* kDigits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t byte : bytes) {
    out += kDigits[byte >> 4];
    out += kDigits[byte & 0x0F];
  }
  return out;
}

std::string tokenHex(std::span<const std::uint8_t> token)
{
  return token.empty() ? "-" : toHex(token);
}

std::string summary(const Message& message)
{
  std::string out;
  if (message.isEmpty()) {
    out = "EMPTY";
  }
  else if (message.code == codes::Get) {
    out = "GET";
  }
  else if (message.code == codes::Post) {
    out = "POST";
  }
  else if (message.code == codes::Put) {
    out = "PUT";
  }
  else if (message.code == codes::Delete) {
    out = "DELETE";
  }
  else {
    out = message.code.str();
  }

  const Option* host = message.findOption(options::UriHost);
  bool havePath = message.findOption(options::UriPath) != nullptr;
  if (host != nullptr) {
    out += ' ';
    out += uriFromOptions(message).str();
  }
  else if (havePath) {
    std::string path;
    for (const Option& opt : message.options()) {
      if (opt.number == options::UriPath) {
        path += '/';
        path += optionText(opt);
      }
    }
    out += " path=" + path;
  }

  out += " type=";
  out += toString(message.type);
  out += " mid=" + std::to_string(message.messageId);
  out += " tok=" + tokenHex(message.token);
  if (auto obs = message.observe()) {
    out += " obs=" + std::to_string(*obs);
  }
  if (!message.payload.empty()) {
    out += " pl=" + toHex(message.payload);
  }
  return out;
}

}  // namespace icnap::coap
