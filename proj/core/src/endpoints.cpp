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

#include "icnap/endpoints.hpp"

namespace icnap {

namespace {

std::string pathOf(const coap::Message& message)
{
  std::string path;
  for (const coap::Option& opt : message.options()) {
    if (opt.number == coap::options::UriPath) {
      path += '/';
      path += coap::optionText(opt);
    }
  }
  return path.empty() ? "/" : path;
}

std::uint16_t fold16(std::string_view text)
{
  std::uint32_t h = 2166136261u;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 16777619u;
  }
  return static_cast<std::uint16_t>((h >> 16) ^ (h & 0xFFFF));
}

}  // namespace

const char* toString(ClientVerb verb)
{
  switch (verb) {
  case ClientVerb::Get:
    return "GET";
  case ClientVerb::Put:
    return "PUT";
  case ClientVerb::Observe:
    return "OBSERVE";
  case ClientVerb::Unobserve:
    return "UNOBSERVE";
  }
  return "?";
}

CoapServer::CoapServer(std::string id, EventLoop& loop, Tracer& tracer, SendFn send)
  : m_id(std::move(id)), m_loop(&loop), m_tracer(&tracer), m_send(std::move(send))
{
}

void CoapServer::addResource(Resource resource)
{
  std::string path = resource.path;
  m_resources.insert_or_assign(std::move(path), std::move(resource));
}

void CoapServer::send(const coap::Message& message)
{
  m_tracer->emit(m_id, "coap_send", coap::summary(message));
  m_send(message);
}

void CoapServer::reply(const coap::Message& request, coap::Code code,
                       std::vector<std::uint8_t> payload,
                       std::optional<std::uint32_t> observe)
{
  coap::Message response;
  if (request.type == coap::Type::Con) {
    // Piggybacked response (RFC 7252 Section 5.2.1).
    response.type = coap::Type::Ack;
    response.messageId = request.messageId;
  }
  else {
    response.type = coap::Type::Non;
    response.messageId = ++m_nextMessageId;
  }
  response.code = code;
  response.token = request.token;
  if (observe) {
    response.addOption(coap::uintOption(coap::options::Observe, *observe));
  }
  response.payload = std::move(payload);
  send(response);
}

void CoapServer::handle(const coap::Message& request)
{
  if (request.type == coap::Type::Ack || request.type == coap::Type::Rst) {
    m_tracer->emit(m_id, "ignore", coap::summary(request));
    return;
  }
  m_tracer->emit(m_id, "coap_recv", coap::summary(request));

  std::string path = pathOf(request);
  auto it = m_resources.find(path);
  if (it == m_resources.end()) {
    reply(request, coap::codes::NotFound, {}, std::nullopt);
    return;
  }
  Resource& resource = it->second;

  if (request.code == coap::codes::Get) {
    auto observe = request.observe();
    bool registering = observe == coap::kObserveRegister && resource.observable;

    if (observe == coap::kObserveDeregister) {
      if (m_registrations.erase(path) > 0) {
        m_tracer->emit(m_id, "observe_deregister", path);
      }
      reply(request, coap::codes::Content, resource.value, std::nullopt);
      return;
    }

    bool ready = !resource.readyAt || m_loop->now() >= *resource.readyAt;
    if (!ready) {
      // The content is not available yet: empty ACK now (CON only), the
      // real response follows separately at readyAt (RFC 7252 Section 5.2.2).
      if (request.type == coap::Type::Con) {
        coap::Message ack;
        ack.type = coap::Type::Ack;
        ack.code = coap::codes::Empty;
        ack.messageId = request.messageId;
        send(ack);
      }
      m_loop->schedule(*resource.readyAt, [this, path, request, registering] {
        auto rit = m_resources.find(path);
        if (rit == m_resources.end()) {
          return;
        }
        Resource& res = rit->second;
        std::optional<std::uint32_t> seq;
        if (registering) {
          registerObserver(path, request.token);
          seq = res.observeSeq;
        }
        coap::Message response;
        response.type = coap::Type::Con;
        response.code = coap::codes::Content;
        response.messageId = ++m_nextMessageId;
        response.token = request.token;
        if (seq) {
          response.addOption(coap::uintOption(coap::options::Observe, *seq));
        }
        response.payload = res.value;
        send(response);
      });
      return;
    }

    if (registering) {
      registerObserver(path, request.token);
      reply(request, coap::codes::Content, resource.value, resource.observeSeq);
      return;
    }
    // Plain GET; also the shape of an Observe=0 on a non-observable
    // resource, whose response simply carries no Observe option.
    reply(request, coap::codes::Content, resource.value, std::nullopt);
    return;
  }

  if (request.code == coap::codes::Put) {
    reply(request, coap::codes::Changed, {}, std::nullopt);
    applyUpdate(resource, request.payload);
    return;
  }

  reply(request, coap::codes::MethodNotAllowed, {}, std::nullopt);
}

void CoapServer::registerObserver(const std::string& path,
                                  const std::vector<std::uint8_t>& token)
{
  auto [rit, inserted] = m_registrations.try_emplace(path, ObserveRegistration{token});
  if (!inserted && rit->second.token != token) {
    ++m_replacements;
    m_tracer->emit(m_id, "observe_replace", path + " tok=" + coap::tokenHex(token));
    rit->second.token = token;
  }
  else if (inserted) {
    m_tracer->emit(m_id, "observe_register",
                   path + " tok=" + coap::tokenHex(token));
  }
}

void CoapServer::updateResource(const std::string& path, std::vector<std::uint8_t> value)
{
  auto it = m_resources.find(path);
  if (it == m_resources.end()) {
    throw UnknownPath(m_id + " has no resource " + path);
  }
  applyUpdate(it->second, std::move(value));
}

void CoapServer::applyUpdate(Resource& resource, std::vector<std::uint8_t> value)
{
  resource.value = std::move(value);
  auto rit = m_registrations.find(resource.path);
  bool notify = rit != m_registrations.end();
  std::string detail = resource.path + " pl=" + coap::toHex(resource.value)
                       + " notify=" + (notify ? "1" : "0");
  if (notify) {
    resource.observeSeq = (resource.observeSeq + 1) % coap::kObserveModulus;
    detail += " seq=" + std::to_string(resource.observeSeq);
  }
  m_tracer->emit(m_id, "update", detail);
  if (!notify) {
    return;
  }

  coap::Message notification;
  notification.type = coap::Type::Non;
  notification.code = coap::codes::Content;
  notification.messageId = ++m_nextMessageId;
  notification.token = rit->second.token;
  notification.addOption(coap::uintOption(coap::options::Observe, resource.observeSeq));
  notification.payload = resource.value;
  send(notification);
}

CoapClient::CoapClient(std::string id, EventLoop& loop, Tracer& tracer, SendFn send)
  : m_id(std::move(id)), m_loop(&loop), m_tracer(&tracer), m_send(std::move(send)),
    m_tokenPrefix(fold16(m_id))
{
}

coap::Message CoapClient::issue(ClientVerb verb, const coap::Uri& uri,
                                std::vector<std::uint8_t> payload)
{
  coap::Message message;
  message.type = coap::Type::Con;
  message.code = verb == ClientVerb::Put ? coap::codes::Put : coap::codes::Get;
  message.messageId = ++m_nextMessageId;

  ++m_nextTokenSeq;
  message.token = {static_cast<std::uint8_t>(m_tokenPrefix >> 8),
                   static_cast<std::uint8_t>(m_tokenPrefix & 0xFF),
                   static_cast<std::uint8_t>(m_nextTokenSeq >> 8),
                   static_cast<std::uint8_t>(m_nextTokenSeq & 0xFF)};

  for (coap::Option& opt : coap::uriToOptions(uri)) {
    message.addOption(std::move(opt));
  }
  if (verb == ClientVerb::Observe) {
    message.addOption(coap::uintOption(coap::options::Observe, coap::kObserveRegister));
  }
  else if (verb == ClientVerb::Unobserve) {
    message.addOption(coap::uintOption(coap::options::Observe, coap::kObserveDeregister));
  }
  if (verb == ClientVerb::Put) {
    message.payload = std::move(payload);
  }

  m_log.sent.push_back(LoggedMessage{m_loop->now(), message});
  m_tracer->emit(m_id, "coap_send", coap::summary(message));
  m_send(message);
  return message;
}

void CoapClient::receive(const coap::Message& message)
{
  m_log.received.push_back(LoggedMessage{m_loop->now(), message});
  m_tracer->emit(m_id, "coap_recv", coap::summary(message));
}

}  // namespace icnap
