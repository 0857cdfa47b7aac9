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

#include "icnap/names.hpp"

#include <algorithm>
#include <cctype>

namespace icnap {

namespace {

std::string lowercase(std::string_view text)
{
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool validLabel(std::string_view label)
{
  return !label.empty() && label.find('.') == std::string_view::npos;
}

}  // namespace

AttributeHierarchy::AttributeHierarchy(std::vector<std::string> levels)
  : m_levels(std::move(levels))
{
  if (m_levels.empty()) {
    throw InvalidHierarchy("hierarchy needs at least one level");
  }
  for (auto& level : m_levels) {
    level = lowercase(level);
    if (level.empty()) {
      throw InvalidHierarchy("empty level name");
    }
  }
  for (std::size_t i = 0; i < m_levels.size(); ++i) {
    for (std::size_t j = i + 1; j < m_levels.size(); ++j) {
      if (m_levels[i] == m_levels[j]) {
        throw InvalidHierarchy("duplicate level name: " + m_levels[i]);
      }
    }
  }
}

std::optional<std::size_t> AttributeHierarchy::indexOf(std::string_view level) const
{
  for (std::size_t i = 0; i < m_levels.size(); ++i) {
    if (m_levels[i] == level) {
      return i;
    }
  }
  return std::nullopt;
}

void AttributeAssignment::assign(std::string level, std::string_view value)
{
  level = lowercase(level);
  std::string val = lowercase(value);
  if (level.empty()) {
    throw InvalidAssignment("empty level name");
  }
  if (!validLabel(val)) {
    throw InvalidAssignment("value must be a non-empty dotless label: '" + val + "'");
  }
  auto [it, inserted] = m_values.emplace(std::move(level), std::move(val));
  if (!inserted) {
    throw InvalidAssignment("level assigned twice: " + it->first);
  }
}

std::optional<std::string_view> AttributeAssignment::valueOf(std::string_view level) const
{
  auto it = m_values.find(level);
  if (it == m_values.end()) {
    return std::nullopt;
  }
  return std::string_view(it->second);
}

void AttributeAssignment::validate(const AttributeHierarchy& hierarchy) const
{
  if (m_values.find(hierarchy.root()) == m_values.end()) {
    throw MissingRoot("root level '" + hierarchy.root() + "' is unassigned");
  }
  for (const auto& [level, value] : m_values) {
    if (!hierarchy.indexOf(level)) {
      throw InvalidAssignment("level not in hierarchy: " + level);
    }
  }
  // Flat dotted names cannot tell apart levels sharing a value, so values
  // must be pairwise distinct; this also keeps the 2^(k-1) cardinality exact.
  for (auto it = m_values.begin(); it != m_values.end(); ++it) {
    for (auto jt = std::next(it); jt != m_values.end(); ++jt) {
      if (it->second == jt->second) {
        throw InvalidAssignment("value '" + it->second + "' used by levels '" + it->first
                                + "' and '" + jt->first + "'");
      }
    }
  }
}

GroupName::GroupName(std::vector<std::string> labels)
  : m_labels(std::move(labels))
{
  if (m_labels.empty()) {
    throw InvalidName("group name needs at least one label");
  }
  for (auto& label : m_labels) {
    label = lowercase(label);
    if (!validLabel(label)) {
      throw InvalidName("bad label in group name");
    }
  }
}

GroupName GroupName::fromAuthority(std::string_view authority)
{
  std::vector<std::string> labels;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = authority.find('.', start);
    std::string_view label = dot == std::string_view::npos
                               ? authority.substr(start)
                               : authority.substr(start, dot - start);
    if (label.empty()) {
      throw InvalidName("empty label in authority: " + std::string(authority));
    }
    labels.emplace_back(label);
    if (dot == std::string_view::npos) {
      break;
    }
    start = dot + 1;
  }
  return GroupName(std::move(labels));
}

std::string GroupName::render() const
{
  std::string out = m_labels.front();
  for (std::size_t i = 1; i < m_labels.size(); ++i) {
    out += '.';
    out += m_labels[i];
  }
  return out;
}

std::set<GroupName> constructNames(const AttributeHierarchy& hierarchy,
                                   const AttributeAssignment& assignment)
{
  assignment.validate(hierarchy);
  std::string root(*assignment.valueOf(hierarchy.root()));

  // Assigned non-root values ordered general-to-specific.
  std::vector<std::string> values;
  for (std::size_t depth = 1; depth < hierarchy.depth(); ++depth) {
    if (auto value = assignment.valueOf(hierarchy.levels()[depth])) {
      values.emplace_back(*value);
    }
  }

  std::set<GroupName> names;
  for (std::size_t subset = 0; subset < (std::size_t{1} << values.size()); ++subset) {
    std::vector<std::string> labels;
    for (std::size_t i = values.size(); i-- > 0;) {
      if (subset & (std::size_t{1} << i)) {
        labels.push_back(values[i]);
      }
    }
    labels.push_back(root);
    names.insert(GroupName(std::move(labels)));
  }
  return names;
}

GroupName nameFromAuthority(std::string_view authority)
{
  return GroupName::fromAuthority(authority);
}

IcnIdentifier identifierFor(const GroupName& name)
{
  return IcnIdentifier{std::string(kGroupPrefix) + name.render()};
}

bool matchesName(const AttributeAssignment& assignment, const GroupName& name,
                 const AttributeHierarchy& hierarchy)
{
  const auto& labels = name.labels();
  auto rootValue = assignment.valueOf(hierarchy.root());
  if (!rootValue || labels.back() != *rootValue) {
    return false;
  }
  // Walking outward from the root, each label must match a strictly deeper
  // assigned level; earliest-match greed is exact for subsequence tests.
  std::size_t depth = 0;
  for (std::size_t i = labels.size() - 1; i-- > 0;) {
    std::size_t next = depth + 1;
    for (; next < hierarchy.depth(); ++next) {
      auto value = assignment.valueOf(hierarchy.levels()[next]);
      if (value && *value == labels[i]) {
        break;
      }
    }
    if (next == hierarchy.depth()) {
      return false;
    }
    depth = next;
  }
  return true;
}

}  // namespace icnap
