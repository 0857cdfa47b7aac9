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

#ifndef ICNAP_NAMES_HPP
#define ICNAP_NAMES_HPP

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace icnap {

struct InvalidHierarchy : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidAssignment : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an assignment leaves the root attribute unset.
struct MissingRoot : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidName : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Ordered attribute levels, most general first ("building", "wing",
/// "floor"). Level names are unique and non-empty.
class AttributeHierarchy {
 public:
  explicit AttributeHierarchy(std::vector<std::string> levels);

  const std::vector<std::string>& levels() const { return m_levels; }
  const std::string& root() const { return m_levels.front(); }
  std::size_t depth() const { return m_levels.size(); }
  std::optional<std::size_t> indexOf(std::string_view level) const;

 private:
  std::vector<std::string> m_levels;
};

/// Values a deployment gives some subset of the levels. The root level is
/// mandatory; validate() enforces that and that every assigned level
/// exists in the hierarchy. Values are lowercased dotted-name labels.
class AttributeAssignment {
 public:
  AttributeAssignment() = default;

  /// Throws InvalidAssignment for an empty value, a value containing '.',
  /// or a second value for the same level.
  void assign(std::string level, std::string_view value);

  const std::map<std::string, std::string, std::less<>>& values() const
  {
    return m_values;
  }
  std::optional<std::string_view> valueOf(std::string_view level) const;

  /// Throws MissingRoot or InvalidAssignment against a concrete hierarchy.
  void validate(const AttributeHierarchy& hierarchy) const;

 private:
  std::map<std::string, std::string, std::less<>> m_values;
};

/// A dotted group name, stored most-specific-first: "floor3.west.building6"
/// is {"floor3", "west", "building6"}. Labels are lowercase and non-empty.
class GroupName {
 public:
  explicit GroupName(std::vector<std::string> labels);
  static GroupName fromAuthority(std::string_view authority);

  const std::vector<std::string>& labels() const { return m_labels; }
  std::string render() const;

  friend auto operator<=>(const GroupName&, const GroupName&) = default;

 private:
  std::vector<std::string> m_labels;
};

/// Flat rendezvous identifier; distinct names map to distinct identifiers.
struct IcnIdentifier {
  std::string value;

  friend auto operator<=>(const IcnIdentifier&, const IcnIdentifier&) = default;
};

inline constexpr std::string_view kGroupPrefix = "grp/";
inline constexpr std::string_view kResponsePrefix = "rsp/";
inline constexpr std::string_view kNotificationPrefix = "ntf/";

/// All group names the assignment belongs to: the bare root plus, for each
/// non-empty combination of assigned non-root levels, the combination's
/// values most-specific-first followed by the root value. An assignment
/// with k assigned levels yields exactly 2^(k-1) names.
std::set<GroupName> constructNames(const AttributeHierarchy& hierarchy,
                                   const AttributeAssignment& assignment);

/// Reads a request authority as a group name (labels between dots,
/// most-specific-first as written). Throws InvalidName for empty labels.
GroupName nameFromAuthority(std::string_view authority);

/// "grp/" + rendered name.
IcnIdentifier identifierFor(const GroupName& name);

/// Decides membership directly from the assignment, without enumerating
/// constructNames(): the name's last label must equal the root value and
/// each earlier label must match a strictly deeper assigned level, in
/// order. Agrees with set membership in constructNames() by construction.
bool matchesName(const AttributeAssignment& assignment, const GroupName& name,
                 const AttributeHierarchy& hierarchy);

}  // namespace icnap

#endif  // ICNAP_NAMES_HPP
