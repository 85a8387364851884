/*
 * Copyright 2026 The vrcmon Authors
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

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vrcmon::xml {

/// Minimal element tree. Character data is concatenated into `text`;
/// comments and processing instructions are dropped.
struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  std::string text;
  int line = 0;

  const std::string *attribute(std::string_view key) const;
  /// Text content with surrounding whitespace removed.
  std::string trimmed_text() const;
};

/// Parses a complete document and returns its root element.
/// Throws Error{Errc::XmlSyntax} with the offending line on malformed input.
Element parse(std::string_view text);

/// Escapes the five XML special characters for use in text or attributes.
std::string escape(std::string_view raw);

} // namespace vrcmon::xml
