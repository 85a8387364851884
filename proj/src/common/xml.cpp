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

#include "vrcmon/common/xml.hpp"

#include "vrcmon/common/error.hpp"

#include <expat.h>

#include <memory>

namespace vrcmon::xml {

namespace {

struct BuildState {
  XML_Parser parser = nullptr;
  std::vector<Element *> stack;
  std::optional<Element> root;
};

void on_start(void *user, const XML_Char *name, const XML_Char **attrs) {
  auto *state = static_cast<BuildState *>(user);
  Element element;
  element.name = name;
  element.line = static_cast<int>(XML_GetCurrentLineNumber(state->parser));
  for (int i = 0; attrs[i] != nullptr; i += 2) {
    element.attributes.emplace_back(attrs[i], attrs[i + 1]);
  }
  if (state->stack.empty()) {
    state->root = std::move(element);
    state->stack.push_back(&*state->root);
  } else {
    auto &siblings = state->stack.back()->children;
    siblings.push_back(std::move(element));
    state->stack.push_back(&siblings.back());
  }
}

void on_end(void *user, const XML_Char *) {
  static_cast<BuildState *>(user)->stack.pop_back();
}

void on_text(void *user, const XML_Char *s, int len) {
  auto *state = static_cast<BuildState *>(user);
  if (!state->stack.empty()) {
    state->stack.back()->text.append(s, static_cast<size_t>(len));
  }
}

struct ParserDeleter {
  void operator()(XML_ParserStruct *p) const { XML_ParserFree(p); }
};

} // namespace

const std::string *Element::attribute(std::string_view key) const {
  for (const auto &[k, v] : attributes) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string Element::trimmed_text() const {
  constexpr std::string_view ws = " \t\r\n";
  const auto first = text.find_first_not_of(ws);
  if (first == std::string::npos) return {};
  const auto last = text.find_last_not_of(ws);
  return text.substr(first, last - first + 1);
}

Element parse(std::string_view text) {
  std::unique_ptr<XML_ParserStruct, ParserDeleter> parser(
      XML_ParserCreate("UTF-8"));
  BuildState state;
  state.parser = parser.get();
  XML_SetUserData(parser.get(), &state);
  XML_SetElementHandler(parser.get(), on_start, on_end);
  XML_SetCharacterDataHandler(parser.get(), on_text);

  // The tree holds pointers into vectors that grow while parsing; children
  // are only appended to the innermost open element, so pointers to the
  // open ancestors stay valid.
  if (XML_Parse(parser.get(), text.data(), static_cast<int>(text.size()),
                XML_TRUE) == XML_STATUS_ERROR) {
    throw Error(Errc::XmlSyntax,
                std::string(XML_ErrorString(XML_GetErrorCode(parser.get()))) +
                    " at line " +
                    std::to_string(XML_GetCurrentLineNumber(parser.get())));
  }
  if (!state.root) throw Error(Errc::XmlSyntax, "document has no root element");
  return std::move(*state.root);
}

std::string escape(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    case '\'': out += "&apos;"; break;
    default: out += c;
    }
  }
  return out;
}

} // namespace vrcmon::xml
