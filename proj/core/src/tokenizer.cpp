// Copyright 2026 The followup-extractor Authors
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

#include "followup/tokenizer.hpp"

#include <cctype>

#include "followup/errors.hpp"

namespace followup {

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  const int n = static_cast<int>(text.size());
  int i = 0;
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    int begin = i;
    if (std::isalpha(c)) {
      while (i < n && std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
    } else if (std::isdigit(c)) {
      while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    } else {
      ++i;  // single punctuation / symbol token
    }
    tokens.push_back(
        {std::string(text.substr(begin, i - begin)), begin, i});
  }
  return tokens;
}

std::vector<Window> make_windows(int n_tokens, int max_tokens, int stride) {
  if (max_tokens <= 0 || stride < 0 || stride >= max_tokens) {
    throw ConfigError("window requires 0 <= stride < max_tokens");
  }
  std::vector<Window> windows;
  if (n_tokens <= 0) {
    windows.push_back({0, 0});
    return windows;
  }
  int step = max_tokens - stride;
  int begin = 0;
  while (true) {
    int end = begin + max_tokens;
    if (end >= n_tokens) {
      windows.push_back({begin, n_tokens});
      break;
    }
    windows.push_back({begin, end});
    begin += step;
  }
  return windows;
}

}  // namespace followup
