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

#ifndef FOLLOWUP_TOKENIZER_HPP_
#define FOLLOWUP_TOKENIZER_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace followup {

struct Token {
  std::string text;
  int start = 0;  // char offset into the note, inclusive
  int end = 0;    // exclusive
};

// Offset-preserving tokenization: maximal alphabetic runs, maximal digit
// runs, and single punctuation characters. Every token maps back into the
// source text exactly.
std::vector<Token> tokenize(std::string_view text);

struct Window {
  int token_begin = 0;  // inclusive token index
  int token_end = 0;    // exclusive
};

// Sliding windows over the token sequence: width max_tokens, consecutive
// windows overlap by stride tokens (step = max_tokens - stride). Every
// token is covered by at least one window.
std::vector<Window> make_windows(int n_tokens, int max_tokens = 512,
                                 int stride = 128);

}  // namespace followup

#endif  // FOLLOWUP_TOKENIZER_HPP_
