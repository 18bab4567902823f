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

#ifndef FOLLOWUP_MODEL_HPP_
#define FOLLOWUP_MODEL_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "followup/note.hpp"
#include "followup/tokenizer.hpp"
#include "json.hpp"

// The learned component: hashed-subword embeddings feeding a one-layer
// bidirectional GRU encoder, a BIO tagging head, and a biaffine link
// scorer with a distance feature and a learned none option. All math is
// 64-bit with hand-written backward passes; forward and backward orders
// are fixed so training is bit-deterministic.

namespace followup {

enum class BioLabel { kO = 0, kBTest, kITest, kBTime, kITime };
inline constexpr int kNumBioLabels = 5;

// Desk-scale stand-in for a pretrained contextual encoder, behind the same
// windowed-states interface.
struct EncoderConfig {
  int hidden_dim = 64;      // d; must be even and >= 8
  int word_buckets = 65536;
  int ngram_buckets = 32768;
  int max_window_tokens = 512;
  int window_stride = 128;

  static EncoderConfig from_json(const nlohmann::ordered_json& j);
  nlohmann::ordered_json to_json() const;
  void validate() const;
};

struct ModelConfig {
  EncoderConfig encoder;
  int width_emb_dim = 32;
  int n_width_buckets = 9;   // span token widths 1..8 plus a >=9 bucket
  int dist_emb_dim = 32;
  int n_dist_buckets = 12;   // char-distance buckets; +1 reserved for none
  // Normalized ontology alias strings. Tokens covered by a longest alias
  // match get a begin/inside marker embedding, so the tagger can ground
  // action mentions symbolically instead of memorizing word identities.
  std::vector<std::string> gazetteer;

  int span_rep_dim() const { return 2 * encoder.hidden_dim + width_emb_dim; }

  static ModelConfig from_json(const nlohmann::ordered_json& j);
  nlohmann::ordered_json to_json() const;
  void validate() const;
};

// Character-distance bucket for the link scorer's psi feature.
int distance_bucket(int char_distance);
// Width bucket (0-based) for a span of `n_tokens` tokens.
int width_bucket(int n_tokens);

// Named dense tensors packed into one flat 64-bit buffer.
class ParamStore {
 public:
  struct TensorSpec {
    std::string name;
    int rows = 0;
    int cols = 0;
    std::size_t offset = 0;
  };

  void add(const std::string& name, int rows, int cols);
  void finalize();  // allocates, zero-filled

  double* tensor(const std::string& name);
  const double* tensor(const std::string& name) const;
  const TensorSpec& spec(const std::string& name) const;
  const std::vector<TensorSpec>& specs() const { return specs_; }

  std::vector<double>& flat() { return data_; }
  const std::vector<double>& flat() const { return data_; }
  std::size_t size() const { return data_.size(); }

 private:
  std::vector<TensorSpec> specs_;
  std::vector<double> data_;
};

struct TrainConfig {
  std::array<double, kNumBioLabels> class_weights{0.2, 1.0, 1.0, 1.0, 1.0};
  double alpha = 1.0;        // link-loss weight
  double word_dropout = 0.15;  // P(word-id embedding masked) during training
  int batch_size = 16;
  double lr = 1e-3;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int max_epochs = 30;
  int patience = 5;
  std::uint64_t seed = 42;

  static TrainConfig from_json(const nlohmann::ordered_json& j);
  nlohmann::ordered_json to_json() const;
  void validate() const;
};

// A gold or predicted span in token coordinates plus its note-global char
// anchor, as the link scorer consumes it.
struct TokenSpan {
  int token_begin = 0;  // inclusive, note-global token index
  int token_end = 0;    // inclusive last token
  int char_start = 0;
};

class Model {
 public:
  Model(const ModelConfig& config, std::uint64_t init_seed);
  Model(const ModelConfig& config, ParamStore params);

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // ---- forward-only inference API ----

  struct Encoded {
    std::vector<Token> tokens;
    std::vector<Window> windows;
    // states[w] is a (window length) x d row-major matrix
    std::vector<std::vector<double>> states;
  };

  Encoded encode(const std::string& text) const;

  // Per-token softmax over the 5 BIO labels for one window.
  std::vector<std::array<double, kNumBioLabels>> tag_probs(
      const Encoded& enc, int window) const;

  // Span representation [h_b; h_e; phi(width)] for a token span inside the
  // given window (token indices note-global). Throws ValidationError when
  // the span is not fully inside the window.
  std::vector<double> span_rep(const Encoded& enc, int window,
                               const TokenSpan& span) const;

  // Softmax over candidate TIME spans plus the trailing none option.
  // Returned vector has candidates.size() + 1 entries; the last is none.
  std::vector<double> link_distribution(
      const Encoded& enc, int window, const TokenSpan& test,
      const std::vector<TokenSpan>& candidates) const;

  // ---- training API ----

  // Joint loss L_ner + alpha * L_link averaged over the batch, with
  // gradients accumulated into `grad` (same layout as params) when
  // non-null. The linker is teacher-forced on gold spans. When
  // dropout_salt is nonzero, word-id embeddings are masked with
  // probability tc.word_dropout by a hash of (salt, note id, position);
  // the same salt always masks the same tokens, so the loss stays a
  // deterministic function of (params, batch, salt).
  double loss_and_grad(const std::vector<const Note*>& batch,
                       const TrainConfig& tc, std::vector<double>* grad,
                       std::uint64_t dropout_salt = 0) const;

  // Fraction of tokens whose argmax tag matches gold, over all windows.
  double tagging_accuracy(const std::vector<const Note*>& notes) const;

 private:
  void build_layout();
  void init_params(std::uint64_t seed);

  ModelConfig config_;
  ParamStore params_;
  std::unordered_set<std::string> gaz_index_;
};

// ---- pure decoding helpers ----

// Gold BIO tags for a token sequence from gold entity spans. A token
// belongs to a span when it lies fully inside it.
std::vector<BioLabel> gold_bio_tags(const std::vector<Token>& tokens,
                                    const std::vector<EntitySpan>& entities);

// Decodes a BIO tag sequence into character spans. A dangling I-X starts a
// new span (lenient repair).
std::vector<EntitySpan> decode_bio(const std::vector<BioLabel>& tags,
                                   const std::vector<Token>& tokens,
                                   std::string_view text);

// Merges spans from overlapping windows: exact duplicates deduplicated,
// overlapping same-kind spans unioned, result sorted by start. Entity ids
// are renumbered 0..n-1.
std::vector<EntitySpan> merge_spans(std::vector<EntitySpan> spans,
                                    std::string_view text);

// Token range [begin, last] of the tokens fully inside the char span, or
// nullopt when no token is.
std::optional<std::pair<int, int>> token_range(
    const std::vector<Token>& tokens, int char_start, int char_end);

// Sorted, deduplicated, normalized alias list (canonical names included)
// for ModelConfig::gazetteer.
std::vector<std::string> gazetteer_from(const Ontology& ontology);

// ---- checkpoint io ----

void save_checkpoint(const std::string& path, const Model& model,
                     const nlohmann::ordered_json& provenance);
Model load_checkpoint(const std::string& path);

}  // namespace followup

#endif  // FOLLOWUP_MODEL_HPP_
