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

#include "followup/model.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "followup/errors.hpp"
#include "followup/rng.hpp"

namespace followup {

namespace {

using Json = nlohmann::ordered_json;

double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// In-place softmax with the usual max shift.
void softmax(double* v, int n) {
  double m = v[0];
  for (int i = 1; i < n; ++i) m = std::max(m, v[i]);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    v[i] = std::exp(v[i] - m);
    z += v[i];
  }
  for (int i = 0; i < n; ++i) v[i] /= z;
}

}  // namespace

// ---------------------------------------------------------------------------
// configs

EncoderConfig EncoderConfig::from_json(const Json& j) {
  EncoderConfig c;
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.word_buckets = j.value("word_buckets", c.word_buckets);
  c.ngram_buckets = j.value("ngram_buckets", c.ngram_buckets);
  c.max_window_tokens = j.value("max_window_tokens", c.max_window_tokens);
  c.window_stride = j.value("window_stride", c.window_stride);
  c.validate();
  return c;
}

Json EncoderConfig::to_json() const {
  return Json{{"hidden_dim", hidden_dim},
              {"word_buckets", word_buckets},
              {"ngram_buckets", ngram_buckets},
              {"max_window_tokens", max_window_tokens},
              {"window_stride", window_stride}};
}

void EncoderConfig::validate() const {
  if (hidden_dim < 8 || hidden_dim % 2 != 0) {
    throw ConfigError("hidden_dim must be even and >= 8");
  }
  if (word_buckets < 2 || ngram_buckets < 2) {
    throw ConfigError("embedding bucket counts must be >= 2");
  }
  if (window_stride < 0 || window_stride >= max_window_tokens) {
    throw ConfigError("need 0 <= window_stride < max_window_tokens");
  }
}

ModelConfig ModelConfig::from_json(const Json& j) {
  ModelConfig c;
  if (j.contains("encoder")) c.encoder = EncoderConfig::from_json(j["encoder"]);
  c.width_emb_dim = j.value("width_emb_dim", c.width_emb_dim);
  c.n_width_buckets = j.value("n_width_buckets", c.n_width_buckets);
  c.dist_emb_dim = j.value("dist_emb_dim", c.dist_emb_dim);
  c.n_dist_buckets = j.value("n_dist_buckets", c.n_dist_buckets);
  if (j.contains("gazetteer")) {
    c.gazetteer = j["gazetteer"].get<std::vector<std::string>>();
  }
  c.validate();
  return c;
}

Json ModelConfig::to_json() const {
  return Json{{"encoder", encoder.to_json()},
              {"width_emb_dim", width_emb_dim},
              {"n_width_buckets", n_width_buckets},
              {"dist_emb_dim", dist_emb_dim},
              {"n_dist_buckets", n_dist_buckets},
              {"gazetteer", gazetteer}};
}

void ModelConfig::validate() const {
  encoder.validate();
  if (width_emb_dim < 1 || dist_emb_dim < 1) {
    throw ConfigError("embedding dims must be positive");
  }
  if (n_width_buckets != 9) throw ConfigError("n_width_buckets must be 9");
  if (n_dist_buckets != 12) throw ConfigError("n_dist_buckets must be 12");
  for (const auto& g : gazetteer) {
    if (g.empty()) throw ConfigError("empty gazetteer entry");
  }
}

TrainConfig TrainConfig::from_json(const Json& j) {
  TrainConfig c;
  if (j.contains("class_weights")) {
    auto v = j["class_weights"].get<std::vector<double>>();
    if (static_cast<int>(v.size()) != kNumBioLabels) {
      throw ConfigError("class_weights needs 5 entries");
    }
    std::copy(v.begin(), v.end(), c.class_weights.begin());
  }
  c.alpha = j.value("alpha", c.alpha);
  c.word_dropout = j.value("word_dropout", c.word_dropout);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr = j.value("lr", c.lr);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.eps = j.value("eps", c.eps);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

Json TrainConfig::to_json() const {
  return Json{{"class_weights", std::vector<double>(class_weights.begin(),
                                                    class_weights.end())},
              {"alpha", alpha},
              {"word_dropout", word_dropout},
              {"batch_size", batch_size},
              {"lr", lr},
              {"weight_decay", weight_decay},
              {"beta1", beta1},
              {"beta2", beta2},
              {"eps", eps},
              {"max_epochs", max_epochs},
              {"patience", patience},
              {"seed", seed}};
}

void TrainConfig::validate() const {
  for (double w : class_weights) {
    if (!(w > 0.0)) throw ConfigError("class weights must be positive");
  }
  for (int i = 1; i < kNumBioLabels; ++i) {
    if (!(class_weights[0] < class_weights[i])) {
      throw ConfigError("the O class weight must be below every entity weight");
    }
  }
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (word_dropout < 0.0 || word_dropout >= 1.0) {
    throw ConfigError("word_dropout must be in [0, 1)");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (patience < 0) throw ConfigError("patience must be >= 0");
}

int distance_bucket(int char_distance) {
  if (char_distance <= 0) return 0;
  unsigned v = static_cast<unsigned>(char_distance);
  return std::min(11, static_cast<int>(std::bit_width(v)));
}

int width_bucket(int n_tokens) {
  return std::clamp(n_tokens, 1, 9) - 1;
}

// ---------------------------------------------------------------------------
// ParamStore

void ParamStore::add(const std::string& name, int rows, int cols) {
  if (rows < 1 || cols < 1) throw ConfigError("tensor dims must be positive");
  for (const auto& s : specs_) {
    if (s.name == name) throw ConfigError("duplicate tensor " + name);
  }
  TensorSpec s;
  s.name = name;
  s.rows = rows;
  s.cols = cols;
  specs_.push_back(s);
}

void ParamStore::finalize() {
  std::size_t off = 0;
  for (auto& s : specs_) {
    s.offset = off;
    off += static_cast<std::size_t>(s.rows) * s.cols;
  }
  data_.assign(off, 0.0);
}

const ParamStore::TensorSpec& ParamStore::spec(const std::string& name) const {
  for (const auto& s : specs_) {
    if (s.name == name) return s;
  }
  throw ConfigError("unknown tensor " + name);
}

double* ParamStore::tensor(const std::string& name) {
  return data_.data() + spec(name).offset;
}

const double* ParamStore::tensor(const std::string& name) const {
  return data_.data() + spec(name).offset;
}

// ---------------------------------------------------------------------------
// token features

namespace {

// 0 lower, 1 upper, 2 capitalized, 3 digits, 4 other
constexpr int kNumShapes = 5;

int token_shape(const std::string& t) {
  bool alpha = true, digit = true;
  for (unsigned char c : t) {
    if (!std::isalpha(c)) alpha = false;
    if (!std::isdigit(c)) digit = false;
  }
  if (digit && !t.empty()) return 3;
  if (!alpha || t.empty()) return 4;
  bool any_upper = false, all_upper = true;
  for (unsigned char c : t) {
    if (std::isupper(c)) any_upper = true;
    else all_upper = false;
  }
  if (!any_upper) return 0;
  if (all_upper) return 1;
  if (std::isupper(static_cast<unsigned char>(t[0]))) return 2;
  return 4;
}

struct TokenFeat {
  std::size_t word = 0;
  std::vector<std::size_t> ngrams;
  int shape = 0;
  int gaz = 0;           // 0 outside, 1 begins, 2 inside an alias match
  bool use_word = true;  // cleared by training word dropout
};

constexpr int kNumGazStates = 3;
constexpr int kMaxGazTokens = 6;

// Greedy longest-match tagging of tokens covered by an ontology alias.
void apply_gazetteer(const std::unordered_set<std::string>& index,
                     const std::vector<Token>& tokens, std::string_view text,
                     std::vector<TokenFeat>& feats) {
  if (index.empty()) return;
  const int n = static_cast<int>(tokens.size());
  for (int i = 0; i < n;) {
    int matched = 0;
    for (int len = std::min(kMaxGazTokens, n - i); len >= 1; --len) {
      int b = tokens[i].start;
      int e = tokens[i + len - 1].end;
      std::string norm =
          Ontology::normalize_mention(text.substr(b, e - b));
      if (index.count(norm)) {
        matched = len;
        break;
      }
    }
    if (matched == 0) {
      ++i;
      continue;
    }
    feats[i].gaz = 1;
    for (int k = 1; k < matched; ++k) feats[i + k].gaz = 2;
    i += matched;
  }
}

TokenFeat token_features(const std::string& text, const EncoderConfig& ec) {
  TokenFeat f;
  std::string lower;
  lower.reserve(text.size());
  for (unsigned char c : text) {
    lower.push_back(static_cast<char>(std::tolower(c)));
  }
  f.word = fnv1a64(lower.data(), lower.size()) %
           static_cast<std::uint64_t>(ec.word_buckets);
  f.shape = token_shape(text);
  std::string padded = "^" + lower + "$";
  for (int n = 3; n <= 5; ++n) {
    if (static_cast<int>(padded.size()) < n) break;
    for (std::size_t i = 0; i + n <= padded.size(); ++i) {
      f.ngrams.push_back(fnv1a64(padded.data() + i, n) %
                         static_cast<std::uint64_t>(ec.ngram_buckets));
    }
  }
  return f;
}

// Raw views over every tensor, paired with its flat offset so gradient
// buffers can reuse the layout.
struct Bind {
  const double* w = nullptr;
  std::size_t off = 0;
};

struct Net {
  int d, H, R;
  Bind ew, eg, es, egz;
  Bind fwz, fwr, fwn, fuz, fur, fun, fbz, fbr, fbn;
  Bind bwz, bwr, bwn, buz, bur, bun, bbz, bbr, bbn;
  Bind tagw, tagb;
  Bind ewidth, edist;
  Bind lw, lu, lb, lnone;

  explicit Net(const ModelConfig& cfg, const ParamStore& p) {
    d = cfg.encoder.hidden_dim;
    H = d / 2;
    R = cfg.span_rep_dim();
    auto get = [&p](const char* name) {
      const auto& s = p.spec(name);
      return Bind{p.flat().data() + s.offset, s.offset};
    };
    ew = get("emb_word");
    eg = get("emb_ngram");
    es = get("emb_shape");
    egz = get("emb_gaz");
    fwz = get("gru_f_wz"); fwr = get("gru_f_wr"); fwn = get("gru_f_wn");
    fuz = get("gru_f_uz"); fur = get("gru_f_ur"); fun = get("gru_f_un");
    fbz = get("gru_f_bz"); fbr = get("gru_f_br"); fbn = get("gru_f_bn");
    bwz = get("gru_b_wz"); bwr = get("gru_b_wr"); bwn = get("gru_b_wn");
    buz = get("gru_b_uz"); bur = get("gru_b_ur"); bun = get("gru_b_un");
    bbz = get("gru_b_bz"); bbr = get("gru_b_br"); bbn = get("gru_b_bn");
    tagw = get("tag_w");
    tagb = get("tag_b");
    ewidth = get("emb_width");
    edist = get("emb_dist");
    lw = get("link_w");
    lu = get("link_u");
    lb = get("link_b");
    lnone = get("link_none_rep");
  }
};

// Per-position caches for one GRU direction over one window.
struct GruCache {
  std::vector<double> z, r, nb, un_h, h;  // each T*H, indexed by position
  void resize(int T, int H) {
    z.assign(static_cast<std::size_t>(T) * H, 0.0);
    r.assign(static_cast<std::size_t>(T) * H, 0.0);
    nb.assign(static_cast<std::size_t>(T) * H, 0.0);
    un_h.assign(static_cast<std::size_t>(T) * H, 0.0);
    h.assign(static_cast<std::size_t>(T) * H, 0.0);
  }
};

struct DirWeights {
  const double *wz, *wr, *wn, *uz, *ur, *un, *bz, *br, *bn;
};

void gru_step(const DirWeights& w, int d, int H, const double* x,
              const double* h_prev, double* z, double* r, double* nb,
              double* un_h, double* h) {
  for (int i = 0; i < H; ++i) {
    double az = w.bz[i] + dot(w.wz + static_cast<std::size_t>(i) * d, x, d) +
                dot(w.uz + static_cast<std::size_t>(i) * H, h_prev, H);
    z[i] = sigmoid(az);
    double ar = w.br[i] + dot(w.wr + static_cast<std::size_t>(i) * d, x, d) +
                dot(w.ur + static_cast<std::size_t>(i) * H, h_prev, H);
    r[i] = sigmoid(ar);
    un_h[i] = dot(w.un + static_cast<std::size_t>(i) * H, h_prev, H);
    double an = w.bn[i] + dot(w.wn + static_cast<std::size_t>(i) * d, x, d) +
                r[i] * un_h[i];
    nb[i] = std::tanh(an);
    h[i] = (1.0 - z[i]) * nb[i] + z[i] * h_prev[i];
  }
}

struct DirGrads {
  double *wz, *wr, *wn, *uz, *ur, *un, *bz, *br, *bn;
};

// One reverse step. dh holds the incoming gradient for this position's
// hidden state; dh_prev is overwritten with the gradient flowing to the
// previous position; dx accumulates.
void gru_step_backward(const DirWeights& w, const DirGrads& g, int d, int H,
                       const double* x, const double* h_prev, const double* z,
                       const double* r, const double* nb, const double* un_h,
                       const double* dh, double* dh_prev, double* dx) {
  std::vector<double> daz(H), dar(H), dan(H), dun(H);
  for (int i = 0; i < H; ++i) {
    double dz = dh[i] * (h_prev[i] - nb[i]);
    daz[i] = dz * z[i] * (1.0 - z[i]);
    double dnb = dh[i] * (1.0 - z[i]);
    dan[i] = dnb * (1.0 - nb[i] * nb[i]);
    double dr = dan[i] * un_h[i];
    dar[i] = dr * r[i] * (1.0 - r[i]);
    dun[i] = dan[i] * r[i];
    dh_prev[i] = dh[i] * z[i];
  }
  for (int i = 0; i < H; ++i) {
    axpy(daz[i], x, g.wz + static_cast<std::size_t>(i) * d, d);
    axpy(dar[i], x, g.wr + static_cast<std::size_t>(i) * d, d);
    axpy(dan[i], x, g.wn + static_cast<std::size_t>(i) * d, d);
    axpy(daz[i], h_prev, g.uz + static_cast<std::size_t>(i) * H, H);
    axpy(dar[i], h_prev, g.ur + static_cast<std::size_t>(i) * H, H);
    axpy(dun[i], h_prev, g.un + static_cast<std::size_t>(i) * H, H);
    g.bz[i] += daz[i];
    g.br[i] += dar[i];
    g.bn[i] += dan[i];
    axpy(daz[i], w.wz + static_cast<std::size_t>(i) * d, dx, d);
    axpy(dar[i], w.wr + static_cast<std::size_t>(i) * d, dx, d);
    axpy(dan[i], w.wn + static_cast<std::size_t>(i) * d, dx, d);
    axpy(daz[i], w.uz + static_cast<std::size_t>(i) * H, dh_prev, H);
    axpy(dar[i], w.ur + static_cast<std::size_t>(i) * H, dh_prev, H);
    axpy(dun[i], w.un + static_cast<std::size_t>(i) * H, dh_prev, H);
  }
}

struct WindowCache {
  Window window;
  std::vector<double> x;       // T*d
  GruCache fwd, bwd;
  std::vector<double> states;  // T*d
};

// Runs the embedding layer and both GRU directions over one window.
void run_window(const Net& net, const std::vector<TokenFeat>& feats,
                const Window& win, WindowCache* cache) {
  const int d = net.d, H = net.H;
  const int T = win.token_end - win.token_begin;
  cache->window = win;
  cache->x.assign(static_cast<std::size_t>(T) * d, 0.0);
  cache->fwd.resize(T, H);
  cache->bwd.resize(T, H);
  cache->states.assign(static_cast<std::size_t>(T) * d, 0.0);
  for (int t = 0; t < T; ++t) {
    const TokenFeat& f = feats[win.token_begin + t];
    double* x = cache->x.data() + static_cast<std::size_t>(t) * d;
    if (f.use_word) axpy(1.0, net.ew.w + f.word * d, x, d);
    if (!f.ngrams.empty()) {
      double inv = 1.0 / static_cast<double>(f.ngrams.size());
      for (std::size_t g : f.ngrams) axpy(inv, net.eg.w + g * d, x, d);
    }
    axpy(1.0, net.es.w + static_cast<std::size_t>(f.shape) * d, x, d);
    axpy(1.0, net.egz.w + static_cast<std::size_t>(f.gaz) * d, x, d);
  }
  DirWeights fw{net.fwz.w, net.fwr.w, net.fwn.w, net.fuz.w, net.fur.w,
                net.fun.w, net.fbz.w, net.fbr.w, net.fbn.w};
  DirWeights bw{net.bwz.w, net.bwr.w, net.bwn.w, net.buz.w, net.bur.w,
                net.bun.w, net.bbz.w, net.bbr.w, net.bbn.w};
  std::vector<double> zero(H, 0.0);
  for (int t = 0; t < T; ++t) {
    const double* h_prev =
        t == 0 ? zero.data() : cache->fwd.h.data() + static_cast<std::size_t>(t - 1) * H;
    std::size_t o = static_cast<std::size_t>(t) * H;
    gru_step(fw, d, H, cache->x.data() + static_cast<std::size_t>(t) * d,
             h_prev, cache->fwd.z.data() + o, cache->fwd.r.data() + o,
             cache->fwd.nb.data() + o, cache->fwd.un_h.data() + o,
             cache->fwd.h.data() + o);
  }
  for (int t = T - 1; t >= 0; --t) {
    const double* h_prev =
        t == T - 1 ? zero.data()
                   : cache->bwd.h.data() + static_cast<std::size_t>(t + 1) * H;
    std::size_t o = static_cast<std::size_t>(t) * H;
    gru_step(bw, d, H, cache->x.data() + static_cast<std::size_t>(t) * d,
             h_prev, cache->bwd.z.data() + o, cache->bwd.r.data() + o,
             cache->bwd.nb.data() + o, cache->bwd.un_h.data() + o,
             cache->bwd.h.data() + o);
  }
  for (int t = 0; t < T; ++t) {
    double* row = cache->states.data() + static_cast<std::size_t>(t) * d;
    std::memcpy(row, cache->fwd.h.data() + static_cast<std::size_t>(t) * H,
                sizeof(double) * H);
    std::memcpy(row + H, cache->bwd.h.data() + static_cast<std::size_t>(t) * H,
                sizeof(double) * H);
  }
}

// Backpropagates dstates (T*d) through both directions and the embedding
// layer into the flat gradient buffer.
void run_window_backward(const Net& net, const std::vector<TokenFeat>& feats,
                         const WindowCache& cache,
                         const std::vector<double>& dstates, double* grad) {
  const int d = net.d, H = net.H;
  const Window& win = cache.window;
  const int T = win.token_end - win.token_begin;
  if (T == 0) return;
  DirWeights fw{net.fwz.w, net.fwr.w, net.fwn.w, net.fuz.w, net.fur.w,
                net.fun.w, net.fbz.w, net.fbr.w, net.fbn.w};
  DirWeights bw{net.bwz.w, net.bwr.w, net.bwn.w, net.buz.w, net.bur.w,
                net.bun.w, net.bbz.w, net.bbr.w, net.bbn.w};
  DirGrads gf{grad + net.fwz.off, grad + net.fwr.off, grad + net.fwn.off,
              grad + net.fuz.off, grad + net.fur.off, grad + net.fun.off,
              grad + net.fbz.off, grad + net.fbr.off, grad + net.fbn.off};
  DirGrads gb{grad + net.bwz.off, grad + net.bwr.off, grad + net.bwn.off,
              grad + net.buz.off, grad + net.bur.off, grad + net.bun.off,
              grad + net.bbz.off, grad + net.bbr.off, grad + net.bbn.off};
  std::vector<double> dx(static_cast<std::size_t>(T) * d, 0.0);
  std::vector<double> zero(H, 0.0);
  std::vector<double> carry(H, 0.0), dh(H, 0.0), dh_prev(H, 0.0);

  // forward direction: positions processed 0..T-1, so walk back T-1..0
  std::fill(carry.begin(), carry.end(), 0.0);
  for (int t = T - 1; t >= 0; --t) {
    std::size_t o = static_cast<std::size_t>(t) * H;
    for (int i = 0; i < H; ++i) {
      dh[i] = dstates[static_cast<std::size_t>(t) * d + i] + carry[i];
    }
    const double* h_prev =
        t == 0 ? zero.data() : cache.fwd.h.data() + static_cast<std::size_t>(t - 1) * H;
    gru_step_backward(fw, gf, d, H,
                      cache.x.data() + static_cast<std::size_t>(t) * d, h_prev,
                      cache.fwd.z.data() + o, cache.fwd.r.data() + o,
                      cache.fwd.nb.data() + o, cache.fwd.un_h.data() + o,
                      dh.data(), dh_prev.data(),
                      dx.data() + static_cast<std::size_t>(t) * d);
    carry = dh_prev;
  }

  // backward direction: positions processed T-1..0, so walk back 0..T-1
  std::fill(carry.begin(), carry.end(), 0.0);
  for (int t = 0; t < T; ++t) {
    std::size_t o = static_cast<std::size_t>(t) * H;
    for (int i = 0; i < H; ++i) {
      dh[i] = dstates[static_cast<std::size_t>(t) * d + H + i] + carry[i];
    }
    const double* h_prev =
        t == T - 1 ? zero.data()
                   : cache.bwd.h.data() + static_cast<std::size_t>(t + 1) * H;
    gru_step_backward(bw, gb, d, H,
                      cache.x.data() + static_cast<std::size_t>(t) * d, h_prev,
                      cache.bwd.z.data() + o, cache.bwd.r.data() + o,
                      cache.bwd.nb.data() + o, cache.bwd.un_h.data() + o,
                      dh.data(), dh_prev.data(),
                      dx.data() + static_cast<std::size_t>(t) * d);
    carry = dh_prev;
  }

  double* gew = grad + net.ew.off;
  double* geg = grad + net.eg.off;
  double* ges = grad + net.es.off;
  for (int t = 0; t < T; ++t) {
    const TokenFeat& f = feats[win.token_begin + t];
    const double* dxt = dx.data() + static_cast<std::size_t>(t) * d;
    if (f.use_word) axpy(1.0, dxt, gew + f.word * d, d);
    if (!f.ngrams.empty()) {
      double inv = 1.0 / static_cast<double>(f.ngrams.size());
      for (std::size_t g : f.ngrams) axpy(inv, dxt, geg + g * d, d);
    }
    axpy(1.0, dxt, ges + static_cast<std::size_t>(f.shape) * d, d);
    axpy(1.0, dxt, grad + net.egz.off + static_cast<std::size_t>(f.gaz) * d,
         d);
  }
}

// Span rep [h_b; h_e; phi(width)] built from a window's state matrix.
void build_rep(const Net& net, const std::vector<double>& states,
               const Window& win, const TokenSpan& span, double* rep) {
  const int d = net.d;
  if (span.token_begin < win.token_begin || span.token_end >= win.token_end ||
      span.token_begin > span.token_end) {
    throw ValidationError("span not contained in window");
  }
  int lb = span.token_begin - win.token_begin;
  int le = span.token_end - win.token_begin;
  std::memcpy(rep, states.data() + static_cast<std::size_t>(lb) * d,
              sizeof(double) * d);
  std::memcpy(rep + d, states.data() + static_cast<std::size_t>(le) * d,
              sizeof(double) * d);
  int wb = width_bucket(span.token_end - span.token_begin + 1);
  const int wd = net.R - 2 * d;
  std::memcpy(rep + 2 * d,
              net.ewidth.w + static_cast<std::size_t>(wb) * wd,
              sizeof(double) * wd);
}

// score(a, t) = r_a' W r_t + u' [r_a; r_t; psi] + b
double link_score(const Net& net, const double* ra, const double* rt,
                  const double* psi, int psi_dim) {
  const int R = net.R;
  double s = *net.lb.w;
  for (int i = 0; i < R; ++i) {
    s += ra[i] * dot(net.lw.w + static_cast<std::size_t>(i) * R, rt, R);
  }
  s += dot(net.lu.w, ra, R);
  s += dot(net.lu.w + R, rt, R);
  s += dot(net.lu.w + 2 * R, psi, psi_dim);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Model

void Model::build_layout() {
  const int d = config_.encoder.hidden_dim;
  const int H = d / 2;
  const int R = config_.span_rep_dim();
  ParamStore p;
  p.add("emb_word", config_.encoder.word_buckets, d);
  p.add("emb_ngram", config_.encoder.ngram_buckets, d);
  p.add("emb_shape", kNumShapes, d);
  p.add("emb_gaz", kNumGazStates, d);
  for (const char* dir : {"f", "b"}) {
    std::string pre = std::string("gru_") + dir + "_";
    p.add(pre + "wz", H, d);
    p.add(pre + "wr", H, d);
    p.add(pre + "wn", H, d);
    p.add(pre + "uz", H, H);
    p.add(pre + "ur", H, H);
    p.add(pre + "un", H, H);
    p.add(pre + "bz", 1, H);
    p.add(pre + "br", 1, H);
    p.add(pre + "bn", 1, H);
  }
  p.add("tag_w", kNumBioLabels, d);
  p.add("tag_b", 1, kNumBioLabels);
  p.add("emb_width", config_.n_width_buckets, config_.width_emb_dim);
  p.add("emb_dist", config_.n_dist_buckets + 1, config_.dist_emb_dim);
  p.add("link_w", R, R);
  p.add("link_u", 1, 2 * R + config_.dist_emb_dim);
  p.add("link_b", 1, 1);
  p.add("link_none_rep", 1, R);
  p.finalize();
  params_ = std::move(p);
}

void Model::init_params(std::uint64_t seed) {
  Xoshiro256ss rng(seed);
  for (const auto& s : params_.specs()) {
    double scale;
    bool is_bias = s.name == "tag_b" || s.name == "link_b" ||
                   (s.rows == 1 && s.name.rfind("gru_", 0) == 0);
    if (is_bias) {
      scale = 0.0;
    } else if (s.name == "emb_word" || s.name == "emb_ngram") {
      // zero so that buckets never touched by training stay silent at
      // inference instead of injecting random noise for unseen words
      scale = 0.0;
    } else if (s.name.rfind("emb_", 0) == 0 || s.name == "link_none_rep") {
      scale = 0.1;
    } else {
      scale = 1.0 / std::sqrt(static_cast<double>(s.cols));
    }
    double* t = params_.flat().data() + s.offset;
    std::size_t n = static_cast<std::size_t>(s.rows) * s.cols;
    if (scale == 0.0) {
      std::fill(t, t + n, 0.0);
    } else {
      for (std::size_t i = 0; i < n; ++i) t[i] = rng.symmetric(scale);
    }
  }
}

Model::Model(const ModelConfig& config, std::uint64_t init_seed)
    : config_(config) {
  config_.validate();
  build_layout();
  init_params(init_seed);
  gaz_index_.insert(config_.gazetteer.begin(), config_.gazetteer.end());
}

Model::Model(const ModelConfig& config, ParamStore params) : config_(config) {
  config_.validate();
  build_layout();
  if (params.size() != params_.size() ||
      params.specs().size() != params_.specs().size()) {
    throw ValidationError("parameter layout does not match model config");
  }
  for (std::size_t i = 0; i < params.specs().size(); ++i) {
    const auto& a = params.specs()[i];
    const auto& b = params_.specs()[i];
    if (a.name != b.name || a.rows != b.rows || a.cols != b.cols) {
      throw ValidationError("parameter tensor mismatch at " + b.name);
    }
  }
  params_ = std::move(params);
  gaz_index_.insert(config_.gazetteer.begin(), config_.gazetteer.end());
}

Model::Encoded Model::encode(const std::string& text) const {
  Encoded enc;
  enc.tokens = tokenize(text);
  enc.windows = make_windows(static_cast<int>(enc.tokens.size()),
                             config_.encoder.max_window_tokens,
                             config_.encoder.window_stride);
  Net net(config_, params_);
  std::vector<TokenFeat> feats;
  feats.reserve(enc.tokens.size());
  for (const auto& t : enc.tokens) {
    feats.push_back(token_features(t.text, config_.encoder));
  }
  apply_gazetteer(gaz_index_, enc.tokens, text, feats);
  enc.states.resize(enc.windows.size());
  WindowCache cache;
  for (std::size_t w = 0; w < enc.windows.size(); ++w) {
    run_window(net, feats, enc.windows[w], &cache);
    enc.states[w] = std::move(cache.states);
  }
  return enc;
}

std::vector<std::array<double, kNumBioLabels>> Model::tag_probs(
    const Encoded& enc, int window) const {
  Net net(config_, params_);
  const int d = net.d;
  const Window& win = enc.windows.at(window);
  const auto& states = enc.states.at(window);
  const int T = win.token_end - win.token_begin;
  std::vector<std::array<double, kNumBioLabels>> out(T);
  for (int t = 0; t < T; ++t) {
    const double* h = states.data() + static_cast<std::size_t>(t) * d;
    for (int c = 0; c < kNumBioLabels; ++c) {
      out[t][c] = net.tagb.w[c] +
                  dot(net.tagw.w + static_cast<std::size_t>(c) * d, h, d);
    }
    softmax(out[t].data(), kNumBioLabels);
  }
  return out;
}

std::vector<double> Model::span_rep(const Encoded& enc, int window,
                                    const TokenSpan& span) const {
  Net net(config_, params_);
  std::vector<double> rep(net.R, 0.0);
  build_rep(net, enc.states.at(window), enc.windows.at(window), span,
            rep.data());
  return rep;
}

std::vector<double> Model::link_distribution(
    const Encoded& enc, int window, const TokenSpan& test,
    const std::vector<TokenSpan>& candidates) const {
  if (candidates.empty()) return {1.0};
  Net net(config_, params_);
  const int R = net.R;
  const int pd = config_.dist_emb_dim;
  std::vector<double> ra(R);
  build_rep(net, enc.states.at(window), enc.windows.at(window), test,
            ra.data());
  std::vector<double> scores(candidates.size() + 1, 0.0);
  std::vector<double> rt(R);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    build_rep(net, enc.states.at(window), enc.windows.at(window),
              candidates[i], rt.data());
    int b = distance_bucket(std::abs(test.char_start - candidates[i].char_start));
    scores[i] = link_score(net, ra.data(), rt.data(),
                           net.edist.w + static_cast<std::size_t>(b) * pd, pd);
  }
  scores.back() = link_score(
      net, ra.data(), net.lnone.w,
      net.edist.w + static_cast<std::size_t>(config_.n_dist_buckets) * pd, pd);
  softmax(scores.data(), static_cast<int>(scores.size()));
  return scores;
}

std::vector<BioLabel> gold_bio_tags(const std::vector<Token>& tokens,
                                    const std::vector<EntitySpan>& entities) {
  std::vector<BioLabel> tags(tokens.size(), BioLabel::kO);
  for (const auto& e : entities) {
    auto range = token_range(tokens, e.start, e.end);
    if (!range) continue;
    bool test = e.kind == EntityKind::kTest;
    for (int t = range->first; t <= range->second; ++t) {
      if (t == range->first) {
        tags[t] = test ? BioLabel::kBTest : BioLabel::kBTime;
      } else {
        tags[t] = test ? BioLabel::kITest : BioLabel::kITime;
      }
    }
  }
  return tags;
}

std::vector<EntitySpan> decode_bio(const std::vector<BioLabel>& tags,
                                   const std::vector<Token>& tokens,
                                   std::string_view text) {
  if (tags.size() != tokens.size()) {
    throw ValidationError("tag/token length mismatch");
  }
  std::vector<EntitySpan> spans;
  int open_begin = -1;
  EntityKind open_kind = EntityKind::kTest;
  auto close = [&](int last) {
    if (open_begin < 0) return;
    EntitySpan s;
    s.entity_id = static_cast<int>(spans.size());
    s.kind = open_kind;
    s.start = tokens[open_begin].start;
    s.end = tokens[last].end;
    s.surface = std::string(text.substr(s.start, s.end - s.start));
    spans.push_back(std::move(s));
    open_begin = -1;
  };
  for (std::size_t t = 0; t < tags.size(); ++t) {
    BioLabel tag = tags[t];
    if (tag == BioLabel::kO) {
      close(static_cast<int>(t) - 1);
      continue;
    }
    EntityKind kind = (tag == BioLabel::kBTest || tag == BioLabel::kITest)
                          ? EntityKind::kTest
                          : EntityKind::kTime;
    bool begin = tag == BioLabel::kBTest || tag == BioLabel::kBTime;
    if (open_begin >= 0 && (begin || kind != open_kind)) {
      close(static_cast<int>(t) - 1);
    }
    if (open_begin < 0) {
      open_begin = static_cast<int>(t);
      open_kind = kind;
    }
  }
  close(static_cast<int>(tags.size()) - 1);
  return spans;
}

std::vector<EntitySpan> merge_spans(std::vector<EntitySpan> spans,
                                    std::string_view text) {
  std::sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) {
    return std::tie(a.start, a.end, a.kind) < std::tie(b.start, b.end, b.kind);
  });
  std::vector<EntitySpan> out;
  for (auto& s : spans) {
    if (!out.empty() && out.back().kind == s.kind && s.start < out.back().end) {
      out.back().end = std::max(out.back().end, s.end);
      continue;
    }
    if (!out.empty() && out.back().kind == s.kind &&
        out.back().start == s.start && out.back().end == s.end) {
      continue;
    }
    out.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].entity_id = static_cast<int>(i);
    out[i].surface =
        std::string(text.substr(out[i].start, out[i].end - out[i].start));
  }
  return out;
}

std::optional<std::pair<int, int>> token_range(
    const std::vector<Token>& tokens, int char_start, int char_end) {
  int first = -1, last = -1;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t].start >= char_start && tokens[t].end <= char_end) {
      if (first < 0) first = static_cast<int>(t);
      last = static_cast<int>(t);
    }
  }
  if (first < 0) return std::nullopt;
  return std::make_pair(first, last);
}

double Model::loss_and_grad(const std::vector<const Note*>& batch,
                            const TrainConfig& tc, std::vector<double>* grad,
                            std::uint64_t dropout_salt) const {
  if (batch.empty()) throw ValidationError("empty training batch");
  tc.validate();
  Net net(config_, params_);
  const int d = net.d;
  const int R = net.R;
  const int pd = config_.dist_emb_dim;
  if (grad) grad->assign(params_.size(), 0.0);
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  double total_loss = 0.0;

  for (const Note* note : batch) {
    std::vector<Token> tokens = tokenize(note->text);
    std::vector<TokenFeat> feats;
    feats.reserve(tokens.size());
    for (const auto& t : tokens) {
      feats.push_back(token_features(t.text, config_.encoder));
    }
    apply_gazetteer(gaz_index_, tokens, note->text, feats);
    if (dropout_salt != 0 && tc.word_dropout > 0.0) {
      std::uint64_t note_salt =
          dropout_salt ^ fnv1a64(note->id.data(), note->id.size());
      for (std::size_t t = 0; t < feats.size(); ++t) {
        std::uint64_t h = note_salt;
        splitmix64_next(h);
        h ^= t * 0x9E3779B97F4A7C15ULL;
        double u = static_cast<double>(splitmix64_next(h) >> 11) * 0x1.0p-53;
        if (u < tc.word_dropout) feats[t].use_word = false;
      }
    }
    std::vector<Window> windows =
        make_windows(static_cast<int>(tokens.size()),
                     config_.encoder.max_window_tokens,
                     config_.encoder.window_stride);
    std::vector<BioLabel> gold = gold_bio_tags(tokens, note->entities);

    std::vector<WindowCache> caches(windows.size());
    std::vector<std::vector<double>> dstates(windows.size());
    for (std::size_t w = 0; w < windows.size(); ++w) {
      run_window(net, feats, windows[w], &caches[w]);
      int T = windows[w].token_end - windows[w].token_begin;
      dstates[w].assign(static_cast<std::size_t>(T) * d, 0.0);
    }

    // --- tagging loss: weighted CE averaged over window positions ---
    std::size_t positions = 0;
    for (const auto& w : windows) positions += w.token_end - w.token_begin;
    double ner_loss = 0.0;
    if (positions > 0) {
      const double inv_pos = 1.0 / static_cast<double>(positions);
      for (std::size_t w = 0; w < windows.size(); ++w) {
        const Window& win = windows[w];
        const int T = win.token_end - win.token_begin;
        for (int t = 0; t < T; ++t) {
          const double* h =
              caches[w].states.data() + static_cast<std::size_t>(t) * d;
          double logits[kNumBioLabels];
          for (int c = 0; c < kNumBioLabels; ++c) {
            logits[c] = net.tagb.w[c] +
                        dot(net.tagw.w + static_cast<std::size_t>(c) * d, h, d);
          }
          double probs[kNumBioLabels];
          std::memcpy(probs, logits, sizeof(logits));
          softmax(probs, kNumBioLabels);
          int y = static_cast<int>(gold[win.token_begin + t]);
          double wy = tc.class_weights[y];
          ner_loss += -wy * std::log(std::max(probs[y], 1e-300)) * inv_pos;
          if (grad) {
            double* gtw = grad->data() + net.tagw.off;
            double* gtb = grad->data() + net.tagb.off;
            double* dh = dstates[w].data() + static_cast<std::size_t>(t) * d;
            for (int c = 0; c < kNumBioLabels; ++c) {
              double dl = wy * (probs[c] - (c == y ? 1.0 : 0.0)) * inv_pos *
                          inv_batch;
              gtb[c] += dl;
              axpy(dl, h, gtw + static_cast<std::size_t>(c) * d, d);
              axpy(dl, net.tagw.w + static_cast<std::size_t>(c) * d, dh, d);
            }
          }
        }
      }
    }

    // --- link loss: teacher-forced softmax NLL per gold TEST span ---
    struct Decision {
      int window;
      TokenSpan test;
      std::vector<TokenSpan> cands;  // gold TIME spans in the window
      int gold;                      // index into cands, or cands.size() = none
    };
    std::vector<Decision> decisions;
    auto contains = [](const Window& w, int b, int e) {
      return b >= w.token_begin && e < w.token_end;
    };
    for (const auto& link : note->links) {
      const EntitySpan* test = note->entity(link.test_entity_id);
      if (!test) continue;
      auto tr = token_range(tokens, test->start, test->end);
      if (!tr) continue;
      int w = -1;
      for (std::size_t i = 0; i < windows.size(); ++i) {
        if (contains(windows[i], tr->first, tr->second)) {
          w = static_cast<int>(i);
          break;
        }
      }
      if (w < 0) continue;
      Decision dec;
      dec.window = w;
      dec.test = {tr->first, tr->second, test->start};
      dec.gold = -1;
      for (const auto& e : note->entities) {
        if (e.kind != EntityKind::kTime) continue;
        auto er = token_range(tokens, e.start, e.end);
        if (!er || !contains(windows[w], er->first, er->second)) continue;
        if (link.time_entity_id && e.entity_id == *link.time_entity_id) {
          dec.gold = static_cast<int>(dec.cands.size());
        }
        dec.cands.push_back({er->first, er->second, e.start});
      }
      if (link.time_entity_id && dec.gold < 0) continue;  // target not visible
      if (dec.gold < 0) dec.gold = static_cast<int>(dec.cands.size());  // none
      decisions.push_back(std::move(dec));
    }

    double link_loss = 0.0;
    if (!decisions.empty()) {
      const double inv_dec = 1.0 / static_cast<double>(decisions.size());
      std::vector<double> ra(R), rt(R);
      for (const auto& dec : decisions) {
        const auto& states = caches[dec.window].states;
        const Window& win = windows[dec.window];
        const int n = static_cast<int>(dec.cands.size());
        build_rep(net, states, win, dec.test, ra.data());
        std::vector<std::vector<double>> reps(n, std::vector<double>(R));
        std::vector<int> dbuckets(n);
        std::vector<double> scores(n + 1);
        for (int i = 0; i < n; ++i) {
          build_rep(net, states, win, dec.cands[i], reps[i].data());
          dbuckets[i] =
              distance_bucket(std::abs(dec.test.char_start -
                                       dec.cands[i].char_start));
          scores[i] = link_score(
              net, ra.data(), reps[i].data(),
              net.edist.w + static_cast<std::size_t>(dbuckets[i]) * pd, pd);
        }
        scores[n] = link_score(
            net, ra.data(), net.lnone.w,
            net.edist.w + static_cast<std::size_t>(config_.n_dist_buckets) * pd,
            pd);
        std::vector<double> probs = scores;
        softmax(probs.data(), n + 1);
        link_loss += -std::log(std::max(probs[dec.gold], 1e-300)) * inv_dec;
        if (!grad) continue;

        std::vector<double> dra(R, 0.0);
        double* dst = dstates[dec.window].data();
        auto add_span_grad = [&](const TokenSpan& span,
                                 const std::vector<double>& drep) {
          int lb = span.token_begin - win.token_begin;
          int le = span.token_end - win.token_begin;
          axpy(1.0, drep.data(), dst + static_cast<std::size_t>(lb) * d, d);
          axpy(1.0, drep.data() + d, dst + static_cast<std::size_t>(le) * d, d);
          int wb = width_bucket(span.token_end - span.token_begin + 1);
          axpy(1.0, drep.data() + 2 * d,
               grad->data() + net.ewidth.off +
                   static_cast<std::size_t>(wb) * config_.width_emb_dim,
               config_.width_emb_dim);
        };
        for (int i = 0; i <= n; ++i) {
          double ds = (probs[i] - (i == dec.gold ? 1.0 : 0.0)) * tc.alpha *
                      inv_dec * inv_batch;
          if (ds == 0.0) continue;
          const double* rti = i < n ? reps[i].data() : net.lnone.w;
          int db = i < n ? dbuckets[i] : config_.n_dist_buckets;
          const double* psi = net.edist.w + static_cast<std::size_t>(db) * pd;
          double* glw = grad->data() + net.lw.off;
          double* glu = grad->data() + net.lu.off;
          for (int r = 0; r < R; ++r) {
            axpy(ds * ra[r], rti, glw + static_cast<std::size_t>(r) * R, R);
          }
          axpy(ds, ra.data(), glu, R);
          axpy(ds, rti, glu + R, R);
          axpy(ds, psi, glu + 2 * R, pd);
          grad->data()[net.lb.off] += ds;
          axpy(ds, net.lu.w + 2 * R,
               grad->data() + net.edist.off + static_cast<std::size_t>(db) * pd,
               pd);
          // d r_a += ds (W r_t + u1); d r_t += ds (W' r_a + u2)
          std::vector<double> drt(R, 0.0);
          for (int r = 0; r < R; ++r) {
            const double* wrow = net.lw.w + static_cast<std::size_t>(r) * R;
            dra[r] += ds * (dot(wrow, rti, R) + net.lu.w[r]);
            axpy(ds * ra[r], wrow, drt.data(), R);
          }
          axpy(ds, net.lu.w + R, drt.data(), R);
          if (i < n) {
            add_span_grad(dec.cands[i], drt);
          } else {
            axpy(1.0, drt.data(), grad->data() + net.lnone.off, R);
          }
        }
        add_span_grad(dec.test, dra);
      }
    }

    double note_loss = ner_loss + tc.alpha * link_loss;
    if (!std::isfinite(note_loss)) {
      throw NonFiniteLoss("non-finite loss on note " + note->id);
    }
    total_loss += note_loss * inv_batch;

    if (grad) {
      for (std::size_t w = 0; w < windows.size(); ++w) {
        run_window_backward(net, feats, caches[w], dstates[w], grad->data());
      }
    }
  }
  return total_loss;
}

double Model::tagging_accuracy(const std::vector<const Note*>& notes) const {
  std::size_t correct = 0, total = 0;
  for (const Note* note : notes) {
    Encoded enc = encode(note->text);
    std::vector<BioLabel> gold = gold_bio_tags(enc.tokens, note->entities);
    for (std::size_t w = 0; w < enc.windows.size(); ++w) {
      auto probs = tag_probs(enc, static_cast<int>(w));
      const Window& win = enc.windows[w];
      for (int t = 0; t < win.token_end - win.token_begin; ++t) {
        int best = 0;
        for (int c = 1; c < kNumBioLabels; ++c) {
          if (probs[t][c] > probs[t][best]) best = c;
        }
        if (best == static_cast<int>(gold[win.token_begin + t])) ++correct;
        ++total;
      }
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(correct) / total;
}

std::vector<std::string> gazetteer_from(const Ontology& ontology) {
  std::set<std::string> aliases;
  for (const auto& label : ontology.labels()) {
    aliases.insert(Ontology::normalize_mention(label.name));
    for (const auto& alias : label.aliases) {
      aliases.insert(Ontology::normalize_mention(alias));
    }
  }
  return {aliases.begin(), aliases.end()};
}

// ---------------------------------------------------------------------------
// checkpoint io

namespace {
constexpr char kCkptMagic[8] = {'F', 'U', 'P', 'C', 'K', 'P', 'T', '1'};
}

void save_checkpoint(const std::string& path, const Model& model,
                     const Json& provenance) {
  Json tensors = Json::array();
  for (const auto& s : model.params().specs()) {
    tensors.push_back(Json{{"name", s.name},
                           {"rows", s.rows},
                           {"cols", s.cols},
                           {"offset", s.offset}});
  }
  Json header{{"format_version", 1},
              {"model_config", model.config().to_json()},
              {"n_params", model.params().size()},
              {"tensors", tensors},
              {"provenance", provenance}};
  std::string hs = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path);
  out.write(kCkptMagic, sizeof(kCkptMagic));
  std::uint64_t hlen = hs.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  const auto& flat = model.params().flat();
  out.write(reinterpret_cast<const char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (!out) throw IoError("short write on checkpoint " + path);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCkptMagic, sizeof(magic)) != 0) {
    throw ParseError("bad checkpoint magic in " + path);
  }
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  if (!in || hlen == 0 || hlen > (1u << 20)) {
    throw ParseError("bad checkpoint header length in " + path);
  }
  std::string hs(hlen, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw ParseError("truncated checkpoint header in " + path);
  Json header;
  try {
    header = Json::parse(hs);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header is not valid json: ") +
                     e.what());
  }
  if (header.value("format_version", 0) != 1) {
    throw ParseError("unsupported checkpoint format version");
  }
  ModelConfig cfg = ModelConfig::from_json(header.at("model_config"));
  std::uint64_t n = header.at("n_params").get<std::uint64_t>();
  Model probe(cfg, 0);  // layout donor
  if (n != probe.params().size()) {
    throw ParseError("checkpoint parameter count mismatch");
  }
  ParamStore store = probe.params();
  in.read(reinterpret_cast<char*>(store.flat().data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw ParseError("truncated checkpoint payload in " + path);
  return Model(cfg, std::move(store));
}

}  // namespace followup
