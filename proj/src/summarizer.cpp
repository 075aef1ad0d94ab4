// Copyright 2026 The subdpp Authors.
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

#include "subdpp/summarizer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "subdpp/errors.hpp"

namespace subdpp {

namespace {

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

char token_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  if (u >= 'A' && u <= 'Z') return static_cast<char>(u - 'A' + 'a');
  if ((u >= 'a' && u <= 'z') || (u >= '0' && u <= '9') || u == '\'') return c;
  return '\0';
}

}  // namespace

std::string default_stopwords_path() { return std::string(SUBDPP_DATA_DIR) + "/stopwords_en.txt"; }

Stopwords load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open stopword file " + path);
  Stopwords words;
  std::string line;
  while (std::getline(in, line)) {
    const std::string w = trim(line);
    if (w.empty() || w[0] == '#') continue;
    for (auto& t : tokenize(w)) words.insert(std::move(t));
  }
  return words;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_terminal(text[i])) continue;
    // Runs like "?!" or "..." stay with the sentence they end.
    std::size_t j = i;
    while (j + 1 < text.size() && is_terminal(text[j + 1])) ++j;
    if (j + 1 == text.size() || is_space(text[j + 1])) {
      std::string piece = trim(text.substr(start, j + 1 - start));
      if (!piece.empty()) out.push_back(std::move(piece));
      start = j + 1;
    }
    i = j;
  }
  std::string tail = trim(text.substr(std::min(start, text.size())));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const char t = token_char(c);
    if (t != '\0') {
      cur.push_back(t);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Index Vocabulary::find(std::string_view word) const {
  const auto it = index.find(std::string(word));
  return it == index.end() ? -1 : it->second;
}

Vocabulary Vocabulary::from_words(std::vector<std::string> words, std::vector<Index> counts) {
  Vocabulary v;
  if (counts.empty()) counts.assign(words.size(), 0);
  require(counts.size() == words.size(), ErrorKind::kDimensionMismatch,
          "vocabulary counts must match the word list");
  for (std::size_t i = 0; i < words.size(); ++i) {
    const bool inserted = v.index.emplace(words[i], static_cast<Index>(i)).second;
    require(inserted, ErrorKind::kInvalidArgument, "duplicate word in vocabulary");
  }
  v.words = std::move(words);
  v.counts = std::move(counts);
  return v;
}

Vocabulary build_vocab(const std::vector<std::string>& texts, Index V, const Stopwords& stopwords) {
  require(!texts.empty(), ErrorKind::kInvalidArgument, "corpus must be nonempty");
  require(V >= 1, ErrorKind::kInvalidArgument, "vocabulary size must be positive");
  std::map<std::string, Index, std::less<>> freq;
  for (const auto& t : texts) {
    for (auto& w : tokenize(t)) {
      if (stopwords.find(w) == stopwords.end()) ++freq[w];
    }
  }
  if (freq.empty()) fail(ErrorKind::kEmptyAfterFiltering, "no words left after stopword removal");
  std::vector<std::pair<std::string, Index>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (static_cast<Index>(ranked.size()) > V) ranked.resize(static_cast<std::size_t>(V));
  std::vector<std::string> words;
  std::vector<Index> counts;
  for (auto& [w, c] : ranked) {
    words.push_back(w);
    counts.push_back(c);
  }
  return Vocabulary::from_words(std::move(words), std::move(counts));
}

Document sentence_embed(std::string_view text, const Vocabulary& vocab) {
  Document doc;
  const auto sentences = split_sentences(text);
  std::vector<std::vector<Index>> hits;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    std::vector<Index> words;
    for (const auto& tok : tokenize(sentences[s])) {
      const Index w = vocab.find(tok);
      if (w >= 0) words.push_back(w);
    }
    if (words.empty()) continue;
    hits.push_back(std::move(words));
    doc.texts.push_back(sentences[s]);
    doc.source.push_back(static_cast<Index>(s));
  }
  doc.sentences = MatrixXd::Zero(static_cast<Index>(hits.size()), vocab.size());
  for (std::size_t r = 0; r < hits.size(); ++r) {
    for (Index w : hits[r]) doc.sentences(static_cast<Index>(r), w) = 1.0;
  }
  return doc;
}

std::vector<Index> independent_sentences(const Document& doc) {
  // Incremental Cholesky of the Gram matrix in document order; a sentence is
  // kept when its residual against the kept ones is clearly positive.
  const Index n = doc.size();
  std::vector<Index> kept;
  MatrixXd factors(n, 0);
  for (Index i = 0; i < n; ++i) {
    const VectorXd row = doc.sentences.row(i).transpose();
    const double diag = row.squaredNorm();
    VectorXd c(static_cast<Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const Index j = kept[k];
      const double dot = doc.sentences.row(j).dot(row);
      c(static_cast<Index>(k)) =
          (dot - factors.row(j).head(static_cast<Index>(k)).dot(c.head(static_cast<Index>(k)))) /
          factors(j, static_cast<Index>(k));
    }
    const double resid = diag - c.squaredNorm();
    if (resid > 1e-9 * diag) {
      factors.conservativeResize(n, factors.cols() + 1);
      factors.col(factors.cols() - 1).setZero();
      factors.row(i).head(c.size()) = c.transpose();
      factors(i, c.size()) = std::sqrt(resid);
      kept.push_back(i);
    }
  }
  return kept;
}

VectorXd sentence_frequencies(const std::vector<Document>& docs, Index V) {
  VectorXd hits = VectorXd::Zero(V);
  double total = 0.0;
  for (const auto& d : docs) {
    require(d.sentences.cols() == V || d.size() == 0, ErrorKind::kDimensionMismatch,
            "document dimension does not match the vocabulary");
    if (d.size() == 0) continue;
    hits += d.sentences.colwise().sum().transpose();
    total += static_cast<double>(d.size());
  }
  require(total > 0.0, ErrorKind::kEmptyAfterFiltering, "corpus has no embedded sentences");
  return (hits / total).array().max(1e-6).min(1.0 - 1e-6).matrix();
}

Corpus training_corpus(const std::vector<Document>& docs) {
  Corpus out;
  for (const auto& d : docs) {
    const auto keep = independent_sentences(d);
    if (keep.empty()) continue;
    MatrixXd rows(static_cast<Index>(keep.size()), d.sentences.cols());
    for (std::size_t k = 0; k < keep.size(); ++k) {
      rows.row(static_cast<Index>(k)) = d.sentences.row(keep[k]);
    }
    out.push_back(ObservationSet::of_rows(std::move(rows)));
  }
  return out;
}

GreedyResult greedy_map(const MatrixXd& core, const VectorXd& log_weights, Index l) {
  const Index n = core.rows();
  require(core.cols() == n && log_weights.size() == n, ErrorKind::kDimensionMismatch,
          "greedy_map needs a square matrix and one weight per item");
  require(l >= 0, ErrorKind::kInvalidArgument, "summary size must be nonnegative");
  if (l > n) fail(ErrorKind::kInfeasibleSize, "summary size exceeds the number of sentences");
  const double tol = 1e-12 * std::max(1.0, core.diagonal().cwiseAbs().maxCoeff());
  GreedyResult res;
  VectorXd resid = core.diagonal();
  MatrixXd chol(n, l);
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  for (Index step = 0; step < l; ++step) {
    Index best = -1;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (taken[static_cast<std::size_t>(i)] || !(resid(i) > tol)) continue;
      const double gain = log_weights(i) + std::log(resid(i));
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    if (best < 0) {
      fail(ErrorKind::kRankDeficientSelection, "no candidate keeps the selected minor positive definite");
    }
    taken[static_cast<std::size_t>(best)] = true;
    res.selected.push_back(best);
    res.gains.push_back(best_gain);
    res.log_det += best_gain;
    const double pivot = std::sqrt(resid(best));
    for (Index i = 0; i < n; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      const double e =
          (core(best, i) - chol.row(best).head(step).dot(chol.row(i).head(step))) / pivot;
      chol(i, step) = e;
      resid(i) -= e * e;
    }
    chol(best, step) = pivot;
  }
  return res;
}

GreedyResult greedy_map(const MatrixXd& kernel, Index l) {
  return greedy_map(kernel, VectorXd::Zero(kernel.rows()), l);
}

GreedyResult greedy_map(const LSubmatrix& sub, Index l) {
  return greedy_map(sub.scaled_core(), sub.log_p, l);
}

GreedyResult greedy_map(const LowRankL& L, const ObservationSet& X, Index l) {
  return greedy_map(l_submatrix(L, X), l);
}

Summary summarize_document(std::string_view text, const LowRankL& model, const Vocabulary& vocab,
                           const SummaryOptions& options) {
  require(model.ground.kind() == GroundKind::kHypercube, ErrorKind::kInvalidArgument,
          "summarization needs a hypercube model");
  require(model.dimension() == vocab.size(), ErrorKind::kDimensionMismatch,
          "model dimension does not match the vocabulary");
  const Document doc = sentence_embed(text, vocab);
  if (options.length > doc.size()) {
    fail(ErrorKind::kInfeasibleSize, "document has fewer embedded sentences than the summary size");
  }
  LowRankL L = model;
  if (options.fit_theta) {
    const Corpus one = training_corpus({doc});
    if (!one.empty()) {
      const CorpusObjective objective(model.ground, model.alpha, model.gamma, one,
                                      options.penalty, ThetaMode::kShared);
      const auto fixed = objective.fix_u(model.U);
      const DifferentiableFn f = [&](const VectorXd& eta, VectorXd* g) {
        const VectorXd theta = eta.array().exp().matrix();
        VectorXd gt;
        const double v = fixed.shared_value(theta, g != nullptr ? &gt : nullptr);
        if (g != nullptr) *g = theta.cwiseProduct(gt);
        return v;
      };
      const VectorXd eta0 =
          model.theta.array().max(std::numeric_limits<double>::min()).log().matrix();
      L.theta = lbfgs_minimize(f, eta0, options.optimizer.lbfgs()).x.array().exp().matrix();
    }
  }
  const GreedyResult g = greedy_map(L, doc.observation(), options.length);
  Summary s;
  s.theta = L.theta;
  s.gains = g.gains;
  for (Index pos : g.selected) s.selected.push_back(doc.source[static_cast<std::size_t>(pos)]);
  std::vector<Index> order = g.selected;
  std::sort(order.begin(), order.end());
  for (Index pos : order) s.text.push_back(doc.texts[static_cast<std::size_t>(pos)]);
  return s;
}

std::vector<std::pair<Index, double>> word_cosine_neighbors(const MatrixXd& U, Index w, Index k) {
  require(w >= 0 && w < U.rows(), ErrorKind::kOutOfDomain, "word index out of range");
  require(k >= 0, ErrorKind::kInvalidArgument, "k must be nonnegative");
  const VectorXd norms = U.rowwise().norm();
  if (!(norms(w) > 0.0)) fail(ErrorKind::kUnembeddedWord, "query word has a zero embedding");
  std::vector<std::pair<Index, double>> sims;
  for (Index v = 0; v < U.rows(); ++v) {
    if (v == w || !(norms(v) > 0.0)) continue;
    sims.emplace_back(v, U.row(v).dot(U.row(w)) / (norms(v) * norms(w)));
  }
  std::stable_sort(sims.begin(), sims.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (static_cast<Index>(sims.size()) > k) sims.resize(static_cast<std::size_t>(k));
  return sims;
}

}  // namespace subdpp
