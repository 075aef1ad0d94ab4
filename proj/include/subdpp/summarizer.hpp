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

#ifndef SUBDPP_SUMMARIZER_HPP_
#define SUBDPP_SUMMARIZER_HPP_

#include <Eigen/Dense>

#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "subdpp/kernel_family.hpp"
#include "subdpp/likelihood.hpp"
#include "subdpp/optimizer.hpp"

namespace subdpp {

using Stopwords = std::set<std::string, std::less<>>;

/// Stopword list shipped with the library (one word per line, '#' comments).
std::string default_stopwords_path();
Stopwords load_stopwords(const std::string& path);

/// Splits on '.', '!' or '?' followed by whitespace or the end of the text.
/// Pieces are trimmed; empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view text);

/// Lowercased runs of [a-z0-9'].
std::vector<std::string> tokenize(std::string_view text);

struct Vocabulary {
  std::vector<std::string> words;  // index -> word
  std::vector<Index> counts;       // corpus frequency of each word
  std::unordered_map<std::string, Index> index;

  Index size() const { return static_cast<Index>(words.size()); }
  /// -1 when absent.
  Index find(std::string_view word) const;
  static Vocabulary from_words(std::vector<std::string> words, std::vector<Index> counts = {});
};

/// Top-V non-stopword tokens by frequency, ties broken lexicographically.
Vocabulary build_vocab(const std::vector<std::string>& texts, Index V, const Stopwords& stopwords);

/// Sentences of one document as rows of a {0,1}^V indicator matrix. Sentences
/// without any vocabulary word are dropped; `source` keeps the position of
/// each kept sentence in the split text.
struct Document {
  MatrixXd sentences;
  std::vector<std::string> texts;
  std::vector<Index> source;

  Index size() const { return sentences.rows(); }
  ObservationSet observation() const { return ObservationSet::of_rows(sentences); }
};

Document sentence_embed(std::string_view text, const Vocabulary& vocab);

/// Positions of the first maximal linearly independent run of distinct
/// sentences, scanned in document order.
std::vector<Index> independent_sentences(const Document& doc);

/// Hypercube base measure for a document corpus: the fraction of sentences
/// containing each word, clamped to [1e-6, 1 - 1e-6].
VectorXd sentence_frequencies(const std::vector<Document>& docs, Index V);

/// Observations fit for likelihood training: the independent sentences of
/// each document (documents with none are skipped).
Corpus training_corpus(const std::vector<Document>& docs);

struct GreedyResult {
  std::vector<Index> selected;  // in selection order
  std::vector<double> gains;    // log det increment of each pick
  double log_det = 0.0;
};

/// Greedy MAP for det(L_Y), |Y| = l, on L_X = Diag(w)^1/2 M Diag(w)^1/2
/// given the symmetric M and log w. Each step adds the candidate with the
/// largest log w_i + log(Schur residual); ties go to the lowest index.
/// Incremental Cholesky keeps the cost at O(l |X|) per step.
GreedyResult greedy_map(const MatrixXd& core, const VectorXd& log_weights, Index l);
GreedyResult greedy_map(const MatrixXd& kernel, Index l);
GreedyResult greedy_map(const LSubmatrix& sub, Index l);
GreedyResult greedy_map(const LowRankL& L, const ObservationSet& X, Index l);

struct SummaryOptions {
  Index length = 5;
  bool fit_theta = true;
  PenaltyConfig penalty;
  OptimizerConfig optimizer;
};

struct Summary {
  std::vector<Index> selected;     // sentence positions in greedy order
  std::vector<double> gains;       // aligned with `selected`
  std::vector<std::string> text;   // selected sentences in document order
  VectorXd theta;                  // theta used for this document
};

/// Embeds the text, optionally fits a document theta with U fixed (on the
/// document likelihood only), then runs greedy MAP. `model.ground` must be
/// a hypercube over the vocabulary.
Summary summarize_document(std::string_view text, const LowRankL& model, const Vocabulary& vocab,
                           const SummaryOptions& options);

/// Cosine similarity of row w of U against every other embedded row; the k
/// largest, ties by index. Rows with zero norm are skipped.
std::vector<std::pair<Index, double>> word_cosine_neighbors(const MatrixXd& U, Index w, Index k);

}  // namespace subdpp

#endif  // SUBDPP_SUMMARIZER_HPP_
