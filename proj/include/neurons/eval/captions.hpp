#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "neurons/common/nn.hpp"

namespace neurons::eval {

std::vector<std::string> split_words(const std::string& text);

using NgramCounts = std::map<std::vector<std::string>, int>;
NgramCounts ngram_counts(const std::vector<std::string>& words, int n);

/// Sentence BLEU-1..4: clipped n-gram precisions against all references,
/// geometric mean of the first n, times the brevity penalty computed from
/// the reference length closest to the candidate.
std::array<double, 4> bleu(const std::string& pred, const std::vector<std::string>& refs);

/// CIDEr-D with document frequencies taken from a reference corpus (one
/// entry per sample, each a list of reference captions).
class CiderD {
public:
    explicit CiderD(const std::vector<std::vector<std::string>>& corpus_refs);
    double score(const std::string& pred, const std::vector<std::string>& refs) const;

    static constexpr double kSigma = 6.0;

private:
    std::map<std::vector<std::string>, double> doc_freq_;
    double log_docs_ = 0;
};

struct CaptionScores {
    std::array<double, 4> bleu{};
    double cider = 0;
};

/// BLEU-1..4 and CIDEr-D for one prediction; the CIDEr-D document
/// frequencies come from `corpus`.
CaptionScores caption_metrics(const std::string& pred, const std::vector<std::string>& refs,
                              const CiderD& corpus);

class PosTagger {
public:
    virtual ~PosTagger() = default;
    virtual std::vector<std::string> verbs(const std::string& sentence) const = 0;
};

/// Words found in a fixed verb lexicon are verbs.
class LexiconPosTagger : public PosTagger {
public:
    explicit LexiconPosTagger(std::vector<std::string> lexicon) : lexicon_(std::move(lexicon)) {}
    std::vector<std::string> verbs(const std::string& sentence) const override;

private:
    std::vector<std::string> lexicon_;
};

class WordEmbedder {
public:
    virtual ~WordEmbedder() = default;
    virtual RowVec embed(const std::string& word) const = 0;
};

/// Explicit word -> vector table; unknown words raise DomainError.
class TableWordEmbedder : public WordEmbedder {
public:
    explicit TableWordEmbedder(std::map<std::string, RowVec> table) : table_(std::move(table)) {}
    RowVec embed(const std::string& word) const override;

private:
    std::map<std::string, RowVec> table_;
};

/// Seeded vectors in which inflections of one lemma share a base direction
/// (pairwise cosine `inflection_similarity`) and unrelated words are close
/// to orthogonal. Unlisted words get a vector of their own.
class StubWordEmbedder : public WordEmbedder {
public:
    StubWordEmbedder(const std::vector<std::vector<std::string>>& lemma_groups, std::uint64_t seed,
                     int dim = 256, double inflection_similarity = 0.9);
    /// The synthetic caption verbs grouped by lemma.
    static StubWordEmbedder standard(std::uint64_t seed);
    RowVec embed(const std::string& word) const override;

private:
    RowVec word_vector(const std::string& key) const;

    std::map<std::string, std::vector<std::string>> group_of_;
    std::uint64_t seed_;
    int dim_;
    double share_;
};

struct VerbAccuracy {
    double accuracy = 0;
    int predicted_verbs = 0;
    int correct = 0;
    bool no_verbs = false;  // prediction had no verbs; accuracy reported as 0
};

/// A predicted verb is correct when its best cosine similarity to any
/// reference verb exceeds `threshold`.
VerbAccuracy verb_accuracy(const std::string& pred, const std::string& ref, const PosTagger& tagger,
                           const WordEmbedder& embedder, double threshold = 0.8);

}  // namespace neurons::eval
