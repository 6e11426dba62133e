#include "neurons/eval/captions.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "neurons/common/error.hpp"
#include "neurons/common/rng.hpp"

namespace neurons::eval {

std::vector<std::string> split_words(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

NgramCounts ngram_counts(const std::vector<std::string>& words, int n) {
    NgramCounts out;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= words.size(); ++i)
        ++out[std::vector<std::string>(words.begin() + static_cast<std::ptrdiff_t>(i),
                                       words.begin() + static_cast<std::ptrdiff_t>(i) + n)];
    return out;
}

std::array<double, 4> bleu(const std::string& pred, const std::vector<std::string>& refs) {
    const auto cand = split_words(pred);
    if (cand.empty()) throw DomainError("empty prediction");
    if (refs.empty()) throw DomainError("no reference captions");
    std::vector<std::vector<std::string>> ref_words;
    for (const auto& r : refs) ref_words.push_back(split_words(r));

    // closest reference length, shorter wins a tie
    std::size_t ref_len = ref_words.front().size();
    for (const auto& r : ref_words) {
        const auto d = [&](std::size_t len) { return std::abs(static_cast<long>(len) - static_cast<long>(cand.size())); };
        if (d(r.size()) < d(ref_len) || (d(r.size()) == d(ref_len) && r.size() < ref_len)) ref_len = r.size();
    }
    const double c = static_cast<double>(cand.size());
    const double bp = c >= static_cast<double>(ref_len) ? 1.0 : std::exp(1.0 - static_cast<double>(ref_len) / c);

    std::array<double, 4> out{};
    double log_sum = 0;
    bool zero = false;
    for (int n = 1; n <= 4; ++n) {
        const NgramCounts cc = ngram_counts(cand, n);
        NgramCounts max_ref;
        for (const auto& r : ref_words)
            for (const auto& [g, k] : ngram_counts(r, n)) max_ref[g] = std::max(max_ref[g], k);
        int matched = 0, total = 0;
        for (const auto& [g, k] : cc) {
            total += k;
            auto it = max_ref.find(g);
            matched += std::min(k, it == max_ref.end() ? 0 : it->second);
        }
        if (matched == 0) zero = true;
        if (!zero) log_sum += std::log(static_cast<double>(matched) / total);
        out[static_cast<std::size_t>(n - 1)] = zero ? 0.0 : bp * std::exp(log_sum / n);
    }
    return out;
}

namespace {

using Vector = std::map<std::vector<std::string>, double>;

struct TfIdf {
    std::array<Vector, 4> vec;
    std::array<double, 4> norm{};
    std::size_t length = 0;
};

}  // namespace

CiderD::CiderD(const std::vector<std::vector<std::string>>& corpus_refs) {
    if (corpus_refs.empty()) throw DomainError("CIDEr needs a non-empty reference corpus");
    for (const auto& refs : corpus_refs) {
        std::set<std::vector<std::string>> seen;
        for (const auto& r : refs) {
            const auto words = split_words(r);
            for (int n = 1; n <= 4; ++n)
                for (const auto& [g, k] : ngram_counts(words, n)) seen.insert(g);
        }
        for (const auto& g : seen) doc_freq_[g] += 1.0;
    }
    log_docs_ = std::log(static_cast<double>(corpus_refs.size()));
}

double CiderD::score(const std::string& pred, const std::vector<std::string>& refs) const {
    if (refs.empty()) throw DomainError("no reference captions");
    auto tfidf = [&](const std::string& s) {
        TfIdf t;
        const auto words = split_words(s);
        t.length = words.size();
        for (int n = 1; n <= 4; ++n) {
            auto& v = t.vec[static_cast<std::size_t>(n - 1)];
            for (const auto& [g, k] : ngram_counts(words, n)) {
                auto it = doc_freq_.find(g);
                const double df = it == doc_freq_.end() ? 0.0 : it->second;
                v[g] = k * (log_docs_ - std::log(std::max(1.0, df)));
            }
            double sq = 0;
            for (const auto& [g, x] : v) sq += x * x;
            t.norm[static_cast<std::size_t>(n - 1)] = std::sqrt(sq);
        }
        return t;
    };
    const TfIdf cand = tfidf(pred);
    if (cand.length == 0) throw DomainError("empty prediction");
    std::array<double, 4> per_n{};
    for (const auto& r : refs) {
        const TfIdf ref = tfidf(r);
        const double delta = static_cast<double>(cand.length) - static_cast<double>(ref.length);
        const double penalty = std::exp(-delta * delta / (2 * kSigma * kSigma));
        for (std::size_t n = 0; n < 4; ++n) {
            double dot = 0;
            for (const auto& [g, x] : cand.vec[n]) {
                auto it = ref.vec[n].find(g);
                if (it != ref.vec[n].end()) dot += std::min(x, it->second) * it->second;
            }
            if (cand.norm[n] != 0 && ref.norm[n] != 0)
                per_n[n] += penalty * dot / (cand.norm[n] * ref.norm[n]);
        }
    }
    double total = 0;
    for (double v : per_n) total += v * 10.0 / static_cast<double>(refs.size());
    return total / 4.0;
}

CaptionScores caption_metrics(const std::string& pred, const std::vector<std::string>& refs,
                              const CiderD& corpus) {
    return {bleu(pred, refs), corpus.score(pred, refs)};
}

std::vector<std::string> LexiconPosTagger::verbs(const std::string& sentence) const {
    std::vector<std::string> out;
    for (const auto& w : split_words(sentence))
        if (std::find(lexicon_.begin(), lexicon_.end(), w) != lexicon_.end()) out.push_back(w);
    return out;
}

RowVec TableWordEmbedder::embed(const std::string& word) const {
    auto it = table_.find(word);
    if (it == table_.end()) throw DomainError("no embedding for '" + word + "'");
    return it->second;
}

StubWordEmbedder::StubWordEmbedder(const std::vector<std::vector<std::string>>& lemma_groups,
                                   std::uint64_t seed, int dim, double inflection_similarity)
    : seed_(seed), dim_(dim), share_(std::sqrt(inflection_similarity)) {
    if (!(inflection_similarity > 0 && inflection_similarity < 1))
        throw DomainError("inflection similarity must lie in (0,1)");
    for (const auto& group : lemma_groups)
        for (const auto& w : group) group_of_[w] = group;
}

StubWordEmbedder StubWordEmbedder::standard(std::uint64_t seed) {
    return StubWordEmbedder({{"walk", "walking", "walks", "walked"},
                             {"run", "running", "runs", "ran"},
                             {"fly", "flying", "flies", "flew"},
                             {"drive", "driving", "drives", "drove"},
                             {"sail", "sailing", "sails"},
                             {"swim", "swimming", "swims", "swam"},
                             {"roll", "rolling", "rolls"},
                             {"stand", "standing", "stands"}},
                            seed);
}

RowVec StubWordEmbedder::word_vector(const std::string& key) const {
    Rng rng = make_rng(seed_, "word." + key);
    std::normal_distribution<double> n(0.0, 1.0);
    RowVec v(dim_);
    for (auto& x : v) x = n(rng);
    return v.normalized();
}

RowVec StubWordEmbedder::embed(const std::string& word) const {
    auto it = group_of_.find(word);
    if (it == group_of_.end()) return word_vector(word);
    // shared lemma direction plus word-specific components, Gram-Schmidt in
    // group order so that any two group members have cosine share^2
    const auto& group = it->second;
    std::vector<RowVec> basis{word_vector("lemma." + group.front())};
    for (const auto& w : group) {
        RowVec v = word_vector(w);
        for (const auto& b : basis) v -= v.dot(b) * b;
        basis.push_back(v.normalized());
        if (w == word) break;
    }
    return share_ * basis.front() + std::sqrt(1 - share_ * share_) * basis.back();
}

VerbAccuracy verb_accuracy(const std::string& pred, const std::string& ref, const PosTagger& tagger,
                           const WordEmbedder& embedder, double threshold) {
    VerbAccuracy r;
    const auto pv = tagger.verbs(pred), rv = tagger.verbs(ref);
    r.predicted_verbs = static_cast<int>(pv.size());
    if (pv.empty()) {
        r.no_verbs = true;
        return r;
    }
    std::vector<RowVec> ref_vecs;
    for (const auto& w : rv) ref_vecs.push_back(embedder.embed(w).normalized());
    for (const auto& w : pv) {
        const RowVec e = embedder.embed(w).normalized();
        double best = -1;
        for (const auto& v : ref_vecs) best = std::max(best, e.dot(v));
        r.correct += best > threshold;
    }
    r.accuracy = static_cast<double>(r.correct) / r.predicted_verbs;
    return r;
}

}  // namespace neurons::eval
