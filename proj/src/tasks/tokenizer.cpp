#include "neurons/tasks/tokenizer.hpp"

#include <set>
#include <sstream>

#include "neurons/common/error.hpp"
#include "neurons/tasks/scene.hpp"
#include "neurons/tasks/taxonomy.hpp"

namespace neurons::tasks {

Tokenizer::Tokenizer(const std::vector<std::string>& words, int vocab_size) {
    words_ = {"<pad>", "<bos>", "<eos>"};
    for (const auto& w : words) {
        if (ids_.count(w) || w.empty()) continue;
        ids_[w] = static_cast<int>(words_.size());
        words_.push_back(w);
    }
    if (static_cast<int>(words_.size()) > vocab_size) {
        throw ConfigError("vocabulary needs " + std::to_string(words_.size()) +
                          " ids but vocab_size is " + std::to_string(vocab_size));
    }
    for (int k = 0; static_cast<int>(words_.size()) < vocab_size; ++k) {
        words_.push_back("<unused_" + std::to_string(k) + ">");
    }
}

const Tokenizer& Tokenizer::standard() {
    static const Tokenizer tok = [] {
        std::set<std::string> words;
        for (const auto& w : caption_grammar_words()) words.insert(w);
        for (const auto& name : ConceptTaxonomy::standard().names()) {
            std::istringstream in(name);
            std::string w;
            while (in >> w) words.insert(w);
        }
        return Tokenizer({words.begin(), words.end()}, 512);
    }();
    return tok;
}

std::vector<int> Tokenizer::encode(const std::string& text) const {
    std::vector<int> ids{kBosId};
    std::istringstream in(text);
    std::string w;
    while (in >> w) ids.push_back(id_of(w));
    ids.push_back(kEosId);
    return ids;
}

std::string Tokenizer::decode(const std::vector<int>& ids) const {
    std::string out;
    for (int id : ids) {
        if (id == kPadId || id == kBosId || id == kEosId) continue;
        if (!out.empty()) out += ' ';
        out += word(id);
    }
    return out;
}

int Tokenizer::id_of(const std::string& word) const {
    auto it = ids_.find(word);
    if (it == ids_.end()) throw DomainError("word not in vocabulary: '" + word + "'");
    return it->second;
}

const std::string& Tokenizer::word(int id) const {
    if (id < 0 || id >= size()) throw DomainError("token id out of range: " + std::to_string(id));
    return words_[static_cast<std::size_t>(id)];
}

}  // namespace neurons::tasks
