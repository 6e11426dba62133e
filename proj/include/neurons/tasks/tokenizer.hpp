#pragma once

#include <map>
#include <string>
#include <vector>

namespace neurons::tasks {

inline constexpr int kPadId = 0;
inline constexpr int kBosId = 1;
inline constexpr int kEosId = 2;

/// Whitespace tokenizer over a fixed vocabulary. Ids 0..2 are reserved for
/// pad/bos/eos; unused slots up to the vocabulary size are filled with
/// placeholder words that never appear in captions.
class Tokenizer {
public:
    Tokenizer(const std::vector<std::string>& words, int vocab_size);

    /// Vocabulary covering the synthetic caption grammar and every taxonomy
    /// word, padded to `vocab_size` (512 by default).
    static const Tokenizer& standard();

    /// [bos, w_1 .. w_n, eos]. Unknown words raise DomainError.
    std::vector<int> encode(const std::string& text) const;
    /// Inverse of encode; special ids are skipped.
    std::string decode(const std::vector<int>& ids) const;

    int id_of(const std::string& word) const;
    const std::string& word(int id) const;
    int size() const { return static_cast<int>(words_.size()); }

private:
    std::vector<std::string> words_;
    std::map<std::string, int> ids_;
};

}  // namespace neurons::tasks
