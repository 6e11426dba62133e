#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "neurons/common/nn.hpp"

namespace neurons::tasks {

inline constexpr std::size_t kNumConcepts = 51;

/// The fixed ordered concept label set plus the two rule subsets used by key
/// object discovery.
class ConceptTaxonomy {
public:
    ConceptTaxonomy(std::vector<std::string> names, std::set<std::string> priority,
                    std::set<std::string> background);

    /// The shipped 51-concept list with the default priority (humans and
    /// animals) and background (scenery) subsets.
    static const ConceptTaxonomy& standard();

    const std::vector<std::string>& names() const { return names_; }
    const std::set<std::string>& priority_set() const { return priority_; }
    const std::set<std::string>& background_set() const { return background_; }

    bool contains(const std::string& name) const;
    /// Throws DomainError for unknown names.
    std::size_t index_of(const std::string& name) const;
    bool is_priority(const std::string& name) const { return priority_.count(name) > 0; }
    bool is_background(const std::string& name) const { return background_.count(name) > 0; }

private:
    std::vector<std::string> names_;
    std::set<std::string> priority_;
    std::set<std::string> background_;
};

/// Multi-hot vector over the taxonomy. Duplicates are idempotent; an unknown
/// name raises DomainError naming it.
Vec encode_concepts(const std::vector<std::string>& names, const ConceptTaxonomy& taxonomy);

/// Names whose entry is non-zero, in taxonomy order.
std::vector<std::string> decode_concepts(const Vec& multi_hot, const ConceptTaxonomy& taxonomy);

}  // namespace neurons::tasks
