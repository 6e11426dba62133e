#include "neurons/tasks/taxonomy.hpp"

#include <sstream>

#include "neurons/common/error.hpp"
#include "neurons/tasks/concepts_data.hpp"

namespace neurons::tasks {

namespace {

std::vector<std::string> parse_concept_list(const char* text) {
    std::vector<std::string> names;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) names.push_back(line);
    }
    return names;
}

}  // namespace

ConceptTaxonomy::ConceptTaxonomy(std::vector<std::string> names, std::set<std::string> priority,
                                 std::set<std::string> background)
    : names_(std::move(names)), priority_(std::move(priority)), background_(std::move(background)) {
    if (names_.size() != kNumConcepts) {
        throw ConfigError("taxonomy must have exactly 51 names, got " +
                          std::to_string(names_.size()));
    }
    std::set<std::string> unique(names_.begin(), names_.end());
    if (unique.size() != names_.size()) throw ConfigError("taxonomy names must be unique");
    for (const auto& p : priority_) {
        if (!unique.count(p)) throw ConfigError("priority concept not in taxonomy: " + p);
        if (background_.count(p)) throw ConfigError("concept both priority and background: " + p);
    }
    for (const auto& b : background_) {
        if (!unique.count(b)) throw ConfigError("background concept not in taxonomy: " + b);
    }
}

const ConceptTaxonomy& ConceptTaxonomy::standard() {
    static const ConceptTaxonomy taxonomy(
        parse_concept_list(detail::kConceptListText),
        {"human", "animal", "mammal", "fish", "reptile", "insect"},
        {"landscape feature", "water body", "weather phenomenon", "roadway", "sports field",
         "rock/mineral", "soil/substrate", "climate/atmosphere component"});
    return taxonomy;
}

bool ConceptTaxonomy::contains(const std::string& name) const {
    for (const auto& n : names_)
        if (n == name) return true;
    return false;
}

std::size_t ConceptTaxonomy::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return i;
    throw DomainError("unknown concept '" + name + "'");
}

Vec encode_concepts(const std::vector<std::string>& names, const ConceptTaxonomy& taxonomy) {
    Vec out = Vec::Zero(static_cast<Eigen::Index>(kNumConcepts));
    std::vector<std::string> unknown;
    for (const auto& n : names) {
        if (!taxonomy.contains(n)) {
            unknown.push_back(n);
            continue;
        }
        out(static_cast<Eigen::Index>(taxonomy.index_of(n))) = 1.0;
    }
    if (!unknown.empty()) {
        std::string msg = "unknown concept name(s):";
        for (const auto& u : unknown) msg += " '" + u + "'";
        throw DomainError(msg);
    }
    return out;
}

std::vector<std::string> decode_concepts(const Vec& multi_hot, const ConceptTaxonomy& taxonomy) {
    require_shape(multi_hot.size() == static_cast<Eigen::Index>(kNumConcepts),
                  "concept vector must have 51 entries");
    std::vector<std::string> names;
    for (Eigen::Index i = 0; i < multi_hot.size(); ++i)
        if (multi_hot(i) != 0.0) names.push_back(taxonomy.names()[static_cast<std::size_t>(i)]);
    return names;
}

}  // namespace neurons::tasks
