#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "neurons/common/image.hpp"
#include "neurons/tasks/taxonomy.hpp"

namespace neurons::tasks {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2&) const = default;
};

/// Per-frame geometry of one detected object. `masks` may be empty for a
/// geometry-only track; when present it has one mask per frame and the
/// centroids/areas are derived from it.
struct ObjectTrack {
    std::string concept_name;
    std::vector<Image> masks;
    std::vector<Point2> centroids;  // pixels
    std::vector<double> areas;      // fraction of image area

    std::size_t frames() const { return centroids.size(); }
    double mean_area() const;

    /// Builds a track from binary masks; centroid of an empty mask falls back
    /// to the nearest earlier non-empty frame (or the image centre).
    static ObjectTrack from_masks(std::string concept_name, std::vector<Image> masks);
    static ObjectTrack from_geometry(std::string concept_name, std::vector<Point2> centroids,
                                     std::vector<double> areas);
};

struct KeyRuleConfig {
    double priority_multiplier = 2.0;
    double max_area_fraction = 0.5;
};

/// Sum of consecutive centroid displacements, times the priority multiplier
/// when the concept is a priority concept. Throws DomainError("insufficient
/// frames") for fewer than two frames.
double weighted_displacement(const ObjectTrack& track, const ConceptTaxonomy& taxonomy,
                             const KeyRuleConfig& rules = {});

struct KeySelection {
    std::string concept_name;
    std::size_t track_index = 0;
    bool fallback = false;  // chosen by the largest-object fallback
};

/// Rule-based key object discovery:
///  1. drop background concepts,
///  2. drop tracks whose mean area exceeds the size limit,
///  3. prefer priority concepts, then rank by weighted displacement,
///  4. with no survivors, fall back to the largest background track (or the
///     largest track overall when there is no background track).
/// Ties resolve to the lowest taxonomy index, then the lowest track index.
/// Throws DomainError("no objects") on an empty list.
KeySelection discover_key_object(const std::vector<ObjectTrack>& tracks,
                                 const ConceptTaxonomy& taxonomy,
                                 const KeyRuleConfig& rules = {});

}  // namespace neurons::tasks
