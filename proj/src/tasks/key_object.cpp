#include "neurons/tasks/key_object.hpp"

#include <cmath>
#include <numeric>
#include <optional>

#include "neurons/common/error.hpp"

namespace neurons::tasks {

double ObjectTrack::mean_area() const {
    if (areas.empty()) return 0.0;
    return std::accumulate(areas.begin(), areas.end(), 0.0) / static_cast<double>(areas.size());
}

ObjectTrack ObjectTrack::from_masks(std::string concept_name, std::vector<Image> masks) {
    ObjectTrack t;
    t.concept_name = std::move(concept_name);
    std::optional<Point2> last;
    for (const Image& m : masks) {
        if (m.channels != 1) throw ShapeError("track masks must be single-channel");
        double sx = 0, sy = 0, n = 0;
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x) {
                const double v = m.at(y, x);
                if (v == 0.0) continue;
                sx += v * x;
                sy += v * y;
                n += v;
            }
        Point2 c;
        if (n > 0) {
            c = {sx / n, sy / n};
            last = c;
        } else {
            c = last.value_or(Point2{(m.width - 1) / 2.0, (m.height - 1) / 2.0});
        }
        t.centroids.push_back(c);
        t.areas.push_back(n / static_cast<double>(m.pixels()));
    }
    t.masks = std::move(masks);
    return t;
}

ObjectTrack ObjectTrack::from_geometry(std::string concept_name, std::vector<Point2> centroids,
                                       std::vector<double> areas) {
    if (centroids.size() != areas.size()) {
        throw ShapeError("centroid and area lists must have equal length");
    }
    ObjectTrack t;
    t.concept_name = std::move(concept_name);
    t.centroids = std::move(centroids);
    t.areas = std::move(areas);
    return t;
}

double weighted_displacement(const ObjectTrack& track, const ConceptTaxonomy& taxonomy,
                             const KeyRuleConfig& rules) {
    if (track.frames() < 2) throw DomainError("insufficient frames");
    double total = 0.0;
    for (std::size_t i = 1; i < track.centroids.size(); ++i) {
        total += std::hypot(track.centroids[i].x - track.centroids[i - 1].x,
                            track.centroids[i].y - track.centroids[i - 1].y);
    }
    return taxonomy.is_priority(track.concept_name) ? total * rules.priority_multiplier : total;
}

KeySelection discover_key_object(const std::vector<ObjectTrack>& tracks,
                                 const ConceptTaxonomy& taxonomy, const KeyRuleConfig& rules) {
    if (tracks.empty()) throw DomainError("no objects");

    // Higher score wins; equal scores go to the lower taxonomy index, then the
    // lower track index.
    auto better = [&](std::size_t a, double score_a, std::size_t b, double score_b) {
        if (score_a != score_b) return score_a > score_b;
        const auto ta = taxonomy.index_of(tracks[a].concept_name);
        const auto tb = taxonomy.index_of(tracks[b].concept_name);
        if (ta != tb) return ta < tb;
        return a < b;
    };

    std::optional<std::size_t> best_priority, best_any;
    double best_priority_score = 0, best_any_score = 0;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const auto& t = tracks[i];
        if (taxonomy.is_background(t.concept_name)) continue;
        if (t.mean_area() > rules.max_area_fraction) continue;
        const double score = weighted_displacement(t, taxonomy, rules);
        if (!best_any || better(i, score, *best_any, best_any_score)) {
            best_any = i;
            best_any_score = score;
        }
        if (taxonomy.is_priority(t.concept_name) &&
            (!best_priority || better(i, score, *best_priority, best_priority_score))) {
            best_priority = i;
            best_priority_score = score;
        }
    }
    if (best_priority) return {tracks[*best_priority].concept_name, *best_priority, false};
    if (best_any) return {tracks[*best_any].concept_name, *best_any, false};

    bool have_background = false;
    for (const auto& t : tracks) have_background |= taxonomy.is_background(t.concept_name);
    std::optional<std::size_t> largest;
    double largest_area = 0;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        if (have_background && !taxonomy.is_background(tracks[i].concept_name)) continue;
        const double area = tracks[i].mean_area();
        if (!largest || better(i, area, *largest, largest_area)) {
            largest = i;
            largest_area = area;
        }
    }
    return {tracks[*largest].concept_name, *largest, true};
}

}  // namespace neurons::tasks
