#include "neurons/tasks/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "neurons/common/error.hpp"

namespace neurons::tasks {

const std::vector<ObjectKind>& object_kinds() {
    static const std::vector<ObjectKind> kinds = {
        {"person", "human", "red", {0.85, 0.15, 0.15}, Shape::Rect, 1.6, "walking", true},
        {"dog", "animal", "brown", {0.55, 0.35, 0.15}, Shape::Rect, 0.7, "running", true},
        {"cat", "animal", "orange", {0.95, 0.55, 0.10}, Shape::Disc, 1.0, "running", true},
        {"bird", "animal", "yellow", {0.95, 0.90, 0.20}, Shape::Disc, 1.0, "flying", true},
        {"car", "vehicle", "purple", {0.50, 0.20, 0.70}, Shape::Rect, 0.5, "driving", true},
        {"bus", "vehicle", "white", {0.95, 0.95, 0.95}, Shape::Rect, 0.6, "driving", true},
        {"airplane", "flying vehicle", "silver", {0.75, 0.75, 0.80}, Shape::Rect, 0.4, "flying",
         true},
        {"boat", "vehicle", "black", {0.10, 0.10, 0.10}, Shape::Rect, 0.5, "sailing", true},
        {"fish", "fish", "pink", {1.00, 0.60, 0.70}, Shape::Disc, 1.0, "swimming", true},
        {"turtle", "reptile", "olive", {0.50, 0.50, 0.10}, Shape::Disc, 1.0, "swimming", true},
        {"ball", "sports equipment", "cyan", {0.10, 0.90, 0.90}, Shape::Disc, 1.0, "rolling",
         true},
        {"chair", "furniture", "tan", {0.80, 0.70, 0.50}, Shape::Rect, 1.2, "standing", false},
        {"tree", "plant", "lime", {0.40, 0.90, 0.20}, Shape::Disc, 1.0, "standing", false},
        {"house", "building", "maroon", {0.50, 0.10, 0.20}, Shape::Rect, 0.9, "standing", false},
    };
    return kinds;
}

const std::vector<BackgroundKind>& ground_kinds() {
    static const std::vector<BackgroundKind> kinds = {
        {"ocean", "water body", {0.10, 0.30, 0.70}},
        {"grass", "landscape feature", {0.20, 0.55, 0.20}},
        {"road", "roadway", {0.35, 0.35, 0.35}},
        {"field", "sports field", {0.45, 0.75, 0.35}},
        {"sand", "soil/substrate", {0.85, 0.80, 0.55}},
    };
    return kinds;
}

const BackgroundKind& sky_kind() {
    static const BackgroundKind sky{"sky", "climate/atmosphere component", {0.55, 0.75, 1.00}};
    return sky;
}

const ObjectKind& object_kind(const std::string& name) {
    for (const auto& k : object_kinds())
        if (k.name == name) return k;
    throw DomainError("unknown object kind '" + name + "'");
}

namespace {

const BackgroundKind& ground_kind(const std::string& name) {
    for (const auto& k : ground_kinds())
        if (k.name == name) return k;
    throw DomainError("unknown ground kind '" + name + "'");
}

double object_height(const SceneObject& o) { return o.size * object_kind(o.kind).aspect; }

std::string direction_word(double vx, double vy) {
    if (std::hypot(vx, vy) < 0.25) return "still";
    if (std::abs(vx) >= std::abs(vy)) return vx > 0 ? "right" : "left";
    return vy > 0 ? "down" : "up";
}

}  // namespace

std::vector<std::string> caption_grammar_words() {
    std::set<std::string> words = {"a",    "the",   "over", "view", "of",  "standing",
                                   "still", "left", "right", "up",  "down"};
    for (const auto& k : object_kinds()) {
        words.insert(k.name);
        words.insert(k.color_name);
        words.insert(k.verb);
    }
    for (const auto& g : ground_kinds()) words.insert(g.name);
    words.insert(sky_kind().name);
    for (const auto& v : verb_lexicon()) words.insert(v);
    return {words.begin(), words.end()};
}

const std::vector<std::string>& verb_lexicon() {
    static const std::vector<std::string> verbs = {
        "walking", "walks",  "walked",  "running", "runs",    "ran",      "flying",
        "flies",   "flew",   "driving", "drives",  "drove",   "sailing",  "sails",
        "swimming", "swims", "swam",    "rolling", "rolls",   "standing", "stands"};
    return verbs;
}

Scene random_scene(Rng& rng, int height, int width, int frames, int max_objects) {
    if (height <= 0 || width <= 0 || frames <= 0 || max_objects <= 0) {
        throw ConfigError("scene dimensions must be positive");
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    Scene s;
    s.height = height;
    s.width = width;
    s.frames = frames;
    s.ground = ground_kinds()[std::uniform_int_distribution<std::size_t>(
                                  0, ground_kinds().size() - 1)(rng)]
                   .name;
    s.horizon = static_cast<int>(std::lround(height * uniform(0.3, 0.5)));

    const int count = std::uniform_int_distribution<int>(1, max_objects)(rng);
    const auto& kinds = object_kinds();
    for (int i = 0; i < count; ++i) {
        SceneObject o;
        const bool giant = unit(rng) < 0.08;
        o.kind = giant ? "house"
                       : kinds[std::uniform_int_distribution<std::size_t>(0, kinds.size() - 1)(
                                   rng)]
                             .name;
        const auto& kind = object_kind(o.kind);
        o.size = giant ? 0.85 * width : uniform(width / 6.0, width / 3.5);
        const double h = o.size * kind.aspect;
        const double span = frames - 1;
        if (kind.mobile) {
            o.vx = uniform(-3.0, 3.0);
            o.vy = uniform(-3.0, 3.0);
        }
        // Keep the whole trajectory inside the frame.
        auto place = [&](double extent, double limit, double& v) {
            double room = limit - extent;
            if (std::abs(v) * span > room) v = (v > 0 ? 1 : -1) * room / span;
            const double lo = v < 0 ? -v * span : 0.0;
            const double hi = room - std::max(v, 0.0) * span;
            return uniform(lo, std::max(lo, hi));
        };
        o.x0 = place(o.size, width, o.vx);
        o.y0 = place(h, height, o.vy);
        s.objects.push_back(o);
    }
    return s;
}

Image object_mask(const Scene& scene, std::size_t i, int f) {
    const SceneObject& o = scene.objects.at(i);
    const auto& kind = object_kind(o.kind);
    const double h = object_height(o);
    const double x0 = o.x0 + o.vx * f;
    const double y0 = o.y0 + o.vy * f;
    Image m(scene.height, scene.width, 1);
    for (int y = 0; y < scene.height; ++y)
        for (int x = 0; x < scene.width; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            bool inside;
            if (kind.shape == Shape::Rect) {
                inside = px >= x0 && px < x0 + o.size && py >= y0 && py < y0 + h;
            } else {
                const double cx = x0 + o.size / 2, cy = y0 + h / 2;
                const double rx = o.size / 2, ry = h / 2;
                const double dx = (px - cx) / rx, dy = (py - cy) / ry;
                inside = dx * dx + dy * dy <= 1.0;
            }
            m.at(y, x) = inside ? 1.0 : 0.0;
        }
    return m;
}

Image background_mask(const Scene& scene, bool sky) {
    Image m(scene.height, scene.width, 1);
    for (int y = 0; y < scene.height; ++y)
        for (int x = 0; x < scene.width; ++x)
            m.at(y, x) = ((y < scene.horizon) == sky) ? 1.0 : 0.0;
    return m;
}

Video render_scene(const Scene& scene) {
    const auto& ground = ground_kind(scene.ground);
    const auto& sky = sky_kind();
    std::vector<std::size_t> order(scene.objects.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scene.objects[a].size * object_kind(scene.objects[a].kind).aspect *
                   scene.objects[a].size >
               scene.objects[b].size * object_kind(scene.objects[b].kind).aspect *
                   scene.objects[b].size;
    });

    Video video;
    for (int f = 0; f < scene.frames; ++f) {
        Image img(scene.height, scene.width, 3);
        for (int y = 0; y < scene.height; ++y)
            for (int x = 0; x < scene.width; ++x) {
                const double* rgb = y < scene.horizon ? sky.rgb : ground.rgb;
                for (int c = 0; c < 3; ++c) img.at(y, x, c) = rgb[c];
            }
        for (std::size_t i : order) {
            const auto& kind = object_kind(scene.objects[i].kind);
            const Image m = object_mask(scene, i, f);
            for (int y = 0; y < scene.height; ++y)
                for (int x = 0; x < scene.width; ++x)
                    if (m.at(y, x) > 0)
                        for (int c = 0; c < 3; ++c) img.at(y, x, c) = kind.rgb[c];
        }
        video.push_back(std::move(img));
    }
    return video;
}

std::vector<ObjectTrack> scene_tracks(const Scene& scene) {
    std::vector<ObjectTrack> tracks;
    tracks.push_back(ObjectTrack::from_masks(
        sky_kind().concept_name, std::vector<Image>(scene.frames, background_mask(scene, true))));
    tracks.push_back(ObjectTrack::from_masks(
        ground_kind(scene.ground).concept_name,
        std::vector<Image>(scene.frames, background_mask(scene, false))));
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
        std::vector<Image> masks;
        for (int f = 0; f < scene.frames; ++f) masks.push_back(object_mask(scene, i, f));
        tracks.push_back(ObjectTrack::from_masks(object_kind(scene.objects[i].kind).concept_name,
                                                 std::move(masks)));
    }
    return tracks;
}

std::string scene_caption(const Scene& scene, std::size_t key_track) {
    if (key_track == 0) return "a view of the sky over the " + scene.ground;
    if (key_track == 1) return "a view of the " + scene.ground;
    const SceneObject& o = scene.objects.at(key_track - 2);
    const auto& kind = object_kind(o.kind);
    const std::string dir = direction_word(o.vx, o.vy);
    const std::string verb = dir == "still" ? "standing" : kind.verb;
    return "a " + kind.color_name + " " + kind.name + " " + verb + " " + dir + " over the " +
           scene.ground;
}

}  // namespace neurons::tasks
