#pragma once

// Synthetic scene vocabulary and renderer: moving geometric objects over a
// sky/ground backdrop, with exact ground-truth tracks and captions.

#include <string>
#include <vector>

#include "neurons/common/image.hpp"
#include "neurons/common/rng.hpp"
#include "neurons/tasks/key_object.hpp"

namespace neurons::tasks {

enum class Shape { Rect, Disc };

struct ObjectKind {
    std::string name;     // word used in captions, e.g. "person"
    std::string concept_name;  // taxonomy concept, e.g. "human"
    std::string color_name;
    double rgb[3];
    Shape shape;
    double aspect;  // height / width
    std::string verb;  // verb used when moving
    bool mobile;
};

struct BackgroundKind {
    std::string name;
    std::string concept_name;
    double rgb[3];
};

const std::vector<ObjectKind>& object_kinds();
const std::vector<BackgroundKind>& ground_kinds();
const BackgroundKind& sky_kind();
const ObjectKind& object_kind(const std::string& name);

/// Every word the caption grammar can emit.
std::vector<std::string> caption_grammar_words();
/// Verb lexicon (including inflections) for the stub POS tagger.
const std::vector<std::string>& verb_lexicon();

struct SceneObject {
    std::string kind;  // ObjectKind::name
    double x0 = 0, y0 = 0;  // top-left at frame 0 (pixels)
    double vx = 0, vy = 0;  // pixels per frame
    double size = 8;        // width in pixels
};

struct Scene {
    int height = 64;
    int width = 64;
    int frames = 6;
    std::string ground = "ocean";
    int horizon = 24;  // first ground row
    std::vector<SceneObject> objects;
};

/// Samples a random scene whose objects stay inside the frame.
Scene random_scene(Rng& rng, int height, int width, int frames, int max_objects);

/// Renders RGB frames (objects drawn largest first so small ones stay visible).
Video render_scene(const Scene& scene);

/// Silhouette mask of object `i` at frame `f` (clipped to the image).
Image object_mask(const Scene& scene, std::size_t i, int f);
/// Mask of a background region ("sky" or the ground) at frame `f`.
Image background_mask(const Scene& scene, bool sky);

/// Ground-truth tracks: backgrounds first (sky, ground) then objects in
/// scene order.
std::vector<ObjectTrack> scene_tracks(const Scene& scene);

/// Caption describing the object at track index `key_track` of scene_tracks.
std::string scene_caption(const Scene& scene, std::size_t key_track);

}  // namespace neurons::tasks
