#include "neurons/tasks/annotations.hpp"

#include <map>

#include "neurons/tasks/tokenizer.hpp"

namespace neurons::tasks {

namespace {

bool any_pixel(const Image& m) {
    for (double v : m.data)
        if (v != 0.0) return true;
    return false;
}

}  // namespace

SceneAnnotationClient::SceneAnnotationClient(Scene scene, std::optional<int> fail_on_frame)
    : scene_(std::move(scene)), fail_on_frame_(fail_on_frame) {
    instances_.push_back({sky_kind().name, sky_kind().concept_name});
    for (const auto& g : ground_kinds())
        if (g.name == scene_.ground) instances_.push_back({g.name, g.concept_name});
    std::map<std::string, int> seen;
    for (const auto& o : scene_.objects) {
        const int n = ++seen[o.kind];
        const std::string name = n == 1 ? o.kind : o.kind + "_" + std::to_string(n);
        instances_.push_back({name, object_kind(o.kind).concept_name});
    }
    const auto key = discover_key_object(scene_tracks(scene_), ConceptTaxonomy::standard());
    caption_ = scene_caption(scene_, key.track_index);
}

void SceneAnnotationClient::check(const FrameRef& frame) const {
    if (fail_on_frame_ && *fail_on_frame_ == frame.index) {
        throw Error("injected backend failure");
    }
    if (frame.index < 0 || frame.index >= scene_.frames) {
        throw DomainError("frame index outside the scene");
    }
}

std::string SceneAnnotationClient::caption(const FrameRef& frame) {
    check(frame);
    return caption_;
}

std::vector<Detection> SceneAnnotationClient::detect_objects(const FrameRef& frame) {
    check(frame);
    std::vector<Detection> out;
    for (const auto& inst : instances_) {
        if (any_pixel(segment(frame, inst.name))) out.push_back(inst);
    }
    return out;
}

Image SceneAnnotationClient::segment(const FrameRef& frame, const std::string& name) {
    check(frame);
    for (std::size_t i = 0; i < instances_.size(); ++i) {
        if (instances_[i].name != name) continue;
        if (i == 0) return background_mask(scene_, true);
        if (i == 1) return background_mask(scene_, false);
        return object_mask(scene_, i - 2, frame.index);
    }
    throw DomainError("segmenter has no object named '" + name + "'");
}

TaskAnnotations build_annotations(const VideoClip& clip, AnnotationClient& client,
                                  const ConceptTaxonomy& taxonomy, const KeyRuleConfig& rules) {
    const int frames = static_cast<int>(clip.frames.size());
    if (frames < 2) throw DomainError("clip needs at least 2 frames");

    // Runs one client call, attaching the frame index to any failure.
    auto at_frame = [](int f, auto&& call) {
        try {
            return call();
        } catch (const AnnotationError&) {
            throw;
        } catch (const std::exception& e) {
            throw AnnotationError(f, e.what());
        }
    };

    TaskAnnotations ann;
    const int mid = frames / 2;
    ann.caption_text = at_frame(mid, [&] { return client.caption({mid, clip.frames[mid]}); });

    std::vector<Detection> instances;
    for (int f = 0; f < frames; ++f) {
        const auto dets =
            at_frame(f, [&] { return client.detect_objects({f, clip.frames[f]}); });
        for (const auto& d : dets) {
            bool known = false;
            for (const auto& i : instances) known |= i.name == d.name;
            if (!known) instances.push_back(d);
        }
    }
    if (instances.empty()) throw DomainError("no objects");

    std::vector<ObjectTrack> tracks;
    std::vector<std::string> concept_names;
    for (const auto& inst : instances) {
        std::vector<Image> masks;
        for (int f = 0; f < frames; ++f) {
            masks.push_back(
                at_frame(f, [&] { return client.segment({f, clip.frames[f]}, inst.name); }));
            if (!is_binary(masks.back())) {
                throw AnnotationError(f, "segmenter returned a non-binary mask for " + inst.name);
            }
        }
        tracks.push_back(ObjectTrack::from_masks(inst.concept_name, std::move(masks)));
        concept_names.push_back(inst.concept_name);
    }

    const KeySelection key = discover_key_object(tracks, taxonomy, rules);
    ann.key_object = key.concept_name;
    ann.key_masks = tracks[key.track_index].masks;
    ann.concepts = encode_concepts(concept_names, taxonomy);
    ann.caption_tokens = Tokenizer::standard().encode(ann.caption_text);
    return ann;
}

}  // namespace neurons::tasks
