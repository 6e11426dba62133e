#pragma once

#include <optional>
#include <string>
#include <vector>

#include "neurons/common/error.hpp"
#include "neurons/common/image.hpp"
#include "neurons/tasks/dataset.hpp"
#include "neurons/tasks/key_object.hpp"
#include "neurons/tasks/scene.hpp"
#include "neurons/tasks/taxonomy.hpp"

namespace neurons::tasks {

struct FrameRef {
    int index;
    const Image& image;
};

struct Detection {
    std::string name;     // instance name, used as the segmentation prompt
    std::string concept_name;  // taxonomy concept
};

/// Captioner + detector + grounded segmenter. Real backends (a VLM and a
/// grounded segmenter) are not deterministic; the bundled mock is.
class AnnotationClient {
public:
    virtual ~AnnotationClient() = default;
    virtual std::string caption(const FrameRef& frame) = 0;
    virtual std::vector<Detection> detect_objects(const FrameRef& frame) = 0;
    virtual Image segment(const FrameRef& frame, const std::string& name) = 0;
};

/// Client failure, annotated with the frame it happened on.
class AnnotationError : public Error {
public:
    AnnotationError(int frame, const std::string& what)
        : Error("annotation client failed at frame " + std::to_string(frame) + ": " + what),
          frame_(frame) {}
    int frame() const { return frame_; }

private:
    int frame_;
};

/// Mock client answering from a known synthetic scene. Stateless after
/// construction, so one instance can be shared across threads.
class SceneAnnotationClient : public AnnotationClient {
public:
    explicit SceneAnnotationClient(Scene scene, std::optional<int> fail_on_frame = std::nullopt);

    std::string caption(const FrameRef& frame) override;
    std::vector<Detection> detect_objects(const FrameRef& frame) override;
    Image segment(const FrameRef& frame, const std::string& name) override;

    const Scene& scene() const { return scene_; }

private:
    void check(const FrameRef& frame) const;

    Scene scene_;
    std::vector<Detection> instances_;  // sky, ground, objects in scene order
    std::string caption_;
    std::optional<int> fail_on_frame_;
};

/// Caption from the middle frame, per-frame detections merged by instance
/// name, masks fetched per instance, key object picked by the rules.
TaskAnnotations build_annotations(const VideoClip& clip, AnnotationClient& client,
                                  const ConceptTaxonomy& taxonomy,
                                  const KeyRuleConfig& rules = {});

}  // namespace neurons::tasks
