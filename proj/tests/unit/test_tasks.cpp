#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "../support/key_object_oracle.hpp"
#include "../support/random_tracks.hpp"
#include "neurons/common/error.hpp"
#include "neurons/tasks/annotations.hpp"
#include "neurons/tasks/dataset.hpp"
#include "neurons/tasks/key_object.hpp"
#include "neurons/tasks/scene.hpp"
#include "neurons/tasks/taxonomy.hpp"
#include "neurons/tasks/tokenizer.hpp"

using namespace neurons;
using namespace neurons::tasks;
namespace fs = std::filesystem;

namespace {

const ConceptTaxonomy& tax() { return ConceptTaxonomy::standard(); }

ObjectTrack moving(const std::string& concept_name, Point2 from, Point2 to, double area,
                   int frames = 2) {
    std::vector<Point2> cs;
    for (int f = 0; f < frames; ++f) {
        const double t = frames == 1 ? 0.0 : static_cast<double>(f) / (frames - 1);
        cs.push_back({from.x + t * (to.x - from.x), from.y + t * (to.y - from.y)});
    }
    return ObjectTrack::from_geometry(concept_name, cs, std::vector<double>(cs.size(), area));
}

bool same_track(const ObjectTrack& a, const ObjectTrack& b) {
    return a.concept_name == b.concept_name && a.centroids == b.centroids && a.areas == b.areas;
}

class EmptyClient : public AnnotationClient {
public:
    std::string caption(const FrameRef&) override { return "a view of the sky"; }
    std::vector<Detection> detect_objects(const FrameRef&) override { return {}; }
    Image segment(const FrameRef&, const std::string&) override { return {}; }
};

fs::path temp_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("neurons_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("taxonomy ships 51 unique concepts with disjoint rule subsets") {
    const auto& t = tax();
    REQUIRE(t.names().size() == 51);
    CHECK(std::set<std::string>(t.names().begin(), t.names().end()).size() == 51);
    CHECK(t.index_of("animal") == 0);
    CHECK(t.index_of("human") == 1);
    CHECK(t.index_of("climate/atmosphere component") == 50);
    for (const auto& p : t.priority_set()) CHECK_FALSE(t.is_background(p));
    CHECK(t.is_priority("human"));
    CHECK(t.is_background("water body"));
    CHECK_THROWS_AS(t.index_of("spaceship"), DomainError);
    CHECK_THROWS_AS(ConceptTaxonomy({"a", "b"}, {}, {}), ConfigError);
}

TEST_CASE("weighted_displacement") {
    SUBCASE("static object is zero") {
        CHECK(weighted_displacement(moving("vehicle", {4, 4}, {4, 4}, 0.1, 6), tax()) == 0.0);
        CHECK(weighted_displacement(moving("human", {4, 4}, {4, 4}, 0.1, 6), tax()) == 0.0);
    }
    SUBCASE("3-4-5 motion") {
        CHECK(weighted_displacement(moving("vehicle", {0, 0}, {3, 4}, 0.1), tax()) ==
              doctest::Approx(5.0));
        CHECK(weighted_displacement(moving("human", {0, 0}, {3, 4}, 0.1), tax()) ==
              doctest::Approx(10.0));
    }
    SUBCASE("multiplier is configurable") {
        KeyRuleConfig rules;
        rules.priority_multiplier = 3.0;
        CHECK(weighted_displacement(moving("human", {0, 0}, {3, 4}, 0.1), tax(), rules) ==
              doctest::Approx(15.0));
    }
    SUBCASE("single frame is rejected") {
        CHECK_THROWS_WITH_AS(weighted_displacement(moving("human", {0, 0}, {0, 0}, 0.1, 1), tax()),
                             "insufficient frames", DomainError);
    }
    SUBCASE("translation invariant and linear in uniform scaling") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-20, 20);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<Point2> cs, shifted, scaled;
            const double dx = u(rng), dy = u(rng), k = std::abs(u(rng)) / 5 + 0.1;
            for (int f = 0; f < 6; ++f) {
                Point2 p{u(rng), u(rng)};
                cs.push_back(p);
                shifted.push_back({p.x + dx, p.y + dy});
                scaled.push_back({p.x * k, p.y * k});
            }
            const std::vector<double> areas(6, 0.1);
            const double base =
                weighted_displacement(ObjectTrack::from_geometry("animal", cs, areas), tax());
            CHECK(weighted_displacement(ObjectTrack::from_geometry("animal", shifted, areas),
                                        tax()) == doctest::Approx(base).epsilon(1e-12));
            CHECK(weighted_displacement(ObjectTrack::from_geometry("animal", scaled, areas),
                                        tax()) == doctest::Approx(k * base).epsilon(1e-12));
        }
    }
}

TEST_CASE("discover_key_object rule examples") {
    SUBCASE("priority categories are selected first") {
        std::vector<ObjectTrack> tracks = {moving("human", {0, 0}, {1, 0}, 0.05),
                                           moving("vehicle", {0, 0}, {9, 0}, 0.05)};
        const auto k = discover_key_object(tracks, tax());
        CHECK(k.concept_name == "human");
        CHECK(k.track_index == 0);
        CHECK_FALSE(k.fallback);
    }
    SUBCASE("objects above half the image are filtered") {
        std::vector<ObjectTrack> tracks = {moving("animal", {0, 0}, {9, 0}, 0.6),
                                           moving("furniture", {0, 0}, {1, 1}, 0.1)};
        CHECK(discover_key_object(tracks, tax()).concept_name == "furniture");
    }
    SUBCASE("all-background scenes fall back to the largest") {
        std::vector<ObjectTrack> tracks = {
            moving("climate/atmosphere component", {0, 0}, {0, 0}, 0.3),
            moving("water body", {0, 0}, {0, 0}, 0.7)};
        const auto k = discover_key_object(tracks, tax());
        CHECK(k.concept_name == "water body");
        CHECK(k.track_index == 1);
        CHECK(k.fallback);
    }
    SUBCASE("exactly half the image is still a candidate") {
        std::vector<ObjectTrack> tracks = {moving("vehicle", {0, 0}, {1, 0}, 0.5),
                                           moving("water body", {0, 0}, {0, 0}, 0.5)};
        CHECK(discover_key_object(tracks, tax()).concept_name == "vehicle");
    }
    SUBCASE("ties go to the lowest taxonomy index then lowest track index") {
        std::vector<ObjectTrack> tracks = {moving("vehicle", {0, 0}, {2, 0}, 0.1),
                                           moving("animal", {0, 0}, {1, 0}, 0.1)};
        // animal (index 0) doubled to 2.0 ties the vehicle's 2.0 but wins as priority anyway
        CHECK(discover_key_object(tracks, tax()).concept_name == "animal");
        std::vector<ObjectTrack> same = {moving("plant", {0, 0}, {2, 0}, 0.1),
                                         moving("vehicle", {0, 0}, {2, 0}, 0.1),
                                         moving("vehicle", {5, 5}, {7, 5}, 0.1)};
        CHECK(discover_key_object(same, tax()).concept_name == "vehicle");
        CHECK(discover_key_object(same, tax()).track_index == 1);
    }
    SUBCASE("empty input") {
        CHECK_THROWS_WITH_AS(discover_key_object({}, tax()), "no objects", DomainError);
    }
}

TEST_CASE("discover_key_object properties on random scenes") {
    std::mt19937_64 rng(11);
    for (int scene = 0; scene < 300; ++scene) {
        auto tracks = support::random_track_set(rng);
        const auto chosen = discover_key_object(tracks, tax());
        const ObjectTrack& picked = tracks[chosen.track_index];

        // agrees with the brute-force restatement
        const auto oracle_choice = oracle::brute_force_key_object(tracks, tax());
        CHECK(oracle_choice.index == chosen.track_index);
        CHECK(oracle_choice.fallback == chosen.fallback);

        // invariant to input order
        auto shuffled = tracks;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto again = discover_key_object(shuffled, tax());
        CHECK(same_track(shuffled[again.track_index], picked));

        // removing a non-selected track keeps the selection (unless it was a fallback)
        if (!chosen.fallback && tracks.size() > 1) {
            for (std::size_t drop = 0; drop < tracks.size(); ++drop) {
                if (drop == chosen.track_index) continue;
                auto fewer = tracks;
                fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(drop));
                const auto k = discover_key_object(fewer, tax());
                CHECK(same_track(fewer[k.track_index], picked));
            }
        }
    }
}

TEST_CASE("encode_concepts") {
    const Vec v = encode_concepts({"human", "furniture", "plant"}, tax());
    CHECK(v.sum() == 3.0);
    CHECK(v(tax().index_of("human")) == 1.0);
    CHECK(v(tax().index_of("furniture")) == 1.0);
    CHECK(v(tax().index_of("plant")) == 1.0);
    CHECK(encode_concepts({}, tax()).isZero());
    const Vec twice = encode_concepts({"human", "human"}, tax());
    CHECK(twice.sum() == 1.0);
    CHECK(twice(1) == 1.0);
    CHECK_THROWS_WITH_AS(encode_concepts({"human", "unicorn"}, tax()),
                         doctest::Contains("'unicorn'"), DomainError);

    // decode/encode round-trip on random multi-hot vectors
    std::mt19937_64 rng(5);
    std::bernoulli_distribution coin(0.2);
    for (int i = 0; i < 100; ++i) {
        Vec mh = Vec::Zero(51);
        for (int k = 0; k < 51; ++k) mh(k) = coin(rng) ? 1.0 : 0.0;
        CHECK(encode_concepts(decode_concepts(mh, tax()), tax()) == mh);
    }
}

TEST_CASE("tokenizer") {
    const auto& tok = Tokenizer::standard();
    CHECK(tok.size() == 512);
    CHECK(tok.word(kPadId) == "<pad>");
    CHECK(tok.word(kBosId) == "<bos>");
    CHECK(tok.word(kEosId) == "<eos>");
    const std::string text = "a red person walking left over the ocean";
    const auto ids = tok.encode(text);
    CHECK(ids.front() == kBosId);
    CHECK(ids.back() == kEosId);
    CHECK(ids.size() == 10);
    CHECK(tok.decode(ids) == text);
    CHECK_THROWS_AS(tok.encode("a purple unicorn"), DomainError);
    // every taxonomy name tokenizes
    for (const auto& n : tax().names()) CHECK(tok.decode(tok.encode(n)) == n);
}

TEST_CASE("build_annotations with the scene-backed mock") {
    Scene scene;
    scene.ground = "grass";
    scene.horizon = 24;
    scene.objects = {{"person", 10, 30, 1.5, 0, 8}, {"car", 40, 40, -2, 0, 12}};
    VideoClip clip{0, render_scene(scene)};
    SceneAnnotationClient client(scene);

    const TaskAnnotations ann = build_annotations(clip, client, tax());
    CHECK(ann.key_object == "human");
    CHECK(ann.caption_text == "a red person walking right over the grass");
    CHECK(Tokenizer::standard().decode(ann.caption_tokens) == ann.caption_text);
    CHECK(decode_concepts(ann.concepts, tax()) ==
          std::vector<std::string>{"human", "vehicle", "landscape feature",
                                   "climate/atmosphere component"});
    REQUIRE(ann.key_masks.size() == 6);
    for (int f = 0; f < 6; ++f) {
        CHECK(ann.key_masks[f] == object_mask(scene, 0, f));
        CHECK(is_binary(ann.key_masks[f]));
    }
    CHECK(ann.concepts(tax().index_of(ann.key_object)) == 1.0);
}

TEST_CASE("build_annotations edge cases") {
    SUBCASE("single non-background object is the key") {
        Scene scene;
        scene.ground = "road";
        scene.objects = {{"chair", 20, 30, 0, 0, 10}};
        VideoClip clip{0, render_scene(scene)};
        SceneAnnotationClient client(scene);
        CHECK(build_annotations(clip, client, tax()).key_object == "furniture");
    }
    SUBCASE("no detections") {
        Scene scene;
        VideoClip clip{0, render_scene(scene)};
        EmptyClient client;
        CHECK_THROWS_WITH_AS(build_annotations(clip, client, tax()), "no objects", DomainError);
    }
    SUBCASE("client failure carries the frame index") {
        Scene scene;
        scene.objects = {{"dog", 20, 30, 1, 0, 10}};
        VideoClip clip{0, render_scene(scene)};
        SceneAnnotationClient client(scene, 2);
        try {
            build_annotations(clip, client, tax());
            FAIL("expected failure");
        } catch (const AnnotationError& e) {
            CHECK(e.frame() == 2);
            CHECK(std::string(e.what()).find("frame 2") != std::string::npos);
        }
    }
    SUBCASE("known moving square is found by the generator oracle") {
        Scene scene;
        scene.ground = "sand";
        // moves (0,0) -> (5,0) in centroid terms over the clip
        scene.objects = {{"tree", 44, 36, 0, 0, 12}, {"house", 4, 30, 1.0, 0, 10}};
        VideoClip clip{0, render_scene(scene)};
        SceneAnnotationClient client(scene);
        const auto tracks = scene_tracks(scene);
        CHECK(weighted_displacement(tracks[3], tax()) == doctest::Approx(5.0));
        CHECK(build_annotations(clip, client, tax()).key_object == "building");
    }
}

TEST_CASE("synthetic dataset generation") {
    DatasetSpec spec;
    spec.num_clips = 8;
    const Dataset a = generate_synthetic_dataset(spec, 7);
    const Dataset b = generate_synthetic_dataset(spec, 7);
    REQUIRE(a.samples.size() == 8);
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const auto& sa = a.samples[i];
        const auto& sb = b.samples[i];
        CHECK(sa.clip.frames.size() == 6);
        CHECK(sa.annotations.key_masks.size() == 6);
        CHECK(sa.clip.frames == sb.clip.frames);
        CHECK(sa.fmri.voxels == sb.fmri.voxels);
        CHECK(sa.annotations.caption_text == sb.annotations.caption_text);
        CHECK(sa.fmri.voxels.size() == 2048);
        CHECK(sa.fmri.voxels.allFinite());
        CHECK(std::abs(sa.fmri.voxels.mean()) < 1e-3);
    }
    const Dataset c = generate_synthetic_dataset(spec, 8);
    CHECK(c.samples[0].fmri.voxels != a.samples[0].fmri.voxels);

    DatasetSpec bad = spec;
    bad.voxels = 0;
    CHECK_THROWS_AS(generate_synthetic_dataset(bad, 7), ConfigError);
    bad = spec;
    bad.num_clips = 0;
    CHECK_THROWS_AS(generate_synthetic_dataset(bad, 7), ConfigError);
}

TEST_CASE("dataset directory round-trip") {
    DatasetSpec spec;
    spec.num_clips = 3;
    const Dataset ds = generate_synthetic_dataset(spec, 21);
    const fs::path dir = temp_dir("dataset_io");
    write_dataset(dir, ds);

    CHECK(fs::exists(dir / "clip_0000" / "frames" / "005.ppm"));
    CHECK(fs::exists(dir / "clip_0000" / "masks" / "005.pgm"));
    CHECK(fs::file_size(dir / "clip_0000" / "voxels") == 16 + 4 * 2048);

    const Dataset back = read_dataset(dir);
    REQUIRE(back.samples.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& s = ds.samples[i];
        const auto& r = back.samples[i];
        CHECK(r.clip.frames == s.clip.frames);
        CHECK(r.annotations.key_masks == s.annotations.key_masks);
        CHECK(r.fmri.voxels == s.fmri.voxels);
        CHECK(r.annotations.key_object == s.annotations.key_object);
        CHECK(r.annotations.concepts == s.annotations.concepts);
        CHECK(r.annotations.caption_tokens == s.annotations.caption_tokens);
        CHECK(r.fmri.subject_id == s.fmri.subject_id);
    }

    // truncated voxel payload
    const fs::path vox = dir / "clip_0001" / "voxels";
    fs::resize_file(vox, 100);
    CHECK_THROWS_AS(read_voxels(vox), IntegrityError);
    fs::remove_all(dir);
}
