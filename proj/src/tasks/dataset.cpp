#include "neurons/tasks/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "neurons/common/error.hpp"
#include "neurons/common/fileio.hpp"
#include "neurons/common/rng.hpp"
#include "neurons/tasks/annotations.hpp"
#include "neurons/tasks/tokenizer.hpp"

namespace neurons::tasks {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little);

namespace {

constexpr char kVoxelMagic[4] = {'N', 'V', 'O', 'X'};
constexpr std::uint32_t kVoxelVersion = 1;

std::string clip_dirname(int clip_id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "clip_%04d", clip_id);
    return buf;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace

std::string frame_filename(int index, const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%03d.%s", index, ext);
    return buf;
}

Vec clip_features(const Video& frames) {
    std::vector<double> feats;
    for (const Image& f : frames) {
        const int factor = std::max(1, f.height / 8);
        const Image pooled = avg_pool(f, factor);
        for (double v : pooled.data) feats.push_back(v - 0.5);
    }
    return Eigen::Map<const Vec>(feats.data(), static_cast<Eigen::Index>(feats.size()));
}

Dataset generate_synthetic_dataset(const DatasetSpec& spec, std::uint64_t seed) {
    if (spec.num_clips < 1 || spec.height <= 0 || spec.width <= 0 || spec.frames <= 0 ||
        spec.voxels <= 0 || spec.max_objects <= 0) {
        throw ConfigError("dataset spec dimensions must be positive");
    }
    if (spec.height % 8 != 0 || spec.width % 8 != 0) {
        throw ConfigError("dataset height/width must be multiples of 8");
    }
    Rng scene_rng = make_rng(seed, "data.scenes");
    Rng noise_rng = make_rng(seed, "data.noise");
    Rng proj_rng = make_rng(seed, "data.projection");

    const Eigen::Index feat_dim = static_cast<Eigen::Index>(spec.frames) * 8 * 8 * 3;
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat projection(spec.voxels, feat_dim);
    for (Eigen::Index r = 0; r < projection.rows(); ++r)
        for (Eigen::Index c = 0; c < projection.cols(); ++c) projection(r, c) = normal(proj_rng);
    projection /= std::sqrt(static_cast<double>(feat_dim));

    Dataset ds;
    for (int i = 0; i < spec.num_clips; ++i) {
        Scene scene =
            random_scene(scene_rng, spec.height, spec.width, spec.frames, spec.max_objects);
        DatasetSample s;
        s.clip.clip_id = i;
        s.clip.frames = render_scene(scene);
        for (Image& frame : s.clip.frames)
            for (double& v : frame.data) v = std::round(v * 255.0) / 255.0;
        SceneAnnotationClient client(scene);
        s.annotations = build_annotations(s.clip, client, ConceptTaxonomy::standard());

        Vec signal = projection * clip_features(s.clip.frames);
        const double scale = std::sqrt(signal.squaredNorm() / static_cast<double>(signal.size()));
        for (Eigen::Index v = 0; v < signal.size(); ++v)
            signal(v) += spec.noise * scale * normal(noise_rng);
        const double mean = signal.mean();
        const double sd =
            std::sqrt((signal.array() - mean).square().sum() / static_cast<double>(signal.size()));
        Vec z = (signal.array() - mean) / (sd > 0 ? sd : 1.0);
        // stored as f32 on disk; keep memory and disk identical
        for (Eigen::Index v = 0; v < z.size(); ++v) z(v) = static_cast<float>(z(v));

        s.fmri.voxels = std::move(z);
        s.fmri.clip_id = i;
        s.fmri.subject_id = spec.subject_id;
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

void write_voxels(const fs::path& path, const Vec& voxels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    const std::uint32_t version = kVoxelVersion;
    const std::uint64_t length = static_cast<std::uint64_t>(voxels.size());
    out.write(kVoxelMagic, 4);
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&length), 8);
    for (Eigen::Index i = 0; i < voxels.size(); ++i) {
        const float f = static_cast<float>(voxels(i));
        out.write(reinterpret_cast<const char*>(&f), 4);
    }
}

Vec read_voxels(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t length = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&length), 8);
    if (!in || std::memcmp(magic, kVoxelMagic, 4) != 0) {
        throw IntegrityError("bad voxel header in " + path.string());
    }
    if (version != kVoxelVersion) {
        throw IntegrityError("unsupported voxel file version " + std::to_string(version));
    }
    std::vector<float> raw(length);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(length * 4));
    if (in.gcount() != static_cast<std::streamsize>(length * 4)) {
        throw IntegrityError("truncated voxel file " + path.string());
    }
    Vec v(static_cast<Eigen::Index>(length));
    for (std::size_t i = 0; i < raw.size(); ++i) v(static_cast<Eigen::Index>(i)) = raw[i];
    return v;
}

std::string format_annotations(const DatasetSample& s) {
    const auto names = decode_concepts(s.annotations.concepts, ConceptTaxonomy::standard());
    std::string concepts;
    for (const auto& n : names) concepts += (concepts.empty() ? "" : "; ") + n;
    std::ostringstream os;
    os << "clip_id: " << s.clip.clip_id << "\n"
       << "subject_id: " << s.fmri.subject_id << "\n"
       << "key_object: " << s.annotations.key_object << "\n"
       << "concepts: " << concepts << "\n"
       << "caption: " << s.annotations.caption_text << "\n";
    return os.str();
}

void parse_annotations(const std::string& text, DatasetSample& s) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> concepts;
    bool have_key = false, have_caption = false;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos) throw IntegrityError("malformed annotation line: " + line);
        const std::string key = trim(line.substr(0, colon));
        const std::string value = trim(line.substr(colon + 1));
        if (key == "clip_id") {
            s.clip.clip_id = s.fmri.clip_id = std::stoi(value);
        } else if (key == "subject_id") {
            s.fmri.subject_id = std::stoi(value);
        } else if (key == "key_object") {
            s.annotations.key_object = value;
            have_key = true;
        } else if (key == "concepts") {
            std::istringstream cs(value);
            std::string c;
            while (std::getline(cs, c, ';'))
                if (!trim(c).empty()) concepts.push_back(trim(c));
        } else if (key == "caption") {
            s.annotations.caption_text = value;
            have_caption = true;
        } else {
            throw IntegrityError("unknown annotation key: " + key);
        }
    }
    if (!have_key || !have_caption) throw IntegrityError("annotations missing key_object/caption");
    s.annotations.concepts = encode_concepts(concepts, ConceptTaxonomy::standard());
    s.annotations.caption_tokens = Tokenizer::standard().encode(s.annotations.caption_text);
}

void write_dataset(const fs::path& dir, const Dataset& dataset) {
    fs::create_directories(dir);
    for (const auto& s : dataset.samples) {
        const fs::path clip_dir = dir / clip_dirname(s.clip.clip_id);
        fs::create_directories(clip_dir / "frames");
        fs::create_directories(clip_dir / "masks");
        for (std::size_t f = 0; f < s.clip.frames.size(); ++f) {
            write_netpbm(clip_dir / "frames" / frame_filename(static_cast<int>(f), "ppm"),
                         s.clip.frames[f]);
        }
        for (std::size_t f = 0; f < s.annotations.key_masks.size(); ++f) {
            write_netpbm(clip_dir / "masks" / frame_filename(static_cast<int>(f), "pgm"),
                         s.annotations.key_masks[f]);
        }
        std::ofstream(clip_dir / "annotations") << format_annotations(s);
        write_voxels(clip_dir / "voxels", s.fmri.voxels);
    }
}

Dataset read_dataset(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error("dataset directory not found: " + dir.string());
    std::vector<fs::path> clips;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory() && e.path().filename().string().rfind("clip_", 0) == 0)
            clips.push_back(e.path());
    std::sort(clips.begin(), clips.end());

    Dataset ds;
    for (const auto& clip_dir : clips) {
        DatasetSample s;
        parse_annotations(read_text(clip_dir / "annotations"), s);
        for (int f = 0;; ++f) {
            const fs::path p = clip_dir / "frames" / frame_filename(f, "ppm");
            if (!fs::exists(p)) break;
            s.clip.frames.push_back(read_netpbm(p));
        }
        for (int f = 0;; ++f) {
            const fs::path p = clip_dir / "masks" / frame_filename(f, "pgm");
            if (!fs::exists(p)) break;
            s.annotations.key_masks.push_back(threshold(read_netpbm(p), 0.5));
        }
        s.fmri.voxels = read_voxels(clip_dir / "voxels");
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

}  // namespace neurons::tasks
