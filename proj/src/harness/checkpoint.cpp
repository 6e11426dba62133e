#include "neurons/harness/checkpoint.hpp"

#include <openssl/sha.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "neurons/common/error.hpp"
#include "neurons/common/fileio.hpp"

namespace neurons {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'N', 'R', 'N', 'S', 'C', 'K', 'P', 'T'};
constexpr std::size_t kDigestLen = SHA256_DIGEST_LENGTH;

class Writer {
public:
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        buf.insert(buf.end(), b, b + n);
    }
    template <typename T>
    void pod(T v) { raw(&v, sizeof(T)); }
    void str(const std::string& s) {
        pod<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
    std::vector<unsigned char> buf;
};

class Reader {
public:
    Reader(const unsigned char* p, std::size_t n) : p_(p), n_(n) {}
    void raw(void* out, std::size_t n) {
        if (pos_ + n > n_) throw IntegrityError("checkpoint truncated");
        std::memcpy(out, p_ + pos_, n);
        pos_ += n;
    }
    template <typename T>
    T pod() {
        T v;
        raw(&v, sizeof(T));
        return v;
    }
    std::string str() {
        const auto len = pod<std::uint32_t>();
        if (pos_ + len > n_) throw IntegrityError("checkpoint truncated");
        std::string s(reinterpret_cast<const char*>(p_ + pos_), len);
        pos_ += len;
        return s;
    }
    bool done() const { return pos_ == n_; }

private:
    const unsigned char* p_;
    std::size_t n_;
    std::size_t pos_ = 0;
};

}  // namespace

const std::string& Checkpoint::meta_at(const std::string& key) const {
    auto it = meta.find(key);
    if (it == meta.end()) throw StateError("checkpoint missing meta '" + key + "'");
    return it->second;
}

const Mat& Checkpoint::tensor_at(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw StateError("checkpoint missing tensor '" + name + "'");
    return it->second;
}

bool Checkpoint::operator==(const Checkpoint& o) const {
    if (meta != o.meta || tensors.size() != o.tensors.size()) return false;
    for (const auto& [name, t] : tensors) {
        auto it = o.tensors.find(name);
        if (it == o.tensors.end() || it->second.rows() != t.rows() ||
            it->second.cols() != t.cols() || it->second != t) {
            return false;
        }
    }
    return true;
}

std::vector<unsigned char> encode_checkpoint(const Checkpoint& ckpt, std::uint32_t version) {
    if (version != 1 && version != 2) throw Error("unsupported checkpoint version");
    Writer w;
    w.raw(kMagic, sizeof(kMagic));
    w.pod<std::uint32_t>(version);
    if (version >= 2) {
        w.pod<std::uint32_t>(static_cast<std::uint32_t>(ckpt.meta.size()));
        for (const auto& [k, v] : ckpt.meta) {
            w.str(k);
            w.str(v);
        }
    }
    w.pod<std::uint32_t>(static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& [name, t] : ckpt.tensors) {
        w.str(name);
        w.pod<std::uint64_t>(static_cast<std::uint64_t>(t.rows()));
        w.pod<std::uint64_t>(static_cast<std::uint64_t>(t.cols()));
        for (Eigen::Index r = 0; r < t.rows(); ++r)
            for (Eigen::Index c = 0; c < t.cols(); ++c) w.pod<double>(t(r, c));
    }
    unsigned char digest[kDigestLen];
    SHA256(w.buf.data(), w.buf.size(), digest);
    w.raw(digest, kDigestLen);
    return std::move(w.buf);
}

Checkpoint decode_checkpoint(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < sizeof(kMagic) + 4 + kDigestLen) {
        throw IntegrityError("checkpoint truncated");
    }
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw IntegrityError("not a checkpoint file (bad magic)");
    }
    const std::size_t body = bytes.size() - kDigestLen;
    unsigned char digest[kDigestLen];
    SHA256(bytes.data(), body, digest);
    if (std::memcmp(digest, bytes.data() + body, kDigestLen) != 0) {
        throw IntegrityError("checkpoint checksum mismatch (corrupt or truncated)");
    }

    Reader r(bytes.data() + sizeof(kMagic), body - sizeof(kMagic));
    const auto version = r.pod<std::uint32_t>();
    if (version == 0 || version > kCheckpointVersion) {
        throw IntegrityError("incompatible checkpoint version " + std::to_string(version));
    }
    Checkpoint ckpt;
    if (version >= 2) {
        const auto n_meta = r.pod<std::uint32_t>();
        for (std::uint32_t i = 0; i < n_meta; ++i) {
            std::string k = r.str();
            ckpt.meta[k] = r.str();
        }
    }
    const auto n_tensors = r.pod<std::uint32_t>();
    for (std::uint32_t i = 0; i < n_tensors; ++i) {
        std::string name = r.str();
        const auto rows = r.pod<std::uint64_t>();
        const auto cols = r.pod<std::uint64_t>();
        if (rows * cols * sizeof(double) > body) throw IntegrityError("tensor size corrupt");
        Mat t(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index rr = 0; rr < t.rows(); ++rr)
            for (Eigen::Index c = 0; c < t.cols(); ++c) t(rr, c) = r.pod<double>();
        ckpt.tensors.emplace(std::move(name), std::move(t));
    }
    if (!r.done()) throw IntegrityError("trailing bytes in checkpoint");
    if (version == 1) {
        ckpt.meta["migration"] = "v1->v2: meta section absent; epoch=0, rng unset";
        ckpt.meta["epoch"] = "0";
    }
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const fs::path& path) {
    const auto bytes = encode_checkpoint(ckpt);
    write_file_atomic(path, {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

Checkpoint load_checkpoint(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace neurons
