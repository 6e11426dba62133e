#pragma once

// Versioned binary checkpoint container.
//
// Layout (all integers little-endian):
//   "NRNSCKPT" magic (8 bytes) | u32 version
//   v2: u32 meta_count, then (string key, string value) pairs
//   u32 tensor_count, then (string name, u64 rows, u64 cols, f64[rows*cols]
//   row-major)
//   32-byte SHA-256 of every preceding byte
// Strings are u32 length + bytes. v1 files have no meta section; loading one
// migrates it and records the fact under meta["migration"].

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "neurons/common/nn.hpp"

namespace neurons {

inline constexpr std::uint32_t kCheckpointVersion = 2;

struct Checkpoint {
    std::map<std::string, std::string> meta;
    std::map<std::string, Mat> tensors;

    const std::string& meta_at(const std::string& key) const;
    const Mat& tensor_at(const std::string& name) const;
    bool operator==(const Checkpoint&) const;
};

std::vector<unsigned char> encode_checkpoint(const Checkpoint& ckpt,
                                             std::uint32_t version = kCheckpointVersion);
Checkpoint decode_checkpoint(const std::vector<unsigned char>& bytes);

/// Writes via a temporary file and rename so readers never see partial files.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace neurons
