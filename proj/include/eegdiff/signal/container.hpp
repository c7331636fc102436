#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "eegdiff/nd/tensor.hpp"

namespace eegdiff::signal {

/// Malformed, truncated or foreign container file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr char kContainerMagic[4] = {'S', 'Y', 'N', 'P'};
inline constexpr std::uint16_t kContainerVersion = 1;

/// Little-endian layout:
///   "SYNP" | u16 version | u32 header_len | header bytes | u32 record_count |
///   records: u32 name_len | name | u32 rank | u64 dims[rank] | f64 payload[numel]
/// `header` is free-form text (JSON by convention).
struct Container {
    std::string header = "{}";
    std::map<std::string, nd::Tensor> tensors;
};

struct RecordOffset {
    std::string name;
    std::uint64_t offset = 0; // byte position of the record's name_len field
};

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partial file. Records are written in name order.
std::vector<RecordOffset> save_container(const std::filesystem::path& path, const Container& container);

/// Throws FormatError on bad magic, unknown version, truncation, duplicate
/// names or trailing bytes.
Container load_container(const std::filesystem::path& path);

/// Checkpoints are containers whose header records training state.
void save_checkpoint(const std::filesystem::path& path, const std::map<std::string, nd::Tensor>& params,
                     const std::string& header = "{}");
Container load_checkpoint(const std::filesystem::path& path);

} // namespace eegdiff::signal
