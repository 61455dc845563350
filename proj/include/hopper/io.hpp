#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hopper::io {

/// Shortest decimal that round-trips to the same double ("." separator,
/// independent of locale and platform).
std::string format_double(double v);

/// Writes to "<path>.tmp" and renames over the target, so readers only ever
/// see a complete file. Throws hopper::Error naming the path on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Stages several files and renames them only once every write succeeded.
/// Files not yet committed are removed when the batch is destroyed.
class AtomicBatch {
public:
    explicit AtomicBatch(std::filesystem::path dir) : dir_(std::move(dir)) {}
    AtomicBatch(const AtomicBatch&) = delete;
    AtomicBatch& operator=(const AtomicBatch&) = delete;
    ~AtomicBatch();

    void stage(const std::string& name, std::string_view content);
    void commit();

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> staged_;
    bool committed_ = false;
};

std::uint64_t fnv1a64(std::string_view data);

}  // namespace hopper::io
