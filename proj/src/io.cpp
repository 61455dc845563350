#include "hopper/io.hpp"

#include "hopper/model.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

namespace hopper::io {

namespace fs = std::filesystem;

std::string format_double(double v)
{
    if (v == 0.0) return "0";  // folds -0 so CSVs do not flicker between "0" and "-0"
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

fs::path temp_path_for(const fs::path& path)
{
    fs::path tmp = path;
    tmp += ".tmp";
    return tmp;
}

void write_raw(const fs::path& path, std::string_view content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view content)
{
    const fs::path tmp = temp_path_for(path);
    try {
        write_raw(tmp, content);
    } catch (...) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw;
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error("cannot move output into place at '" + path.string() + "'");
    }
}

AtomicBatch::~AtomicBatch()
{
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : staged_) fs::remove(temp_path_for(p), ec);
}

void AtomicBatch::stage(const std::string& name, std::string_view content)
{
    const fs::path target = dir_ / name;
    staged_.push_back(target);
    write_raw(temp_path_for(target), content);
}

void AtomicBatch::commit()
{
    for (const auto& p : staged_) {
        if (fs::is_directory(p)) throw Error("cannot move output into place at '" + p.string() + "'");
    }
    for (const auto& p : staged_) {
        std::error_code ec;
        fs::rename(temp_path_for(p), p, ec);
        if (ec) throw Error("cannot move output into place at '" + p.string() + "'");
    }
    committed_ = true;
}

std::uint64_t fnv1a64(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace hopper::io
