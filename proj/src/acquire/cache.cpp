#include <fstream>
#include <sstream>

#include "internal.hpp"
#include "unicrop/acquire.hpp"
#include "unicrop/core/error.hpp"

namespace unicrop::acquire {

namespace {

std::string read_all(const std::filesystem::path& path, bool& ok) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        ok = false;
        return {};
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    ok = true;
    return buf.str();
}

void write_all(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write cache file " + path.string());
    out << text;
}

} // namespace

ResultCache::ResultCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string ResultCache::key_for(const schema::FetchTask& task) {
    std::uint64_t h = fnv1a64(task.platform);
    h = fnv1a64_combine(h, "|");
    h = fnv1a64_combine(h, task.key_variable);
    h = fnv1a64_combine(h, "|");
    h = fnv1a64_combine(h, task.field_id);
    h = fnv1a64_combine(h, "|");
    h = fnv1a64_combine(h, task.window_start.to_iso());
    h = fnv1a64_combine(h, task.window_end.to_iso());
    h = fnv1a64_combine(h, "|");
    h = fnv1a64_combine(h, task.api_parameter);
    return to_hex(h);
}

std::optional<TimeSeries> ResultCache::load(const schema::FetchTask& task, std::string* units,
                                            std::vector<std::string>* notes) const {
    const std::string key = key_for(task);
    const auto csv_path = dir_ / (key + ".csv");
    const auto sum_path = dir_ / (key + ".sum");

    bool ok = false;
    const std::string payload = read_all(csv_path, ok);
    if (!ok) return std::nullopt;
    const std::string sidecar = read_all(sum_path, ok);
    if (!ok) return std::nullopt;

    std::istringstream meta(sidecar);
    std::string checksum, cached_units;
    std::getline(meta, checksum);
    std::getline(meta, cached_units);

    if (checksum != to_hex(fnv1a64(payload))) {
        std::error_code ec;
        std::filesystem::remove(csv_path, ec);
        std::filesystem::remove(sum_path, ec);
        if (notes) {
            notes->push_back("CacheCorruption: checksum mismatch for key " + key +
                             " (" + task.field_id + "/" + task.key_variable + "), entry evicted");
        }
        return std::nullopt;
    }

    auto parsed = series_from_csv(payload);
    if (!parsed.ok) {
        std::error_code ec;
        std::filesystem::remove(csv_path, ec);
        std::filesystem::remove(sum_path, ec);
        if (notes) {
            notes->push_back("CacheCorruption: unreadable payload for key " + key +
                             ", entry evicted");
        }
        return std::nullopt;
    }
    if (units) *units = cached_units;
    return parsed.series;
}

void ResultCache::store(const FetchResult& result) const {
    if (result.status != FetchStatus::ok) return;
    const std::string key = key_for(result.task);
    const std::string payload = series_to_csv(result.values);
    write_all(dir_ / (key + ".csv"), payload);
    write_all(dir_ / (key + ".sum"), to_hex(fnv1a64(payload)) + "\n" + result.units + "\n");
}

} // namespace unicrop::acquire
