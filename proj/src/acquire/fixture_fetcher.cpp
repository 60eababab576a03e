#include <fstream>
#include <sstream>

#include "internal.hpp"
#include "unicrop/acquire.hpp"
#include "unicrop/core/error.hpp"

namespace unicrop::acquire {

namespace {

class LocalFixtureFetcher final : public Fetcher {
  public:
    explicit LocalFixtureFetcher(std::filesystem::path root)
        : root_(std::move(root)), name_("local_fixture") {}

    const std::string& name() const override { return name_; }

    FetchResult fetch(const schema::FetchTask& task) override {
        FetchResult result;
        result.task = task;
        result.source_tag = name_;
        result.retrieved_at = now_iso();

        const auto path = root_ / sanitise_path_component(task.platform) /
                          sanitise_path_component(task.key_variable) /
                          (sanitise_path_component(task.field_id) + ".csv");
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            result.status = FetchStatus::failed;
            result.failure_reason = "fixture file missing: " + path.string();
            return result;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        auto parsed = series_from_csv(buf.str());
        if (!parsed.ok) {
            result.status = FetchStatus::failed;
            result.failure_reason = "fixture parse error in " + path.string() + ": " + parsed.error;
            return result;
        }
        for (auto& point : parsed.series) {
            if (point.date < task.window_start || task.window_end < point.date) continue;
            result.values.push_back(point);
        }
        result.units = "fixture";
        return result;
    }

  private:
    std::filesystem::path root_;
    std::string name_;
};

} // namespace

std::string sanitise_path_component(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                          (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
        out.push_back(keep ? c : '_');
    }
    return out.empty() ? std::string("_") : out;
}

std::shared_ptr<Fetcher> make_local_fixture_fetcher(const std::filesystem::path& root) {
    if (!std::filesystem::is_directory(root)) {
        throw Error(Errc::io_error, "fixture root is not a directory: " + root.string());
    }
    return std::make_shared<LocalFixtureFetcher>(root);
}

} // namespace unicrop::acquire
