#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "unicrop/core/date.hpp"
#include "unicrop/core/numeric.hpp"
#include "unicrop/schema_config.hpp"

namespace unicrop::acquire {

struct TimePoint {
    Date date;
    Cell value;
};

using TimeSeries = std::vector<TimePoint>;

enum class FetchStatus { ok, failed };

// One time series retrieved (or derived) for a single task. Dates always lie
// within the task window; missing entries stay explicit.
struct FetchResult {
    schema::FetchTask task;
    TimeSeries values;
    std::string units;
    std::string retrieved_at; // wall-clock metadata only; never enters artifacts
    std::string source_tag;
    FetchStatus status = FetchStatus::ok;
    std::string failure_reason;
};

// Fetcher contract: deterministic for identical task + backing data, safe
// for concurrent invocation.
class Fetcher {
  public:
    virtual ~Fetcher() = default;
    virtual const std::string& name() const = 0;
    virtual FetchResult fetch(const schema::FetchTask& task) = 0;
};

// Maps platforms to fetchers. A task resolves to its explicit claimer if one
// exists, otherwise to the single registered fallback. Ambiguous or missing
// claims surface as NoFetcherForPlatform.
class FetcherRegistry {
  public:
    void add(std::shared_ptr<Fetcher> fetcher, const std::vector<std::string>& platforms);
    void add_fallback(std::shared_ptr<Fetcher> fetcher);

    Fetcher& resolve(const std::string& platform) const;
    bool empty() const { return explicit_.empty() && fallback_ == nullptr; }

  private:
    std::map<std::string, std::shared_ptr<Fetcher>> explicit_;
    std::shared_ptr<Fetcher> fallback_;
};

// CSV-per-key cache with a checksum sidecar. Corrupt entries are evicted and
// refetched. Layout: <dir>/<key>.csv + <dir>/<key>.sum.
class ResultCache {
  public:
    explicit ResultCache(std::filesystem::path dir);

    static std::string key_for(const schema::FetchTask& task);

    // Returns nullopt on miss or corruption (corruption evicts the entry and
    // records a note).
    std::optional<TimeSeries> load(const schema::FetchTask& task, std::string* units,
                                   std::vector<std::string>* notes) const;
    void store(const FetchResult& result) const;

    const std::filesystem::path& dir() const { return dir_; }

  private:
    std::filesystem::path dir_;
};

struct BatchOptions {
    size_t parallelism = 8; // bounded in-flight fetches
};

struct BatchResult {
    std::vector<FetchResult> results; // one per task, plan order
    size_t cache_hits = 0;
    size_t failed = 0;
    std::vector<std::string> notes;
};

// Executes the plan: plain tasks go through their fetcher (cache first),
// derived tasks are computed from sibling results of the same field after
// all plain fetches complete. Failures degrade to FAILED all-missing results
// instead of aborting the batch.
BatchResult fetch_batch(const std::vector<schema::FetchTask>& plan,
                        const FetcherRegistry& registry, ResultCache* cache,
                        const BatchOptions& options = {});

// Applies a derivation rule to date-aligned named input series.
//   EVI:        2.5 * (NIR - RED) / (NIR + 6*RED - 7.5*BLUE + 1)
//   IRRIGATION: max(0, PEV - TP)
// A date with any missing input (or an EVI denominator below 1e-9 in
// magnitude) yields a missing output.
TimeSeries derive_variable(schema::Derivation rule,
                           const std::map<std::string, TimeSeries>& inputs);

// Reads <root>/<platform-sanitised>/<key_variable>/<field_id>.csv with
// date,value rows; rows outside the task window are dropped so the result
// invariant holds at the source. Missing file -> FAILED result.
std::shared_ptr<Fetcher> make_local_fixture_fetcher(const std::filesystem::path& root);

struct HttpFetcherOptions {
    std::string base_url; // template with {lat} {lon} {start} {end} {param}
    std::string auth_token;
    int attempts = 3;
    double base_delay_seconds = 1.0;
    double backoff_factor = 2.0;
    double max_requests_per_second = 0.0; // 0 = unlimited
};

std::shared_ptr<Fetcher> make_http_fetcher(const HttpFetcherOptions& options);

std::string sanitise_path_component(const std::string& text);

// Long-form acquisition artifact: one row per (task, date).
std::string batch_to_csv(const std::vector<FetchResult>& results);
std::vector<FetchResult> batch_from_csv(const std::string& text,
                                        const std::vector<schema::FetchTask>& plan);

} // namespace unicrop::acquire
