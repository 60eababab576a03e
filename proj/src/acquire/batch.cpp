#include <algorithm>
#include <atomic>
#include <cctype>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "internal.hpp"
#include "unicrop/acquire.hpp"
#include "unicrop/core/csv.hpp"
#include "unicrop/core/error.hpp"

namespace unicrop::acquire {

namespace {

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

std::vector<std::string> derivation_inputs(schema::Derivation rule) {
    switch (rule) {
    case schema::Derivation::evi: return {"NIR", "RED", "BLUE"};
    case schema::Derivation::irrigation: return {"PEV", "TP"};
    default: return {};
    }
}

// Union of input dates, each series padded with missing on dates it lacks,
// so the strict aligned-derivation contract applies.
std::map<std::string, TimeSeries> align_on_date_union(
    const std::map<std::string, const TimeSeries*>& inputs) {
    std::vector<Date> dates;
    for (const auto& [name, series] : inputs) {
        for (const auto& point : *series) dates.push_back(point.date);
    }
    std::sort(dates.begin(), dates.end());
    dates.erase(std::unique(dates.begin(), dates.end()), dates.end());

    std::map<std::string, TimeSeries> aligned;
    for (const auto& [name, series] : inputs) {
        std::map<Date, Cell> by_date;
        for (const auto& point : *series) by_date[point.date] = point.value;
        TimeSeries padded;
        padded.reserve(dates.size());
        for (const Date& date : dates) {
            const auto it = by_date.find(date);
            padded.push_back({date, it == by_date.end() ? Cell{} : it->second});
        }
        aligned.emplace(name, std::move(padded));
    }
    return aligned;
}

FetchResult failed_result(const schema::FetchTask& task, const std::string& reason) {
    FetchResult result;
    result.task = task;
    result.status = FetchStatus::failed;
    result.failure_reason = reason;
    result.retrieved_at = now_iso();
    result.source_tag = "none";
    return result;
}

} // namespace

void FetcherRegistry::add(std::shared_ptr<Fetcher> fetcher,
                          const std::vector<std::string>& platforms) {
    for (const auto& platform : platforms) {
        if (!explicit_.emplace(platform, fetcher).second) {
            throw Error(Errc::no_fetcher_for_platform,
                        "platform '" + platform + "' claimed by more than one fetcher");
        }
    }
}

void FetcherRegistry::add_fallback(std::shared_ptr<Fetcher> fetcher) {
    if (fallback_) {
        throw Error(Errc::no_fetcher_for_platform, "a fallback fetcher is already registered");
    }
    fallback_ = std::move(fetcher);
}

Fetcher& FetcherRegistry::resolve(const std::string& platform) const {
    if (const auto it = explicit_.find(platform); it != explicit_.end()) return *it->second;
    if (fallback_) return *fallback_;
    throw Error(Errc::no_fetcher_for_platform, "no fetcher claims platform '" + platform + "'");
}

BatchResult fetch_batch(const std::vector<schema::FetchTask>& plan,
                        const FetcherRegistry& registry, ResultCache* cache,
                        const BatchOptions& options) {
    BatchResult batch;
    batch.results.resize(plan.size());

    std::vector<size_t> plain_indices;
    std::vector<size_t> derived_indices;
    for (size_t i = 0; i < plan.size(); ++i) {
        if (plan[i].derivation == schema::Derivation::none) {
            registry.resolve(plan[i].platform); // pre-check: claimed by exactly one
            plain_indices.push_back(i);
        } else {
            derived_indices.push_back(i);
        }
    }

    std::mutex notes_mutex;
    std::atomic<size_t> cache_hits{0};
    std::atomic<size_t> next{0};

    auto worker = [&] {
        for (;;) {
            const size_t slot = next.fetch_add(1);
            if (slot >= plain_indices.size()) return;
            const size_t index = plain_indices[slot];
            const schema::FetchTask& task = plan[index];

            if (cache) {
                std::string units;
                std::vector<std::string> cache_notes;
                auto hit = cache->load(task, &units, &cache_notes);
                if (!cache_notes.empty()) {
                    std::lock_guard<std::mutex> lock(notes_mutex);
                    batch.notes.insert(batch.notes.end(), cache_notes.begin(), cache_notes.end());
                }
                if (hit.has_value()) {
                    FetchResult result;
                    result.task = task;
                    result.values = std::move(*hit);
                    result.units = units;
                    result.source_tag = "cache";
                    result.retrieved_at = now_iso();
                    batch.results[index] = std::move(result);
                    cache_hits.fetch_add(1);
                    continue;
                }
            }

            FetchResult result;
            try {
                result = registry.resolve(task.platform).fetch(task);
            } catch (const std::exception& e) {
                result = failed_result(task, e.what());
            }
            if (result.status == FetchStatus::ok && cache) cache->store(result);
            batch.results[index] = std::move(result);
        }
    };

    const size_t workers = std::max<size_t>(1, std::min(options.parallelism, plain_indices.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& thread : pool) thread.join();
    }
    batch.cache_hits = cache_hits.load();

    // Derived variables are computed per field from sibling plain results.
    std::map<std::string, std::map<std::string, const FetchResult*>> by_field;
    for (size_t i : plain_indices) {
        const FetchResult& result = batch.results[i];
        by_field[result.task.field_id][upper(result.task.key_variable)] = &result;
    }

    for (size_t index : derived_indices) {
        const schema::FetchTask& task = plan[index];
        const auto needed = derivation_inputs(task.derivation);
        if (needed.empty()) {
            batch.results[index] = failed_result(
                task, std::string("MissingInputSeries: unsupported derivation rule ") +
                          schema::derivation_name(task.derivation));
            continue;
        }
        std::map<std::string, const TimeSeries*> inputs;
        std::string missing;
        const auto& siblings = by_field[task.field_id];
        for (const auto& name : needed) {
            const auto it = siblings.find(name);
            if (it == siblings.end() || it->second->status != FetchStatus::ok) {
                missing = name;
                break;
            }
            inputs.emplace(name, &it->second->values);
        }
        if (!missing.empty()) {
            batch.results[index] = failed_result(
                task, "MissingInputSeries: input '" + missing + "' unavailable for field " +
                          task.field_id);
            continue;
        }
        try {
            auto aligned = align_on_date_union(inputs);
            FetchResult result;
            result.task = task;
            result.values = derive_variable(task.derivation, aligned);
            result.units = task.derivation == schema::Derivation::evi
                               ? "unitless"
                               : siblings.at(needed.front())->units;
            result.source_tag = "derived";
            result.retrieved_at = now_iso();
            batch.results[index] = std::move(result);
        } catch (const std::exception& e) {
            batch.results[index] = failed_result(task, e.what());
        }
    }

    for (const auto& result : batch.results) {
        if (result.status == FetchStatus::failed) {
            ++batch.failed;
            batch.notes.push_back("FAILED " + result.task.field_id + "/" +
                                  result.task.key_variable + ": " + result.failure_reason);
        }
    }
    std::sort(batch.notes.begin(), batch.notes.end());
    return batch;
}

std::string batch_to_csv(const std::vector<FetchResult>& results) {
    std::ostringstream out;
    csv::write_row(out, {"field_id", "key_variable", "status", "units", "date", "value"});
    for (const auto& result : results) {
        const std::string status = result.status == FetchStatus::ok ? "OK" : "FAILED";
        if (result.values.empty()) {
            csv::write_row(out, {result.task.field_id, result.task.key_variable, status,
                                 result.units, "", ""});
            continue;
        }
        for (const auto& point : result.values) {
            csv::write_row(out, {result.task.field_id, result.task.key_variable, status,
                                 result.units, point.date.to_iso(), format_cell(point.value)});
        }
    }
    return out.str();
}

std::vector<FetchResult> batch_from_csv(const std::string& text,
                                        const std::vector<schema::FetchTask>& plan) {
    const csv::File file = csv::File::from_string(text);
    const size_t col_field = file.required_column("field_id");
    const size_t col_variable = file.required_column("key_variable");
    const size_t col_status = file.required_column("status");
    const size_t col_units = file.required_column("units");
    const size_t col_date = file.required_column("date");
    const size_t col_value = file.required_column("value");

    std::map<std::pair<std::string, std::string>, size_t> slots;
    std::vector<FetchResult> results(plan.size());
    for (size_t i = 0; i < plan.size(); ++i) {
        results[i] = failed_result(plan[i], "absent from acquisition artifact");
        slots[{plan[i].field_id, plan[i].key_variable}] = i;
    }

    for (const auto& row : file.rows()) {
        const auto key = std::make_pair(csv::File::cell(row, col_field),
                                        csv::File::cell(row, col_variable));
        const auto it = slots.find(key);
        if (it == slots.end()) {
            throw Error(Errc::unknown_field_id,
                        "artifact row references unknown task " + key.first + "/" + key.second);
        }
        FetchResult& result = results[it->second];
        result.status = csv::File::cell(row, col_status) == "OK" ? FetchStatus::ok
                                                                 : FetchStatus::failed;
        if (result.status == FetchStatus::ok) result.failure_reason.clear();
        result.units = csv::File::cell(row, col_units);
        result.source_tag = "artifact";
        const std::string date_text = csv::File::cell(row, col_date);
        if (date_text.empty()) continue;
        const auto date = Date::parse(date_text);
        if (!date) throw Error(Errc::parse_payload, "bad date in artifact: " + date_text);
        const auto cell = parse_cell(csv::File::cell(row, col_value));
        if (!cell.ok) {
            throw Error(Errc::parse_payload,
                        "bad value in artifact: " + csv::File::cell(row, col_value));
        }
        result.values.push_back({*date, cell.value});
    }
    return results;
}

} // namespace unicrop::acquire
