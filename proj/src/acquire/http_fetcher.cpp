#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#define CPPHTTPLIB_NO_EXCEPTIONS
#include <httplib.h>
#include <json.hpp>

#include "internal.hpp"
#include "unicrop/acquire.hpp"
#include "unicrop/core/error.hpp"

namespace unicrop::acquire {

namespace {

void replace_all(std::string& text, const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
}

std::string url_encode(const std::string& text) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : text) {
        const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                          (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.' || c == '~';
        if (safe) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xF]);
        }
    }
    return out;
}

struct SplitUrl {
    std::string host_port; // scheme://host:port
    std::string path_query;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(Errc::config_error, "base_url must start with http:// or https://");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

TimeSeries parse_json_payload(const std::string& body) {
    const auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) {
        throw Error(Errc::parse_payload, "payload is neither date,value CSV nor a JSON array");
    }
    TimeSeries series;
    for (const auto& entry : doc) {
        std::string date_text;
        nlohmann::json value;
        if (entry.is_array() && entry.size() >= 2) {
            date_text = entry[0].get<std::string>();
            value = entry[1];
        } else if (entry.is_object() && entry.contains("date") && entry.contains("value")) {
            date_text = entry["date"].get<std::string>();
            value = entry["value"];
        } else {
            throw Error(Errc::parse_payload, "JSON entry lacks date/value");
        }
        const auto date = Date::parse(date_text);
        if (!date) throw Error(Errc::parse_payload, "bad JSON date '" + date_text + "'");
        Cell cell;
        if (value.is_number()) cell = value.get<double>();
        else if (!value.is_null()) throw Error(Errc::parse_payload, "non-numeric JSON value");
        series.push_back({*date, cell});
    }
    return series;
}

class HttpFetcher final : public Fetcher {
  public:
    explicit HttpFetcher(HttpFetcherOptions options)
        : options_(std::move(options)), name_("http") {
        for (const char* placeholder : {"{lat}", "{lon}", "{start}", "{end}", "{param}"}) {
            if (options_.base_url.find(placeholder) == std::string::npos) {
                throw Error(Errc::config_error,
                            std::string("base_url template lacks placeholder ") + placeholder);
            }
        }
    }

    const std::string& name() const override { return name_; }

    FetchResult fetch(const schema::FetchTask& task) override {
        FetchResult result;
        result.task = task;
        result.source_tag = name_;
        result.retrieved_at = now_iso();

        std::string url = options_.base_url;
        replace_all(url, "{lat}", format_value(task.lat));
        replace_all(url, "{lon}", format_value(task.lon));
        replace_all(url, "{start}", task.window_start.to_iso());
        replace_all(url, "{end}", task.window_end.to_iso());
        replace_all(url, "{param}", url_encode(task.api_parameter));
        const SplitUrl split = split_url(url);

        std::string body;
        int status = 0;
        std::string last_error;
        for (int attempt = 0; attempt < options_.attempts; ++attempt) {
            if (attempt > 0) {
                const double delay = options_.base_delay_seconds *
                                     std::pow(options_.backoff_factor, attempt - 1);
                std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            }
            throttle();
            httplib::Client client(split.host_port);
            client.set_connection_timeout(10, 0);
            client.set_read_timeout(30, 0);
            httplib::Headers headers;
            if (!options_.auth_token.empty()) {
                headers.emplace("Authorization", "Bearer " + options_.auth_token);
            }
            auto response = client.Get(split.path_query, headers);
            if (!response) {
                last_error = "connection error: " + httplib::to_string(response.error());
                continue;
            }
            status = response->status;
            if (status == 200) {
                body = response->body;
                break;
            }
            last_error = "HTTP status " + std::to_string(status);
            if (status != 429 && status < 500) break; // not retryable
        }
        if (status != 200) {
            throw Error(Errc::http_status, last_error.empty() ? "no response" : last_error);
        }

        TimeSeries series;
        const auto first = body.find_first_not_of(" \t\r\n");
        if (first != std::string::npos && (body[first] == '[' || body[first] == '{')) {
            series = parse_json_payload(body);
        } else {
            auto parsed = series_from_csv(body);
            if (!parsed.ok) throw Error(Errc::parse_payload, parsed.error);
            series = std::move(parsed.series);
        }
        for (auto& point : series) {
            if (point.date < task.window_start || task.window_end < point.date) continue;
            result.values.push_back(point);
        }
        result.units = "remote";
        return result;
    }

  private:
    void throttle() {
        if (options_.max_requests_per_second <= 0.0) return;
        const auto min_interval =
            std::chrono::duration<double>(1.0 / options_.max_requests_per_second);
        std::unique_lock<std::mutex> lock(throttle_mutex_);
        const auto now = std::chrono::steady_clock::now();
        const auto earliest = last_request_ + min_interval;
        if (now < earliest) {
            const auto wait = earliest - now;
            lock.unlock();
            std::this_thread::sleep_for(wait);
            lock.lock();
        }
        last_request_ = std::chrono::steady_clock::now();
    }

    HttpFetcherOptions options_;
    std::string name_;
    std::mutex throttle_mutex_;
    std::chrono::steady_clock::time_point last_request_{};
};

} // namespace

std::shared_ptr<Fetcher> make_http_fetcher(const HttpFetcherOptions& options) {
    return std::make_shared<HttpFetcher>(options);
}

} // namespace unicrop::acquire
