#pragma once

#include <optional>
#include <string>

#include "unicrop/acquire.hpp"

namespace unicrop::acquire {

// date,value payload shared by fixture files, the cache and the HTTP CSV
// body. A leading "date,value" header row is optional on input but always
// written on output.
std::string series_to_csv(const TimeSeries& series);

struct SeriesParse {
    bool ok = false;
    std::string error;
    TimeSeries series;
};

SeriesParse series_from_csv(const std::string& text);

// Wall-clock UTC timestamp for FetchResult metadata.
std::string now_iso();

} // namespace unicrop::acquire
