#include "unicrop/schema_config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "unicrop/core/csv.hpp"
#include "unicrop/core/error.hpp"

namespace unicrop::schema {

namespace {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    size_t begin = 0;
    size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

// Source-dataset to family table used when no explicit family column is
// present. Matching is case-insensitive on substrings of the source name.
std::optional<Family> infer_family(const std::string& source_dataset) {
    const std::string s = to_lower(source_dataset);
    auto contains = [&](const char* token) { return s.find(token) != std::string::npos; };
    if (contains("sentinel-2") || contains("sentinel 2") || contains("mod13") || contains("mod15")) {
        return Family::vegetation;
    }
    if (contains("sentinel-1") || contains("sentinel 1")) {
        return Family::sar;
    }
    if (contains("era5-land") || contains("era5") || contains("nasa power") || contains("mod16")) {
        return Family::meteorology;
    }
    if (contains("soilgrids")) {
        return Family::soil;
    }
    if (contains("srtm")) {
        return Family::topography;
    }
    return std::nullopt;
}

Derivation infer_derivation(const std::string& notes, std::string& custom_id) {
    if (notes.find("EVI =") != std::string::npos) return Derivation::evi;
    if (notes.find("Irrigation = max") != std::string::npos) return Derivation::irrigation;
    const std::string kCustomPrefix = "CUSTOM:";
    if (auto pos = notes.find(kCustomPrefix); pos != std::string::npos) {
        custom_id = trim(notes.substr(pos + kCustomPrefix.size()));
        return Derivation::custom;
    }
    return Derivation::none;
}

std::vector<FeatureSpec> parse_feature_mapping_file(const csv::File& file) {
    const size_t col_key = file.required_column("key_variable");
    const size_t col_api = file.required_column("api_parameter");
    const size_t col_source = file.required_column("source_dataset");
    const size_t col_platform = file.required_column("platform");
    const size_t col_notes = file.required_column("notes");
    const auto col_family = file.column_index("family");

    std::vector<FeatureSpec> specs;
    std::unordered_set<std::string> seen;
    for (const auto& row : file.rows()) {
        FeatureSpec spec;
        spec.key_variable = trim(csv::File::cell(row, col_key));
        spec.api_parameter = trim(csv::File::cell(row, col_api));
        spec.source_dataset = trim(csv::File::cell(row, col_source));
        spec.platform = trim(csv::File::cell(row, col_platform));
        spec.notes = trim(csv::File::cell(row, col_notes));
        if (spec.key_variable.empty()) {
            throw Error(Errc::missing_header, "row with empty key_variable");
        }
        if (!seen.insert(spec.key_variable).second) {
            throw Error(Errc::duplicate_key_variable,
                        "key_variable '" + spec.key_variable + "' appears more than once");
        }
        spec.derivation = infer_derivation(spec.notes, spec.custom_id);
        if (spec.derivation == Derivation::none && spec.api_parameter.empty()) {
            throw Error(Errc::missing_header,
                        "api_parameter empty for non-derived variable '" + spec.key_variable + "'");
        }

        std::optional<Family> family;
        if (col_family.has_value()) {
            const std::string text = trim(csv::File::cell(row, *col_family));
            if (!text.empty()) {
                family = family_from_name(text);
                if (!family.has_value()) {
                    throw Error(Errc::unknown_family,
                                "family '" + text + "' for '" + spec.key_variable + "'");
                }
            }
        }
        if (!family.has_value()) family = infer_family(spec.source_dataset);
        if (!family.has_value()) {
            throw Error(Errc::unknown_family,
                        "source '" + spec.source_dataset + "' is not in the family table and no "
                        "family column value was given (variable '" + spec.key_variable + "')");
        }
        spec.family = *family;
        specs.push_back(std::move(spec));
    }
    return specs;
}

FieldParseReport parse_fields_file(const csv::File& file) {
    const size_t col_id = file.required_column("field_id");
    const size_t col_lat = file.required_column("lat");
    const size_t col_lon = file.required_column("lon");
    const size_t col_start = file.required_column("window_start");
    const size_t col_end = file.required_column("window_end");
    const auto col_yield = file.column_index("yield_kg_ha");
    const auto col_district = file.column_index("district");
    const auto col_season = file.column_index("season");

    FieldParseReport report;
    std::unordered_set<std::string> seen_ids;
    for (const auto& row : file.rows()) {
        FieldRecord record;
        record.field_id = trim(csv::File::cell(row, col_id));
        if (record.field_id.empty()) {
            ++report.dropped[DropReason::missing_field_id];
            continue;
        }

        const auto lat = parse_double(trim(csv::File::cell(row, col_lat)));
        const auto lon = parse_double(trim(csv::File::cell(row, col_lon)));
        if (!lat || !lon || !std::isfinite(*lat) || !std::isfinite(*lon) ||
            *lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0) {
            ++report.dropped[DropReason::invalid_coordinate];
            continue;
        }
        record.lat = round6(*lat);
        record.lon = round6(*lon);

        const auto start = Date::parse(trim(csv::File::cell(row, col_start)));
        const auto end = Date::parse(trim(csv::File::cell(row, col_end)));
        if (!start || !end) {
            ++report.dropped[DropReason::invalid_date];
            continue;
        }
        if (*end < *start) {
            ++report.dropped[DropReason::invalid_window];
            continue;
        }
        record.window_start = *start;
        record.window_end = *end;

        if (col_yield.has_value()) {
            const std::string text = trim(csv::File::cell(row, *col_yield));
            const auto parsed = parse_cell(text);
            if (!parsed.ok) {
                ++report.dropped[DropReason::invalid_yield];
                continue;
            }
            if (parsed.value.has_value() && *parsed.value < 0.0) {
                ++report.dropped[DropReason::invalid_yield];
                continue;
            }
            record.yield_kg_ha = parsed.value;
        }
        if (col_district.has_value()) record.district = trim(csv::File::cell(row, *col_district));
        if (col_season.has_value()) record.season = trim(csv::File::cell(row, *col_season));

        if (!seen_ids.insert(record.field_id).second) {
            ++report.dropped[DropReason::duplicate_field_id];
            report.warnings.push_back("duplicate field_id '" + record.field_id +
                                      "' dropped, first occurrence kept");
            continue;
        }
        report.records.push_back(std::move(record));
    }
    if (report.records.empty()) {
        throw Error(Errc::empty_after_cleaning, "no valid field rows survive cleaning");
    }
    return report;
}

} // namespace

const char* derivation_name(Derivation derivation) {
    switch (derivation) {
    case Derivation::none: return "NONE";
    case Derivation::evi: return "EVI";
    case Derivation::irrigation: return "IRRIGATION";
    case Derivation::custom: return "CUSTOM";
    }
    return "NONE";
}

const char* drop_reason_name(DropReason reason) {
    switch (reason) {
    case DropReason::invalid_coordinate: return "INVALID_COORDINATE";
    case DropReason::invalid_date: return "INVALID_DATE";
    case DropReason::invalid_window: return "INVALID_WINDOW";
    case DropReason::invalid_yield: return "INVALID_YIELD";
    case DropReason::duplicate_field_id: return "DUPLICATE_FIELD_ID";
    case DropReason::missing_field_id: return "MISSING_FIELD_ID";
    }
    return "UNKNOWN";
}

std::vector<FeatureSpec> parse_feature_mapping(const std::filesystem::path& path) {
    return parse_feature_mapping_file(csv::File::read(path));
}

std::vector<FeatureSpec> parse_feature_mapping_text(const std::string& text) {
    return parse_feature_mapping_file(csv::File::from_string(text));
}

FieldParseReport parse_fields(const std::filesystem::path& path) {
    return parse_fields_file(csv::File::read(path));
}

FieldParseReport parse_fields_text(const std::string& text) {
    return parse_fields_file(csv::File::from_string(text));
}

std::vector<FetchTask> build_fetch_plan(const std::vector<FieldRecord>& fields,
                                        const std::vector<FeatureSpec>& specs) {
    if (fields.empty() || specs.empty()) {
        throw Error(Errc::empty_plan, "fetch plan needs non-empty fields and specs");
    }
    std::vector<FetchTask> plan;
    plan.reserve(fields.size() * specs.size());
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& field : fields) {
        for (const auto& spec : specs) {
            if (!seen.emplace(field.field_id, spec.key_variable).second) continue;
            FetchTask task;
            task.field_id = field.field_id;
            task.key_variable = spec.key_variable;
            task.source_dataset = spec.source_dataset;
            task.platform = spec.platform;
            task.api_parameter = spec.api_parameter;
            task.derivation = spec.derivation;
            task.family = spec.family;
            task.window_start = field.window_start;
            task.window_end = field.window_end;
            task.lat = field.lat;
            task.lon = field.lon;
            plan.push_back(std::move(task));
        }
    }
    std::sort(plan.begin(), plan.end(), [](const FetchTask& a, const FetchTask& b) {
        if (a.field_id != b.field_id) return a.field_id < b.field_id;
        return a.key_variable < b.key_variable;
    });
    return plan;
}

std::string fetch_plan_to_csv(const std::vector<FetchTask>& plan) {
    std::ostringstream out;
    csv::write_row(out, {"field_id", "key_variable", "source_dataset", "platform",
                         "api_parameter", "derivation", "family", "window_start",
                         "window_end", "lat", "lon"});
    for (const auto& task : plan) {
        csv::write_row(out, {task.field_id, task.key_variable, task.source_dataset,
                             task.platform, task.api_parameter, derivation_name(task.derivation),
                             family_name(task.family), task.window_start.to_iso(),
                             task.window_end.to_iso(), format_value(task.lat),
                             format_value(task.lon)});
    }
    return out.str();
}

void write_fetch_plan(const std::filesystem::path& path, const std::vector<FetchTask>& plan) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out << fetch_plan_to_csv(plan);
}

std::string feature_mapping_to_csv(const std::vector<FeatureSpec>& specs) {
    std::ostringstream out;
    csv::write_row(out, {"key_variable", "api_parameter", "source_dataset", "platform",
                         "notes", "family"});
    for (const auto& spec : specs) {
        csv::write_row(out, {spec.key_variable, spec.api_parameter, spec.source_dataset,
                             spec.platform, spec.notes, family_name(spec.family)});
    }
    return out.str();
}

} // namespace unicrop::schema
