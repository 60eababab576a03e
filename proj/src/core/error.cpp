#include "unicrop/core/error.hpp"

namespace unicrop {

const char* errc_name(Errc code) {
    switch (code) {
    case Errc::missing_header: return "MissingHeader";
    case Errc::duplicate_key_variable: return "DuplicateKeyVariable";
    case Errc::unknown_family: return "UnknownFamily";
    case Errc::empty_after_cleaning: return "EmptyAfterCleaning";
    case Errc::empty_plan: return "EmptyPlan";
    case Errc::no_fetcher_for_platform: return "NoFetcherForPlatform";
    case Errc::cache_corruption: return "CacheCorruption";
    case Errc::missing_input_series: return "MissingInputSeries";
    case Errc::misaligned_dates: return "MisalignedDates";
    case Errc::http_status: return "HttpStatusError";
    case Errc::parse_payload: return "ParsePayloadError";
    case Errc::unknown_field_id: return "UnknownFieldId";
    case Errc::column_name_collision: return "ColumnNameCollision";
    case Errc::spec_missing_for_column: return "SpecMissingForColumn";
    case Errc::too_few_samples: return "TooFewSamples";
    case Errc::empty_pool: return "EmptyPool";
    case Errc::too_few_columns: return "TooFewColumns";
    case Errc::no_usable_neighbours: return "NoUsableNeighbours";
    case Errc::non_finite_input: return "NonFiniteInput";
    case Errc::non_convergence: return "NonConvergence";
    case Errc::schema_mismatch: return "SchemaMismatch";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::degenerate_target: return "DegenerateTarget";
    case Errc::no_models: return "NoModels";
    case Errc::too_many_features_for_exact: return "TooManyFeaturesForExact";
    case Errc::too_few_rows: return "TooFewRows";
    case Errc::empty_window: return "EmptyWindow";
    case Errc::io_error: return "IoError";
    case Errc::config_error: return "ConfigError";
    }
    return "UnknownError";
}

} // namespace unicrop
