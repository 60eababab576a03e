#pragma once

#include <stdexcept>
#include <string>

namespace unicrop {

// Error codes for every failure mode the pipeline can surface. Recoverable
// conditions (cache corruption, imputer fallbacks, per-task fetch failures)
// are handled in place and logged instead of thrown.
enum class Errc {
    missing_header,
    duplicate_key_variable,
    unknown_family,
    empty_after_cleaning,
    empty_plan,
    no_fetcher_for_platform,
    cache_corruption,
    missing_input_series,
    misaligned_dates,
    http_status,
    parse_payload,
    unknown_field_id,
    column_name_collision,
    spec_missing_for_column,
    too_few_samples,
    empty_pool,
    too_few_columns,
    no_usable_neighbours,
    non_finite_input,
    non_convergence,
    schema_mismatch,
    length_mismatch,
    degenerate_target,
    no_models,
    too_many_features_for_exact,
    too_few_rows,
    empty_window,
    io_error,
    config_error,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

  private:
    Errc code_;
};

} // namespace unicrop
