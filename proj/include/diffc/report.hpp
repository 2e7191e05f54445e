#pragma once

#include <optional>
#include <string>

#include "diffc/harness.hpp"

namespace diffc {

enum class ReportFormat { csv, json, markdown };

std::optional<ReportFormat> parse_report_format(std::string_view name) noexcept;

inline constexpr const char* kCsvHeader =
    "dataset,corruption,severity,mode,model,sampler,steps,fid_corrupted_ref,fid_clean_ref,max_score,"
    "train_loss_final,seconds,seed";

/// Failed rows keep their key columns and leave the numeric ones empty.
std::string render_csv(const SuiteResult& r);
/// Inverse of render_csv (rows only; metadata is not part of the CSV).
SuiteResult parse_csv(const std::string& text);

std::string render_json(const SuiteResult& r);

/// max_score pivoted into one column per corruption kind, ordered and
/// labelled by group (Clear, Noise, Blur, Weather, Extra).
std::string render_markdown(const SuiteResult& r);

std::string render_report(const SuiteResult& r, ReportFormat format);
void emit_report(const SuiteResult& r, ReportFormat format, const std::string& path);

/// Severity curves: one path per series with ≥2 severities, x = severity
/// 1..5, y = max_score. A series is (dataset, corruption, mode, model,
/// sampler); pass `corruption` to keep only that kind.
std::string render_severity_chart(const SuiteResult& r, const std::string& corruption = {});
void emit_severity_chart(const SuiteResult& r, const std::string& path, const std::string& corruption = {});

}  // namespace diffc
