#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>

#include "textseam/gbt.hpp"
#include "textseam/ksvm.hpp"
#include "textseam/logreg.hpp"
#include "textseam/window_model.hpp"

namespace textseam {

// Model documents: {"format": "textseam-model", "version": 1, "kind": ..., "model": {...}}.
// Field lists are documented in docs/model_format.md.
inline constexpr std::string_view kModelFormat = "textseam-model";
inline constexpr int kModelFormatVersion = 1;

using ojson = nlohmann::ordered_json;

ojson to_json(const LogRegModel& model);
ojson to_json(const GbtModel& model);
ojson to_json(const KsvmModel& model);
ojson to_json(const GakSvmModel& model);
ojson to_json(const WindowBinaryModel& model);

LogRegModel logreg_from_json(const ojson& body);
GbtModel gbt_from_json(const ojson& body);
KsvmModel ksvm_from_json(const ojson& body);
GakSvmModel gak_svm_from_json(const ojson& body);
WindowBinaryModel window_model_from_json(const ojson& body);

// Wraps a model body with the format header.
ojson model_document(std::string_view kind, ojson body);

// Checks the header and returns the kind. Throws ValidationError for a foreign
// format or an unsupported version.
std::string check_model_document(const ojson& doc);

void write_model_file(const ojson& doc, const std::filesystem::path& path);
ojson read_model_file(const std::filesystem::path& path);

}  // namespace textseam
