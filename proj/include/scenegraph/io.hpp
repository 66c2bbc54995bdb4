#pragma once

#include <scenegraph/evalkit.hpp>
#include <scenegraph/pipeline.hpp>

#include <json.hpp>

#include <filesystem>
#include <string>

namespace scenegraph {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// Input that does not match a file schema. `pointer` is a JSON pointer to
/// the offending value.
class SchemaError : public Error {
 public:
  SchemaError(std::string pointer, const std::string& message)
      : Error(pointer + ": " + message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

/// Deterministic JSON text: floating-point numbers use 17 significant digits,
/// arrays of scalars are written on one line.
std::string dump_json(const Json& value);
/// Parses text; syntax errors become SchemaError at "" (document root).
Json parse_json(const std::string& text);

std::string read_text(const std::filesystem::path& path);
/// Writes atomically enough for CLI use; throws Error when the file cannot be written.
void write_text(const std::filesystem::path& path, const std::string& text);

Json layout_to_json(const Layout& layout);
Layout layout_from_json(const Json& json);
std::string serialize_layout(const Layout& layout);
Layout parse_layout(const std::string& text);

struct Checkpoint {
  EdgeClassifierModel model;
  TrainConfig train_config;
};

Json checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const Json& json);
std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(const std::string& text);

Json prediction_to_json(const Prediction& prediction);
Prediction prediction_from_json(const Json& json);

Json report_to_json(const DetectionReport& report);

}  // namespace scenegraph
