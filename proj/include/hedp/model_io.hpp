// Reading and writing task models and knowledge profiles as JSON documents.
#pragma once

#include <stdexcept>
#include <string>

#include "hedp/model.hpp"
#include "json.hpp"

namespace hedp {

/// Raised when a document is not well-formed or is missing a field.
class DocumentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

TaskModel task_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const TaskModel& task);

KnowledgeProfile profile_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const KnowledgeProfile& kb);

/// Reads a whole file, or standard input when `path` is "-".
std::string read_text(const std::string& path);

TaskModel load_task(const std::string& path);
KnowledgeProfile load_profile(const std::string& path);

}  // namespace hedp
