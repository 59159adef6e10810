#include "ctxmine/errors.h"

namespace ctxmine {
namespace {

std::string with_doc(const std::string& doc_id, const std::string& where,
                     const std::string& message) {
  std::string out;
  if (!doc_id.empty()) out += "doc '" + doc_id + "': ";
  if (!where.empty()) out += where + ": ";
  return out + message;
}

}  // namespace

SchemaError::SchemaError(const std::string& doc_id, const std::string& path,
                         const std::string& message)
    : Error(with_doc(doc_id, path, message)), doc_id_(doc_id), path_(path) {}

RangeError::RangeError(const std::string& doc_id, const std::string& location,
                       const std::string& message)
    : Error(with_doc(doc_id, location, message)),
      doc_id_(doc_id),
      location_(location) {}

RuleSyntaxError::RuleSyntaxError(const std::string& rule_id,
                                 const std::string& field,
                                 const std::string& message)
    : Error("rule '" + rule_id + "', field '" + field + "': " + message),
      rule_id_(rule_id),
      field_(field) {}

DuplicateRuleError::DuplicateRuleError(const std::string& pack_id,
                                       const std::string& rule_id)
    : Error("pack '" + pack_id + "': duplicate rule_id '" + rule_id + "'"),
      rule_id_(rule_id) {}

UnknownExampleError::UnknownExampleError(const std::string& example_id)
    : Error("hypothesis refers to unknown example '" + example_id + "'"),
      example_id_(example_id) {}

CorpusError::CorpusError(std::size_t line, const std::string& message)
    : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

IoError::IoError(const std::string& path, const std::string& message)
    : Error(path + ": " + message), path_(path) {}

}  // namespace ctxmine
