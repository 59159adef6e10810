// Exception hierarchy shared by every ctxmine module.
#ifndef CTXMINE_ERRORS_H_
#define CTXMINE_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ctxmine {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A record is missing a field or a field has the wrong type. `path` is a
// JSON-pointer-like location inside the record.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& doc_id, const std::string& path,
              const std::string& message);

  const std::string& doc_id() const { return doc_id_; }
  const std::string& path() const { return path_; }

 private:
  std::string doc_id_;
  std::string path_;
};

// An index points outside the structure it refers to.
class RangeError : public Error {
 public:
  RangeError(const std::string& doc_id, const std::string& location,
             const std::string& message);

  const std::string& doc_id() const { return doc_id_; }
  const std::string& location() const { return location_; }

 private:
  std::string doc_id_;
  std::string location_;
};

class RuleSyntaxError : public Error {
 public:
  RuleSyntaxError(const std::string& rule_id, const std::string& field,
                  const std::string& message);

  const std::string& rule_id() const { return rule_id_; }
  const std::string& field() const { return field_; }

 private:
  std::string rule_id_;
  std::string field_;
};

class DuplicateRuleError : public Error {
 public:
  DuplicateRuleError(const std::string& pack_id, const std::string& rule_id);

  const std::string& rule_id() const { return rule_id_; }

 private:
  std::string rule_id_;
};

class LanguageMismatchError : public Error {
 public:
  using Error::Error;
};

class UnknownExampleError : public Error {
 public:
  explicit UnknownExampleError(const std::string& example_id);

  const std::string& example_id() const { return example_id_; }

 private:
  std::string example_id_;
};

// Wraps a per-record failure with the 1-based line number of a JSONL stream.
class CorpusError : public Error {
 public:
  CorpusError(std::size_t line, const std::string& message);

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& message);

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace ctxmine

#endif  // CTXMINE_ERRORS_H_
