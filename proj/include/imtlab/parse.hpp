#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "imtlab/ast.hpp"

namespace imt {

struct ParseError : std::runtime_error {
  int line = 0;
  int column = 0;
  ParseError(const std::string& msg, int line, int column)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
        line(line),
        column(column) {}
};

struct Diagnostic {
  std::string message;
};

struct ValidationError : std::runtime_error {
  std::vector<Diagnostic> diagnostics;
  explicit ValidationError(std::vector<Diagnostic> diags);
};

// Syntax only; declaration discipline is checked by validate().
Program parse_program(const std::string& text);
TaskProgram parse_task_program(const std::string& text);

// Does the text start a task program ("ts { ... }")?
bool looks_like_task_program(const std::string& text);

// Declaration discipline, constant index bounds, and placement rules
// (no source-level reboot, toTask only in task programs, goto only with a
// matching label). All violations are collected.
std::vector<Diagnostic> validate(const Program& p);
std::vector<Diagnostic> validate(const TaskProgram& p);

// parse_program followed by validate; throws ValidationError on violations.
Program parse(const std::string& text);
TaskProgram parse_tasks(const std::string& text);

}  // namespace imt
