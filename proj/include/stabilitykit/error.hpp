#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stabilitykit {

// Base of every error the library throws. The CLI maps subclasses onto exit
// codes, so each subclass stands for one recoverable failure kind.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unreadable input (files, CSV rows, headers).
class ParseError : public Error {
 public:
  using Error::Error;
};

class TruncatedError : public ParseError {
 public:
  TruncatedError(const std::string& what, std::size_t frame_index)
      : ParseError(what), frame_index_(frame_index) {}
  std::size_t frame_index() const noexcept { return frame_index_; }

 private:
  std::size_t frame_index_;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Invalid parameter combination (bad sizes, bad intervals, unknown keys).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class InsufficientFrames : public Error {
 public:
  InsufficientFrames(const std::string& what, std::size_t required)
      : Error(what), required_(required) {}
  std::size_t required() const noexcept { return required_; }

 private:
  std::size_t required_;
};

// Content-level failures of motion estimation.
class DegenerateScene : public Error {
 public:
  using Error::Error;
};

class TrackingFailure : public DegenerateScene {
 public:
  using DegenerateScene::DegenerateScene;
};

class UnderDetermined : public DegenerateScene {
 public:
  using DegenerateScene::DegenerateScene;
};

class MarginError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Statistics over data that cannot support them.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class DegenerateBatch : public DegenerateInput {
 public:
  using DegenerateInput::DegenerateInput;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class InsufficientRatings : public InsufficientData {
 public:
  using InsufficientData::InsufficientData;
};

class EmptyAfterCleaning : public InsufficientData {
 public:
  using InsufficientData::InsufficientData;
};

}  // namespace stabilitykit
