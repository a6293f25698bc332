#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crnhj/network.hpp"
#include "json.hpp"

namespace crnhj::cli {

/// u0 on the plane or w0 on a chord: linear, constant, or sine.
struct FunctionSpec {
  std::string type = "linear";
  std::vector<double> coeffs;
  double offset = 0.0;
  double amplitude = 1.0;
  double wavenumber = 1.0;
  double phase = 0.0;

  double operator()(const Vec& x) const;
  double operator()(double alpha) const { return (*this)(Vec{alpha}); }
};

struct DomainSpec {
  std::string shape = "ball";
  Vec center;
  double radius = 0.0;
  std::vector<std::array<double, 2>> vertices;
  Vec lower;
  Vec upper;

  Domain build() const;
};

struct RunConfig {
  std::optional<double> h;
  std::vector<double> h_ladder;
  double t = 1.0;
  std::optional<double> dt;
  Vec x0;
  FunctionSpec u0;
  std::optional<FunctionSpec> w0;
  std::optional<std::uint64_t> seed;
  std::size_t samples = 100000;
  std::size_t n_alpha = 401;
  std::size_t n_v = 161;
  std::size_t n_t = 100;
  double eps = 0.3;
  double beta = 0.0;
  double r = 0.0;
  double alpha = 0.0;
  std::vector<double> times;
};

struct ExperimentConfig {
  std::vector<std::string> species;
  ReactionNetwork network;
  DomainSpec domain;
  RunConfig run;
};

struct FieldError {
  std::string field;
  std::string message;
};

/// Carries every validation problem, not just the first one.
class ConfigError : public Error {
 public:
  ConfigError(ErrorKind kind, const std::string& what, std::vector<FieldError> fields)
      : Error(kind, what), fields_(std::move(fields)) {}
  const std::vector<FieldError>& fields() const { return fields_; }

 private:
  std::vector<FieldError> fields_;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& cfg);
std::string default_config_text();

/// FNV-1a of the canonical JSON form plus the effective seed, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace crnhj::cli
