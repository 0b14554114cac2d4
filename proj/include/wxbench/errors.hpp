#pragma once

#include <stdexcept>
#include <string>

namespace wxbench {

// Base error carrying a stable machine-readable kind tag. The CLI prints
// "error: <kind>: <message>" on failure, so kind strings are part of the
// external interface and must not change casually.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define WXBENCH_DEFINE_ERROR(Name)                    \
  struct Name : Error {                               \
    explicit Name(const std::string& m = std::string()) \
        : Error(#Name, m) {}                          \
  }

// dataset ingestion
WXBENCH_DEFINE_ERROR(EmptyDataset);
WXBENCH_DEFINE_ERROR(MalformedTimestamp);
WXBENCH_DEFINE_ERROR(AllMissingColumn);
WXBENCH_DEFINE_ERROR(InvalidRatio);
WXBENCH_DEFINE_ERROR(TooFewSamples);

// feature engineering
WXBENCH_DEFINE_ERROR(LagOutOfRange);
WXBENCH_DEFINE_ERROR(NonPositiveLag);
WXBENCH_DEFINE_ERROR(WindowTooSmall);
WXBENCH_DEFINE_ERROR(InsufficientHistory);
WXBENCH_DEFINE_ERROR(EmptyMatrix);
WXBENCH_DEFINE_ERROR(TooFewRows);
WXBENCH_DEFINE_ERROR(EmptyInput);

// metrics
WXBENCH_DEFINE_ERROR(LengthMismatch);

// model core
WXBENCH_DEFINE_ERROR(EmptyGrid);
WXBENCH_DEFINE_ERROR(TargetCountMismatch);
WXBENCH_DEFINE_ERROR(EmptyData);
WXBENCH_DEFINE_ERROR(FeatureCountMismatch);
WXBENCH_DEFINE_ERROR(DimensionMismatch);
WXBENCH_DEFINE_ERROR(InvalidParams);

// neural nets / sequences
WXBENCH_DEFINE_ERROR(DivergedLoss);
WXBENCH_DEFINE_ERROR(ShapeMismatch);
WXBENCH_DEFINE_ERROR(KernelTooLarge);
WXBENCH_DEFINE_ERROR(SeriesTooShort);

// persistence / CLI
WXBENCH_DEFINE_ERROR(VersionMismatch);
WXBENCH_DEFINE_ERROR(MissingRunOutput);
WXBENCH_DEFINE_ERROR(IoError);
WXBENCH_DEFINE_ERROR(ConfigError);

#undef WXBENCH_DEFINE_ERROR

}  // namespace wxbench
