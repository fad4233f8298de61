#pragma once

#include <stdexcept>
#include <string>

namespace ambigen {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingGlyph : Error { using Error::Error; };
struct MalformedFont : Error { using Error::Error; };
struct UnsupportedSvgFeature : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct BackendFailure : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct TopologyMismatch : Error { using Error::Error; };
struct AppliedToAsymmetricTask : Error { using Error::Error; };
struct EmptyImage : Error { using Error::Error; };
struct NonFiniteGradient : Error { using Error::Error; };
struct MissingPair : Error { using Error::Error; };
struct MissingDesign : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct OcrFailure : Error { using Error::Error; };
struct NumericalFailure : Error { using Error::Error; };

} // namespace ambigen
