#include "parkseg/error.hpp"

namespace parkseg {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidPalette: return "InvalidPalette";
    case ErrorKind::MalformedImage: return "MalformedImage";
    case ErrorKind::UnknownColor: return "UnknownColor";
    case ErrorKind::AmbiguousColor: return "AmbiguousColor";
    case ErrorKind::UnknownClassId: return "UnknownClassId";
    case ErrorKind::UnknownClass: return "UnknownClass";
    case ErrorKind::UnknownComponentId: return "UnknownComponentId";
    case ErrorKind::EvenKernel: return "EvenKernel";
    case ErrorKind::MissingRole: return "MissingRole";
    case ErrorKind::MissingParkedTarget: return "MissingParkedTarget";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::BadDistribution: return "BadDistribution";
    case ErrorKind::AllUndefined: return "AllUndefined";
    case ErrorKind::BadScale: return "BadScale";
    case ErrorKind::BadFactor: return "BadFactor";
    case ErrorKind::OutOfBounds: return "OutOfBounds";
    case ErrorKind::OverlappingCars: return "OverlappingCars";
    case ErrorKind::InvalidScene: return "InvalidScene";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace parkseg
