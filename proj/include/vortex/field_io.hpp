#pragma once

#include <filesystem>
#include <stdexcept>

#include "vortex/grid.hpp"

namespace vortex {

class FieldFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binary layout, little-endian:
//   int32 nx, int32 ny     stored node counts
//   float32 e1, float32 e2 extents; negative values mark a box (half-widths)
//   nx*ny float64 values, row-major (x index outer)
void write_field(const std::filesystem::path& path, const ScalarField& f);

// The header must agree with `expect` (node counts exactly, extents to
// float32 precision); the returned field lives on `expect`.
ScalarField read_field(const std::filesystem::path& path, const GridDomain& expect);

// one "x,y,value" line per node
void write_field_csv(const std::filesystem::path& path, const ScalarField& f);

}  // namespace vortex
