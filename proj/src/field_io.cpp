#include "vortex/field_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <vector>

#include <fmt/format.h>

namespace vortex {

static_assert(std::endian::native == std::endian::little, "field files assume a little-endian host");

namespace {

struct Header {
  std::int32_t nx, ny;
  float e1, e2;
};
static_assert(sizeof(Header) == 16);

}  // namespace

void write_field(const std::filesystem::path& path, const ScalarField& f) {
  const GridDomain& d = f.domain();
  const float sign = d.is_box() ? -1.0f : 1.0f;
  Header h{d.nx(), d.ny(), sign * static_cast<float>(d.ext1), sign * static_cast<float>(d.ext2)};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FieldFileError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(&h), sizeof h);
  out.write(reinterpret_cast<const char*>(f.data()),
            static_cast<std::streamsize>(f.size() * sizeof(double)));
  if (!out) throw FieldFileError("write failed: " + path.string());
}

ScalarField read_field(const std::filesystem::path& path, const GridDomain& expect) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FieldFileError("missing field file " + path.string());
  Header h{};
  in.read(reinterpret_cast<char*>(&h), sizeof h);
  if (!in) throw FieldFileError("truncated header in " + path.string());
  const bool box = h.e1 < 0.0f;
  const float sign = box ? -1.0f : 1.0f;
  if (box != expect.is_box() || h.nx != expect.nx() || h.ny != expect.ny() ||
      sign * h.e1 != static_cast<float>(expect.ext1) || sign * h.e2 != static_cast<float>(expect.ext2))
    throw FieldFileError("header of " + path.string() + " does not match the configured domain");
  std::vector<double> v(expect.size());
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!in) throw FieldFileError("truncated payload in " + path.string());
  if (in.peek() != std::ifstream::traits_type::eof())
    throw FieldFileError("trailing bytes in " + path.string());
  ScalarField f(expect, std::move(v));
  if (!f.all_finite()) throw FieldFileError("non-finite values in " + path.string());
  return f;
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& f) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FieldFileError("cannot open " + path.string() + " for writing");
  const GridDomain& d = f.domain();
  out << "x,y,value\n";
  for (int i = 0; i < d.nx(); ++i)
    for (int j = 0; j < d.ny(); ++j) out << fmt::format("{:.17g},{:.17g},{:.17g}\n", d.x(i), d.y(j), f(i, j));
}

}  // namespace vortex
