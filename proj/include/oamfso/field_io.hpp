#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "oamfso/grid.hpp"
#include "oamfso/turbulence.hpp"

namespace oamfso {

// Binary field container: 32-byte header (magic "OAMF", version, grid size,
// reserved word, dx, wavelength; little-endian) followed by row-major
// interleaved (re, im) float64 samples. Phase screens reuse the container
// with the phase stored in the real plane.

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "field container I/O assumes a little-endian host");

inline constexpr std::uint32_t kFieldVersion = 1;
inline constexpr char kFieldMagic[4] = {'O', 'A', 'M', 'F'};

struct FieldHeader {
    char magic[4];
    std::uint32_t version;
    std::uint32_t n_samples;
    std::uint32_t reserved;
    double dx;
    double wavelength;
};
static_assert(sizeof(FieldHeader) == 32);

inline void write_header(std::ofstream& out, const SimulationGrid& grid) {
    FieldHeader header{};
    std::memcpy(header.magic, kFieldMagic, 4);
    header.version = kFieldVersion;
    header.n_samples = static_cast<std::uint32_t>(grid.n);
    header.reserved = 0;
    header.dx = grid.dx;
    header.wavelength = grid.wavelength;
    out.write(reinterpret_cast<const char*>(&header), sizeof(header));
}

inline SimulationGrid read_header(std::ifstream& in, const std::string& path) {
    FieldHeader header{};
    in.read(reinterpret_cast<char*>(&header), sizeof(header));
    if (!in || std::memcmp(header.magic, kFieldMagic, 4) != 0)
        throw std::runtime_error(path + ": not a field container");
    if (header.version != kFieldVersion)
        throw std::runtime_error(path + ": unsupported container version");
    return SimulationGrid(static_cast<int>(header.n_samples), header.dx, header.wavelength);
}

} // namespace detail

inline void write_field(const std::string& path, const ComplexField& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    detail::write_header(out, field.grid());
    out.write(reinterpret_cast<const char*>(field.data()),
              static_cast<std::streamsize>(field.samples().size() * sizeof(cd)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline ComplexField read_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    ComplexField field(detail::read_header(in, path));
    in.read(reinterpret_cast<char*>(field.data()),
            static_cast<std::streamsize>(field.samples().size() * sizeof(cd)));
    if (!in) throw std::runtime_error(path + ": truncated sample data");
    return field;
}

inline void write_phase_screen(const std::string& path, const PhaseScreen& screen) {
    ComplexField field(screen.grid);
    for (std::size_t i = 0; i < screen.phase.size(); ++i)
        field.samples()[i] = cd{screen.phase[i], 0.0};
    write_field(path, field);
}

inline PhaseScreen read_phase_screen(const std::string& path) {
    const ComplexField field = read_field(path);
    PhaseScreen screen(field.grid());
    for (std::size_t i = 0; i < screen.phase.size(); ++i)
        screen.phase[i] = field.samples()[i].real();
    return screen;
}

// Lossy plotting export: per-sample intensity and phase.
inline void write_field_csv(const std::string& path, const ComplexField& field) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "ix,iy,x,y,intensity,phase\n";
    char line[160];
    const SimulationGrid& grid = field.grid();
    for (int ix = 0; ix < grid.n; ++ix) {
        for (int iy = 0; iy < grid.n; ++iy) {
            const cd v = field.at(ix, iy);
            std::snprintf(line, sizeof(line), "%d,%d,%.6g,%.6g,%.12g,%.12g\n", ix, iy,
                          grid.coord(ix), grid.coord(iy), std::norm(v), std::arg(v));
            out << line;
        }
    }
}

} // namespace oamfso
