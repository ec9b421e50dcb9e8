#pragma once

#include "surfsd/fem.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace surfsd::cli {

/// Shortest text that is still exact on re-read ("%.17g").
std::string format_double(double v);

using CsvRow = std::vector<std::string>;

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<CsvRow>& rows);

void write_text(const std::filesystem::path& path, std::string_view text);

/// Gamma_h as legacy ASCII POLYDATA. Polygon vertices that lie on the same
/// background edge are merged; POINT_DATA u holds the P1 values of u_h there.
void write_surface_vtk(const std::filesystem::path& path, const Discretization& disc, const Vector& u_h,
                       std::string_view title);

}  // namespace surfsd::cli
