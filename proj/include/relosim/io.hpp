#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "relosim/accessibility.hpp"
#include "relosim/choice.hpp"
#include "relosim/domain.hpp"

namespace relosim {

// Cell, household, network-edge and moving-rate tables round-trip through
// CSV with fixed column sets; doubles use shortest-round-trip formatting so a
// write/read/write cycle is byte-stable.
void write_cells_csv(const std::filesystem::path& path, std::span<const MeshCell> cells);
std::vector<MeshCell> read_cells_csv(const std::filesystem::path& path);

void write_households_csv(const std::filesystem::path& path,
                          std::span<const Household> households);
std::vector<Household> read_households_csv(const std::filesystem::path& path);

void write_edges_csv(const std::filesystem::path& path, std::span<const NetworkEdge> edges);
std::vector<NetworkEdge> read_edges_csv(const std::filesystem::path& path);

void write_moving_rates_csv(const std::filesystem::path& path, const MovingRateTable& table);
MovingRateTable read_moving_rates_csv(const std::filesystem::path& path);

// Flat "name value" coefficient files (one pair per line, '#' comments).
void write_coefficient_file(const std::filesystem::path& path,
                            const std::map<std::string, double>& values);
std::map<std::string, double> read_coefficient_file(const std::filesystem::path& path);

std::vector<double> hedonic_coefficients_from_file(const std::filesystem::path& path);
SegmentCoefficients segment_coefficients_from_file(const std::filesystem::path& path);
void write_segment_coefficients(const std::filesystem::path& path, const SegmentCoefficients& c);
void write_hedonic_coefficients(const std::filesystem::path& path,
                                std::span<const double> coefficients);

// Accessibility surface exchange. The surface file carries the scenario rows
// and the base-reference rows (scenario column distinguishes them); the
// scaling file carries the per-(category, cell) factors.
void write_surface_csv(const std::filesystem::path& surface_path,
                       const std::filesystem::path& scaling_path,
                       const AccessibilitySurface& surface,
                       const std::string& reference_name = "base");
AccessibilitySurface read_surface_csv(const std::filesystem::path& surface_path,
                                      const std::filesystem::path& scaling_path,
                                      const std::string& scenario_name,
                                      const std::string& reference_name = "base");

} // namespace relosim
