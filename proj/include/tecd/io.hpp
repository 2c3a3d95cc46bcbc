#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tecd/grid.hpp"
#include "tecd/solver.hpp"

namespace tecd {

// row-major, 17 significant digits
void write_matrix_csv(const std::string& path, const Mat& m);

// fixed header from the ledger columns, every value at 17 significant digits
void write_ledger_csv(const std::string& path, const EnergyLedger& ledger);

// flat little-endian 64-bit floats, x1-major, with a JSON sidecar holding
// shape, ordering, endianness, and component names
void write_snapshot(const std::string& path_base, const Grid& g, const Field& f,
                    const std::string& side_label);

// residual fields as flat slices: t, x1, x' coordinates, residual name, value
void write_residual_slices_csv(
    const std::string& path, const Grid& g, double t,
    const std::vector<std::pair<std::string, const ScalarField*>>& fields);

std::string file_hash_hex(const std::string& path);  // for reproducibility checks

}  // namespace tecd
