#pragma once

#include <string>

#include "chal/lrp.hpp"

namespace chal {

// Writes base_path + ".pgm" and base_path + ".csv" for a relevance map whose
// sample shape is [H x W] or [1 x H x W]. The PGM is the plain "P2" format
// with 128 at zero relevance and the extremes scaled symmetrically by the
// largest |R|; the CSV holds the signed values at full precision.
void export_heatmap(const RelevanceMap& map, const std::string& base_path);

// Parses a CSV grid written by export_heatmap back into a [H x W] tensor.
Tensor read_heatmap_csv(const std::string& path);

}  // namespace chal
