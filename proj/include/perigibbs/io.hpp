#ifndef PERIGIBBS_IO_HPP
#define PERIGIBBS_IO_HPP

// File formats: grid functions and kernels as CSV, reports as JSON.

#include "perigibbs/analysis.hpp"
#include "perigibbs/grid.hpp"
#include "perigibbs/kernels.hpp"
#include "perigibbs/operators.hpp"
#include "perigibbs/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace perigibbs {

using Json = nlohmann::ordered_json;

/// Header `t,value`, one row per node, 17 significant digits.
void write_grid_function_csv(const std::filesystem::path& path, const GridFunction<double>& f);

/// Reads values for the nodes of `rule`; node columns must match within 1e-12.
GridFunction<double> read_grid_function_csv(const std::filesystem::path& path, RulePtr<double> rule);

/// Path of the JSON sidecar next to a kernel CSV.
std::filesystem::path kernel_sidecar_path(const std::filesystem::path& csv_path);

Json kernel_metadata(const Kernel<double>& kernel);

/// Matrix CSV: the header row holds the u nodes, the first data row is
/// K(0, u_j) labeled t = 0, then one row per node t_i. Writes the sidecar too.
void write_kernel_csv(const std::filesystem::path& path, const Kernel<double>& kernel);

/// Loads a kernel written by write_kernel_csv as a node-only file kernel.
/// The rule is rebuilt from the sidecar's scheme and node count and checked
/// against the header.
Kernel<double> read_kernel_csv(const std::filesystem::path& path);

/// Interaction values in the kernel CSV layout, on the nodes of `rule`.
XiGrid<double> read_xi_csv(const std::filesystem::path& path, const QuadratureRule<double>& rule);

Json to_json(const KernelParams& params);
Json to_json(const KernelReport<double>& report);
Json to_json(const VerificationReport<double>& report);
Json to_json(const SolveResult<double>& result, const SolverConfig& config);
Json function_values(const GridFunction<double>& f);

/// Columns t, f, g, Hf, Hg over the nodes, for a Hammerstein-form pair.
void write_plot_csv(const std::filesystem::path& path, const Kernel<double>& kernel,
                    const CyclePair<double>& pair);

void write_json(const std::filesystem::path& path, const Json& doc);

}  // namespace perigibbs

#endif  // PERIGIBBS_IO_HPP
