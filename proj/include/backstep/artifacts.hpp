#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "backstep/analysis.hpp"
#include "backstep/kernel.hpp"
#include "backstep/simulate.hpp"

namespace backstep {

inline constexpr const char* kToolVersion = "backstep 1.0.0";

/// kernel.csv: '#' header lines with n, m, scheme, tol, iterations, final update and scenario
/// hash, then rows a,b,x,xi,i,j,K,L (1-based i, j) at full precision.
void write_kernel_csv(const std::filesystem::path& path, const KernelField& field,
                      const std::string& hash);

struct LoadedKernel {
  KernelField field;
  std::string hash;
};

/// Throws ScenarioError on a malformed file.
LoadedKernel read_kernel_csv(const std::filesystem::path& path);

void write_residuals_csv(const std::filesystem::path& path, const ResidualReport& rep);
void write_g_csv(const std::filesystem::path& path, const GMatrix& g);

/// certificate.txt (report) and certificate.csv (name,value).
void write_certificate(const std::filesystem::path& dir, const StabilityCertificate& cert,
                       const Vector& c);

void write_norms_csv(const std::filesystem::path& path, const std::vector<NormRow>& rows);
void write_control_csv(const std::filesystem::path& path, const std::vector<ControlRow>& rows);
/// dir/snapshot_NNNNN.csv per snapshot: a '# t=' line, then columns x,u1..un.
void write_snapshots(const std::filesystem::path& dir, const std::vector<StateField>& snaps);
void write_target_residual_csv(const std::filesystem::path& path, const TargetResidualReport& rep);

/// "%.17g"
std::string fmt(double v);

}  // namespace backstep
