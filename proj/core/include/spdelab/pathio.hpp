#pragma once

#include <iosfwd>

#include "spdelab/linsim.hpp"

namespace spdelab {

/// Path dump as CSV: header `time,mode_label,re,im`, one row per (time,
/// stored entry), 17 significant digits.
void write_path_csv(std::ostream& os, const PathRecord& record);

/// Binary path dump. All integers and floats little-endian:
///
///   char[8]  magic "SPDLPATH"
///   u32      format version (1)
///   u32      kind (0 linear, 1 nonlinear)
///   u64      ModelSpec::hash() of the spectrum's spec
///   u64      seed
///   u64      time count (steps + 1)
///   u64      entry count (complex coefficients per state)
///   u64      dof count (real increments per step)
///   f64      dt
///   then per time:  f64 t, entry count x (f64 re, f64 im)
///   then            steps x dof count f64 dbeta, steps x dof count f64 I
void write_path_binary(std::ostream& os, const PathRecord& record);

/// Reads a binary dump back onto `spectrum`; throws SpecError when the
/// stored spec hash or sizes do not match it.
PathRecord read_path_binary(std::istream& is, const SpectrumPtr& spectrum);

}  // namespace spdelab
