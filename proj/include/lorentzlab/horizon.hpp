#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lorentzlab/scatterer_table.hpp"

namespace lorentzlab::lorentz {

// An infinite family of parallel empty strips: lines of rational direction
// (p, q) that avoid every scatterer.  `offset` is the strip midline position
// along the unit covector (-q, p)/|(p,q)|, reduced modulo the projected
// lattice period 1/|(p,q)|.
struct Corridor {
  std::int32_t p = 0;
  std::int32_t q = 0;
  double width = 0.0;
  double offset = 0.0;
};

struct HorizonReport {
  bool finite = false;
  int max_denominator = 0;
  std::vector<Corridor> corridors;
};

// Corridor certificate for the unpatched periodic table: for every coprime
// direction with max(|p|, |q|) <= max_denominator, projects all scatterer
// centers onto the orthogonal axis modulo the projected lattice period and
// reports each uncovered gap as a corridor of that direction.  The horizon is
// declared finite when no checked direction leaves a gap.  Patched tables are
// rejected (a bounded patch cannot restore a corridor, but the certificate is
// defined for the periodic environment).
HorizonReport horizon_check(const ScattererTable& table, int max_denominator = 50);

// Coverage slack of one coprime direction: the largest sigma such that every
// line of direction (p, q) passes within (radius - sigma) of some scatterer
// center.  Positive iff the direction has no corridor; when a corridor
// exists the value is negative (half the widest gap deep).  Unpatched tables
// only.
double direction_coverage_slack(const ScattererTable& table, int p, int q);

// Rigorous (conservative) upper bound on the length of any straight
// collision-free segment in the unpatched table, valid for every direction,
// rational or not.  Works by Dirichlet approximation: any direction is within
// angle 1/(D*|(p,q)|) of a coprime (p, q) with max(|p|,|q|) <= D, and if that
// direction's projected circle is covered with slack sigma, a long segment
// drifts too little off the rational line to escape the blocking disk.  With
// every direction up to D satisfying sigma * D * |(p,q)| >= 4 (|(p,q)| + 1),
// the bound 2 (sqrt(2) D + 1) follows.  Tries growing D up to the cap and
// returns nullopt when no certificate is reached (e.g. infinite horizon).
std::optional<double> certified_flight_bound(const ScattererTable& table,
                                             int max_denominator_cap = 400);

}  // namespace lorentzlab::lorentz
