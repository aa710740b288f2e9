#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lorentzlab/geometry.hpp"
#include "lorentzlab/vec2.hpp"

namespace lorentzlab::lorentz {

using geom::Disk;
using geom::Vec2;

// Identity of one effective scatterer: either the periodic copy of unit-cell
// disk `index` translated by lattice vector (cell_x, cell_y), or the
// patch-added disk number `index`.
struct DiskId {
  enum class Kind : std::uint8_t { periodic, patch };
  Kind kind = Kind::periodic;
  std::int32_t cell_x = 0;
  std::int32_t cell_y = 0;
  std::int32_t index = 0;
};

inline bool operator==(const DiskId& a, const DiskId& b) {
  return a.kind == b.kind && a.cell_x == b.cell_x && a.cell_y == b.cell_y && a.index == b.index;
}
inline bool operator!=(const DiskId& a, const DiskId& b) { return !(a == b); }

// One edit of the periodic environment: remove a single periodic copy, or add
// a free disk.  Both must stay inside the |x| + radius <= patch_bound ball.
struct PatchOp {
  enum class Kind : std::uint8_t { remove_copy, add_disk };
  Kind kind = Kind::remove_copy;
  // remove_copy: lattice cell and unit-cell disk index of the copy.
  std::int32_t cell_x = 0;
  std::int32_t cell_y = 0;
  std::int32_t index = 0;
  // add_disk:
  Disk disk;
};

// Z^2-periodic table of disks with an optional bounded patch.  The effective
// scatterer set is: every periodic copy of the unit-cell disks, minus the
// removed copies, plus the added disks.  Invariants enforced on construction:
// the unit cell is nonempty, all centers lie in [0,1)^2, radii are positive,
// no two effective scatterers overlap or touch, and all patch elements live
// inside the patch_bound ball.
class ScattererTable {
 public:
  // Unpatched periodic table.
  explicit ScattererTable(std::vector<Disk> cell_disks, double patch_bound = 8.0);

  const std::vector<Disk>& cell_disks() const { return cell_disks_; }
  double patch_bound() const { return patch_bound_; }
  double max_radius() const { return max_radius_; }
  bool has_patch() const { return !removed_.empty() || !added_.empty(); }
  const std::vector<Disk>& added_disks() const { return added_; }
  std::size_t removed_count() const { return removed_.size(); }

  // Effective disk for an id (resolves periodic translation).
  Disk effective_disk(const DiskId& id) const;

  bool copy_removed(std::int32_t cx, std::int32_t cy, std::int32_t index) const {
    return !removed_.empty() && removed_.count(cell_key(cx, cy, index)) > 0;
  }

  // Visits every effective disk whose center lies in lattice cell (cx, cy).
  template <class Fn>
  void for_each_disk_in_cell(std::int32_t cx, std::int32_t cy, Fn&& fn) const {
    const bool patched = patch_cell_possible(cx, cy);
    for (std::size_t k = 0; k < cell_disks_.size(); ++k) {
      if (patched && copy_removed(cx, cy, static_cast<std::int32_t>(k))) continue;
      Disk d{Vec2{cell_disks_[k].center.x + cx, cell_disks_[k].center.y + cy},
             cell_disks_[k].radius};
      fn(d, DiskId{DiskId::Kind::periodic, cx, cy, static_cast<std::int32_t>(k)});
    }
    if (patched && !added_.empty()) {
      auto it = added_by_cell_.find(pack_cell(cx, cy));
      if (it != added_by_cell_.end()) {
        for (std::int32_t idx : it->second) {
          fn(added_[static_cast<std::size_t>(idx)], DiskId{DiskId::Kind::patch, 0, 0, idx});
        }
      }
    }
  }

  // True when the point lies inside or on the boundary of any effective disk.
  bool point_blocked(Vec2 p) const;

 private:
  friend ScattererTable apply_patch(const ScattererTable&, const std::vector<PatchOp>&);

  ScattererTable() = default;
  void rebuild_index();
  void validate_layout() const;

  static std::uint64_t pack_cell(std::int32_t cx, std::int32_t cy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(cy));
  }
  static std::uint64_t cell_key(std::int32_t cx, std::int32_t cy, std::int32_t index) {
    std::uint64_t h = pack_cell(cx, cy);
    h ^= 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(static_cast<std::uint32_t>(index));
    h *= 0xff51afd7ed558ccdULL;
    return h ^ (h >> 33);
  }
  bool patch_cell_possible(std::int32_t cx, std::int32_t cy) const {
    return has_patch_box_ && cx >= patch_lo_x_ && cx <= patch_hi_x_ && cy >= patch_lo_y_ &&
           cy <= patch_hi_y_;
  }

  std::vector<Disk> cell_disks_;
  double patch_bound_ = 8.0;
  double max_radius_ = 0.0;
  std::unordered_set<std::uint64_t> removed_;
  std::vector<PatchOp> removed_ops_;  // retained for effective_disk diagnostics
  std::vector<Disk> added_;
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> added_by_cell_;
  bool has_patch_box_ = false;
  std::int32_t patch_lo_x_ = 0, patch_hi_x_ = -1, patch_lo_y_ = 0, patch_hi_y_ = -1;
};

// Built-in periodic environments.
//
// single_disk(R): one disk of radius R at every lattice point; 0 < R < 1/2.
// finite_horizon_pair(R1, R2): radius-R1 disks at lattice points plus
// radius-R2 disks at the (0.5, 0.5) offsets.  Non-overlap forces
// R1 + R2 < sqrt(2)/2; invalid radii throw ConfigError.
ScattererTable single_disk_table(double radius, double patch_bound = 8.0);
ScattererTable finite_horizon_pair_table(double r1, double r2, double patch_bound = 8.0);

// Canonical valid finite-horizon pair used by the ensemble experiments: the
// tightest "big + small" pair with round radii that blocks every corridor
// while keeping all scatterers disjoint.
inline constexpr double kFiniteHorizonR1 = 0.4;
inline constexpr double kFiniteHorizonR2 = 0.25;

// Returns a new table with the ops applied.  Validates overlap, bounds, and
// removal references; throws ConfigError on violations.
ScattererTable apply_patch(const ScattererTable& table, const std::vector<PatchOp>& ops);

// Heuristic screen for a patch sealing off part of the plane: rasterizes free
// space around the patch and flood-fills from far away.  Returns a warning
// message when some free region looks unreachable; this is advisory only.
std::optional<std::string> patch_connectivity_warning(const ScattererTable& table);

}  // namespace lorentzlab::lorentz
