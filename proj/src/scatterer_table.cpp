#include "lorentzlab/scatterer_table.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "lorentzlab/errors.hpp"

namespace lorentzlab::lorentz {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

// Strict disjointness: center distance must exceed the radius sum.
bool disks_separated(const Disk& a, const Disk& b) {
  const double rr = a.radius + b.radius;
  return norm2(a.center - b.center) > rr * rr;
}

}  // namespace

ScattererTable::ScattererTable(std::vector<Disk> cell_disks, double patch_bound)
    : cell_disks_(std::move(cell_disks)), patch_bound_(patch_bound) {
  require(!cell_disks_.empty(), "scatterer table: unit cell must contain at least one disk");
  require(patch_bound_ > 0.0, "scatterer table: patch_bound must be positive");
  for (const Disk& d : cell_disks_) {
    require(d.radius > 0.0, "scatterer table: disk radius must be positive");
    require(is_finite(d.center), "scatterer table: non-finite disk center");
    require(d.center.x >= 0.0 && d.center.x < 1.0 && d.center.y >= 0.0 && d.center.y < 1.0,
            "scatterer table: unit-cell centers must lie in [0,1)^2");
  }
  rebuild_index();
  validate_layout();
}

void ScattererTable::rebuild_index() {
  max_radius_ = 0.0;
  for (const Disk& d : cell_disks_) max_radius_ = std::max(max_radius_, d.radius);
  for (const Disk& d : added_) max_radius_ = std::max(max_radius_, d.radius);

  added_by_cell_.clear();
  for (std::size_t i = 0; i < added_.size(); ++i) {
    const std::int32_t cx = static_cast<std::int32_t>(std::floor(added_[i].center.x));
    const std::int32_t cy = static_cast<std::int32_t>(std::floor(added_[i].center.y));
    added_by_cell_[pack_cell(cx, cy)].push_back(static_cast<std::int32_t>(i));
  }

  has_patch_box_ = false;
  patch_lo_x_ = patch_lo_y_ = 0;
  patch_hi_x_ = patch_hi_y_ = -1;
  auto grow = [&](std::int32_t cx, std::int32_t cy) {
    if (!has_patch_box_) {
      patch_lo_x_ = patch_hi_x_ = cx;
      patch_lo_y_ = patch_hi_y_ = cy;
      has_patch_box_ = true;
    } else {
      patch_lo_x_ = std::min(patch_lo_x_, cx);
      patch_hi_x_ = std::max(patch_hi_x_, cx);
      patch_lo_y_ = std::min(patch_lo_y_, cy);
      patch_hi_y_ = std::max(patch_hi_y_, cy);
    }
  };
  for (const PatchOp& op : removed_ops_) grow(op.cell_x, op.cell_y);
  for (const Disk& d : added_) {
    grow(static_cast<std::int32_t>(std::floor(d.center.x)),
         static_cast<std::int32_t>(std::floor(d.center.y)));
  }
}

void ScattererTable::validate_layout() const {
  // Periodic copies against each other: if disks k (at c_k + z) and l (at c_l)
  // can overlap for some lattice z, then |z| is bounded by the radius sum plus
  // the unit-cell diameter, so a small window of offsets suffices.
  const int w = static_cast<int>(std::ceil(2.0 * max_radius_)) + 2;
  for (std::size_t k = 0; k < cell_disks_.size(); ++k) {
    for (std::size_t l = k; l < cell_disks_.size(); ++l) {
      for (int zx = -w; zx <= w; ++zx) {
        for (int zy = -w; zy <= w; ++zy) {
          if (k == l && zx == 0 && zy == 0) continue;
          Disk a{Vec2{cell_disks_[k].center.x + zx, cell_disks_[k].center.y + zy},
                 cell_disks_[k].radius};
          if (!disks_separated(a, cell_disks_[l])) {
            throw ConfigError("scatterer table: periodic copies overlap");
          }
        }
      }
    }
  }

  // Added disks against every surviving periodic copy nearby and against each
  // other.
  for (std::size_t i = 0; i < added_.size(); ++i) {
    const Disk& a = added_[i];
    require(norm(a.center) + a.radius <= patch_bound_,
            "patch: added disk leaves the patch_bound ball");
    const int reach = static_cast<int>(std::ceil(a.radius + max_radius_)) + 1;
    const std::int32_t acx = static_cast<std::int32_t>(std::floor(a.center.x));
    const std::int32_t acy = static_cast<std::int32_t>(std::floor(a.center.y));
    for (std::int32_t cx = acx - reach; cx <= acx + reach; ++cx) {
      for (std::int32_t cy = acy - reach; cy <= acy + reach; ++cy) {
        for (std::size_t k = 0; k < cell_disks_.size(); ++k) {
          if (copy_removed(cx, cy, static_cast<std::int32_t>(k))) continue;
          Disk b{Vec2{cell_disks_[k].center.x + cx, cell_disks_[k].center.y + cy},
                 cell_disks_[k].radius};
          if (!disks_separated(a, b)) {
            throw ConfigError("patch: added disk overlaps a periodic scatterer");
          }
        }
      }
    }
    for (std::size_t j = i + 1; j < added_.size(); ++j) {
      if (!disks_separated(a, added_[j])) {
        throw ConfigError("patch: added disks overlap each other");
      }
    }
  }

  for (const PatchOp& op : removed_ops_) {
    const Disk& d = cell_disks_[static_cast<std::size_t>(op.index)];
    Vec2 c{d.center.x + op.cell_x, d.center.y + op.cell_y};
    require(norm(c) + d.radius <= patch_bound_,
            "patch: removed copy lies outside the patch_bound ball");
  }
}

Disk ScattererTable::effective_disk(const DiskId& id) const {
  if (id.kind == DiskId::Kind::patch) {
    require(id.index >= 0 && static_cast<std::size_t>(id.index) < added_.size(),
            "effective_disk: patch index out of range");
    return added_[static_cast<std::size_t>(id.index)];
  }
  require(id.index >= 0 && static_cast<std::size_t>(id.index) < cell_disks_.size(),
          "effective_disk: cell disk index out of range");
  const Disk& d = cell_disks_[static_cast<std::size_t>(id.index)];
  return Disk{Vec2{d.center.x + id.cell_x, d.center.y + id.cell_y}, d.radius};
}

bool ScattererTable::point_blocked(Vec2 p) const {
  const int halo = static_cast<int>(std::floor(max_radius_)) + 1;
  const std::int32_t cx = static_cast<std::int32_t>(std::floor(p.x));
  const std::int32_t cy = static_cast<std::int32_t>(std::floor(p.y));
  bool blocked = false;
  for (std::int32_t ix = cx - halo; ix <= cx + halo && !blocked; ++ix) {
    for (std::int32_t iy = cy - halo; iy <= cy + halo && !blocked; ++iy) {
      for_each_disk_in_cell(ix, iy, [&](const Disk& d, const DiskId&) {
        if (norm2(p - d.center) <= d.radius * d.radius) blocked = true;
      });
    }
  }
  return blocked;
}

ScattererTable single_disk_table(double radius, double patch_bound) {
  require(radius > 0.0 && radius < 0.5,
          "single_disk: radius must lie in (0, 1/2) to keep periodic copies disjoint");
  return ScattererTable({Disk{Vec2{0.0, 0.0}, radius}}, patch_bound);
}

ScattererTable finite_horizon_pair_table(double r1, double r2, double patch_bound) {
  require(r1 > 0.0 && r2 > 0.0, "finite_horizon_pair: radii must be positive");
  require(r1 < 0.5 && r2 < 0.5,
          "finite_horizon_pair: radii must stay below 1/2 within each sublattice");
  const double diag = std::sqrt(2.0) / 2.0;
  require(r1 + r2 < diag,
          "finite_horizon_pair: R1 + R2 must stay below sqrt(2)/2, the distance between "
          "the two sublattices, or the scatterers overlap");
  return ScattererTable({Disk{Vec2{0.0, 0.0}, r1}, Disk{Vec2{0.5, 0.5}, r2}}, patch_bound);
}

ScattererTable apply_patch(const ScattererTable& table, const std::vector<PatchOp>& ops) {
  ScattererTable out;
  out.cell_disks_ = table.cell_disks_;
  out.patch_bound_ = table.patch_bound_;
  out.removed_ = table.removed_;
  out.removed_ops_ = table.removed_ops_;
  out.added_ = table.added_;

  for (const PatchOp& op : ops) {
    if (op.kind == PatchOp::Kind::remove_copy) {
      require(op.index >= 0 && static_cast<std::size_t>(op.index) < out.cell_disks_.size(),
              "patch: removal references an unknown unit-cell disk");
      const std::uint64_t key = ScattererTable::cell_key(op.cell_x, op.cell_y, op.index);
      require(out.removed_.insert(key).second, "patch: periodic copy removed twice");
      out.removed_ops_.push_back(op);
    } else {
      require(op.disk.radius > 0.0, "patch: added disk radius must be positive");
      require(is_finite(op.disk.center), "patch: added disk center must be finite");
      out.added_.push_back(op.disk);
    }
  }

  out.rebuild_index();
  out.validate_layout();
  return out;
}

std::optional<std::string> patch_connectivity_warning(const ScattererTable& table) {
  if (!table.has_patch()) return std::nullopt;

  // Coarse screen only: rasterize a window two cells wider than the patch
  // ball, flood-fill free pixels from the window rim, and flag unreachable
  // free pixels.  Narrow throats below the pixel size can trigger a false
  // positive, which is acceptable for an advisory check.
  const double b = table.patch_bound() + 2.0;
  const double h = 0.02;
  const int n = static_cast<int>(std::ceil(2.0 * b / h));
  std::vector<std::uint8_t> free_px(static_cast<std::size_t>(n) * n, 0);
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(n) * n, 0);
  auto at = [&](int i, int j) -> std::size_t {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j);
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Vec2 p{-b + (i + 0.5) * h, -b + (j + 0.5) * h};
      free_px[at(i, j)] = table.point_blocked(p) ? 0 : 1;
    }
  }
  std::deque<std::pair<int, int>> queue;
  for (int i = 0; i < n; ++i) {
    for (int j : {0, n - 1}) {
      if (free_px[at(i, j)]) {
        seen[at(i, j)] = 1;
        queue.emplace_back(i, j);
      }
      if (free_px[at(j, i)] && !seen[at(j, i)]) {
        seen[at(j, i)] = 1;
        queue.emplace_back(j, i);
      }
    }
  }
  while (!queue.empty()) {
    auto [i, j] = queue.front();
    queue.pop_front();
    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      int ii = i + di[k], jj = j + dj[k];
      if (ii < 0 || jj < 0 || ii >= n || jj >= n) continue;
      if (free_px[at(ii, jj)] && !seen[at(ii, jj)]) {
        seen[at(ii, jj)] = 1;
        queue.emplace_back(ii, jj);
      }
    }
  }
  std::size_t unreachable = 0;
  for (std::size_t k = 0; k < free_px.size(); ++k) {
    if (free_px[k] && !seen[k]) ++unreachable;
  }
  if (unreachable > 0) {
    return "patch may disconnect the billiard domain: " + std::to_string(unreachable) +
           " free raster cells near the patch are unreachable from far away "
           "(heuristic screen, resolution 0.02)";
  }
  return std::nullopt;
}

}  // namespace lorentzlab::lorentz
