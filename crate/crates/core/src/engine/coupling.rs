//! Electrostatic kink energy between cells and the per-layout coupling table.

use crate::layout::{Geometry, QcaCell, QcaLayout};
use crate::params::SimParams;

use super::EngineError;

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Dot positions relative to the cell centre (metres) and the sign of the
/// charge each dot carries when the cell is at `P = +1`. The `+1` diagonal
/// runs top-right to bottom-left in a y-down frame.
fn dots(geometry: &Geometry) -> [(f64, f64, f64); 4] {
    let a = geometry.dot_offset_nm() * 1e-9;
    [(a, -a, 1.0), (a, a, -1.0), (-a, a, 1.0), (-a, -a, -1.0)]
}

fn interaction(
    ci: &QcaCell,
    pi: f64,
    cj: &QcaCell,
    pj: f64,
    geometry: &Geometry,
    coulomb: f64,
) -> f64 {
    let half_e = ELEMENTARY_CHARGE / 2.0;
    let d = dots(geometry);
    let (xi, yi) = (ci.x * 1e-9, ci.y * 1e-9);
    let (xj, yj) = (cj.x * 1e-9, cj.y * 1e-9);
    let mut u = 0.0;
    for &(ax, ay, sa) in &d {
        for &(bx, by, sb) in &d {
            let r = ((xi + ax) - (xj + bx)).hypot((yi + ay) - (yj + by));
            u += (half_e * sa * pi) * (half_e * sb * pj) / r;
        }
    }
    u * coulomb
}

/// Kink energy `U(opposite) - U(same)` in joules between two cells.
/// Positive values favour equal polarizations.
pub fn kink_energy(
    cell_i: &QcaCell,
    cell_j: &QcaCell,
    geometry: &Geometry,
    relative_permittivity: f64,
) -> Result<f64, EngineError> {
    if cell_i.distance(cell_j) < geometry.dot_diameter_nm {
        return Err(EngineError::CoincidentCells(cell_i.id, cell_j.id));
    }
    let coulomb = 1.0 / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY * relative_permittivity);
    let opposite = interaction(cell_i, 1.0, cell_j, -1.0, geometry, coulomb);
    let same = interaction(cell_i, 1.0, cell_j, 1.0, geometry, coulomb);
    Ok(opposite - same)
}

/// Symmetric neighbour lists within the radius of effect, ascending by id.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingTable {
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl CouplingTable {
    pub fn neighbors(&self, cell: usize) -> &[(usize, f64)] {
        &self.neighbors[cell]
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn pair_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn energy(&self, i: usize, j: usize) -> Option<f64> {
        self.neighbors[i]
            .binary_search_by_key(&j, |&(n, _)| n)
            .ok()
            .map(|k| self.neighbors[i][k].1)
    }

    /// Neighbourhood field `sum_j E_ij P_j` acting on `cell`.
    pub fn field(&self, cell: usize, polarization: &[f64]) -> f64 {
        self.neighbors[cell]
            .iter()
            .map(|&(j, e)| e * polarization[j])
            .sum()
    }
}

pub fn precompute_couplings(
    layout: &QcaLayout,
    params: &SimParams,
) -> Result<CouplingTable, EngineError> {
    let n = layout.cells.len();
    let mut neighbors = vec![Vec::new(); n];
    let radius = params.radius_of_effect_nm;
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&layout.cells[i], &layout.cells[j]);
            if a.distance(b) <= radius {
                let e = kink_energy(a, b, &layout.geometry, params.relative_permittivity)?;
                neighbors[i].push((j, e));
                neighbors[j].push((i, e));
            }
        }
    }
    for list in &mut neighbors {
        list.sort_by_key(|&(j, _)| j);
    }
    Ok(CouplingTable { neighbors })
}

/// Kink energy of two cells one grid pitch apart along x.
pub fn adjacent_kink_energy(geometry: &Geometry, relative_permittivity: f64) -> f64 {
    let a = QcaCell {
        id: 0,
        x: 0.0,
        y: 0.0,
        zone: 0,
        role: crate::layout::CellRole::Normal,
    };
    let b = QcaCell {
        id: 1,
        x: geometry.grid_pitch_nm,
        ..a.clone()
    };
    kink_energy(&a, &b, geometry, relative_permittivity).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::CellRole;

    fn cell(id: usize, x: f64, y: f64) -> QcaCell {
        QcaCell {
            id,
            x,
            y,
            zone: 0,
            role: CellRole::Normal,
        }
    }

    #[test]
    fn coincident_rejected() {
        let g = Geometry::default();
        assert!(matches!(
            kink_energy(&cell(0, 0.0, 0.0), &cell(1, 0.0, 0.0), &g, 12.9),
            Err(EngineError::CoincidentCells(0, 1))
        ));
    }

    #[test]
    fn sign_pattern() {
        let g = Geometry::default();
        let o = cell(0, 0.0, 0.0);
        assert!(kink_energy(&o, &cell(1, 20.0, 0.0), &g, 12.9).unwrap() > 0.0);
        assert!(kink_energy(&o, &cell(1, 0.0, 20.0), &g, 12.9).unwrap() > 0.0);
        assert!(kink_energy(&o, &cell(1, 20.0, 20.0), &g, 12.9).unwrap() < 0.0);
    }

    #[test]
    fn radius_cutoff() {
        let mut l = QcaLayout::new("", Geometry::default());
        l.push(0.0, 0.0, 0, CellRole::Fixed(1.0));
        l.push(100.0, 0.0, 0, CellRole::Normal);
        let t = precompute_couplings(&l, &SimParams::default()).unwrap();
        assert_eq!(t.pair_count(), 0);
    }

    #[test]
    fn wire_neighbour_counts() {
        let mut l = QcaLayout::new("", Geometry::default());
        for i in 0..5 {
            l.push(20.0 * i as f64, 0.0, 0, CellRole::Normal);
        }
        let t = precompute_couplings(&l, &SimParams::default()).unwrap();
        for i in 0..5 {
            assert_eq!(t.neighbors(i).len(), 4, "cell {i}");
        }
        assert_eq!(t.energy(0, 4), t.energy(4, 0));
        assert!(t.energy(0, 4).is_some());
    }
}
