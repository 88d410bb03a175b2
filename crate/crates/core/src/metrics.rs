//! Spatial complexity of layouts and an upper-bound energy dissipation model.
//!
//! Dissipation follows the two-state coherence-vector picture. A cell with
//! tunneling energy `γ` in a neighbourhood field `f = Σ E_ij P_j` has the
//! Hamiltonian vector `ħΓ = (-2γ, 0, f)`. When the Hamiltonian steps from one
//! value to the next, the cell gives up at most `½ ħΓ_after · (λss_after -
//! λ_before)`. Steps are taken at every quarter clock period.
//!
//! The tunneling energy follows each zone's clock waveform scaled so that
//! its peak is `gamma_ratio · E_k`, with `E_k` the kink energy of two
//! adjacent cells. Polarizations come from an ordinary simulation that
//! visits every ordered pair of input vectors.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{adjacent_kink_energy, precompute_couplings, EngineError, InputSchedule, Simulator, TraceSet};
use crate::layout::{bounding_area, CellRole, LayoutError, QcaLayout};
use crate::params::SimParams;
use crate::verification::{verify_layout, VerifyError, VerifyReport, CLOCK_PERIOD, DEFAULT_MARGIN};

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const JOULES_PER_MEV: f64 = 1.602_176_634e-22;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("layout has no cells")]
    EmptyLayout,
    #[error("temperature must be positive, got {0}")]
    Temperature(f64),
    #[error("zero Hamiltonian: both tunneling energy and field vanish")]
    ZeroHamiltonian,
    #[error("gamma ratio must be positive and finite, got {0}")]
    GammaRatio(f64),
    #[error("layout failed verification\n{0}")]
    Unverified(VerifyReport),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayoutMetrics {
    pub cell_count: usize,
    pub area_um2: f64,
    pub clock_zone_regions: usize,
}

impl fmt::Display for LayoutMetrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "cells={}", self.cell_count)?;
        writeln!(f, "area_um2={:.6}", self.area_um2)?;
        writeln!(f, "clock_zone_regions={}", self.clock_zone_regions)
    }
}

/// Cell count, bounding-box area and the number of clock-zone regions.
/// A region is a maximal group of same-zone cells connected through
/// couplings within `radius_nm`.
pub fn layout_metrics(layout: &QcaLayout, radius_nm: f64) -> Result<LayoutMetrics, MetricsError> {
    if layout.cells.is_empty() {
        return Err(MetricsError::EmptyLayout);
    }
    Ok(LayoutMetrics {
        cell_count: layout.cells.len(),
        area_um2: bounding_area(layout)?,
        clock_zone_regions: zone_regions(layout, radius_nm),
    })
}

fn zone_regions(layout: &QcaLayout, radius_nm: f64) -> usize {
    let n = layout.cells.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&layout.cells[i], &layout.cells[j]);
            if a.zone == b.zone && a.distance(b) <= radius_nm {
                let (ra, rb) = (root(&mut parent, i), root(&mut parent, j));
                parent[ra] = rb;
            }
        }
    }
    (0..n).filter(|&i| root(&mut parent, i) == i).count()
}

/// Thermal steady-state coherence vector for tunneling energy `gamma` and
/// field `field_z` (both joules) at `temperature_k`.
pub fn steady_state_coherence(gamma: f64, field_z: f64, temperature_k: f64) -> Result<[f64; 3], MetricsError> {
    if !(temperature_k > 0.0) {
        return Err(MetricsError::Temperature(temperature_k));
    }
    let h = [-2.0 * gamma, 0.0, field_z];
    let norm = h[0].hypot(h[2]);
    if norm == 0.0 {
        return Err(MetricsError::ZeroHamiltonian);
    }
    let t = (norm / (2.0 * BOLTZMANN * temperature_k)).tanh();
    Ok(h.map(|c| c / norm * t))
}

/// Energy released when a cell in state `before` relaxes under the
/// Hamiltonian `(gamma_after, field_after)`. Never negative.
pub fn event_dissipation(
    before: [f64; 3],
    gamma_after: f64,
    field_after: f64,
    temperature_k: f64,
) -> Result<f64, MetricsError> {
    let after = steady_state_coherence(gamma_after, field_after, temperature_k)?;
    let h = [-2.0 * gamma_after, 0.0, field_after];
    let e: f64 = (0..3).map(|k| h[k] * (after[k] - before[k])).sum::<f64>() / 2.0;
    Ok(e.max(0.0))
}

/// One column of the dissipation table. Energies are per clock cycle in
/// meV; pair indices are `u * 2^n + v` for the transition `u -> v`.
#[derive(Clone, Debug, PartialEq)]
pub struct DissipationReport {
    pub gamma_ratio: f64,
    pub kink_energy_mev: f64,
    pub max_circuit_mev: f64,
    pub avg_circuit_mev: f64,
    pub min_circuit_mev: f64,
    pub max_cell_mev: f64,
    pub avg_leakage_mev: f64,
    /// Absent when no transition changes the inputs.
    pub avg_switching_mev: Option<f64>,
    pub argmax_pair: usize,
    pub argmin_pair: usize,
    pub pairs: usize,
}

/// Per-cycle dissipation of every ordered vector pair for each ratio in
/// `gamma_ratios`. The layout must first pass verification against its
/// stored oracle.
pub fn dissipation_reports(
    layout: &QcaLayout,
    params: &SimParams,
    gamma_ratios: &[f64],
    threads: usize,
) -> Result<Vec<DissipationReport>, MetricsError> {
    if let Some(&r) = gamma_ratios.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(MetricsError::GammaRatio(r));
    }
    if !(params.temperature_k > 0.0) {
        return Err(MetricsError::Temperature(params.temperature_k));
    }
    let check = verify_layout(layout, params, None, DEFAULT_MARGIN, threads)?;
    if !check.report.pass {
        return Err(MetricsError::Unverified(check.report));
    }
    let periods = check.latency_cycles.max(1);
    let labels = layout.input_labels();
    let combos = 1u32 << labels.len();
    let mut vectors = Vec::with_capacity(2 * (combos * combos) as usize);
    for u in 0..combos {
        for v in 0..combos {
            vectors.extend([u, v]);
        }
    }
    let schedule = InputSchedule::from_vectors(&labels, vectors, periods * CLOCK_PERIOD, CLOCK_PERIOD)?;
    let traces = Simulator::new(layout, params)?.threads(threads).run(&schedule)?;
    let couplings = precompute_couplings(layout, params)?;
    let fields = FieldTrace::new(layout, &traces, &couplings, &schedule);
    let ek = adjacent_kink_energy(&layout.geometry, params.relative_permittivity);

    gamma_ratios
        .iter()
        .map(|&ratio| {
            let scale = ratio * ek / params.clock_high_j;
            let per_pair: Vec<Vec<f64>> = (0..(combos * combos) as usize)
                .into_par_iter()
                .map(|pair| fields.pair_energy(pair, scale, params.temperature_k, periods))
                .collect::<Result<_, _>>()?;
            Ok(summarize(ratio, ek, combos as usize, &per_pair))
        })
        .collect()
}

pub fn dissipation_report(
    layout: &QcaLayout,
    params: &SimParams,
    gamma_ratio: f64,
) -> Result<DissipationReport, MetricsError> {
    Ok(dissipation_reports(layout, params, &[gamma_ratio], 1)?.remove(0))
}

/// Splits each pair's energy cell by cell against the pair that holds the
/// destination vector: the part a cell would dissipate anyway is leakage,
/// anything above it is switching. Unchanged-input pairs are pure leakage.
fn summarize(ratio: f64, ek: f64, combos: usize, per_pair: &[Vec<f64>]) -> DissipationReport {
    let mev = |j: f64| j / JOULES_PER_MEV;
    let n = per_pair.len() as f64;
    let totals: Vec<f64> = per_pair.iter().map(|cells| cells.iter().sum()).collect();
    let (mut leakage, mut switching) = (0.0, 0.0);
    for (pair, cells) in per_pair.iter().enumerate() {
        let v = pair % combos;
        let hold = &per_pair[v * combos + v];
        for (e, base) in cells.iter().zip(hold) {
            leakage += e.min(*base);
            switching += (e - base).max(0.0);
        }
    }
    let (mut argmax, mut argmin) = (0, 0);
    for (k, t) in totals.iter().enumerate() {
        if *t > totals[argmax] {
            argmax = k;
        }
        if *t < totals[argmin] {
            argmin = k;
        }
    }
    DissipationReport {
        gamma_ratio: ratio,
        kink_energy_mev: mev(ek),
        max_circuit_mev: mev(totals[argmax]),
        avg_circuit_mev: mev(totals.iter().sum::<f64>() / n),
        min_circuit_mev: mev(totals[argmin]),
        max_cell_mev: mev(per_pair.iter().flatten().copied().fold(0.0, f64::max)),
        avg_leakage_mev: mev(leakage / n),
        avg_switching_mev: (combos > 1).then(|| mev(switching / n)),
        argmax_pair: argmax,
        argmin_pair: argmin,
        pairs: per_pair.len(),
    }
}

/// Clock and field of every relaxing cell at each quarter-period boundary.
struct FieldTrace {
    cells: Vec<(usize, u8)>,
    /// `[boundary][cell]` of (engine clock, field).
    points: Vec<Vec<(f64, f64)>>,
    quarter: usize,
    window: usize,
}

impl FieldTrace {
    fn new(
        layout: &QcaLayout,
        traces: &TraceSet,
        couplings: &crate::engine::CouplingTable,
        schedule: &InputSchedule,
    ) -> Self {
        let cells: Vec<(usize, u8)> = layout
            .cells
            .iter()
            .filter(|c| matches!(c.role, CellRole::Normal | CellRole::Output(_)))
            .map(|c| (c.id, c.zone))
            .collect();
        let quarter = schedule.clock_period() / 4;
        let column: HashMap<usize, usize> = traces.recorded.iter().enumerate().map(|(k, &c)| (c, k)).collect();
        let points = (0..traces.samples)
            .step_by(quarter)
            .map(|s| {
                let row = traces.row(s);
                let full: Vec<f64> = (0..layout.cells.len()).map(|c| row[column[&c]]).collect();
                cells
                    .iter()
                    .map(|&(c, z)| (traces.clock(z, s), couplings.field(c, &full)))
                    .collect()
            })
            .collect();
        FieldTrace {
            cells,
            points,
            quarter,
            window: schedule.window(),
        }
    }

    /// Circuit and worst-cell energy (joules per cycle) over the second
    /// window of pair `pair`.
    fn pair_energy(&self, pair: usize, scale: f64, temperature_k: f64, periods: usize) -> Result<Vec<f64>, MetricsError> {
        let first = (2 * pair + 1) * self.window / self.quarter;
        let last = first + self.window / self.quarter;
        let mut per_cell = vec![0.0; self.cells.len()];
        for b in first..last {
            for (k, e) in per_cell.iter_mut().enumerate() {
                let (g0, f0) = self.points[b - 1][k];
                let (g1, f1) = self.points[b][k];
                let before = steady_state_coherence(scale * g0, f0, temperature_k)?;
                *e += event_dissipation(before, scale * g1, f1, temperature_k)?;
            }
        }
        let cycles = periods as f64;
        Ok(per_cell.into_iter().map(|e| e / cycles).collect())
    }
}

/// Aligned text table with one column per report, followed by a
/// `key=value` block.
pub fn render_reports(reports: &[DissipationReport], input_count: usize) -> String {
    let mut s = String::new();
    let rows: [(&str, Box<dyn Fn(&DissipationReport) -> String>); 10] = [
        ("Tunneling energy / kink energy", Box::new(|r| format!("{:.2}", r.gamma_ratio))),
        ("Max kink energy (meV)", Box::new(|r| format!("{:.5}", r.kink_energy_mev))),
        ("Max energy dissipation of circuit (meV)", Box::new(|r| format!("{:.5}", r.max_circuit_mev))),
        ("Avg energy dissipation of circuit (meV)", Box::new(|r| format!("{:.5}", r.avg_circuit_mev))),
        ("Min energy dissipation of circuit (meV)", Box::new(|r| format!("{:.5}", r.min_circuit_mev))),
        ("Max energy dissipation of cell (meV)", Box::new(|r| format!("{:.5}", r.max_cell_mev))),
        ("Average leakage energy dissipation (meV)", Box::new(|r| format!("{:.5}", r.avg_leakage_mev))),
        (
            "Average switching energy dissipation (meV)",
            Box::new(|r| r.avg_switching_mev.map_or("absent".into(), |v| format!("{v:.5}"))),
        ),
        ("Max energy dissipation transition", Box::new(move |r| pair_name(r.argmax_pair, input_count))),
        ("Min energy dissipation transition", Box::new(move |r| pair_name(r.argmin_pair, input_count))),
    ];
    let label_w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    for (label, cell) in &rows {
        let _ = write!(s, "{label:<label_w$}");
        for r in reports {
            let _ = write!(s, "  {:>12}", cell(r));
        }
        s.push('\n');
    }
    s.push('\n');
    let _ = writeln!(s, "gamma_interpretation=tunneling_energy_over_adjacent_kink_energy");
    for (k, r) in reports.iter().enumerate() {
        let _ = writeln!(s, "[{k}] gamma_ratio={}", r.gamma_ratio);
        let _ = writeln!(s, "[{k}] kink_energy_meV={:.5}", r.kink_energy_mev);
        let _ = writeln!(s, "[{k}] max_circuit_meV={:.5}", r.max_circuit_mev);
        let _ = writeln!(s, "[{k}] avg_circuit_meV={:.5}", r.avg_circuit_mev);
        let _ = writeln!(s, "[{k}] min_circuit_meV={:.5}", r.min_circuit_mev);
        let _ = writeln!(s, "[{k}] max_cell_meV={:.5}", r.max_cell_mev);
        let _ = writeln!(s, "[{k}] avg_leakage_meV={:.5}", r.avg_leakage_mev);
        match r.avg_switching_mev {
            Some(v) => {
                let _ = writeln!(s, "[{k}] avg_switching_meV={v:.5}");
            }
            None => {
                let _ = writeln!(s, "[{k}] avg_switching_meV=absent");
            }
        }
        let _ = writeln!(s, "[{k}] argmax_pair={}", r.argmax_pair);
        let _ = writeln!(s, "[{k}] argmin_pair={}", r.argmin_pair);
    }
    s
}

fn pair_name(pair: usize, n: usize) -> String {
    let (u, v) = (pair >> n, pair & ((1 << n) - 1));
    if n == 0 {
        return format!("{pair}");
    }
    format!("{pair} ({u:0n$b}->{v:0n$b})")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::Geometry;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn norm(v: [f64; 3]) -> f64 {
        v.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    proptest! {
        #[test]
        fn coherence_norm_identity(g in -5e-22f64..5e-22, f in -5e-22f64..5e-22, t in 0.1f64..400.0) {
            prop_assume!(g.abs() + f.abs() > 1e-30);
            let l = steady_state_coherence(g, f, t).unwrap();
            let hbar_gamma = (4.0 * g * g + f * f).sqrt();
            let expected = (hbar_gamma / (2.0 * 1.380649e-23 * t)).tanh();
            prop_assert!((norm(l) - expected).abs() <= 1e-12);
            prop_assert!(event_dissipation(l, g, f, t).unwrap() >= 0.0);
        }

        #[test]
        fn dissipation_never_negative(
            g in 0.0f64..5e-22, f in -5e-22f64..5e-22,
            x in -0.57f64..0.57, y in -0.57f64..0.57, z in -0.57f64..0.57,
        ) {
            prop_assume!(g + f.abs() > 1e-30);
            prop_assert!(event_dissipation([x, y, z], g, f, 1.0).unwrap() >= 0.0);
        }
    }

    #[test]
    fn hot_limit_vanishes() {
        let l = steady_state_coherence(1e-22, 2e-22, 1e12).unwrap();
        assert!(norm(l) < 1e-10);
    }

    #[test]
    fn zero_field_points_along_minus_x() {
        let l = steady_state_coherence(1e-22, 0.0, 1.0).unwrap();
        assert!(l[0] < 0.0);
        assert_eq!(l[1], 0.0);
        assert_eq!(l[2], 0.0);
        assert_relative_eq!(l[0], -(1e-22f64 / 1.380649e-23).tanh(), max_relative = 1e-12);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(matches!(steady_state_coherence(0.0, 0.0, 1.0), Err(MetricsError::ZeroHamiltonian)));
        assert!(matches!(steady_state_coherence(1.0, 0.0, 0.0), Err(MetricsError::Temperature(_))));
    }

    #[test]
    fn equilibrium_dissipates_nothing() {
        let l = steady_state_coherence(1e-22, -3e-22, 1.0).unwrap();
        assert!(event_dissipation(l, 1e-22, -3e-22, 1.0).unwrap() < 1e-36);
    }

    #[test]
    fn field_reversal_golden() {
        // gamma = 1e-22 J, field +2e-22 -> -2e-22 at 1 K. Both states lie at
        // 45 degrees in the x-z plane with length t, so only the z parts
        // differ: before (-t/√2, 0, t/√2), after (-t/√2, 0, -t/√2).
        // E = ½ (-2e-22)(0) + ½ (-2e-22)(-2t/√2) = √2 t e-22 J.
        let hbar_gamma = (2.0f64 * 2.0 * 1e-44 + 4e-44).sqrt();
        let t = (hbar_gamma / (2.0 * 1.380649e-23)).tanh();
        let golden = 2f64.sqrt() * t * 1e-22;
        let before = steady_state_coherence(1e-22, 2e-22, 1.0).unwrap();
        let e = event_dissipation(before, 1e-22, -2e-22, 1.0).unwrap();
        assert_relative_eq!(e, golden, max_relative = 1e-12);
    }

    #[test]
    fn single_cell_metrics() {
        let mut l = QcaLayout::new("one", Geometry::default());
        l.push(0.0, 0.0, 0, CellRole::Normal);
        let m = layout_metrics(&l, 80.0).unwrap();
        assert_eq!(m.cell_count, 1);
        assert_relative_eq!(m.area_um2, 0.000324, max_relative = 1e-12);
        assert_eq!(m.clock_zone_regions, 1);
        assert!(matches!(
            layout_metrics(&QcaLayout::new("none", Geometry::default()), 80.0),
            Err(MetricsError::EmptyLayout)
        ));
    }

    #[test]
    fn regions_split_by_zone_and_distance() {
        let mut l = QcaLayout::new("r", Geometry::default());
        for x in 0..3 {
            l.push(20.0 * x as f64, 0.0, 0, CellRole::Normal);
        }
        for x in 3..6 {
            l.push(20.0 * x as f64, 0.0, 1, CellRole::Normal);
        }
        l.push(400.0, 0.0, 0, CellRole::Normal);
        assert_eq!(layout_metrics(&l, 80.0).unwrap().clock_zone_regions, 3);
    }

    #[test]
    fn pair_names() {
        assert_eq!(pair_name(6, 2), "6 (01->10)");
        assert_eq!(pair_name(0, 0), "0");
    }
}

