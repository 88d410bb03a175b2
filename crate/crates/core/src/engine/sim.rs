//! Per-sample relaxation and whole-run simulation.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::layout::{CellRole, QcaLayout};
use crate::params::SimParams;

use super::clock::clock_value;
use super::coupling::{precompute_couplings, CouplingTable};
use super::schedule::InputSchedule;
use super::EngineError;

/// Below this many relaxing cells a sweep runs on the calling thread; the
/// result is identical either way.
const PARALLEL_THRESHOLD: usize = 512;

/// Weight of the new bistable response in each Jacobi update. Undamped
/// simultaneous updates can lock ferromagnetically coupled chains into a
/// period-2 checkerboard; blending with the previous sweep removes that cycle
/// without moving the fixed points.
pub const SWEEP_WEIGHT: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct Relaxation {
    pub state: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Bistable response of a cell to field `f`.
#[inline]
pub fn bistable_response(f: f64) -> f64 {
    f / (1.0 + f * f).sqrt()
}

struct Kernel<'a> {
    couplings: &'a CouplingTable,
    relaxing: &'a [usize],
    zones: &'a [u8],
    weight: f64,
}

impl Kernel<'_> {
    #[inline]
    fn update(&self, cell: usize, gamma: &[f64; 4], state: &[f64]) -> f64 {
        let f = self.couplings.field(cell, state) / (2.0 * gamma[usize::from(self.zones[cell])]);
        bistable_response(f)
    }

    /// Jacobi sweeps until the largest change drops below `tolerance`.
    fn run(
        &self,
        gamma: &[f64; 4],
        state: &mut Vec<f64>,
        tolerance: f64,
        max_iter: usize,
        pool: Option<&rayon::ThreadPool>,
        fresh: &mut Vec<f64>,
    ) -> (usize, bool) {
        let mut next = state.clone();
        for iter in 1..=max_iter {
            match pool {
                Some(pool) if self.relaxing.len() >= PARALLEL_THRESHOLD => {
                    let prev: &[f64] = state;
                    pool.install(|| {
                        self.relaxing
                            .par_iter()
                            .map(|&i| self.update(i, gamma, prev))
                            .collect_into_vec(fresh)
                    });
                }
                _ => {
                    fresh.clear();
                    fresh.extend(self.relaxing.iter().map(|&i| self.update(i, gamma, state)));
                }
            }
            // Convergence is judged on the undamped residual |g(f) - P|, and
            // the converging sweep is committed undamped.
            let delta = self
                .relaxing
                .iter()
                .zip(fresh.iter())
                .fold(0.0f64, |d, (&i, &p)| d.max((p - state[i]).abs()));
            if delta < tolerance {
                for (&i, &p) in self.relaxing.iter().zip(fresh.iter()) {
                    state[i] = p;
                }
                return (iter, true);
            }
            for (&i, &p) in self.relaxing.iter().zip(fresh.iter()) {
                let old = state[i];
                next[i] = old + self.weight * (p - old);
            }
            std::mem::swap(state, &mut next);
        }
        (max_iter, false)
    }
}

fn relaxing_cells(layout: &QcaLayout) -> Vec<usize> {
    layout
        .cells
        .iter()
        .filter(|c| !c.role.is_driver())
        .map(|c| c.id)
        .collect()
}

fn zones(layout: &QcaLayout) -> Vec<u8> {
    layout.cells.iter().map(|c| c.zone.min(3)).collect()
}

/// Relaxes every non-driver cell of `layout` to the bistable fixed point under
/// per-zone tunneling energies `gamma`. Driver entries of `initial` are held.
pub fn relax(
    layout: &QcaLayout,
    couplings: &CouplingTable,
    gamma: &[f64; 4],
    initial: &[f64],
    tolerance: f64,
    max_iter: usize,
) -> Relaxation {
    let relaxing = relaxing_cells(layout);
    let zones = zones(layout);
    let kernel = Kernel {
        couplings,
        relaxing: &relaxing,
        zones: &zones,
        weight: SWEEP_WEIGHT,
    };
    let mut state = initial.to_vec();
    let mut fresh = Vec::with_capacity(relaxing.len());
    let (iterations, converged) =
        kernel.run(gamma, &mut state, tolerance, max_iter.max(1), None, &mut fresh);
    Relaxation {
        state,
        iterations,
        converged,
    }
}

/// Which cells a run records.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TraceScope {
    #[default]
    AllCells,
    /// Only input and output cells, for long runs.
    Labelled,
}

/// Polarization and clock time series of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceSet {
    pub samples: usize,
    pub clock_period: usize,
    /// Cell ids with a recorded series, ascending.
    pub recorded: Vec<usize>,
    /// Row-major `[sample][recorded index]`.
    polarization: Vec<f64>,
    /// Row-major `[sample][zone]`.
    clocks: Vec<[f64; 4]>,
    pub iterations: Vec<u32>,
    pub converged: Vec<bool>,
    /// `(cell id, label)` for every labelled cell, in cell order.
    pub labels: Vec<(usize, String)>,
}

impl TraceSet {
    fn column(&self, cell: usize) -> Option<usize> {
        self.recorded.binary_search(&cell).ok()
    }

    pub fn polarization(&self, cell: usize, sample: usize) -> Option<f64> {
        let col = self.column(cell)?;
        (sample < self.samples).then(|| self.polarization[sample * self.recorded.len() + col])
    }

    /// Full state row at `sample`, indexed like `recorded`.
    pub fn row(&self, sample: usize) -> &[f64] {
        let w = self.recorded.len();
        &self.polarization[sample * w..(sample + 1) * w]
    }

    pub fn series(&self, cell: usize) -> Option<Vec<f64>> {
        let col = self.column(cell)?;
        let w = self.recorded.len();
        Some((0..self.samples).map(|s| self.polarization[s * w + col]).collect())
    }

    pub fn clock(&self, zone: u8, sample: usize) -> f64 {
        self.clocks[sample][usize::from(zone)]
    }

    pub fn label_cell(&self, label: &str) -> Option<usize> {
        self.labels.iter().find(|(_, l)| l == label).map(|(id, _)| *id)
    }

    pub fn unconverged_samples(&self) -> usize {
        self.converged.iter().filter(|c| !**c).count()
    }

    pub fn max_iterations(&self) -> u32 {
        self.iterations.iter().copied().max().unwrap_or(0)
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.iterations.is_empty() {
            return 0.0;
        }
        self.iterations.iter().map(|&i| f64::from(i)).sum::<f64>() / self.iterations.len() as f64
    }

    pub fn summary(&self) -> String {
        format!(
            "samples={} unconverged={} max_iterations={} mean_iterations={:.2}",
            self.samples,
            self.unconverged_samples(),
            self.max_iterations(),
            self.mean_iterations()
        )
    }

    /// CSV with header `sample,clock0..clock3,<labels>`, every `stride`-th row.
    pub fn to_csv(&self, stride: usize) -> String {
        let stride = stride.max(1);
        let mut s = String::from("sample,clock0,clock1,clock2,clock3");
        for (_, l) in &self.labels {
            s.push(',');
            s.push_str(l);
        }
        s.push('\n');
        let cols: Vec<Option<usize>> = self.labels.iter().map(|(id, _)| self.column(*id)).collect();
        let w = self.recorded.len();
        for sample in (0..self.samples).step_by(stride) {
            let _ = write!(s, "{sample}");
            for z in 0..4 {
                s.push(',');
                s.push_str(&format_sig(self.clocks[sample][z], 6));
            }
            for col in &cols {
                s.push(',');
                if let Some(c) = col {
                    s.push_str(&format_sig(self.polarization[sample * w + c], 6));
                }
            }
            s.push('\n');
        }
        s
    }
}

/// `%g`-style formatting with `sig` significant digits.
pub fn format_sig(v: f64, sig: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_finite() { "0".into() } else { v.to_string() };
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, v);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    let trim = |m: &str| -> String {
        if m.contains('.') {
            m.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            m.to_string()
        }
    };
    if exp < -4 || exp >= sig as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mant), sign, exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        let s = trim(&format!("{v:.decimals$}"));
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    }
}

/// Prepared simulation of one layout: couplings, zones, and driver wiring.
pub struct Simulator<'a> {
    layout: &'a QcaLayout,
    params: SimParams,
    couplings: CouplingTable,
    relaxing: Vec<usize>,
    zones: Vec<u8>,
    threads: usize,
    scope: TraceScope,
}

impl<'a> Simulator<'a> {
    pub fn new(layout: &'a QcaLayout, params: &SimParams) -> Result<Self, EngineError> {
        params.validate()?;
        let diags = layout.validate();
        if !diags.is_empty() {
            return Err(EngineError::InvalidLayout(diags));
        }
        let couplings = precompute_couplings(layout, params)?;
        Ok(Self {
            layout,
            params: params.clone(),
            couplings,
            relaxing: relaxing_cells(layout),
            zones: zones(layout),
            threads: 1,
            scope: TraceScope::AllCells,
        })
    }

    /// Worker threads used inside each relaxation sweep.
    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn scope(mut self, scope: TraceScope) -> Self {
        self.scope = scope;
        self
    }

    pub fn couplings(&self) -> &CouplingTable {
        &self.couplings
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn run(&self, schedule: &InputSchedule) -> Result<TraceSet, EngineError> {
        let layout = self.layout;
        let mut expected = layout.input_labels();
        let mut found = schedule.labels().to_vec();
        expected.sort();
        found.sort();
        if expected != found {
            return Err(EngineError::LabelMismatch { expected, found });
        }
        let label_index: HashMap<&str, usize> = schedule
            .labels()
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let inputs: Vec<(usize, usize)> = layout
            .inputs()
            .map(|c| (c.id, label_index[c.role.label().unwrap_or_default()]))
            .collect();

        let pool = if self.threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(self.threads)
                    .build()
                    .map_err(|e| EngineError::Threads(e.to_string()))?,
            )
        } else {
            None
        };

        let recorded: Vec<usize> = match self.scope {
            TraceScope::AllCells => (0..layout.cells.len()).collect(),
            TraceScope::Labelled => layout
                .cells
                .iter()
                .filter(|c| c.role.label().is_some())
                .map(|c| c.id)
                .collect(),
        };
        let samples = schedule.num_samples();
        let period = schedule.clock_period();
        let mut state: Vec<f64> = layout
            .cells
            .iter()
            .map(|c| match c.role {
                CellRole::Fixed(p) => p,
                _ => 0.0,
            })
            .collect();

        let kernel = Kernel {
            couplings: &self.couplings,
            relaxing: &self.relaxing,
            zones: &self.zones,
            weight: SWEEP_WEIGHT,
        };
        let mut polarization = Vec::with_capacity(samples * recorded.len());
        let mut clocks = Vec::with_capacity(samples);
        let mut iterations = Vec::with_capacity(samples);
        let mut converged = Vec::with_capacity(samples);
        let mut fresh = Vec::with_capacity(self.relaxing.len());
        for sample in 0..samples {
            for &(cell, label) in &inputs {
                state[cell] = schedule.polarization(label, sample);
            }
            let gamma: [f64; 4] =
                std::array::from_fn(|z| clock_value(z as u8, sample, &self.params, period));
            let (iters, ok) = kernel.run(
                &gamma,
                &mut state,
                self.params.convergence_tolerance,
                self.params.max_iterations_per_sample,
                pool.as_ref(),
                &mut fresh,
            );
            debug_assert!(state.iter().all(|p| p.abs() <= 1.0));
            polarization.extend(recorded.iter().map(|&i| state[i]));
            clocks.push(gamma);
            iterations.push(iters as u32);
            converged.push(ok);
        }
        Ok(TraceSet {
            samples,
            clock_period: period,
            recorded,
            polarization,
            clocks,
            iterations,
            converged,
            labels: layout
                .cells
                .iter()
                .filter_map(|c| c.role.label().map(|l| (c.id, l.to_string())))
                .collect(),
        })
    }
}

/// Convenience wrapper: prepare and run on the calling thread.
pub fn simulate(
    layout: &QcaLayout,
    params: &SimParams,
    schedule: &InputSchedule,
) -> Result<TraceSet, EngineError> {
    Simulator::new(layout, params)?.run(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::coupling::kink_energy;
    use crate::layout::Geometry;

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(9.8e-22, 6), "9.8e-22");
        assert_eq!(format_sig(3.8e-23, 6), "3.8e-23");
        assert_eq!(format_sig(0.9876543, 6), "0.987654");
        assert_eq!(format_sig(-1.0, 6), "-1");
        assert_eq!(format_sig(0.0001234567, 6), "0.000123457");
        assert_eq!(format_sig(0.00001, 6), "1e-05");
        assert_eq!(format_sig(1234567.0, 6), "1.23457e+06");
        assert_eq!(format_sig(0.0, 6), "0");
    }

    #[test]
    fn no_relaxing_cells_converges_immediately() {
        let mut l = QcaLayout::new("", Geometry::default());
        l.push(0.0, 0.0, 0, CellRole::Fixed(1.0));
        l.push(20.0, 0.0, 0, CellRole::Input("A".into()));
        let t = precompute_couplings(&l, &SimParams::default()).unwrap();
        let r = relax(&l, &t, &[3.8e-23; 4], &[1.0, -1.0], 1e-3, 100);
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
        assert_eq!(r.state, vec![1.0, -1.0]);
    }

    #[test]
    fn single_follower_closed_form() {
        let mut l = QcaLayout::new("", Geometry::default());
        l.push(0.0, 0.0, 0, CellRole::Fixed(1.0));
        l.push(20.0, 0.0, 0, CellRole::Normal);
        let p = SimParams::default();
        let t = precompute_couplings(&l, &p).unwrap();
        let r = relax(&l, &t, &[p.clock_low_j; 4], &[1.0, 0.0], 1e-3, 100);
        let ek = kink_energy(&l.cells[0], &l.cells[1], &l.geometry, 12.9).unwrap();
        let f = ek / (2.0 * p.clock_low_j);
        assert!((r.state[1] - f / (1.0 + f * f).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn label_mismatch() {
        let mut l = QcaLayout::new("", Geometry::default());
        l.push(0.0, 0.0, 0, CellRole::Input("A".into()));
        let s = InputSchedule::exhaustive(&["B".to_string()], 8).unwrap();
        assert!(matches!(
            simulate(&l, &SimParams::default(), &s),
            Err(EngineError::LabelMismatch { .. })
        ));
    }
}
