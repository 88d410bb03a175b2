//! Truth-table extraction from simulated traces and checks against Boolean
//! oracles.
//!
//! A vector is decided at one sample: the hold-plateau centre of the output
//! cell's clock zone in the last clock period of the vector's window. The
//! window must span at least as many periods as the layout's pipeline
//! latency, otherwise the sample may still show the previous vector.

mod oracle;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::{self, Write as _};

use thiserror::Error;

pub use oracle::{BoolExpr, Oracle, OracleError};

use crate::engine::{hold_centre_offset, EngineError, InputSchedule, Simulator, TraceSet};
use crate::layout::QcaLayout;
use crate::params::SimParams;

pub const DEFAULT_MARGIN: f64 = 0.5;
/// Samples per clock period in verification runs.
pub const CLOCK_PERIOD: usize = 16;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("layout has no input or fixed cell")]
    NoDriver,
    #[error("layout has no output cell")]
    NoOutput,
    #[error("output `{0}` is unreachable from every driver")]
    Unreachable(String),
    #[error("schedule is not exhaustive: {0}")]
    NotExhaustive(String),
    #[error("traces hold {found} samples, schedule needs {expected}")]
    Incomplete { expected: usize, found: usize },
    #[error("output cell {0} was not recorded")]
    NotRecorded(usize),
    #[error("window of {periods} clock periods is shorter than the latency of {latency}")]
    WindowTooShort { periods: usize, latency: usize },
    #[error(
        "indeterminate output `{label}` (cell {cell}) at sample {sample}: |P| = {magnitude:.4} < {threshold}"
    )]
    Indeterminate {
        label: String,
        cell: usize,
        sample: usize,
        magnitude: f64,
        threshold: f64,
    },
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("layout declares no oracle")]
    NoOracle,
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Output bits for every input vector. Vector bit `n - 1 - j` is input `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthTable {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub rows: BTreeMap<u32, Vec<bool>>,
    /// `|P|` behind each output bit.
    pub margins: BTreeMap<u32, Vec<f64>>,
    /// Sample at which each row was decided.
    pub samples: BTreeMap<u32, usize>,
}

impl TruthTable {
    pub fn min_margin(&self) -> f64 {
        self.margins
            .values()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} | {}", self.inputs.join(" "), self.outputs.join(" "));
        let n = self.inputs.len();
        for (v, bits) in &self.rows {
            let ins: Vec<String> = (0..n).map(|j| ((v >> (n - 1 - j)) & 1).to_string()).collect();
            let outs: Vec<String> = bits.iter().map(|b| u8::from(*b).to_string()).collect();
            let margins: Vec<String> = self.margins[v].iter().map(|m| format!("{m:.4}")).collect();
            let _ = writeln!(
                s,
                "{} | {}   margin {} sample {}",
                ins.join(" "),
                outs.join(" "),
                margins.join(" "),
                self.samples[v]
            );
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub vector: u32,
    pub expected: Vec<bool>,
    pub observed: Vec<bool>,
    pub sample: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub pass: bool,
    pub mismatches: Vec<Mismatch>,
    pub latency_cycles: usize,
    pub min_margin: f64,
    pub rows: usize,
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verification: {}", if self.pass { "PASS" } else { "FAIL" })?;
        writeln!(f, "rows checked: {}", self.rows)?;
        for m in &self.mismatches {
            let bits = |b: &[bool]| b.iter().map(|x| if *x { '1' } else { '0' }).collect::<String>();
            writeln!(
                f,
                "mismatch: vector {} expected {} observed {} at sample {}",
                m.vector,
                bits(&m.expected),
                bits(&m.observed),
                m.sample
            )?;
        }
        writeln!(f)?;
        writeln!(f, "pass={}", self.pass)?;
        writeln!(f, "mismatches={}", self.mismatches.len())?;
        writeln!(f, "latency_cycles={}", self.latency_cycles)?;
        writeln!(f, "min_margin={:.6}", self.min_margin)
    }
}

/// Cells closer than this many grid pitches carry signal between each other.
const SIGNAL_REACH: f64 = 1.5;

/// Pipeline depth in clock cycles: the zone steps from the slowest input to
/// an output, divided by four and rounded up.
///
/// Steps are counted on the nearest-neighbour graph (adjacent and diagonal
/// cells). A cell next to a driver starts at its own zone index, the number
/// of quarter periods after a vector change at which it first switches.
/// Signal moves between cells in the same zone (no step) or into the next
/// zone (one step); other edges carry nothing forward.
pub fn estimate_latency(layout: &QcaLayout) -> Result<usize, VerifyError> {
    let outputs: Vec<_> = layout.outputs().collect();
    if outputs.is_empty() {
        return Err(VerifyError::NoOutput);
    }
    let inputs: Vec<usize> = layout.inputs().map(|c| c.id).collect();
    let drivers: Vec<usize> = if inputs.is_empty() {
        layout
            .cells
            .iter()
            .filter(|c| c.role.is_driver())
            .map(|c| c.id)
            .collect()
    } else {
        inputs
    };
    if drivers.is_empty() {
        return Err(VerifyError::NoDriver);
    }
    let adj = neighbour_graph(layout);
    let mut worst = vec![0usize; layout.cells.len()];
    let mut reached = vec![true; layout.cells.len()];
    for &o in &outputs {
        reached[o.id] = false;
    }
    for &d in &drivers {
        let dist = zone_steps_from(layout, &adj, d);
        for o in &outputs {
            if let Some(s) = dist[o.id] {
                worst[o.id] = worst[o.id].max(s);
                reached[o.id] = true;
            }
        }
    }
    if let Some(o) = outputs.iter().find(|o| !reached[o.id]) {
        return Err(VerifyError::Unreachable(
            o.role.label().unwrap_or_default().to_string(),
        ));
    }
    Ok(outputs.iter().map(|o| worst[o.id].div_ceil(4)).max().unwrap_or(0))
}

fn neighbour_graph(layout: &QcaLayout) -> Vec<Vec<usize>> {
    let reach = SIGNAL_REACH * layout.geometry.grid_pitch_nm;
    let mut order: Vec<usize> = (0..layout.cells.len()).collect();
    order.sort_by(|&a, &b| layout.cells[a].x.total_cmp(&layout.cells[b].x));
    let mut adj = vec![Vec::new(); layout.cells.len()];
    for (i, &a) in order.iter().enumerate() {
        for &b in &order[i + 1..] {
            if layout.cells[b].x - layout.cells[a].x > reach {
                break;
            }
            if layout.cells[a].distance(&layout.cells[b]) <= reach {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
    }
    adj
}

/// Fewest zone steps from driver `d` to every cell (0-1 BFS).
fn zone_steps_from(layout: &QcaLayout, adj: &[Vec<usize>], d: usize) -> Vec<Option<usize>> {
    let mut dist: Vec<Option<usize>> = vec![None; layout.cells.len()];
    let mut queue = VecDeque::new();
    for &n in &adj[d] {
        if layout.cells[n].role.is_driver() {
            continue;
        }
        let s = usize::from(layout.cells[n].zone);
        if dist[n].is_none_or(|old| s < old) {
            dist[n] = Some(s);
            queue.push_back(n);
        }
    }
    // Seeds carry different costs, so relax until stable; each cell's value
    // only decreases.
    while let Some(a) = queue.pop_front() {
        let da = dist[a].expect("queued cells have a distance");
        for &b in &adj[a] {
            if layout.cells[b].role.is_driver() {
                continue;
            }
            let step = (4 + layout.cells[b].zone - layout.cells[a].zone) % 4;
            if step > 1 {
                continue;
            }
            let db = da + usize::from(step);
            if dist[b].is_none_or(|old| db < old) {
                dist[b] = Some(db);
                if step == 0 {
                    queue.push_front(b);
                } else {
                    queue.push_back(b);
                }
            }
        }
    }
    dist
}

/// Reads one output bit per vector from `traces`.
///
/// `schedule` must visit every input vector exactly once, in any order. Each
/// output is decided at its zone's hold centre in the last clock period of
/// the vector's window, and must be at least `margin` away from zero.
pub fn extract_truth_table(
    traces: &TraceSet,
    layout: &QcaLayout,
    schedule: &InputSchedule,
    latency_cycles: usize,
    margin: f64,
) -> Result<TruthTable, VerifyError> {
    let n = schedule.labels().len();
    let mut seen = vec![false; 1 << n];
    for &v in schedule.vectors() {
        let slot = seen
            .get_mut(v as usize)
            .ok_or_else(|| VerifyError::NotExhaustive(format!("vector {v} out of range")))?;
        if std::mem::replace(slot, true) {
            return Err(VerifyError::NotExhaustive(format!("vector {v} visited twice")));
        }
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return Err(VerifyError::NotExhaustive(format!("vector {v} never applied")));
    }
    if traces.samples != schedule.num_samples() {
        return Err(VerifyError::Incomplete {
            expected: schedule.num_samples(),
            found: traces.samples,
        });
    }
    let periods = schedule.periods_per_vector();
    if periods < latency_cycles.max(1) {
        return Err(VerifyError::WindowTooShort {
            periods,
            latency: latency_cycles,
        });
    }
    let outputs: Vec<_> = layout.outputs().collect();
    if outputs.is_empty() {
        return Err(VerifyError::NoOutput);
    }
    let t = schedule.clock_period();
    let window = schedule.window();
    let mut table = TruthTable {
        inputs: schedule.labels().to_vec(),
        outputs: outputs
            .iter()
            .map(|c| c.role.label().unwrap_or_default().to_string())
            .collect(),
        rows: BTreeMap::new(),
        margins: BTreeMap::new(),
        samples: BTreeMap::new(),
    };
    for (k, &v) in schedule.vectors().iter().enumerate() {
        let mut bits = Vec::with_capacity(outputs.len());
        let mut margins = Vec::with_capacity(outputs.len());
        let mut sample = 0;
        for o in &outputs {
            sample = k * window + (periods - 1) * t + hold_centre_offset(o.zone, t);
            let p = traces
                .polarization(o.id, sample)
                .ok_or(VerifyError::NotRecorded(o.id))?;
            if p.abs() < margin {
                return Err(VerifyError::Indeterminate {
                    label: o.role.label().unwrap_or_default().to_string(),
                    cell: o.id,
                    sample,
                    magnitude: p.abs(),
                    threshold: margin,
                });
            }
            bits.push(p > 0.0);
            margins.push(p.abs());
        }
        table.rows.insert(v, bits);
        table.margins.insert(v, margins);
        table.samples.insert(v, sample);
    }
    Ok(table)
}

/// Compares every row of `table` with `oracle`. Unlabelled oracle items map
/// to the outputs in order; labelled ones by name.
pub fn verify(
    table: &TruthTable,
    oracle: &Oracle,
    latency_cycles: usize,
) -> Result<VerifyReport, VerifyError> {
    if oracle.outputs.len() != table.outputs.len() {
        return Err(VerifyError::Arity(format!(
            "oracle defines {} outputs, table has {}",
            oracle.outputs.len(),
            table.outputs.len()
        )));
    }
    let exprs: Vec<&BoolExpr> = if oracle.outputs.iter().all(|(l, _)| l.is_some()) && table.outputs.len() > 1 {
        table
            .outputs
            .iter()
            .map(|name| {
                oracle
                    .outputs
                    .iter()
                    .find(|(l, _)| l.as_deref() == Some(name))
                    .map(|(_, e)| e)
                    .ok_or_else(|| VerifyError::Arity(format!("oracle has no output `{name}`")))
            })
            .collect::<Result<_, _>>()?
    } else {
        oracle.outputs.iter().map(|(_, e)| e).collect()
    };
    if let Some(v) = oracle.variables().into_iter().find(|v| !table.inputs.contains(v)) {
        return Err(VerifyError::Arity(format!(
            "oracle variable `{v}` is not an input of the table ({})",
            table.inputs.join(", ")
        )));
    }
    let n = table.inputs.len();
    let mut mismatches = Vec::new();
    for (&v, observed) in &table.rows {
        let vars: HashMap<&str, bool> = table
            .inputs
            .iter()
            .enumerate()
            .map(|(j, l)| (l.as_str(), (v >> (n - 1 - j)) & 1 == 1))
            .collect();
        let expected: Vec<bool> = exprs
            .iter()
            .map(|e| e.eval(&vars).expect("variables checked above"))
            .collect();
        if &expected != observed {
            mismatches.push(Mismatch {
                vector: v,
                expected,
                observed: observed.clone(),
                sample: table.samples[&v],
            });
        }
    }
    Ok(VerifyReport {
        pass: mismatches.is_empty(),
        mismatches,
        latency_cycles,
        min_margin: table.min_margin(),
        rows: table.rows.len(),
    })
}

/// Every input vector in binary counting order, each held for
/// `max(latency, 1)` clock periods.
pub fn exhaustive_schedule(
    layout: &QcaLayout,
    latency_cycles: usize,
    clock_period: usize,
) -> Result<InputSchedule, EngineError> {
    let labels = layout.input_labels();
    let vectors = (0..1u32 << labels.len()).collect();
    InputSchedule::from_vectors(&labels, vectors, latency_cycles.max(1) * clock_period, clock_period)
}

/// Everything produced while checking a layout against an oracle.
#[derive(Debug)]
pub struct LayoutCheck {
    pub latency_cycles: usize,
    pub schedule: InputSchedule,
    pub traces: TraceSet,
    pub table: TruthTable,
    pub report: VerifyReport,
}

/// Simulates `layout` over all input vectors and compares the outputs with
/// `oracle`, or with the oracle stored in the layout when `oracle` is `None`.
pub fn verify_layout(
    layout: &QcaLayout,
    params: &SimParams,
    oracle: Option<&Oracle>,
    margin: f64,
    threads: usize,
) -> Result<LayoutCheck, VerifyError> {
    let stored;
    let oracle = match oracle {
        Some(o) => o,
        None => {
            stored = Oracle::parse(layout.oracle.as_deref().ok_or(VerifyError::NoOracle)?)?;
            &stored
        }
    };
    let latency_cycles = estimate_latency(layout)?;
    let schedule = exhaustive_schedule(layout, latency_cycles, CLOCK_PERIOD)?;
    let traces = Simulator::new(layout, params)?.threads(threads).run(&schedule)?;
    let table = extract_truth_table(&traces, layout, &schedule, latency_cycles, margin)?;
    let report = verify(&table, oracle, latency_cycles)?;
    Ok(LayoutCheck {
        latency_cycles,
        schedule,
        traces,
        table,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{CellRole, Geometry};

    fn line(zones: &[u8]) -> QcaLayout {
        let mut l = QcaLayout::new("w", Geometry::default());
        l.push(0.0, 0.0, 0, CellRole::Input("A".into()));
        for (k, &z) in zones.iter().enumerate() {
            let role = if k + 1 == zones.len() {
                CellRole::Output("F".into())
            } else {
                CellRole::Normal
            };
            l.push(20.0 * (k + 1) as f64, 0.0, z, role);
        }
        l
    }

    #[test]
    fn latency_of_zone_zero_wire_is_zero() {
        assert_eq!(estimate_latency(&line(&[0, 0, 0, 0])).unwrap(), 0);
    }

    #[test]
    fn latency_of_one_full_zone_sweep() {
        assert_eq!(estimate_latency(&line(&[0, 1, 2, 3])).unwrap(), 1);
        assert_eq!(estimate_latency(&line(&[0, 1, 2, 3, 0])).unwrap(), 1);
        assert_eq!(estimate_latency(&line(&[0, 1, 2, 3, 0, 1])).unwrap(), 2);
    }

    #[test]
    fn unreachable_output() {
        let mut l = line(&[0, 0]);
        l.push(200.0, 0.0, 0, CellRole::Output("G".into()));
        assert!(matches!(estimate_latency(&l), Err(VerifyError::Unreachable(g)) if g == "G"));
    }

    #[test]
    fn no_output() {
        let mut l = QcaLayout::new("x", Geometry::default());
        l.push(0.0, 0.0, 0, CellRole::Input("A".into()));
        assert!(matches!(estimate_latency(&l), Err(VerifyError::NoOutput)));
    }

    fn table_of(bits: &[bool]) -> TruthTable {
        let rows: BTreeMap<u32, Vec<bool>> = bits.iter().enumerate().map(|(v, b)| (v as u32, vec![*b])).collect();
        TruthTable {
            inputs: vec!["A".into(), "B".into()],
            outputs: vec!["F".into()],
            margins: rows.keys().map(|&v| (v, vec![0.9])).collect(),
            samples: rows.keys().map(|&v| (v, v as usize * 10)).collect(),
            rows,
        }
    }

    #[test]
    fn xor_table_against_and() {
        let t = table_of(&[false, true, true, false]);
        let ok = verify(&t, &Oracle::parse("A⊕B").unwrap(), 0).unwrap();
        assert!(ok.pass && ok.mismatches.is_empty());
        let bad = verify(&t, &Oracle::parse("A&B").unwrap(), 0).unwrap();
        assert!(!bad.pass);
        let vs: Vec<u32> = bad.mismatches.iter().map(|m| m.vector).collect();
        assert_eq!(vs, [1, 2, 3]);
        assert_eq!(bad.mismatches[0].expected, [false]);
        assert_eq!(bad.mismatches[2].observed, [false]);
        assert_eq!(bad.mismatches[2].sample, 30);
    }

    #[test]
    fn arity_mismatch() {
        let t = table_of(&[false, true, true, false]);
        assert!(matches!(
            verify(&t, &Oracle::parse("A^C").unwrap(), 0),
            Err(VerifyError::Arity(_))
        ));
        assert!(matches!(
            verify(&t, &Oracle::parse("A; B").unwrap(), 0),
            Err(VerifyError::Arity(_))
        ));
    }
}
