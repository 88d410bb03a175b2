//! Akers logic arrays with a stored-Z memory plane.
//!
//! Every cell computes `F(X, Y, Z) = X·Z̄ + Y·Z`: a 2:1 multiplexer whose
//! select line `Z` normally comes from a memory slot, so the stored plane
//! decides what the array computes. Networks are DAGs of such cells.
//!
//! Network files are line based:
//!
//! ```text
//! qcapim-net v1
//! name xor
//! inputs A B
//! cell 1 x=0 y=1 z=in:B
//! cell 2 x=1 y=0 z=in:B
//! cell 3 x=c1 y=c2 z=in:A
//! cell 4 x=c3 y=c3 z=0
//! out c4
//! ```

mod synth;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

pub use synth::{
    majority_layout, synthesize_network_layout, synthesize_primitive_layout, wire_layout,
    inverter_layout, SynthError,
};

pub const NETWORK_HEADER: &str = "qcapim-net v1";

/// `x·z̄ + y·z`.
#[inline]
pub fn eval_cell(x: bool, y: bool, z: bool) -> bool {
    (x && !z) || (y && z)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignalRef {
    Const(bool),
    Input(String),
    Memory(String),
    Cell(usize),
}

impl fmt::Display for SignalRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignalRef::Const(b) => write!(f, "{}", u8::from(*b)),
            SignalRef::Input(l) => write!(f, "in:{l}"),
            SignalRef::Memory(s) => write!(f, "mem:{s}"),
            SignalRef::Cell(id) => write!(f, "c{id}"),
        }
    }
}

impl SignalRef {
    pub fn parse(s: &str) -> Option<SignalRef> {
        match s {
            "0" => return Some(SignalRef::Const(false)),
            "1" => return Some(SignalRef::Const(true)),
            _ => {}
        }
        if let Some(l) = s.strip_prefix("in:") {
            return valid_name(l).then(|| SignalRef::Input(l.to_string()));
        }
        if let Some(l) = s.strip_prefix("mem:") {
            return valid_name(l).then(|| SignalRef::Memory(l.to_string()));
        }
        s.strip_prefix('c')
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|d| d.parse().ok())
            .map(SignalRef::Cell)
    }
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AkersCellSpec {
    pub id: usize,
    pub x: SignalRef,
    pub y: SignalRef,
    pub z: SignalRef,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AkersNetwork {
    pub name: String,
    /// External input labels; the first is the most significant bit of a
    /// truth-table row.
    pub inputs: Vec<String>,
    pub cells: Vec<AkersCellSpec>,
    pub outputs: Vec<usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AkersError {
    #[error("unknown memory slot {0:?}")]
    UnknownSlot(String),
    #[error("cell c{cell}: unresolved reference {reference}")]
    Unresolved { cell: usize, reference: String },
    #[error("unresolved output c{0}")]
    UnresolvedOutput(usize),
    #[error("cell c{0} references itself")]
    SelfReference(usize),
    #[error("cell c{0}: z must be a memory slot, an input or a constant")]
    CellSelect(usize),
    #[error("duplicate cell id c{0}")]
    DuplicateCell(usize),
    #[error("cycle through cells {0:?}")]
    Cycle(Vec<usize>),
    #[error("missing value for input {0:?}")]
    MissingInput(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Stored select bits, addressed by slot name. Slots are declared up front;
/// writes and reads to undeclared slots fail.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MemoryPlane {
    slots: BTreeMap<String, bool>,
}

impl MemoryPlane {
    pub fn new<I, S>(slots: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            slots: slots.into_iter().map(|s| (s.into(), false)).collect(),
        }
    }

    /// Plane with every memory slot referenced by `net`, all cleared.
    pub fn for_network(net: &AkersNetwork) -> Self {
        Self::new(net.memory_slots())
    }

    pub fn store(&mut self, slot: &str, bit: bool) -> Result<(), AkersError> {
        match self.slots.get_mut(slot) {
            Some(v) => {
                *v = bit;
                Ok(())
            }
            None => Err(AkersError::UnknownSlot(slot.to_string())),
        }
    }

    pub fn read(&self, slot: &str) -> Result<bool, AkersError> {
        self.slots
            .get(slot)
            .copied()
            .ok_or_else(|| AkersError::UnknownSlot(slot.to_string()))
    }

    pub fn slots(&self) -> impl Iterator<Item = (&str, bool)> {
        self.slots.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

impl AkersNetwork {
    pub fn cell(&self, id: usize) -> Option<&AkersCellSpec> {
        self.cells.iter().find(|c| c.id == id)
    }

    pub fn memory_slots(&self) -> BTreeSet<String> {
        self.cells
            .iter()
            .flat_map(|c| [&c.x, &c.y, &c.z])
            .filter_map(|r| match r {
                SignalRef::Memory(s) => Some(s.clone()),
                _ => None,
            })
            .collect()
    }

    /// Cell ids in evaluation order. Fails on dangling references, cell-driven
    /// selects, self references and cycles.
    pub fn topological_order(&self) -> Result<Vec<usize>, AkersError> {
        let mut index = HashMap::new();
        for (k, c) in self.cells.iter().enumerate() {
            if index.insert(c.id, k).is_some() {
                return Err(AkersError::DuplicateCell(c.id));
            }
        }
        let inputs: BTreeSet<&str> = self.inputs.iter().map(String::as_str).collect();
        for c in &self.cells {
            if matches!(c.z, SignalRef::Cell(_)) {
                return Err(AkersError::CellSelect(c.id));
            }
            for r in [&c.x, &c.y, &c.z] {
                match r {
                    SignalRef::Cell(j) if *j == c.id => return Err(AkersError::SelfReference(c.id)),
                    SignalRef::Cell(j) if !index.contains_key(j) => {
                        return Err(AkersError::Unresolved {
                            cell: c.id,
                            reference: r.to_string(),
                        })
                    }
                    SignalRef::Input(l) if !inputs.contains(l.as_str()) => {
                        return Err(AkersError::Unresolved {
                            cell: c.id,
                            reference: r.to_string(),
                        })
                    }
                    _ => {}
                }
            }
        }
        if let Some(&o) = self.outputs.iter().find(|o| !index.contains_key(o)) {
            return Err(AkersError::UnresolvedOutput(o));
        }

        // Kahn's algorithm, always taking the lowest pending id.
        let mut indegree: BTreeMap<usize, usize> = self.cells.iter().map(|c| (c.id, 0)).collect();
        let mut users: HashMap<usize, Vec<usize>> = HashMap::new();
        for c in &self.cells {
            let deps: BTreeSet<usize> = [&c.x, &c.y]
                .into_iter()
                .filter_map(|r| match r {
                    SignalRef::Cell(j) => Some(*j),
                    _ => None,
                })
                .collect();
            *indegree.get_mut(&c.id).expect("indexed") = deps.len();
            for d in deps {
                users.entry(d).or_default().push(c.id);
            }
        }
        let mut ready: BTreeSet<usize> = indegree
            .iter()
            .filter(|(_, &d)| d == 0)
            .map(|(&id, _)| id)
            .collect();
        let mut order = Vec::with_capacity(self.cells.len());
        while let Some(id) = ready.pop_first() {
            order.push(id);
            for &u in users.get(&id).into_iter().flatten() {
                let d = indegree.get_mut(&u).expect("indexed");
                *d -= 1;
                if *d == 0 {
                    ready.insert(u);
                }
            }
        }
        if order.len() != self.cells.len() {
            let placed: BTreeSet<usize> = order.into_iter().collect();
            let stuck = self
                .cells
                .iter()
                .map(|c| c.id)
                .filter(|id| !placed.contains(id))
                .collect();
            return Err(AkersError::Cycle(stuck));
        }
        Ok(order)
    }

    /// Longest chain of cells ending at each cell, starting from 0.
    pub fn levels(&self) -> Result<BTreeMap<usize, usize>, AkersError> {
        let order = self.topological_order()?;
        let mut level = BTreeMap::new();
        for id in order {
            let c = self.cell(id).expect("ordered ids exist");
            let l = [&c.x, &c.y]
                .into_iter()
                .filter_map(|r| match r {
                    SignalRef::Cell(j) => Some(level[j] + 1),
                    _ => None,
                })
                .max()
                .unwrap_or(0);
            level.insert(id, l);
        }
        Ok(level)
    }
}

fn resolve(
    r: &SignalRef,
    cell: usize,
    inputs: &HashMap<&str, bool>,
    plane: &MemoryPlane,
    values: &HashMap<usize, bool>,
) -> Result<bool, AkersError> {
    match r {
        SignalRef::Const(b) => Ok(*b),
        SignalRef::Input(l) => inputs
            .get(l.as_str())
            .copied()
            .ok_or_else(|| AkersError::MissingInput(l.clone())),
        SignalRef::Memory(s) => plane.read(s),
        SignalRef::Cell(j) => values.get(j).copied().ok_or(AkersError::Unresolved {
            cell,
            reference: r.to_string(),
        }),
    }
}

/// Evaluates `net` on labelled input bits with select bits from `plane`.
/// Returns one bit per entry of `net.outputs`.
pub fn eval_network(
    net: &AkersNetwork,
    inputs: &[(&str, bool)],
    plane: &MemoryPlane,
) -> Result<Vec<bool>, AkersError> {
    let order = net.topological_order()?;
    let inputs: HashMap<&str, bool> = inputs.iter().copied().collect();
    if let Some(l) = net.inputs.iter().find(|l| !inputs.contains_key(l.as_str())) {
        return Err(AkersError::MissingInput(l.clone()));
    }
    let mut values = HashMap::with_capacity(order.len());
    for id in order {
        let c = net.cell(id).expect("ordered ids exist");
        let x = resolve(&c.x, id, &inputs, plane, &values)?;
        let y = resolve(&c.y, id, &inputs, plane, &values)?;
        let z = resolve(&c.z, id, &inputs, plane, &values)?;
        values.insert(id, eval_cell(x, y, z));
    }
    Ok(net.outputs.iter().map(|o| values[o]).collect())
}

/// Output bits for every input combination, row `v` holding input `j` at bit
/// `n - 1 - j`.
pub fn network_truth_table(
    net: &AkersNetwork,
    plane: &MemoryPlane,
) -> Result<Vec<Vec<bool>>, AkersError> {
    let n = net.inputs.len();
    (0..1u32 << n)
        .map(|v| {
            let bits: Vec<(&str, bool)> = net
                .inputs
                .iter()
                .enumerate()
                .map(|(j, l)| (l.as_str(), (v >> (n - 1 - j)) & 1 == 1))
                .collect();
            eval_network(net, &bits, plane)
        })
        .collect()
}

/// Two-input exclusive OR from four cells: `B`, `B̄`, a combiner selected by
/// `A`, and an output buffer.
pub fn build_xor_network() -> AkersNetwork {
    let b = || SignalRef::Input("B".into());
    let cell = |id, x, y, z| AkersCellSpec { id, x, y, z };
    AkersNetwork {
        name: "xor".into(),
        inputs: vec!["A".into(), "B".into()],
        cells: vec![
            cell(1, SignalRef::Const(false), SignalRef::Const(true), b()),
            cell(2, SignalRef::Const(true), SignalRef::Const(false), b()),
            cell(3, SignalRef::Cell(1), SignalRef::Cell(2), SignalRef::Input("A".into())),
            cell(4, SignalRef::Cell(3), SignalRef::Cell(3), SignalRef::Const(false)),
        ],
        outputs: vec![4],
    }
}

/// Single cell fed directly by inputs `X`, `Y` and `Z`.
pub fn build_primitive_network() -> AkersNetwork {
    AkersNetwork {
        name: "primitive".into(),
        inputs: vec!["X".into(), "Z".into(), "Y".into()],
        cells: vec![AkersCellSpec {
            id: 1,
            x: SignalRef::Input("X".into()),
            y: SignalRef::Input("Y".into()),
            z: SignalRef::Input("Z".into()),
        }],
        outputs: vec![1],
    }
}

/// Full multiplexer tree over `selects` (first label at the root) whose leaves
/// are the constants of `table`: the classic rectangular-array realization of
/// an arbitrary function, needing `2^n - 1` cells.
pub fn build_lookup_network(selects: &[&str], table: &[bool]) -> AkersNetwork {
    let n = selects.len();
    assert_eq!(table.len(), 1 << n, "table needs 2^n entries");
    let mut net = AkersNetwork {
        name: format!("lut{n}"),
        inputs: selects.iter().map(|s| s.to_string()).collect(),
        ..Default::default()
    };
    // Level `n - 1` selects between leaf pairs; each level above halves.
    let mut layer: Vec<SignalRef> = table.iter().map(|&b| SignalRef::Const(b)).collect();
    let mut next_id = 1;
    for depth in (0..n).rev() {
        let z = SignalRef::Input(selects[depth].to_string());
        layer = layer
            .chunks(2)
            .map(|pair| {
                let id = next_id;
                next_id += 1;
                net.cells.push(AkersCellSpec {
                    id,
                    x: pair[0].clone(),
                    y: pair[1].clone(),
                    z: z.clone(),
                });
                SignalRef::Cell(id)
            })
            .collect();
    }
    if let [SignalRef::Cell(root)] = layer[..] {
        net.outputs.push(root);
    }
    net
}

pub fn serialize_network(net: &AkersNetwork) -> String {
    let mut s = format!("{NETWORK_HEADER}\n");
    if !net.name.is_empty() {
        s.push_str(&format!("name {}\n", net.name));
    }
    if !net.inputs.is_empty() {
        s.push_str(&format!("inputs {}\n", net.inputs.join(" ")));
    }
    for c in &net.cells {
        s.push_str(&format!("cell {} x={} y={} z={}\n", c.id, c.x, c.y, c.z));
    }
    for o in &net.outputs {
        s.push_str(&format!("out c{o}\n"));
    }
    s
}

/// Parses a network file. Without an `inputs` line the inputs are the
/// referenced labels in sorted order.
pub fn parse_network(text: &str) -> Result<AkersNetwork, AkersError> {
    let err = |line: usize, message: String| AkersError::Syntax { line, message };
    let mut lines = text
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
    match lines.next() {
        Some((_, l)) if l.trim() == NETWORK_HEADER => {}
        Some((n, l)) => return Err(err(n, format!("expected {NETWORK_HEADER:?}, found {l:?}"))),
        None => return Err(err(1, "empty network file".into())),
    }
    let mut net = AkersNetwork::default();
    let mut explicit_inputs = None;
    for (n, line) in lines {
        let mut words = line.split_whitespace();
        match words.next() {
            Some("name") => net.name = words.collect::<Vec<_>>().join(" "),
            Some("inputs") => {
                let labels: Vec<String> = words.map(str::to_string).collect();
                if let Some(bad) = labels.iter().find(|l| !valid_name(l)) {
                    return Err(err(n, format!("bad input label {bad:?}")));
                }
                explicit_inputs = Some(labels);
            }
            Some("cell") => {
                let id = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| err(n, "cell needs a numeric id".into()))?;
                let mut refs: [Option<SignalRef>; 3] = [None, None, None];
                for w in words {
                    let (key, value) = w
                        .split_once('=')
                        .ok_or_else(|| err(n, format!("expected key=ref, found {w:?}")))?;
                    let slot = match key {
                        "x" => 0,
                        "y" => 1,
                        "z" => 2,
                        _ => return Err(err(n, format!("unknown key {key:?}"))),
                    };
                    if refs[slot].is_some() {
                        return Err(err(n, format!("{key} given twice")));
                    }
                    refs[slot] = Some(
                        SignalRef::parse(value)
                            .ok_or_else(|| err(n, format!("bad reference {value:?}")))?,
                    );
                }
                let [x, y, z] = refs;
                let (Some(x), Some(y), Some(z)) = (x, y, z) else {
                    return Err(err(n, "cell needs x=, y= and z=".into()));
                };
                net.cells.push(AkersCellSpec { id, x, y, z });
            }
            Some("out") => {
                let r = words
                    .next()
                    .and_then(SignalRef::parse)
                    .ok_or_else(|| err(n, "out needs a cell reference".into()))?;
                match r {
                    SignalRef::Cell(id) => net.outputs.push(id),
                    other => return Err(err(n, format!("output must be a cell, found {other}"))),
                }
            }
            Some(other) => return Err(err(n, format!("unknown directive {other:?}"))),
            None => {}
        }
    }
    net.inputs = match explicit_inputs {
        Some(l) => l,
        None => {
            let set: BTreeSet<String> = net
                .cells
                .iter()
                .flat_map(|c| [&c.x, &c.y, &c.z])
                .filter_map(|r| match r {
                    SignalRef::Input(l) => Some(l.clone()),
                    _ => None,
                })
                .collect();
            set.into_iter().collect()
        }
    };
    net.topological_order()?;
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eq1_selects() {
        assert!(eval_cell(true, false, false));
        assert!(!eval_cell(true, false, true));
        for b in [false, true] {
            for z in [false, true] {
                assert_eq!(eval_cell(b, b, z), b);
            }
        }
    }

    #[test]
    fn plane_last_writer_wins() {
        let mut p = MemoryPlane::new(["s0", "s1"]);
        p.store("s0", true).unwrap();
        assert!(p.read("s0").unwrap());
        p.store("s0", false).unwrap();
        assert!(!p.read("s0").unwrap());
        assert!(!p.read("s1").unwrap());
        assert_eq!(p.store("nope", true), Err(AkersError::UnknownSlot("nope".into())));
        assert!(p.read("nope").is_err());
    }

    #[test]
    fn single_cell_passes_b() {
        let net = AkersNetwork {
            name: String::new(),
            inputs: vec!["B".into()],
            cells: vec![AkersCellSpec {
                id: 7,
                x: SignalRef::Const(false),
                y: SignalRef::Const(true),
                z: SignalRef::Input("B".into()),
            }],
            outputs: vec![7],
        };
        let plane = MemoryPlane::default();
        for b in [false, true] {
            assert_eq!(eval_network(&net, &[("B", b)], &plane).unwrap(), vec![b]);
        }
    }

    #[test]
    fn xor_table() {
        let net = build_xor_network();
        let plane = MemoryPlane::default();
        for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
            let out = eval_network(&net, &[("A", a), ("B", b)], &plane).unwrap();
            assert_eq!(out, vec![a ^ b], "A={a} B={b}");
        }
    }

    #[test]
    fn all_zero_selects_follow_x() {
        let mut net = build_lookup_network(&["S", "T"], &[true, false, false, true]);
        for c in &mut net.cells {
            c.z = SignalRef::Memory(format!("m{}", c.id));
        }
        let plane = MemoryPlane::for_network(&net);
        // Every select cleared: the root follows x down to leaf 0.
        assert_eq!(eval_network(&net, &[("S", true), ("T", true)], &plane).unwrap(), vec![true]);
    }

    #[test]
    fn memory_select_reprograms() {
        let net = AkersNetwork {
            name: "prog".into(),
            inputs: vec!["P".into(), "Q".into()],
            cells: vec![AkersCellSpec {
                id: 1,
                x: SignalRef::Input("P".into()),
                y: SignalRef::Input("Q".into()),
                z: SignalRef::Memory("sel".into()),
            }],
            outputs: vec![1],
        };
        let mut plane = MemoryPlane::for_network(&net);
        let ins = [("P", true), ("Q", false)];
        assert_eq!(eval_network(&net, &ins, &plane).unwrap(), vec![true]);
        plane.store("sel", true).unwrap();
        assert_eq!(eval_network(&net, &ins, &plane).unwrap(), vec![false]);
    }

    #[test]
    fn structural_errors() {
        let mut net = build_xor_network();
        net.cells[0].x = SignalRef::Cell(1);
        assert_eq!(net.topological_order(), Err(AkersError::SelfReference(1)));

        let mut net = build_xor_network();
        net.cells[0].x = SignalRef::Cell(3);
        assert!(matches!(net.topological_order(), Err(AkersError::Cycle(_))));

        let mut net = build_xor_network();
        net.cells[0].x = SignalRef::Cell(9);
        assert!(matches!(net.topological_order(), Err(AkersError::Unresolved { cell: 1, .. })));

        let mut net = build_xor_network();
        net.cells[0].z = SignalRef::Cell(2);
        assert_eq!(net.topological_order(), Err(AkersError::CellSelect(1)));

        let net = build_xor_network();
        assert_eq!(
            eval_network(&net, &[("A", true)], &MemoryPlane::default()),
            Err(AkersError::MissingInput("B".into()))
        );
    }

    #[test]
    fn lookup_tree_size() {
        for n in 1..=5 {
            let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let table: Vec<bool> = (0..1usize << n).map(|v| v.count_ones() % 2 == 1).collect();
            let net = build_lookup_network(&refs, &table);
            assert_eq!(net.cells.len(), (1 << n) - 1);
            let got = network_truth_table(&net, &MemoryPlane::default()).unwrap();
            let want: Vec<Vec<bool>> = table.iter().map(|&b| vec![b]).collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn network_file_round_trip() {
        let net = build_xor_network();
        let text = serialize_network(&net);
        assert!(text.starts_with("qcapim-net v1\nname xor\ninputs A B\ncell 1 x=0 y=1 z=in:B\n"));
        assert_eq!(parse_network(&text).unwrap(), net);
    }

    #[test]
    fn network_file_errors() {
        assert!(matches!(parse_network(""), Err(AkersError::Syntax { .. })));
        let bad = "qcapim-net v1\ncell 1 x=0 y=1\n";
        assert!(matches!(parse_network(bad), Err(AkersError::Syntax { line: 2, .. })));
        let bad = "qcapim-net v1\ncell 1 x=0 y=1 z=q:B\n";
        assert!(matches!(parse_network(bad), Err(AkersError::Syntax { line: 2, .. })));
        let bad = "qcapim-net v1\ncell 1 x=c2 y=1 z=in:B\n";
        assert!(matches!(parse_network(bad), Err(AkersError::Unresolved { .. })));
        let bad = "qcapim-net v1\nwire 1\n";
        assert!(matches!(parse_network(bad), Err(AkersError::Syntax { .. })));
        let inferred = "qcapim-net v1\n# comment\ncell 1 x=in:Q y=in:P z=mem:s\nout c1\n";
        assert_eq!(parse_network(inferred).unwrap().inputs, vec!["P", "Q"]);
    }
}
