//! Layout synthesis: small gate layouts, the primitive Akers cell, and
//! placement and routing of whole networks.
//!
//! The primitive cell is a 2:1 multiplexer built from three majority gates
//! and an inverter, `MAJ(MAJ(X, Z̄, 0), MAJ(Y, Z, 0), 1)`, over two clock
//! zones. The two AND gates and the inverter switch in zone 0; the OR gate
//! and the output in zone 1. The OR's constant reaches it through two
//! zone-1 relay cells so that, while zone 0 switches, the cells diagonal to
//! the AND outputs are close to unpolarized.
//!
//! Networks place one primitive per Akers cell in columns by logic level.
//! Signals between cells travel on wires clocked in zones 2 and 3, so every
//! input port of a cell is a zone-3 cell that holds while the cell's zone-0
//! gates switch. Constants become fixed cells on the port, and an external
//! input used exactly once becomes an input pad on the port itself.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::cmp::Reverse;

use thiserror::Error;

use super::{AkersCellSpec, AkersError, AkersNetwork, SignalRef};
use crate::layout::{CellRole, Geometry, QcaLayout};

type Pt = (i32, i32);

/// Longest run of wire cells allowed in one clock zone.
pub const MAX_SEGMENT: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error(transparent)]
    Network(#[from] AkersError),
    #[error("network has no outputs")]
    NoOutputs,
    #[error("routing failed for {signal} into c{cell}.{port}: {reason}")]
    Routing {
        signal: String,
        cell: usize,
        port: char,
        reason: String,
    },
}

// Primitive cell, row by row. Digits are clock zones, `+`/`-` fixed cells,
// `X`, `Y`, `Z` the input ports and `F` the zone-1 output.
const PRIMITIVE: [&str; 10] = [
    "    000",
    "00000 0",
    "0    0",
    "0   -0X",
    "0    1",
    "Z +1111F",
    "0    1",
    "0   -0Y",
    "0    0",
    "000000",
];

const PORT_X: Pt = (6, 3);
const PORT_Y: Pt = (6, 7);
const PORT_Z: Pt = (0, 5);
const OUT_F: Pt = (7, 5);
const MACRO_W: i32 = 8;
const MACRO_H: i32 = 10;
const COLUMN_PITCH: i32 = MACRO_W + 3;
const ROW_PITCH: i32 = MACRO_H + 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Port {
    X,
    Y,
    Z,
}

impl Port {
    fn site(self) -> Pt {
        match self {
            Port::X => PORT_X,
            Port::Y => PORT_Y,
            Port::Z => PORT_Z,
        }
    }

    /// Unit step pointing away from the macro.
    fn outward(self) -> Pt {
        match self {
            Port::X | Port::Y => (1, 0),
            Port::Z => (-1, 0),
        }
    }

    fn letter(self) -> char {
        match self {
            Port::X => 'X',
            Port::Y => 'Y',
            Port::Z => 'Z',
        }
    }
}

fn add(a: Pt, b: Pt) -> Pt {
    (a.0 + b.0, a.1 + b.1)
}

fn to_nm(geometry: &Geometry, p: Pt) -> (f64, f64) {
    (
        f64::from(p.0) * geometry.grid_pitch_nm,
        f64::from(p.1) * geometry.grid_pitch_nm,
    )
}

fn template() -> impl Iterator<Item = (Pt, char)> {
    PRIMITIVE.iter().enumerate().flat_map(|(y, row)| {
        row.chars()
            .enumerate()
            .filter(|(_, ch)| *ch != ' ')
            .map(move |(x, ch)| ((x as i32, y as i32), ch))
    })
}

/// Standalone primitive Akers cell with input pads `X`, `Y`, `Z` (in that
/// label order) and output `F`.
pub fn synthesize_primitive_layout(geometry: Geometry) -> QcaLayout {
    let mut l = QcaLayout::new("primitive", geometry);
    l.oracle = Some("(X & !Z) | (Y & Z)".into());
    for port in [Port::X, Port::Y, Port::Z] {
        let (x, y) = to_nm(&geometry, port.site());
        l.push(x, y, 0, CellRole::Input(port.letter().to_string()));
    }
    for (p, ch) in template() {
        let (x, y) = to_nm(&geometry, p);
        let (zone, role) = match ch {
            'X' | 'Y' | 'Z' => continue,
            'F' => (1, CellRole::Output("F".into())),
            '+' => (0, CellRole::Fixed(1.0)),
            '-' => (0, CellRole::Fixed(-1.0)),
            d => (d as u8 - b'0', CellRole::Normal),
        };
        l.push(x, y, zone, role);
    }
    l
}

fn straight(name: &str, geometry: Geometry, cells: &[(Pt, CellRole)], oracle: &str) -> QcaLayout {
    let mut l = QcaLayout::new(name, geometry);
    l.oracle = Some(oracle.into());
    for (p, role) in cells {
        let (x, y) = to_nm(&geometry, *p);
        l.push(x, y, 0, role.clone());
    }
    l
}

/// Five-cell binary wire from input `A` to output `F`.
pub fn wire_layout(geometry: Geometry) -> QcaLayout {
    let mut cells = vec![((0, 0), CellRole::Input("A".into()))];
    cells.extend((1..4).map(|x| ((x, 0), CellRole::Normal)));
    cells.push(((4, 0), CellRole::Output("F".into())));
    straight("wire", geometry, &cells, "A")
}

/// Fork inverter: the input wire splits in two and both branch ends couple
/// diagonally into the output cell.
pub fn inverter_layout(geometry: Geometry) -> QcaLayout {
    let n = CellRole::Normal;
    let cells = [
        ((0, 1), CellRole::Input("A".into())),
        ((1, 1), n.clone()),
        ((2, 1), n.clone()),
        ((2, 0), n.clone()),
        ((3, 0), n.clone()),
        ((2, 2), n.clone()),
        ((3, 2), n.clone()),
        ((4, 1), n),
        ((5, 1), CellRole::Output("F".into())),
    ];
    straight("inverter", geometry, &cells, "!A")
}

/// Three-input majority gate around a single device cell.
pub fn majority_layout(geometry: Geometry) -> QcaLayout {
    let cells = [
        ((1, 0), CellRole::Input("A".into())),
        ((0, 1), CellRole::Input("B".into())),
        ((1, 2), CellRole::Input("C".into())),
        ((1, 1), CellRole::Normal),
        ((2, 1), CellRole::Normal),
        ((3, 1), CellRole::Output("F".into())),
    ];
    straight("majority", geometry, &cells, "(A & B) | (A & C) | (B & C)")
}

/// Who a grid slot belongs to. Wires and their endpoints belong to a signal;
/// everything else to the macro of one Akers cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Owner {
    Macro(usize),
    Signal(usize),
}

#[derive(Clone, Debug)]
struct Slot {
    owner: Owner,
    zone: u8,
    role: CellRole,
}

#[derive(Default)]
struct Board {
    slots: BTreeMap<Pt, Slot>,
    /// Cells in creation order, which becomes cell id order.
    order: Vec<Pt>,
}

impl Board {
    fn put(&mut self, p: Pt, owner: Owner, zone: u8, role: CellRole) {
        if self.slots.insert(p, Slot { owner, zone, role }).is_none() {
            self.order.push(p);
        }
    }

    fn ring(p: Pt) -> impl Iterator<Item = Pt> {
        (-1..=1).flat_map(move |dy| (-1..=1).map(move |dx| (p.0 + dx, p.1 + dy)))
    }

    /// A wire cell of `signal` may sit at `p` if the spot is free and its
    /// neighbourhood holds nothing but cells in `allowed`.
    fn clear(&self, p: Pt, allowed: &BTreeSet<Pt>) -> bool {
        !self.slots.contains_key(&p)
            && Board::ring(p).all(|q| !self.slots.contains_key(&q) || allowed.contains(&q))
    }
}

/// One consumer of a signal: the port cell and the approach cell in front
/// of it.
struct Sink {
    cell: usize,
    port: Port,
    site: Pt,
    entry: Pt,
}

struct SignalNet {
    name: String,
    /// Cell the tree grows from: a macro output or an input pad.
    root: Pt,
    /// Zone of the root for cell outputs; `None` for clamped pads.
    root_zone: Option<u8>,
    sinks: Vec<Sink>,
    /// Tree edges child -> parent, filled in by routing.
    parent: HashMap<Pt, Pt>,
}

/// Places and routes `net`, one primitive per Akers cell.
///
/// Memory slots become input pads labelled `mem_<slot>`. Outputs are the
/// zone-1 cells of the output macros, labelled `F` for a single output and
/// `F0`, `F1`, ... otherwise. The layout carries the network function as
/// its oracle.
pub fn synthesize_network_layout(
    net: &AkersNetwork,
    geometry: Geometry,
) -> Result<QcaLayout, SynthError> {
    if net.outputs.is_empty() {
        return Err(SynthError::NoOutputs);
    }
    let levels = net.levels()?;

    // A constant select makes the other arm irrelevant; tie it to logic 0
    // instead of routing a wire to it.
    let cells: Vec<AkersCellSpec> = net
        .cells
        .iter()
        .map(|c| {
            let mut c = c.clone();
            match c.z {
                SignalRef::Const(false) => c.y = SignalRef::Const(false),
                SignalRef::Const(true) => c.x = SignalRef::Const(false),
                _ => {}
            }
            c
        })
        .collect();
    let origin = place(&cells, &levels);
    let mut board = Board::default();
    let mut nets: Vec<SignalNet> = Vec::new();
    let mut net_of: HashMap<SignalRef, usize> = HashMap::new();

    // Pads first so input labels follow the network's input order, then
    // memory slots in name order.
    let mut external: Vec<SignalRef> = net.inputs.iter().map(|l| SignalRef::Input(l.clone())).collect();
    external.extend(net.memory_slots().into_iter().map(SignalRef::Memory));
    let mut uses: HashMap<SignalRef, Vec<(usize, Port)>> = HashMap::new();
    for c in &cells {
        for (r, port) in [(&c.x, Port::X), (&c.y, Port::Y), (&c.z, Port::Z)] {
            uses.entry(r.clone()).or_default().push((c.id, port));
        }
    }
    let pad_label = |r: &SignalRef| match r {
        SignalRef::Input(l) => l.clone(),
        SignalRef::Memory(s) => format!("mem_{s}"),
        _ => unreachable!("only external signals get pads"),
    };
    for r in &external {
        let Some(users) = uses.get(r) else { continue };
        let label = pad_label(r);
        if let [(cell, port)] = users[..] {
            board.put(
                add(origin[&cell], port.site()),
                Owner::Macro(cell),
                0,
                CellRole::Input(label),
            );
            continue;
        }
        let sinks: Vec<Sink> = users
            .iter()
            .map(|&(cell, port)| sink(origin[&cell], cell, port))
            .collect();
        let root = pad_spot(&sinks);
        board.put(root, Owner::Signal(nets.len()), 0, CellRole::Input(label.clone()));
        net_of.insert(r.clone(), nets.len());
        nets.push(SignalNet {
            name: label,
            root,
            root_zone: None,
            sinks,
            parent: HashMap::new(),
        });
    }

    // Macro bodies, constants on ports, and output nets.
    let out_labels: HashMap<usize, String> = if net.outputs.len() == 1 {
        HashMap::from([(net.outputs[0], "F".to_string())])
    } else {
        net.outputs.iter().enumerate().map(|(k, &o)| (o, format!("F{k}"))).collect()
    };
    for c in &cells {
        let o = origin[&c.id];
        for (p, ch) in template() {
            let at = add(o, p);
            match ch {
                'X' | 'Y' | 'Z' => {
                    let r = match ch {
                        'X' => &c.x,
                        'Y' => &c.y,
                        _ => &c.z,
                    };
                    if let SignalRef::Const(b) = r {
                        let pol = if *b { 1.0 } else { -1.0 };
                        board.put(at, Owner::Macro(c.id), 0, CellRole::Fixed(pol));
                    }
                }
                'F' => {
                    let role = out_labels
                        .get(&c.id)
                        .map_or(CellRole::Normal, |l| CellRole::Output(l.clone()));
                    board.put(at, Owner::Macro(c.id), 1, role);
                }
                '+' => board.put(at, Owner::Macro(c.id), 0, CellRole::Fixed(1.0)),
                '-' => board.put(at, Owner::Macro(c.id), 0, CellRole::Fixed(-1.0)),
                d => board.put(at, Owner::Macro(c.id), d as u8 - b'0', CellRole::Normal),
            }
        }
        let users = uses.get(&SignalRef::Cell(c.id)).cloned().unwrap_or_default();
        if !users.is_empty() {
            net_of.insert(SignalRef::Cell(c.id), nets.len());
            nets.push(SignalNet {
                name: format!("c{}", c.id),
                root: add(o, OUT_F),
                root_zone: Some(1),
                sinks: users
                    .iter()
                    .map(|&(cell, port)| sink(origin[&cell], cell, port))
                    .collect(),
                parent: HashMap::new(),
            });
        }
    }

    // Reserve every port and approach cell before routing so that early
    // wires keep clear of later ones.
    for (k, n) in nets.iter().enumerate() {
        if n.root_zone.is_some() {
            board.put(add(n.root, (1, 0)), Owner::Signal(k), 2, CellRole::Normal);
        }
        for s in &n.sinks {
            board.put(s.site, Owner::Signal(k), 3, CellRole::Normal);
            board.put(s.entry, Owner::Signal(k), 3, CellRole::Normal);
        }
    }

    for k in 0..nets.len() {
        route(&mut board, &mut nets[k], k)?;
    }
    for (k, n) in nets.iter().enumerate() {
        assign_zones(&mut board, n, k)?;
    }

    let mut layout = QcaLayout::new(net.name.clone(), geometry);
    // Shift so the layout starts at the origin.
    let min_x = board.slots.keys().map(|p| p.0).min().unwrap_or(0);
    let min_y = board.slots.keys().map(|p| p.1).min().unwrap_or(0);
    for p in &board.order {
        let s = &board.slots[p];
        let (x, y) = to_nm(&geometry, (p.0 - min_x, p.1 - min_y));
        layout.push(x, y, s.zone, s.role.clone());
    }
    layout.oracle = Some(network_oracle(net, &out_labels)?);
    Ok(layout)
}

/// Macro origins. Columns follow logic level. Within a column a macro sits
/// just below the output row of its `X` source and just above that of its
/// `Y` source, so both wires reach their ports over the top and under the
/// bottom of the macro without crossing its output.
fn place(cells: &[AkersCellSpec], levels: &BTreeMap<usize, usize>) -> BTreeMap<usize, Pt> {
    let mut origin: BTreeMap<usize, Pt> = BTreeMap::new();
    let mut columns: BTreeMap<usize, Vec<&AkersCellSpec>> = BTreeMap::new();
    for c in cells {
        columns.entry(levels[&c.id]).or_default().push(c);
    }
    for (&lv, col) in &columns {
        let out_row = |r: &SignalRef, origin: &BTreeMap<usize, Pt>| match r {
            SignalRef::Cell(j) => origin.get(j).map(|o| o.1 + OUT_F.1),
            _ => None,
        };
        let mut wanted: Vec<(i32, usize)> = col
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let below = out_row(&c.x, &origin).map(|r| r + 2);
                let above = out_row(&c.y, &origin).map(|r| r - MACRO_H - 1);
                let y = match (below, above) {
                    (Some(lo), Some(hi)) if lo <= hi => (lo + hi) / 2,
                    (Some(lo), _) => lo,
                    (None, Some(hi)) => hi,
                    (None, None) => k as i32 * ROW_PITCH,
                };
                (y, k)
            })
            .collect();
        wanted.sort();
        let mut floor = i32::MIN;
        for (y, k) in wanted {
            let y = y.max(floor);
            origin.insert(col[k].id, (lv as i32 * COLUMN_PITCH, y));
            floor = y + ROW_PITCH;
        }
    }
    origin
}

fn sink(origin: Pt, cell: usize, port: Port) -> Sink {
    let site = add(origin, port.site());
    Sink {
        cell,
        port,
        site,
        entry: add(site, port.outward()),
    }
}

/// Pad position for an input shared by several ports: a few cells outside
/// the first port, moved to the mean height of all ports.
fn pad_spot(sinks: &[Sink]) -> Pt {
    let first = &sinks[0];
    let mean_y = sinks.iter().map(|s| s.entry.1).sum::<i32>() / sinks.len() as i32;
    let out = first.port.outward();
    let x = if out.0 < 0 {
        sinks.iter().map(|s| s.entry.0).min().unwrap_or(0) - 3
    } else {
        sinks.iter().map(|s| s.entry.0).max().unwrap_or(0) + 3
    };
    (x, mean_y)
}

const DIRS: [Pt; 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
const TURN_COST: u32 = 4;
const ROUTE_MARGIN: i32 = 12;
const FROM_TREE: usize = usize::MAX;

/// Grows the signal's tree to each sink along a turn-penalised shortest
/// path that keeps one free cell between the wire and anything else.
fn route(board: &mut Board, n: &mut SignalNet, k: usize) -> Result<(), SynthError> {
    let (mut lo, mut hi) = ((i32::MAX, i32::MAX), (i32::MIN, i32::MIN));
    for p in board.slots.keys() {
        lo = (lo.0.min(p.0), lo.1.min(p.1));
        hi = (hi.0.max(p.0), hi.1.max(p.1));
    }
    let within = |p: Pt| {
        p.0 >= lo.0 - ROUTE_MARGIN
            && p.1 >= lo.1 - ROUTE_MARGIN
            && p.0 <= hi.0 + ROUTE_MARGIN
            && p.1 <= hi.1 + ROUTE_MARGIN
    };
    let own = Owner::Signal(k);
    let mut tree: Vec<Pt> = vec![n.root];
    if n.root_zone.is_some() {
        let exit = add(n.root, (1, 0));
        n.parent.insert(exit, n.root);
        tree.push(exit);
    }

    for si in 0..n.sinks.len() {
        let (site, entry) = (n.sinks[si].site, n.sinks[si].entry);
        let target: BTreeSet<Pt> = [site, entry].into();
        let mut best: HashMap<(Pt, usize), u32> = HashMap::new();
        let mut prev: HashMap<(Pt, usize), (Pt, usize)> = HashMap::new();
        let mut heap = BinaryHeap::new();
        for &s in &tree {
            // The first cell of a branch may touch the tree around `s`.
            let mut allowed: BTreeSet<Pt> = Board::ring(s)
                .filter(|q| *q == s || board.slots.get(q).is_some_and(|sl| sl.owner == own))
                .collect();
            allowed.extend(&target);
            for (d, step) in DIRS.iter().enumerate() {
                let p = add(s, *step);
                if p == entry || (within(p) && board.clear(p, &allowed)) {
                    best.insert((p, d), 1);
                    prev.insert((p, d), (s, FROM_TREE));
                    heap.push(Reverse((1u32, p, d)));
                }
            }
        }
        let mut reached = None;
        while let Some(Reverse((c, p, d))) = heap.pop() {
            if best.get(&(p, d)).is_some_and(|&b| b < c) {
                continue;
            }
            if p == entry {
                reached = Some((p, d));
                break;
            }
            for (nd, step) in DIRS.iter().enumerate() {
                let q = add(p, *step);
                if q != entry && !(within(q) && board.clear(q, &target)) {
                    continue;
                }
                let cost = c + 1 + if nd == d { 0 } else { TURN_COST };
                if best.get(&(q, nd)).is_none_or(|&b| cost < b) {
                    best.insert((q, nd), cost);
                    prev.insert((q, nd), (p, d));
                    heap.push(Reverse((cost, q, nd)));
                }
            }
        }
        let Some(mut at) = reached else {
            return Err(SynthError::Routing {
                signal: n.name.clone(),
                cell: n.sinks[si].cell,
                port: n.sinks[si].port.letter(),
                reason: "no clear path".into(),
            });
        };
        n.parent.insert(site, entry);
        loop {
            let (pp, pd) = prev[&at];
            n.parent.insert(at.0, pp);
            if pd == FROM_TREE {
                break;
            }
            board.put(pp, own, 3, CellRole::Normal);
            tree.push(pp);
            at = (pp, pd);
        }
    }
    Ok(())
}

/// Zones along each root-to-port path: consecutive segments in successive
/// zones, the last one (zone 3) ending on the port.
fn assign_zones(board: &mut Board, n: &SignalNet, k: usize) -> Result<(), SynthError> {
    let mut depth: HashMap<Pt, usize> = HashMap::new();
    fn depth_of(p: Pt, n: &SignalNet, memo: &mut HashMap<Pt, usize>) -> usize {
        if p == n.root {
            return 0;
        }
        if let Some(&d) = memo.get(&p) {
            return d;
        }
        let d = depth_of(n.parent[&p], n, memo) + 1;
        memo.insert(p, d);
        d
    }
    let cells: Vec<Pt> = n.parent.keys().copied().collect();
    for &p in &cells {
        depth_of(p, n, &mut depth);
    }
    let sink_depth: Vec<usize> = n.sinks.iter().map(|s| depth[&s.site]).collect();
    let short = *sink_depth.iter().min().expect("nets have sinks");
    let long = *sink_depth.iter().max().expect("nets have sinks");

    // Segment count so that each zone's run stays within MAX_SEGMENT. Cell
    // outputs leave zone 1, so their wires need 2, 6, 10, ... segments.
    let step = if n.root_zone.is_some() { 4 } else { 1 };
    let first = if n.root_zone.is_some() { 2 } else { 1 };
    let fits = |m: usize| {
        let last_start = (m - 1) * short / m + 1;
        short >= m && short.div_ceil(m) <= MAX_SEGMENT && long + 1 - last_start <= MAX_SEGMENT
    };
    let Some(m) = (first..=short.max(first)).step_by(step).find(|&m| fits(m)) else {
        let s = &n.sinks[sink_depth.iter().position(|&d| d == long).unwrap_or(0)];
        return Err(SynthError::Routing {
            signal: n.name.clone(),
            cell: s.cell,
            port: s.port.letter(),
            reason: format!("wire of {long} cells cannot be clocked in runs of at most {MAX_SEGMENT}"),
        });
    };
    for p in cells {
        let d = depth[&p];
        let seg = ((d - 1) * m / short).min(m - 1);
        let zone = ((3 + 4 * m - (m - 1) + seg) % 4) as u8;
        let slot = board.slots.get_mut(&p).expect("routed cells are placed");
        debug_assert_eq!(slot.owner, Owner::Signal(k));
        slot.zone = zone;
    }
    Ok(())
}

/// Boolean expression for each output, in the oracle grammar, joined by
/// `;` when there are several.
fn network_oracle(net: &AkersNetwork, labels: &HashMap<usize, String>) -> Result<String, AkersError> {
    let order = net.topological_order()?;
    let mut expr: HashMap<usize, Expr> = HashMap::new();
    for id in order {
        let c = net.cell(id).expect("ordered ids exist");
        let leaf = |r: &SignalRef, expr: &HashMap<usize, Expr>| match r {
            SignalRef::Const(b) => Expr::Const(*b),
            SignalRef::Input(l) => Expr::Var(l.clone()),
            SignalRef::Memory(s) => Expr::Var(format!("mem_{s}")),
            SignalRef::Cell(j) => expr[j].clone(),
        };
        let (x, y, z) = (leaf(&c.x, &expr), leaf(&c.y, &expr), leaf(&c.z, &expr));
        expr.insert(id, Expr::mux(x, y, z));
    }
    let parts: Vec<String> = net.outputs.iter().map(|o| expr[o].to_string()).collect();
    if parts.len() == 1 {
        return Ok(parts.into_iter().next().unwrap_or_default());
    }
    Ok(net
        .outputs
        .iter()
        .zip(parts)
        .map(|(o, e)| format!("{}={e}", labels[o]))
        .collect::<Vec<_>>()
        .join("; "))
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Expr {
    Const(bool),
    Var(String),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl Expr {
    fn not(e: Expr) -> Expr {
        match e {
            Expr::Const(b) => Expr::Const(!b),
            Expr::Not(inner) => *inner,
            e => Expr::Not(Box::new(e)),
        }
    }

    fn and(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(false), _) | (_, Expr::Const(false)) => Expr::Const(false),
            (Expr::Const(true), e) | (e, Expr::Const(true)) => e,
            (a, b) if a == b => a,
            (a, b) => Expr::And(Box::new(a), Box::new(b)),
        }
    }

    fn or(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(true), _) | (_, Expr::Const(true)) => Expr::Const(true),
            (Expr::Const(false), e) | (e, Expr::Const(false)) => e,
            (a, b) if a == b => a,
            (a, b) => Expr::Or(Box::new(a), Box::new(b)),
        }
    }

    fn mux(x: Expr, y: Expr, z: Expr) -> Expr {
        match z {
            Expr::Const(false) => x,
            Expr::Const(true) => y,
            _ if x == y => x,
            z => Expr::or(Expr::and(x, Expr::not(z.clone())), Expr::and(y, z)),
        }
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Expr::Const(b) => write!(f, "{}", u8::from(*b)),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Not(e) => match **e {
                Expr::Const(_) | Expr::Var(_) | Expr::Not(_) => write!(f, "!{e}"),
                _ => write!(f, "!({e})"),
            },
            Expr::And(a, b) => write!(f, "({a} & {b})"),
            Expr::Or(a, b) => write!(f, "({a} | {b})"),
        }
    }
}
