//! Geometric QCA design model and the `qcapim v1` layout file format.
//!
//! A layout is a flat list of cells. Each cell sits at a centre position in
//! nanometres, belongs to one of four clock zones and carries a role: a
//! clamped input, a fixed-polarization driver, an observed output, or an
//! ordinary relaxing cell. Cell ids are the zero-based line order of the
//! cell records in the file.
//!
//! ```text
//! qcapim v1
//! geometry cell=18 dot=5 pitch=20
//! name wire
//! cell 0 0 zone=0 in=A
//! cell 20 0 zone=0 normal
//! cell 40 0 zone=0 out=F
//! ```

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

/// Cell dimensions shared by every cell of a layout, in nanometres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Geometry {
    pub cell_size_nm: f64,
    pub dot_diameter_nm: f64,
    pub grid_pitch_nm: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            cell_size_nm: 18.0,
            dot_diameter_nm: 5.0,
            grid_pitch_nm: 20.0,
        }
    }
}

impl Geometry {
    /// Distance from a cell centre to each of its dots along x and y. Each
    /// dot sits at the centre of its quadrant, so the offset does not depend
    /// on the dot diameter.
    pub fn dot_offset_nm(&self) -> f64 {
        self.cell_size_nm / 4.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CellRole {
    /// Clamped to the schedule value of its label on every sample.
    Input(String),
    /// Relaxes like a normal cell; its trace is reported under its label.
    Output(String),
    /// Constant driver, `-1.0` (logic 0) or `+1.0` (logic 1).
    Fixed(f64),
    Normal,
}

impl CellRole {
    pub fn label(&self) -> Option<&str> {
        match self {
            CellRole::Input(l) | CellRole::Output(l) => Some(l),
            _ => None,
        }
    }

    /// Drivers are never relaxed by the engine.
    pub fn is_driver(&self) -> bool {
        matches!(self, CellRole::Input(_) | CellRole::Fixed(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QcaCell {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub zone: u8,
    pub role: CellRole,
}

impl QcaCell {
    pub fn distance(&self, other: &QcaCell) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QcaLayout {
    pub name: String,
    pub geometry: Geometry,
    /// Boolean expression the outputs are expected to compute, if declared.
    pub oracle: Option<String>,
    pub cells: Vec<QcaCell>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    ZoneOutOfRange,
    Overlap,
    DuplicateLabel,
    EmptyLabel,
    BadFixedPolarization,
    NoDriver,
    NonFiniteCoordinate,
    IdMismatch,
}

/// One invariant violation, naming the offending cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub cells: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (cells {:?})", self.message, self.cells)
    }
}

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid layout: {}", join_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("layout has no cells")]
    Empty,
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Axis-aligned extents `(min_x, min_y, max_x, max_y)` of cell bodies in nm.
pub fn extents(layout: &QcaLayout) -> Option<(f64, f64, f64, f64)> {
    let half = layout.geometry.cell_size_nm / 2.0;
    layout.cells.iter().fold(None, |acc, c| {
        let (x0, y0, x1, y1) = (c.x - half, c.y - half, c.x + half, c.y + half);
        Some(match acc {
            None => (x0, y0, x1, y1),
            Some((a, b, cc, d)) => (a.min(x0), b.min(y0), cc.max(x1), d.max(y1)),
        })
    })
}

/// Bounding-box area of all cell bodies, in µm².
pub fn bounding_area(layout: &QcaLayout) -> Result<f64, LayoutError> {
    let (x0, y0, x1, y1) = extents(layout).ok_or(LayoutError::Empty)?;
    Ok((x1 - x0) * (y1 - y0) * 1e-6)
}

impl QcaLayout {
    pub fn new(name: impl Into<String>, geometry: Geometry) -> Self {
        Self {
            name: name.into(),
            geometry,
            oracle: None,
            cells: Vec::new(),
        }
    }

    /// Appends a cell and returns its id.
    pub fn push(&mut self, x: f64, y: f64, zone: u8, role: CellRole) -> usize {
        let id = self.cells.len();
        self.cells.push(QcaCell {
            id,
            x,
            y,
            zone,
            role,
        });
        id
    }

    pub fn inputs(&self) -> impl Iterator<Item = &QcaCell> {
        self.cells
            .iter()
            .filter(|c| matches!(c.role, CellRole::Input(_)))
    }

    pub fn outputs(&self) -> impl Iterator<Item = &QcaCell> {
        self.cells
            .iter()
            .filter(|c| matches!(c.role, CellRole::Output(_)))
    }

    pub fn input_labels(&self) -> Vec<String> {
        self.inputs()
            .filter_map(|c| c.role.label().map(str::to_owned))
            .collect()
    }

    pub fn output_labels(&self) -> Vec<String> {
        self.outputs()
            .filter_map(|c| c.role.label().map(str::to_owned))
            .collect()
    }

    pub fn find_label(&self, label: &str) -> Option<&QcaCell> {
        self.cells.iter().find(|c| c.role.label() == Some(label))
    }

    /// Copy of the layout with every cell moved by `(dx, dy)` nm.
    pub fn translated(&self, dx: f64, dy: f64) -> QcaLayout {
        let mut out = self.clone();
        for c in &mut out.cells {
            c.x += dx;
            c.y += dy;
        }
        out
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        validate(self)
    }

    pub fn to_text(&self) -> String {
        serialize(self)
    }
}

/// Checks every layout invariant. The result is empty iff the layout is valid.
pub fn validate(layout: &QcaLayout) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let min_gap = layout.geometry.cell_size_nm;

    for (idx, c) in layout.cells.iter().enumerate() {
        if c.id != idx {
            out.push(Diagnostic {
                kind: DiagnosticKind::IdMismatch,
                cells: vec![c.id],
                message: format!("cell at position {idx} carries id {}", c.id),
            });
        }
        if c.zone > 3 {
            out.push(Diagnostic {
                kind: DiagnosticKind::ZoneOutOfRange,
                cells: vec![c.id],
                message: format!("zone {} out of range 0..3", c.zone),
            });
        }
        if !c.x.is_finite() || !c.y.is_finite() {
            out.push(Diagnostic {
                kind: DiagnosticKind::NonFiniteCoordinate,
                cells: vec![c.id],
                message: "non-finite coordinate".into(),
            });
        }
        match &c.role {
            CellRole::Fixed(p) if *p != 1.0 && *p != -1.0 => out.push(Diagnostic {
                kind: DiagnosticKind::BadFixedPolarization,
                cells: vec![c.id],
                message: format!("fixed polarization {p} is not -1 or +1"),
            }),
            CellRole::Input(l) | CellRole::Output(l) if l.is_empty() => out.push(Diagnostic {
                kind: DiagnosticKind::EmptyLabel,
                cells: vec![c.id],
                message: "empty label".into(),
            }),
            _ => {}
        }
    }

    let mut seen: HashMap<&str, usize> = HashMap::new();
    for c in &layout.cells {
        if let Some(l) = c.role.label().filter(|l| !l.is_empty()) {
            if let Some(&first) = seen.get(l) {
                out.push(Diagnostic {
                    kind: DiagnosticKind::DuplicateLabel,
                    cells: vec![first, c.id],
                    message: format!("label `{l}` used more than once"),
                });
            } else {
                seen.insert(l, c.id);
            }
        }
    }

    // Sort-and-sweep along x keeps the overlap check near-linear for wide layouts.
    let mut order: Vec<&QcaCell> = layout.cells.iter().collect();
    order.sort_by(|a, b| a.x.total_cmp(&b.x));
    for (i, a) in order.iter().enumerate() {
        for b in &order[i + 1..] {
            if b.x - a.x >= min_gap {
                break;
            }
            if a.distance(b) < min_gap {
                let (lo, hi) = (a.id.min(b.id), a.id.max(b.id));
                out.push(Diagnostic {
                    kind: DiagnosticKind::Overlap,
                    cells: vec![lo, hi],
                    message: format!("cells {lo} and {hi} closer than {min_gap} nm"),
                });
            }
        }
    }

    let has_normal = layout
        .cells
        .iter()
        .any(|c| matches!(c.role, CellRole::Normal | CellRole::Output(_)));
    let has_driver = layout.cells.iter().any(|c| c.role.is_driver());
    if has_normal && !has_driver {
        out.push(Diagnostic {
            kind: DiagnosticKind::NoDriver,
            cells: layout.cells.iter().map(|c| c.id).collect(),
            message: "no driver: layout has no input or fixed cell".into(),
        });
    }
    out
}

/// Formats a length with at most six decimals and no trailing zeros.
pub fn format_num(v: f64) -> String {
    let mut s = format!("{v:.6}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

pub fn serialize(layout: &QcaLayout) -> String {
    let g = &layout.geometry;
    let mut s = String::from("qcapim v1\n");
    let _ = writeln!(
        s,
        "geometry cell={} dot={} pitch={}",
        format_num(g.cell_size_nm),
        format_num(g.dot_diameter_nm),
        format_num(g.grid_pitch_nm)
    );
    if !layout.name.is_empty() {
        let _ = writeln!(s, "name {}", layout.name);
    }
    if let Some(o) = &layout.oracle {
        let _ = writeln!(s, "oracle {o}");
    }
    for c in &layout.cells {
        let role = match &c.role {
            CellRole::Input(l) => format!("in={l}"),
            CellRole::Output(l) => format!("out={l}"),
            CellRole::Fixed(p) if *p > 0.0 => "fixed=+1".into(),
            CellRole::Fixed(_) => "fixed=-1".into(),
            CellRole::Normal => "normal".into(),
        };
        let _ = writeln!(
            s,
            "cell {} {} zone={} {}",
            format_num(c.x),
            format_num(c.y),
            c.zone,
            role
        );
    }
    s
}

/// Splits a line into whitespace-separated tokens with 1-based columns.
pub(crate) fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, tok)| (line[..byte].chars().count() + 1, tok))
        .collect()
}

/// Strips a `#` comment and returns the remaining content.
pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

struct LineCtx {
    line: usize,
}

impl LineCtx {
    fn err(&self, column: usize, message: impl Into<String>) -> LayoutError {
        LayoutError::Syntax {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn num(&self, (col, tok): (usize, &str)) -> Result<f64, LayoutError> {
        tok.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.err(col, format!("expected a number, found `{tok}`")))
    }

    fn keyed<'a>(&self, (col, tok): (usize, &'a str), key: &str) -> Result<&'a str, LayoutError> {
        tok.strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| self.err(col, format!("expected `{key}=...`, found `{tok}`")))
    }
}

/// Parses and validates a layout file.
pub fn parse_layout(text: &str) -> Result<QcaLayout, LayoutError> {
    let mut header_seen = false;
    let mut geometry: Option<Geometry> = None;
    let mut layout = QcaLayout::new("", Geometry::default());

    for (idx, raw) in text.lines().enumerate() {
        let ctx = LineCtx { line: idx + 1 };
        let toks = tokenize(strip_comment(raw));
        let Some(&(col, head)) = toks.first() else {
            continue;
        };
        if !header_seen {
            if toks.len() == 2 && head == "qcapim" && toks[1].1 == "v1" {
                header_seen = true;
                continue;
            }
            return Err(ctx.err(col, "expected header `qcapim v1`"));
        }
        if geometry.is_none() && head != "geometry" {
            return Err(ctx.err(col, "expected `geometry` line after header"));
        }
        match head {
            "geometry" => {
                if geometry.is_some() {
                    return Err(ctx.err(col, "duplicate geometry line"));
                }
                if toks.len() != 4 {
                    return Err(ctx.err(col, "geometry takes cell=, dot= and pitch="));
                }
                let g = Geometry {
                    cell_size_nm: ctx.num((toks[1].0, ctx.keyed(toks[1], "cell")?))?,
                    dot_diameter_nm: ctx.num((toks[2].0, ctx.keyed(toks[2], "dot")?))?,
                    grid_pitch_nm: ctx.num((toks[3].0, ctx.keyed(toks[3], "pitch")?))?,
                };
                if g.cell_size_nm <= 0.0 || g.dot_diameter_nm <= 0.0 || g.grid_pitch_nm <= 0.0 {
                    return Err(ctx.err(toks[1].0, "geometry values must be positive"));
                }
                if g.dot_diameter_nm >= g.cell_size_nm {
                    return Err(ctx.err(toks[2].0, "dot diameter must be below cell size"));
                }
                geometry = Some(g);
            }
            "name" | "oracle" => {
                let rest = toks
                    .get(1)
                    .map(|&(c, _)| {
                        let content = strip_comment(raw);
                        let start: usize = content.char_indices().nth(c - 1).map_or(0, |(b, _)| b);
                        content[start..].trim_end().to_string()
                    })
                    .ok_or_else(|| ctx.err(col, format!("`{head}` needs a value")))?;
                if head == "name" {
                    layout.name = rest;
                } else {
                    layout.oracle = Some(rest);
                }
            }
            "cell" => {
                if toks.len() != 5 {
                    return Err(ctx.err(col, "cell line is `cell <x> <y> zone=<k> <role>`"));
                }
                let x = ctx.num(toks[1])?;
                let y = ctx.num(toks[2])?;
                let zone_tok = ctx.keyed(toks[3], "zone")?;
                let zone: u8 = zone_tok
                    .parse()
                    .map_err(|_| ctx.err(toks[3].0, format!("zone `{zone_tok}` out of range")))?;
                let (rcol, rtok) = toks[4];
                let role = if rtok == "normal" {
                    CellRole::Normal
                } else if let Some(l) = rtok.strip_prefix("in=") {
                    CellRole::Input(l.to_string())
                } else if let Some(l) = rtok.strip_prefix("out=") {
                    CellRole::Output(l.to_string())
                } else if let Some(p) = rtok.strip_prefix("fixed=") {
                    match p {
                        "+1" | "1" => CellRole::Fixed(1.0),
                        "-1" => CellRole::Fixed(-1.0),
                        _ => return Err(ctx.err(rcol, format!("fixed polarization `{p}`"))),
                    }
                } else {
                    return Err(ctx.err(rcol, format!("unknown role `{rtok}`")));
                };
                layout.push(x, y, zone, role);
            }
            other => return Err(ctx.err(col, format!("unknown directive `{other}`"))),
        }
    }
    if !header_seen {
        return Err(LayoutError::Syntax {
            line: 1,
            column: 1,
            message: "missing header `qcapim v1`".into(),
        });
    }
    layout.geometry = geometry.ok_or(LayoutError::Syntax {
        line: text.lines().count().max(1),
        column: 1,
        message: "missing geometry line".into(),
    })?;
    let diags = validate(&layout);
    if diags.is_empty() {
        Ok(layout)
    } else {
        Err(LayoutError::Invalid(diags))
    }
}
