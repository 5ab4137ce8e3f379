//! Planar (n = 2) pictures of cylinder partitions, drawn from the exact
//! vertices of the cylinder polytopes.

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polytope::{rat_point_to_f64, LinearForm, Polytope};
use crate::projlin::IntMatrix;
use crate::systems::domain::CellConstraint;
use crate::systems::{frame_constraints, registry, Algorithm, Digit, FibredSystem, Side};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FigureSpec {
    pub system: String,
    pub n: usize,
    pub depth: usize,
    pub side: Side,
    /// Clip for unbounded dual domains: every coordinate ≤ `frame`.
    pub frame: i64,
    /// Unbounded digits above this value are merged into one tail cell.
    pub max_digit: u64,
    /// Output width in pixels.
    pub size: u32,
}

impl FigureSpec {
    pub fn new(system: &str, depth: usize) -> Self {
        Self { system: system.to_string(), n: 2, depth, side: Side::Primal, frame: 4, max_digit: 2, size: 480 }
    }

    pub fn dual(mut self) -> Self {
        self.side = Side::Dual;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FigureCell {
    pub label: String,
    /// Counter-clockwise polygon.
    pub vertices: Vec<[f64; 2]>,
    pub area: f64,
    /// Stands for all digits above `max_digit` at its last position.
    pub tail: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Figure {
    pub system: String,
    pub side: Side,
    pub depth: usize,
    pub domain: Vec<[f64; 2]>,
    pub domain_area: f64,
    pub cells: Vec<FigureCell>,
    /// `|Σ cell areas − domain area| / domain area`, from exact areas.
    pub tiling_error: f64,
    #[serde(skip)]
    size: u32,
}

/// One position of a cylinder string: a digit or the tail above `max_digit`.
#[derive(Clone, Debug)]
enum Piece {
    Digit(Digit),
    Tail(Digit),
}

impl Piece {
    fn token(&self) -> String {
        match self {
            Piece::Digit(d) => d.to_string(),
            Piece::Tail(Digit::Pair(0, k)) => format!("*:{k}+"),
            Piece::Tail(Digit::Pair(i, k)) => format!("{i}:{k}+"),
            Piece::Tail(d) => format!("{d}+"),
        }
    }
}

fn pieces(system: &FibredSystem, max_digit: u64) -> Vec<Piece> {
    let mut out: Vec<Piece> = system.probe_digits(max_digit).into_iter().map(Piece::Digit).collect();
    match system.algorithm() {
        Algorithm::GarritySchweiger => out.push(Piece::Tail(Digit::Int(max_digit + 1))),
        // the primal remainder order changes with N, so the tail is one region
        Algorithm::BrunMult if system.side() == Side::Primal => out.push(Piece::Tail(Digit::Pair(0, max_digit + 1))),
        Algorithm::BrunMult => {
            out.extend((1..=system.n()).map(|i| Piece::Tail(Digit::Pair(i, max_digit + 1))));
        }
        _ => {}
    }
    out
}

/// Constraints of a piece; a tail keeps only the lower bound of its first
/// digit, which is the union of all cells from there on.
fn piece_constraints(system: &FibredSystem, p: &Piece) -> Result<Vec<CellConstraint>> {
    match p {
        Piece::Digit(d) => system.cell_constraints(d),
        Piece::Tail(Digit::Pair(0, k)) => {
            let mut c = system.cell_constraints(&Digit::Pair(1, *k))?;
            c.truncate(1);
            Ok(c)
        }
        Piece::Tail(d) => {
            let mut c = system.cell_constraints(d)?;
            c.remove(1);
            Ok(c)
        }
    }
}

fn label(tokens: &[String]) -> String {
    if tokens.iter().all(|t| t.chars().count() == 1) {
        tokens.concat()
    } else {
        tokens.join(",")
    }
}

fn to_xy(v: &[BigRational]) -> [f64; 2] {
    let p = rat_point_to_f64(v);
    [p[0], p[1]]
}

/// Vertices sorted counter-clockwise around their centroid.
fn polygon(p: &Polytope) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = p.vertices().iter().map(|v| to_xy(v)).collect();
    let c = centroid(&pts);
    pts.sort_by(|a, b| {
        let ta = (a[1] - c[1]).atan2(a[0] - c[0]);
        let tb = (b[1] - c[1]).atan2(b[0] - c[0]);
        ta.total_cmp(&tb)
    });
    pts
}

fn centroid(pts: &[[f64; 2]]) -> [f64; 2] {
    let k = pts.len() as f64;
    [pts.iter().map(|p| p[0]).sum::<f64>() / k, pts.iter().map(|p| p[1]).sum::<f64>() / k]
}

/// The system whose partition is drawn. Selmer at depth one shows the
/// partition of the whole simplex (primal side only); the jump map shares
/// the GS partition.
fn drawn_system(spec: &FigureSpec) -> Result<FibredSystem> {
    let base = registry(&spec.system, spec.n)?;
    let name = match base.algorithm() {
        Algorithm::Selmer if spec.depth == 1 && spec.side == Side::Primal => "selmer-full",
        Algorithm::FlipFlopJump => "gs",
        _ => base.name(),
    };
    let s = registry(name, spec.n)?;
    match spec.side {
        Side::Primal => Ok(s),
        Side::Dual => s.dualize(),
    }
}

pub fn render_figure(spec: &FigureSpec) -> Result<Figure> {
    if spec.n != 2 {
        return Err(Error::UnsupportedDimension { system: format!("figure of {}", spec.system), n: spec.n });
    }
    if !(1..=3).contains(&spec.depth) {
        return Err(Error::InvalidParams("figure depth must be 1, 2 or 3".into()));
    }
    if spec.frame < 1 {
        return Err(Error::InvalidParams("frame must be a positive integer".into()));
    }
    let system = drawn_system(spec)?;
    let mut base = system.domain().constraints();
    if !system.domain().is_bounded() {
        base.extend(frame_constraints(2, spec.frame));
    }
    let domain = Polytope::from_constraints(2, base.clone())?;
    let domain_area = domain.volume();
    let alphabet = pieces(&system, spec.max_digit);

    let mut cells = Vec::new();
    let mut total = BigRational::zero();
    let walk = Walk { system: &system, alphabet: &alphabet, depth: spec.depth };
    walk.visit(&[], &base, &IntMatrix::identity(3), &mut cells, &mut total)?;
    let err = ((&total - &domain_area) / &domain_area).to_f64().unwrap_or(f64::NAN).abs();
    Ok(Figure {
        system: spec.system.clone(),
        side: spec.side,
        depth: spec.depth,
        domain: polygon(&domain),
        domain_area: domain_area.to_f64().unwrap_or(f64::NAN),
        cells,
        tiling_error: err,
        size: spec.size,
    })
}

struct Walk<'a> {
    system: &'a FibredSystem,
    alphabet: &'a [Piece],
    depth: usize,
}

impl Walk<'_> {
    /// Depth-first over cylinder strings; a tail ends its string.
    fn visit(
        &self,
        string: &[Piece],
        cons: &[LinearForm],
        prefix: &IntMatrix,
        cells: &mut Vec<FigureCell>,
        total: &mut BigRational,
    ) -> Result<()> {
        for p in self.alphabet {
            let mut next = cons.to_vec();
            for c in piece_constraints(self.system, p)? {
                next.push(c.form.pull_back(prefix)?);
            }
            let Ok(poly) = Polytope::from_constraints(2, next.clone()) else { continue };
            let mut s = string.to_vec();
            s.push(p.clone());
            match p {
                Piece::Digit(d) if s.len() < self.depth => {
                    let m = &self.system.branch_matrix(d)? * prefix;
                    self.visit(&s, &next, &m, cells, total)?;
                }
                _ => {
                    let area = poly.volume();
                    *total += &area;
                    let tokens: Vec<String> = s.iter().map(Piece::token).collect();
                    cells.push(FigureCell {
                        label: label(&tokens),
                        vertices: polygon(&poly),
                        area: area.to_f64().unwrap_or(f64::NAN),
                        tail: matches!(p, Piece::Tail(_)),
                    });
                }
            }
        }
        Ok(())
    }
}

const PALETTE: [&str; 8] = ["#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5"];

impl Figure {
    pub fn labels(&self) -> Vec<&str> {
        self.cells.iter().map(|c| c.label.as_str()).collect()
    }

    /// SVG 1.1 document: one filled polygon and one label per cell.
    pub fn to_svg(&self) -> String {
        let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
        for p in &self.domain {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let margin = 24.0;
        let w = self.size.max(64) as f64;
        let scale = (w - 2.0 * margin) / (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let h = (hi[1] - lo[1]) * scale + 2.0 * margin;
        let px = |p: &[f64; 2]| ((p[0] - lo[0]) * scale + margin, h - margin - (p[1] - lo[1]) * scale);
        let points = |vs: &[[f64; 2]]| {
            vs.iter()
                .map(|p| {
                    let (x, y) = px(p);
                    format!("{x:.2},{y:.2}")
                })
                .collect::<Vec<_>>()
                .join(" ")
        };

        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
        );
        let _ = writeln!(s, "<title>{} {:?} depth {}</title>", self.system, self.side, self.depth);
        let _ = writeln!(
            s,
            r##"<defs><pattern id="tail" width="6" height="6" patternUnits="userSpaceOnUse"><path d="M0,6 L6,0" stroke="#888" stroke-width="1"/></pattern></defs>"##
        );
        for (i, c) in self.cells.iter().enumerate() {
            let fill = if c.tail { "url(#tail)".to_string() } else { PALETTE[i % PALETTE.len()].to_string() };
            let _ = writeln!(
                s,
                r##"<polygon points="{}" fill="{fill}" stroke="#222" stroke-width="0.8" data-label="{}"/>"##,
                points(&c.vertices),
                c.label
            );
        }
        let _ = writeln!(s, r##"<polygon points="{}" fill="none" stroke="#000" stroke-width="1.5"/>"##, points(&self.domain));
        for c in &self.cells {
            let side = c.area.sqrt() * scale;
            if side < 10.0 {
                continue;
            }
            let font = (side / 4.0).clamp(8.0, 22.0);
            let (x, y) = px(&centroid(&c.vertices));
            let text = if c.tail { format!("{} …", c.label) } else { c.label.clone() };
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="{font:.1}" text-anchor="middle" dominant-baseline="middle">{text}</text>"#
            );
        }
        s.push_str("</svg>\n");
        s
    }
}
