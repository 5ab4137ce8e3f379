use std::fmt::{self, Write as _};
use std::time::Instant;

use clap::Args;
use mcf_core::duality::{self, Intertwiner, IntertwinerKind};
use mcf_core::figure::{render_figure, FigureSpec};
use mcf_core::measure::{self, MeasureEstimate, MeasureParams, Method, Verdict};
use mcf_core::systems::{format_digits, Algorithm};
use mcf_core::{registry, Digit, FibredSystem, ProjPoint, Side};

use crate::report::{Record, ReportDocument};
use crate::{Cli, Command, Global, EXIT_USAGE};

#[derive(Debug)]
pub enum CliError {
    Core(mcf_core::Error),
    Usage(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use mcf_core::Error as E;
        match self {
            CliError::Core(
                E::InvalidDigit(_) | E::InvalidParams(_) | E::UnknownAlgorithm(_) | E::UnsupportedDimension { .. },
            )
            | CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) => e.exit_code() as u8,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(s) => write!(f, "{s}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<mcf_core::Error> for CliError {
    fn from(e: mcf_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Args, Debug)]
pub struct SystemArgs {
    /// Algorithm name (see `list`).
    #[arg(long)]
    pub system: String,
    /// Dimension; defaults to the smallest supported one.
    #[arg(long)]
    pub n: Option<usize>,
}

impl SystemArgs {
    fn load(&self) -> Result<FibredSystem> {
        let alg: Algorithm = self.system.parse()?;
        let n = self.n.unwrap_or(alg.dimensions().0);
        Ok(registry(&self.system, n)?)
    }
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    /// Starting point, comma-separated coordinates.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    /// Expand under the dual system.
    #[arg(long)]
    pub dual: bool,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum MeasureKind {
    /// μ(B(k₁…k_s)).
    Cylinder,
    /// The same quantity computed on the dual side from the reversed string.
    Polar,
    /// μ#(B#(k₁…k_s)) for the dual system.
    Dual,
    /// μ of the whole domain.
    Total,
}

#[derive(Args, Debug)]
pub struct MeasureArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    /// Digit string, e.g. "1,2", "(12),(123)" or "1:1,2:1".
    #[arg(long, default_value = "")]
    pub digits: String,
    #[arg(long, value_enum, default_value_t = MeasureKind::Cylinder)]
    pub kind: MeasureKind,
    /// cov (change of variables) or direct.
    #[arg(long, default_value = "cov")]
    pub method: String,
    /// Mirror each draw (antithetic variates).
    #[arg(long)]
    pub antithetic: bool,
}

#[derive(Args, Debug)]
pub struct SymmetryArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    /// Digit string to test; repeatable.
    #[arg(long)]
    pub digits: Vec<String>,
    /// Test every string of `--length` over these comma-separated digits.
    #[arg(long)]
    pub over: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub length: usize,
    #[arg(long, default_value = "cov")]
    pub method: String,
    #[arg(long)]
    pub antithetic: bool,
}

#[derive(Args, Debug)]
pub struct DualCheckArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    /// Probe bound for unbounded alphabets.
    #[arg(long = "k-max", default_value_t = duality::K_MAX)]
    pub k_max: u64,
    /// Check these digits instead of the intertwiner's digit set.
    #[arg(long)]
    pub digits: Option<String>,
    /// Number of probed digits that also get the sampled cell check.
    #[arg(long = "cell-digits", default_value_t = 11)]
    pub cell_digits: usize,
    #[arg(long = "cell-samples", default_value_t = 10_000)]
    pub cell_samples: usize,
}

#[derive(Args, Debug)]
pub struct DualSearchArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    /// Entry bound, 1 to 3.
    #[arg(long, default_value_t = 1)]
    pub bound: i64,
    /// Probe digits; defaults to the alphabet capped at `--k-max`.
    #[arg(long)]
    pub digits: Option<String>,
    #[arg(long = "k-max", default_value_t = 5)]
    pub k_max: u64,
    #[arg(long = "cell-samples", default_value_t = 2_000)]
    pub cell_samples: usize,
}

#[derive(Args, Debug)]
pub struct TelephoneArgs {
    /// Largest m, at most 9.
    #[arg(long, default_value_t = 6)]
    pub max: usize,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    #[command(flatten)]
    pub sys: SystemArgs,
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    /// Draw the dual partition.
    #[arg(long)]
    pub dual: bool,
    /// Clip for unbounded dual domains.
    #[arg(long, default_value_t = 4)]
    pub frame: i64,
    /// Digits above this merge into a tail cell.
    #[arg(long = "max-digit", default_value_t = 2)]
    pub max_digit: u64,
    /// Width in pixels.
    #[arg(long, default_value_t = 480)]
    pub size: u32,
}

fn params(g: &Global, method: &str, antithetic: bool) -> Result<MeasureParams> {
    if g.workers == 0 || g.samples < 2 {
        return Err(CliError::Usage("need at least one worker and two samples".into()));
    }
    let method: Method = method.parse()?;
    Ok(MeasureParams {
        samples: g.samples,
        seed: g.seed,
        method,
        workers: g.workers,
        antithetic,
        z_crit: g.z_crit,
    })
}

fn parse_point(s: &str, n: usize) -> Result<ProjPoint> {
    let coords = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| CliError::Usage(format!("`{t}` is not a number"))))
        .collect::<Result<Vec<f64>>>()?;
    if coords.len() != n {
        return Err(CliError::Usage(format!("expected {n} coordinates, got {}", coords.len())));
    }
    Ok(ProjPoint::new(coords)?)
}

fn estimate_record(r: Record, e: &MeasureEstimate) -> Record {
    r.estimate("value", e.value)
        .estimate("stderr", e.stderr)
        .estimate("relative_stderr", e.relative_stderr())
        .estimate("samples", e.samples)
}

fn system_inputs(r: Record, s: &FibredSystem) -> Record {
    r.input("system", s.name()).input("n", s.n())
}

pub fn run(cli: &Cli, echo: String) -> Result<()> {
    let started = Instant::now();
    let g = &cli.global;
    let mut doc = ReportDocument::new(echo, g.seed);
    let mut text = String::new();
    let mut svg = None;
    match &cli.command {
        Command::List => list(&mut doc, &mut text),
        Command::Expand(a) => expand(a, &mut doc, &mut text)?,
        Command::Measure(a) => measure_cmd(g, a, &mut doc, &mut text)?,
        Command::Symmetry(a) => symmetry(g, a, &mut doc, &mut text)?,
        Command::DualCheck(a) => dual_check(g, a, &mut doc, &mut text)?,
        Command::DualSearch(a) => dual_search(g, a, &mut doc, &mut text)?,
        Command::Telephone(a) => telephone(a, &mut doc, &mut text)?,
        Command::Figure(a) => svg = Some(figure(a, &mut doc, &mut text)?),
    }
    doc.finish(started);

    if let Some(path) = &g.csv {
        let csv = doc.to_csv().map_err(|e| CliError::Io(std::io::Error::other(e)))?;
        std::fs::write(path, csv)?;
    }
    if let Some(svg) = svg {
        match &g.svg_out {
            Some(path) => std::fs::write(path, svg)?,
            None if !g.json => {
                print!("{svg}");
                return Ok(());
            }
            None => {}
        }
    }
    if g.json {
        println!("{}", doc.to_json());
    } else {
        print!("{text}");
    }
    Ok(())
}

fn list(doc: &mut ReportDocument, text: &mut String) {
    let _ = writeln!(text, "{:<14} {:<6} {:<6} {:<5} {:<38} alphabet", "system", "n", "full", "dual", "intertwiner");
    for alg in Algorithm::ALL {
        let (lo, hi) = alg.dimensions();
        let range = match hi {
            Some(h) if h == lo => lo.to_string(),
            Some(h) => format!("{lo}-{h}"),
            None => format!("{lo}+"),
        };
        let phi = match (duality::known_intertwiner(alg.name(), lo), alg) {
            (Ok(_), Algorithm::Brun) => "n=2 matrix; n>=3 closed form on {0}".to_string(),
            (Ok(p), _) => format!("{} on {}", kind_name(&p), p.digits),
            (Err(_), _) => "none".to_string(),
        };
        let _ = writeln!(
            text,
            "{:<14} {:<6} {:<6} {:<5} {:<38} {}",
            alg.name(),
            range,
            alg.is_full(),
            alg.has_dual(),
            phi,
            alg.alphabet()
        );
        doc.push(
            Record::new("system")
                .input("system", alg.name())
                .estimate("n_min", lo)
                .estimate("n_max", hi)
                .estimate("is_full", alg.is_full())
                .estimate("has_dual", alg.has_dual())
                .estimate("intertwiner", phi)
                .estimate("alphabet", alg.alphabet()),
        );
    }
}

fn kind_name(p: &Intertwiner) -> &'static str {
    match p.kind {
        IntertwinerKind::Matrix(_) => "matrix",
        IntertwinerKind::ClosedForm(_) => "closed form",
    }
}

fn expand(a: &ExpandArgs, doc: &mut ReportDocument, text: &mut String) -> Result<()> {
    let mut s = a.sys.load()?;
    if a.dual {
        s = s.dualize()?;
    }
    let x = parse_point(&a.x, s.n())?;
    let e = s.expand(&x, a.steps)?;
    if a.steps > 0 && e.digits.is_empty() {
        // the starting point itself could not be classified
        return Err(match e.stopped {
            Some(mcf_core::systems::Stop::OutOfDomain) => mcf_core::Error::OutOfDomain,
            Some(mcf_core::systems::Stop::SingularPoint) => mcf_core::Error::SingularPoint,
            _ => mcf_core::Error::BoundaryPoint,
        }
        .into());
    }
    let digits: Vec<String> = e.digits.iter().map(Digit::to_string).collect();
    if !digits.is_empty() {
        let _ = writeln!(text, "{}", digits.join(" "));
    }
    if let Some(stop) = e.stopped {
        eprintln!("orbit stopped after {} digits: {stop:?}", e.digits.len());
    }
    doc.push(
        system_inputs(Record::new("expand"), &s)
            .input("side", s.side())
            .input("x", x.coords())
            .input("steps", a.steps)
            .estimate("digits", &digits)
            .estimate("point", e.point.coords())
            .estimate("stopped", e.stopped),
    );
    Ok(())
}

fn measure_cmd(g: &Global, a: &MeasureArgs, doc: &mut ReportDocument, text: &mut String) -> Result<()> {
    let s = a.sys.load()?;
    let p = params(g, &a.method, a.antithetic)?;
    let digits = s.parse_digits(&a.digits)?;
    let need_digits = !matches!(a.kind, MeasureKind::Total);
    if need_digits && digits.is_empty() {
        return Err(CliError::Usage("--digits is required for this measure".into()));
    }
    let e = match a.kind {
        MeasureKind::Cylinder => measure::cylinder_measure(&s, &digits, &p)?,
        MeasureKind::Polar => measure::polar_measure(&s, &digits, &p)?,
        MeasureKind::Dual => measure::dual_measure(&s, &digits, &p)?,
        MeasureKind::Total => measure::total_measure(&s, &p)?,
    };
    let _ = writeln!(
        text,
        "{:?} [{}] = {:.6e} ± {:.2e} ({} samples, {:?})",
        a.kind,
        format_digits(&digits),
        e.value,
        e.stderr,
        e.samples,
        e.method
    );
    let r = system_inputs(Record::new("measure"), &s)
        .input("kind", format!("{:?}", a.kind).to_lowercase())
        .input("digits", format_digits(&digits))
        .input("method", e.method);
    doc.push(estimate_record(r, &e));
    Ok(())
}

/// All strings of `length` over `tokens`, in lexicographic order.
fn strings(tokens: &[Digit], length: usize) -> Vec<Vec<Digit>> {
    let mut out = vec![vec![]];
    for _ in 0..length {
        out = out
            .into_iter()
            .flat_map(|p| {
                tokens.iter().map(move |t| {
                    let mut q = p.clone();
                    q.push(t.clone());
                    q
                })
            })
            .collect();
    }
    out
}

fn verdict_name(v: &measure::SymmetryVerdict) -> String {
    match (v.verdict, v.warning) {
        (Verdict::Violated, _) => "violated".into(),
        (Verdict::Consistent, true) => "consistent (warning: z > 3)".into(),
        (Verdict::Consistent, false) => "consistent".into(),
    }
}

fn symmetry(g: &Global, a: &SymmetryArgs, doc: &mut ReportDocument, text: &mut String) -> Result<()> {
    let s = a.sys.load()?;
    let p = params(g, &a.method, a.antithetic)?;
    let mut list = Vec::new();
    for d in &a.digits {
        list.push(s.parse_digits(d)?);
    }
    if let Some(over) = &a.over {
        if a.length == 0 {
            return Err(CliError::Usage("--length must be positive".into()));
        }
        list.extend(strings(&s.parse_digits(over)?, a.length));
    }
    if list.is_empty() {
        return Err(CliError::Usage("give --digits or --over".into()));
    }
    let battery = list.len() > 1;
    let _ = writeln!(text, "{:<22} {:>13} {:>10} {:>13} {:>10} {:>8}  verdict", "digits", "forward", "stderr", "reversed", "stderr", "z");
    for digits in list {
        let label = format_digits(&digits);
        let mut rev = digits.clone();
        rev.reverse();
        let base = system_inputs(Record::new("symmetry"), &s)
            .input("digits", &label)
            .input("reversed", format_digits(&rev))
            .input("method", p.method)
            .input("z_crit", p.z_crit);
        match measure::symmetry_test(&s, &digits, &p) {
            Ok(v) => {
                let name = verdict_name(&v);
                let _ = writeln!(
                    text,
                    "{:<22} {:>13.6e} {:>10.2e} {:>13.6e} {:>10.2e} {:>8.2}  {}",
                    label, v.forward.value, v.forward.stderr, v.reversed.value, v.reversed.stderr, v.z, name
                );
                doc.push(
                    base.estimate("forward", v.forward.value)
                        .estimate("forward_stderr", v.forward.stderr)
                        .estimate("reversed", v.reversed.value)
                        .estimate("reversed_stderr", v.reversed.stderr)
                        .estimate("z", v.z)
                        .estimate("samples", v.forward.samples)
                        .verdict(name),
                );
            }
            // in a battery a divergent cylinder is a finding, not a failure
            Err(mcf_core::Error::DivergentIntegral(why)) if battery => {
                let _ = writeln!(text, "{label:<22} divergent: {why}");
                doc.push(base.verdict("divergent"));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn dual_check(g: &Global, a: &DualCheckArgs, doc: &mut ReportDocument, text: &mut String) -> Result<()> {
    let s = a.sys.load()?;
    let phi = duality::known_intertwiner(s.name(), s.n())?;
    let probe = match &a.digits {
        Some(d) => s.parse_digits(d)?,
        None => duality::digit_probe(&s, &phi, a.k_max),
    };
    let commutation = duality::verify_commutation(&s, &phi, &probe)?;
    let _ = writeln!(text, "{} n={}: {}", s.name(), s.n(), duality::describe(&phi));
    let _ = writeln!(text, "{:<10} {:<12} {:>10} {:>10}", "digit", "commutation", "forward", "inverse");
    let mut all = true;
    let mut cells_done = 0;
    for (i, c) in commutation.iter().enumerate() {
        let cell = if cells_done < a.cell_digits && phi.digits.contains(&c.digit) {
            cells_done += 1;
            Some(duality::verify_cell_mapping(&s, &phi, &c.digit, a.cell_samples, g.seed.wrapping_add(i as u64))?)
        } else {
            None
        };
        let pass = c.pass && cell.as_ref().is_none_or(|m| m.pass());
        all &= pass;
        let pct = |f: f64| format!("{:.2}%", 100.0 * f);
        let _ = writeln!(
            text,
            "{:<10} {:<12} {:>10} {:>10}",
            c.digit.to_string(),
            if c.pass { "exact" } else { "FAIL" },
            cell.as_ref().map(|m| pct(m.forward.fraction())).unwrap_or_else(|| "-".into()),
            cell.as_ref().map(|m| pct(m.inverse.fraction())).unwrap_or_else(|| "-".into()),
        );
        let mut r = system_inputs(Record::new("intertwiner"), &s)
            .input("digit", c.digit.to_string())
            .input("in_digit_set", phi.digits.contains(&c.digit))
            .estimate("commutes", c.pass);
        if let Some(res) = c.residual {
            r = r.estimate("residual", res);
        }
        if let Some(m) = &cell {
            r = r.estimate("cell_forward", m.forward).estimate("cell_inverse", m.inverse);
        }
        doc.push(r.verdict(if pass { "pass" } else { "fail" }));
    }
    let _ = writeln!(text, "verdict: {}", if all { "pass" } else { "fail" });
    doc.push(
        system_inputs(Record::new("self-duality"), &s)
            .input("intertwiner", &phi)
            .input("probed", commutation.len())
            .verdict(if all { "pass" } else { "fail" }),
    );
    Ok(())
}

fn dual_search(g: &Global, a: &DualSearchArgs, doc: &mut ReportDocument, text: &mut String) -> Result<()> {
    let s = a.sys.load()?;
    let probe = match &a.digits {
        Some(d) => s.parse_digits(d)?,
        None => s.probe_digits(a.k_max),
    };
    let base = system_inputs(Record::new("search"), &s)
        .input("bound", a.bound)
        .input("probe", format_digits(&probe))
        .input("cell_samples", a.cell_samples);
    match duality::search_intertwiner(&s, a.bound, &probe, a.cell_samples, g.seed) {
        Ok(out) => {
            let _ = writeln!(text, "{} candidates from {} assignments of the free entries", out.candidates.len(), out.examined);
            for c in &out.candidates {
                let rows: Vec<String> = c
                    .matrix
                    .rows()
                    .map(|r| format!("[{}]", r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))
                    .collect();
                let _ = writeln!(text, "  [{}]  cells {:.0}%", rows.join(","), 100.0 * c.cell_fraction);
            }
            doc.push(
                base.estimate("examined", out.examined)
                    .estimate("candidates", &out.candidates)
                    .verdict(format!("{} found", out.candidates.len())),
            );
        }
        Err(mcf_core::Error::SearchSpaceExhausted { examined }) => {
            let _ = writeln!(text, "no intertwiner among {examined} assignments of the free entries");
            doc.push(base.estimate("examined", examined).estimate("candidates", Vec::<()>::new()).verdict("exhausted"));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn telephone(a: &TelephoneArgs, doc: &mut ReportDocument, text: &mut String) -> Result<()> {
    if !(1..=9).contains(&a.max) {
        return Err(CliError::Usage("--max must be between 1 and 9".into()));
    }
    let _ = writeln!(text, "{:<3} {:>10} {:>10} {:>8} {:>10}", "m", "involutions", "recurrence", "coset", "criterion");
    let mut counts = Vec::new();
    for m in 1..=a.max {
        let count = duality::involutions(m).len();
        let coset = duality::w0_coset(m).len();
        let criterion = if (2..=6).contains(&m) { Some(duality::involution_criterion_check(m)?) } else { None };
        counts.push(count);
        let _ = writeln!(
            text,
            "{:<3} {:>10} {:>10} {:>8} {:>10}",
            m,
            count,
            duality::telephone_number(m),
            coset,
            criterion.map(|c| c.to_string()).unwrap_or_else(|| "-".into())
        );
        doc.push(
            Record::new("involutions")
                .input("m", m)
                .estimate("count", count)
                .estimate("recurrence", duality::telephone_number(m))
                .estimate("coset_size", coset)
                .estimate("criterion", criterion)
                .verdict(if count as u64 == duality::telephone_number(m) && criterion != Some(false) { "pass" } else { "fail" }),
        );
    }
    let _ = writeln!(text, "{}", counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","));
    Ok(())
}

fn figure(a: &FigureArgs, doc: &mut ReportDocument, text: &mut String) -> Result<String> {
    let mut spec = FigureSpec::new(&a.sys.system, a.depth);
    spec.n = a.sys.n.unwrap_or(2);
    spec.frame = a.frame;
    spec.max_digit = a.max_digit;
    spec.size = a.size;
    if a.dual {
        spec.side = Side::Dual;
    }
    let f = render_figure(&spec)?;
    let _ = writeln!(text, "{} cells, tiling error {:.3e}", f.cells.len(), f.tiling_error);
    for c in &f.cells {
        let _ = writeln!(text, "  {:<16} area {:.6}{}", c.label, c.area, if c.tail { " (tail)" } else { "" });
    }
    doc.push(
        Record::new("figure")
            .input("spec", &spec)
            .estimate("labels", f.labels())
            .estimate("areas", f.cells.iter().map(|c| c.area).collect::<Vec<_>>())
            .estimate("domain_area", f.domain_area)
            .estimate("tiling_error", f.tiling_error)
            .verdict(if f.tiling_error <= 1e-3 { "tiles" } else { "gaps" }),
    );
    Ok(f.to_svg())
}
