//! Command-line front end.
//!
//! Every artifact starts with a metadata header carrying the tool version,
//! the basis, every tolerance and the seed: `#` lines in CSV, a `meta` object
//! in JSON and a leading comment in SVG. Output is a pure function of the
//! arguments, so repeated runs are byte-identical.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bases::{BasisSpec, Generator, TransitionMatrix};
use crate::diagram::{uncertainty_diagram, Diagram, DiagramPoint, SearchConfig};
use crate::error::{Error, Result};
use crate::incompat::{incompat_report, overlap_extrema, NMIN_MAX_DIM};
use crate::io;
use crate::kd::{self, StateVector};
use crate::svg;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SEED_ENV: &str = "KDSCOPE_SEED";

#[derive(Parser, Debug)]
#[command(name = "kdscope", version, about = "Kirkwood-Dirac nonclassicality and support uncertainty of basis pairs")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a transition matrix and print it
    Bases(BasesArgs),
    /// KD distribution, nonclassicality and supports of a state
    Kd(KdArgs),
    /// Overlap extrema, strong/complete incompatibility and n_min
    Incompat(IncompatArgs),
    /// Uncertainty diagram classified by KD-classicality
    Diagram(DiagramArgs),
    /// Bound and theorem checks on seeded random states
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BasisKind {
    Dft,
    Mub4,
    Perturbed,
    Spin,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BaseKind {
    Dft,
    Mub4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

#[derive(Args, Debug, Clone)]
struct BasisArgs {
    /// Basis family
    #[arg(long, value_enum)]
    basis: BasisKind,
    /// Dimension for dft
    #[arg(long)]
    dim: Option<usize>,
    /// Unit-modulus parameter of mub4, written RE+IMi
    #[arg(long, value_parser = parse_finite_complex, allow_hyphen_values = true)]
    s: Option<C64>,
    /// Perturbation strength
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<f64>,
    /// Family perturbed by --basis perturbed
    #[arg(long, value_enum, default_value = "mub4")]
    base: BaseKind,
    /// Hermitian generator as a matrix JSON file (default: i above, -i below the diagonal)
    #[arg(long)]
    generator: Option<PathBuf>,
    /// Spin quantum number, integer or half-integer
    #[arg(long)]
    spin: Option<f64>,
    /// Matrix JSON file for --basis file
    #[arg(long)]
    path: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct TolArgs {
    /// Amplitude modulus counted as zero in supports
    #[arg(long, default_value_t = kd::DEFAULT_ETA)]
    eta: f64,
    /// Tolerance of the KD-classicality test on exact states
    #[arg(long, default_value_t = kd::DEFAULT_TAU)]
    tau: f64,
    /// Tolerance on N_NC - 1 for searched states
    #[arg(long, default_value_t = 1e-6)]
    tau_class: f64,
    /// Modulus below which a minor counts as vanishing
    #[arg(long, default_value_t = crate::incompat::DEFAULT_MINOR_TOL)]
    minor_tol: f64,
}

#[derive(Args, Debug, Clone)]
struct SearchArgs {
    /// Random seed; KDSCOPE_SEED overrides it when set
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Simplex restarts per cell
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    /// Simplex iterations per restart
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    /// Simplex convergence tolerance
    #[arg(long, default_value_t = 1e-10)]
    conv_tol: f64,
    /// Worker threads (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BasesArgs {
    #[command(flatten)]
    basis: BasisArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct KdArgs {
    #[command(flatten)]
    basis: BasisArgs,
    /// State JSON file (default: a random state drawn from --seed)
    #[arg(long)]
    state: Option<PathBuf>,
    #[command(flatten)]
    tol: TolArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct IncompatArgs {
    #[command(flatten)]
    basis: BasisArgs,
    #[command(flatten)]
    tol: TolArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct DiagramArgs {
    #[command(flatten)]
    basis: BasisArgs,
    #[command(flatten)]
    tol: TolArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    out: OutArgs,
    /// List the full d×d lattice, EMPTY points included
    #[arg(long)]
    grid: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    basis: BasisArgs,
    #[command(flatten)]
    tol: TolArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    out: OutArgs,
    /// Random states per check
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

/// Parses `RE+IMi`, `RE-IMi`, `RE`, `IMi`, `i` or `-i`.
pub fn parse_complex(text: &str) -> std::result::Result<C64, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse '{text}' as a complex number RE+IMi");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t.parse::<f64>().map(|re| C64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.parse().map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

fn parse_finite_complex(text: &str) -> std::result::Result<C64, String> {
    let z = parse_complex(text)?;
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(format!("'{text}' is not finite"));
    }
    Ok(z)
}

/// Failure of a run, mapped to an exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Invalid(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(Error::Io(e))
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

impl BasisArgs {
    fn spec(&self) -> Run<BasisSpec> {
        let need_dim = || self.dim.ok_or_else(|| usage("--dim is required for dft"));
        let mub_s = || self.s.unwrap_or(C64::new(0.0, 1.0));
        Ok(match self.basis {
            BasisKind::Dft => BasisSpec::Dft { d: need_dim()? },
            BasisKind::Mub4 => BasisSpec::Mub4 { s: mub_s() },
            BasisKind::Spin => BasisSpec::Spin { spin: self.spin.ok_or_else(|| usage("--spin is required for spin"))? },
            BasisKind::File => {
                BasisSpec::File { path: self.path.clone().ok_or_else(|| usage("--path is required for file"))? }
            }
            BasisKind::Perturbed => {
                let eps = self.eps.ok_or_else(|| usage("--eps is required for perturbed"))?;
                let base = match self.base {
                    BaseKind::Dft => BasisSpec::Dft { d: need_dim()? },
                    BaseKind::Mub4 => BasisSpec::Mub4 { s: mub_s() },
                };
                let generator = match &self.generator {
                    Some(p) => Generator::Custom(io::parse_matrix(&std::fs::read_to_string(p)?)?),
                    None => Generator::Default,
                };
                BasisSpec::Perturbed { base: Box::new(base), eps, generator }
            }
        })
    }
}

impl TolArgs {
    fn validate(&self) -> Run<()> {
        for (name, v) in
            [("eta", self.eta), ("tau", self.tau), ("tau-class", self.tau_class), ("minor-tol", self.minor_tol)]
        {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Failure::Invalid(Error::Parse(format!("--{name} must be positive, got {v}"))));
            }
        }
        Ok(())
    }
}

impl SearchArgs {
    fn effective_seed(&self) -> Run<u64> {
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Failure::Invalid(Error::Parse(format!("{SEED_ENV}='{v}' is not an unsigned integer")))),
            Err(_) => Ok(self.seed),
        }
    }

    fn config(&self, tol: &TolArgs) -> Run<SearchConfig> {
        let cfg = SearchConfig {
            seed: self.effective_seed()?,
            restarts: self.restarts,
            max_iter: self.max_iter,
            conv_tol: self.conv_tol,
            eta: tol.eta,
            tau_class: tol.tau_class,
            ..SearchConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Provenance recorded in every artifact.
#[derive(Serialize)]
struct Meta {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    basis: String,
    format: &'static str,
    eta: f64,
    tau: f64,
    tau_class: f64,
    minor_tol: f64,
    seed: u64,
    restarts: usize,
    max_iter: usize,
    conv_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
}

impl Meta {
    fn lines(&self) -> Vec<String> {
        let mut v = vec![
            format!("{} {}", self.tool, self.version),
            format!("command: {}", self.command),
            format!("basis: {}", self.basis),
            format!(
                "eta={:e} tau={:e} tau_class={:e} minor_tol={:e}",
                self.eta, self.tau, self.tau_class, self.minor_tol
            ),
            format!(
                "seed={} restarts={} max_iter={} conv_tol={:e}",
                self.seed, self.restarts, self.max_iter, self.conv_tol
            ),
        ];
        if let Some(n) = self.note {
            v.push(n.to_string());
        }
        v
    }

    fn csv_header(&self) -> String {
        self.lines().iter().map(|l| format!("# {l}\n")).collect()
    }
}

const SEARCH_NOTE: &str =
    "NONCLASSICAL means no KD-classical state was found by the configured search, not a proof of absence";

struct Ctx<'a> {
    command: &'static str,
    spec: BasisSpec,
    u: TransitionMatrix,
    tol: Option<&'a TolArgs>,
    search: Option<SearchConfig>,
}

impl Ctx<'_> {
    fn meta(&self, format: Format, note: Option<&'static str>) -> Meta {
        let defaults = SearchConfig::default();
        let s = self.search.as_ref().unwrap_or(&defaults);
        let (eta, tau, tau_class, minor_tol) = match self.tol {
            Some(t) => (t.eta, t.tau, t.tau_class, t.minor_tol),
            None => (kd::DEFAULT_ETA, kd::DEFAULT_TAU, defaults.tau_class, crate::incompat::DEFAULT_MINOR_TOL),
        };
        Meta {
            tool: "kdscope",
            version: VERSION,
            command: self.command,
            basis: self.spec.to_string(),
            format: format.name(),
            eta,
            tau,
            tau_class,
            minor_tol,
            seed: s.seed,
            restarts: s.restarts,
            max_iter: s.max_iter,
            conv_tol: s.conv_tol,
            note,
        }
    }
}

/// A JSON artifact: the metadata object followed by the command's fields.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    meta: &'a Meta,
    #[serde(flatten)]
    body: T,
}

fn with_meta<T: Serialize>(meta: &Meta, body: T) -> String {
    serde_json::to_string_pretty(&Envelope { meta, body }).expect("artifact serializes") + "\n"
}

#[derive(Serialize)]
struct MatrixBody {
    d: usize,
    rows: Vec<Vec<io::WireComplex>>,
}

#[derive(Serialize)]
struct WorstEntry {
    i: usize,
    j: usize,
    q: io::WireComplex,
}

#[derive(Serialize)]
struct KdBody {
    d: usize,
    state: io::StateOut,
    q: Vec<Vec<io::WireComplex>>,
    ncc: io::Real,
    kd_classical: bool,
    worst_entry: Option<WorstEntry>,
    support: kd::SupportProfile,
    bounds: kd::BoundReport,
}

#[derive(Serialize)]
struct IncompatBody {
    d: usize,
    report: crate::incompat::IncompatReport,
}

#[derive(Serialize)]
struct DiagramBody<'a> {
    d: usize,
    hyperbola_constant: f64,
    edge: usize,
    n_min: usize,
    stroinc: bool,
    points: &'a [DiagramPoint],
}

#[derive(Serialize)]
struct VerifyBody<'a> {
    samples: usize,
    passed: bool,
    checks: &'a [Check],
}

fn pick(format: Option<Format>, default: Format, allowed: &[Format]) -> Run<Format> {
    let f = format.unwrap_or(default);
    if !allowed.contains(&f) {
        return Err(usage(format!("--format {} is not supported by this command", f.name())));
    }
    Ok(f)
}

fn cmd_bases(a: &BasesArgs) -> Run<(String, Option<PathBuf>)> {
    let format = pick(a.out.format, Format::Json, &[Format::Json, Format::Csv])?;
    let spec = a.basis.spec()?;
    let u = spec.build()?;
    let ctx = Ctx { command: "bases", spec, u, tol: None, search: None };
    let meta = ctx.meta(format, None);
    let m = ctx.u.matrix();
    let text = match format {
        Format::Json => with_meta(&meta, MatrixBody { d: m.rows(), rows: io::wire_matrix(m) }),
        _ => {
            let mut s = meta.csv_header();
            s.push_str("i,j,re,im\n");
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    s.push_str(&format!("{i},{j},{:.16e},{:.16e}\n", m[(i, j)].re, m[(i, j)].im));
                }
            }
            s
        }
    };
    Ok((text, a.out.out.clone()))
}

fn cmd_kd(a: &KdArgs) -> Run<(String, Option<PathBuf>)> {
    let format = pick(a.out.format, Format::Json, &[Format::Json, Format::Csv])?;
    a.tol.validate()?;
    let spec = a.basis.spec()?;
    let u = spec.build()?;
    let search = a.search.config(&a.tol)?;
    let psi = match &a.state {
        Some(p) => StateVector::new(io::parse_state(&std::fs::read_to_string(p)?)?)?,
        None => kd::random_state(u.dim(), search.seed),
    };
    let q = kd::kd_distribution(&u, &psi)?;
    let ncc = kd::nonclassicality(&q);
    let verdict = kd::is_kd_classical(&q, a.tol.tau);
    let prof = kd::support(&u, &psi, a.tol.eta)?;
    let bounds = kd::bound_report(&u, &psi)?;
    let ctx = Ctx { command: "kd", spec, u, tol: Some(&a.tol), search: Some(search) };
    let meta = ctx.meta(format, None);
    let text = match format {
        Format::Json => {
            let body = KdBody {
                d: q.dim(),
                state: io::StateOut::new(psi.amps()),
                q: io::wire_matrix(q.matrix()),
                ncc: io::Real(ncc),
                kd_classical: verdict.classical,
                worst_entry: verdict.worst.map(|(i, j, z)| WorstEntry { i, j, q: io::wire(z) }),
                support: prof.clone(),
                bounds,
            };
            with_meta(&meta, body)
        }
        _ => {
            let mut s = meta.csv_header();
            s.push_str(&format!(
                "# ncc={:.16e} kd_classical={} n_a={} n_b={}\n",
                ncc, verdict.classical, prof.n_a, prof.n_b
            ));
            s.push_str("i,j,re,im\n");
            let m = q.matrix();
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    s.push_str(&format!("{i},{j},{:.16e},{:.16e}\n", m[(i, j)].re, m[(i, j)].im));
                }
            }
            s
        }
    };
    Ok((text, a.out.out.clone()))
}

fn cmd_incompat(a: &IncompatArgs) -> Run<(String, Option<PathBuf>)> {
    let format = pick(a.out.format, Format::Json, &[Format::Json, Format::Csv])?;
    a.tol.validate()?;
    let spec = a.basis.spec()?;
    let u = spec.build()?;
    let search = a.search.config(&a.tol)?;
    let report = incompat_report(&u, a.tol.eta, a.tol.minor_tol)?;
    let ctx = Ctx { command: "incompat", spec, u, tol: Some(&a.tol), search: Some(search) };
    let meta = ctx.meta(format, None);
    let text = match format {
        Format::Json => with_meta(&meta, IncompatBody { d: ctx.u.dim(), report: report.clone() }),
        _ => {
            let mut s = meta.csv_header();
            s.push_str("key,value\n");
            let fmt_set = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            let witness = report
                .coinc_witness
                .as_ref()
                .map_or(String::new(), |w| format!("S={{{}}} T={{{}}}", fmt_set(&w.s), fmt_set(&w.t)));
            let rows = [
                ("d", ctx.u.dim().to_string()),
                ("m_ab", format!("{:.16e}", report.extrema.m_ab)),
                ("M_ab", format!("{:.16e}", report.extrema.big_m_ab)),
                ("stroinc", report.stroinc.to_string()),
                ("coinc", report.coinc.to_string()),
                ("coinc_witness", witness),
                ("n_min", report.n_min.map_or(String::new(), |n| n.to_string())),
                ("n_min_lower_bound", format!("{:.16e}", report.n_min_lower_bound)),
                ("edge", report.edge.to_string()),
                ("legacy_bound", report.legacy_bound.to_string()),
            ];
            for (k, v) in rows {
                s.push_str(&format!("{k},{v}\n"));
            }
            s
        }
    };
    Ok((text, a.out.out.clone()))
}

/// Diagram rows as CSV, sorted by `(n_a, n_b)`.
pub fn diagram_csv(points: &[DiagramPoint], header: &str) -> String {
    let mut rows: Vec<&DiagramPoint> = points.iter().collect();
    rows.sort_by_key(|p| (p.n_a, p.n_b));
    let mut s = String::from(header);
    s.push_str("n_a,n_b,classification,min_ncc_found,cells\n");
    for p in rows {
        let ncc = p.min_ncc_found.map_or(String::new(), |v| format!("{v:.12e}"));
        s.push_str(&format!("{},{},{},{},{}\n", p.n_a, p.n_b, p.classification.as_str(), ncc, p.cells));
    }
    s
}

fn diagram_json(diagram: &Diagram, grid: bool, meta: &Meta) -> String {
    let points = if grid { diagram.grid() } else { diagram.points.clone() };
    let body = DiagramBody {
        d: diagram.d,
        hyperbola_constant: diagram.hyperbola_constant,
        edge: diagram.edge,
        n_min: diagram.n_min,
        stroinc: diagram.stroinc,
        points: &points,
    };
    with_meta(meta, body)
}

fn cmd_diagram(a: &DiagramArgs) -> Run<(String, Option<PathBuf>)> {
    let format = pick(a.out.format, Format::Csv, &[Format::Csv, Format::Json, Format::Svg])?;
    a.tol.validate()?;
    let spec = a.basis.spec()?;
    let u = spec.build()?;
    let search = a.search.config(&a.tol)?;
    let diagram = uncertainty_diagram(&u, &search)?;
    let ctx = Ctx { command: "diagram", spec, u, tol: Some(&a.tol), search: Some(search) };
    let meta = ctx.meta(format, Some(SEARCH_NOTE));
    let text = match format {
        Format::Csv => {
            let points = if a.grid { diagram.grid() } else { diagram.points.clone() };
            diagram_csv(&points, &meta.csv_header())
        }
        Format::Json => diagram_json(&diagram, a.grid, &meta),
        Format::Svg => svg::render_svg(&diagram, &meta.lines()),
    };
    Ok((text, a.out.out.clone()))
}

#[derive(Serialize)]
struct Check {
    check: &'static str,
    passed: bool,
    detail: String,
}

fn verify_checks(u: &TransitionMatrix, tol: &TolArgs, seed: u64, samples: usize) -> Result<Vec<Check>> {
    let d = u.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = Vec::with_capacity(samples);
    for k in 0..samples {
        states.push(match k % 3 {
            0 => kd::random_state_with(d, &mut rng),
            1 => kd::random_sparse_state_with(u, false, &mut rng),
            _ => kd::random_sparse_state_with(u, true, &mut rng),
        });
    }
    let stroinc = crate::incompat::is_stroinc(u, tol.eta);
    let m = overlap_extrema(u).big_m_ab;
    let inv_m2 = 1.0 / (m * m);

    let (mut bound_bad, mut marg_bad, mut thm1_bad, mut above_edge) = (0, 0, 0, 0);
    for psi in &states {
        let q = kd::kd_distribution(u, psi)?;
        let ncc = kd::nonclassicality(&q);
        let p = kd::support(u, psi, tol.eta)?;
        let product = (p.n_a * p.n_b) as f64;
        if product < inv_m2 - 1e-9 || ncc < 1.0 - 1e-9 || ncc > m * product.sqrt() + 1e-9 {
            bound_bad += 1;
        }
        let b = u.to_b_coordinates(psi.amps());
        let rows_ok = q.row_sums().iter().zip(psi.amps()).all(|(r, a)| (r - a.norm_sqr()).norm() < 1e-12);
        let cols_ok = q.column_sums().iter().zip(&b).all(|(c, x)| (c - x.norm_sqr()).norm() < 1e-12);
        if !rows_ok || !cols_ok || (q.total() - 1.0).norm() > 1e-12 {
            marg_bad += 1;
        }
        if p.total() > d + 1 {
            above_edge += 1;
            if stroinc && kd::is_kd_classical(&q, tol.tau).classical {
                thm1_bad += 1;
            }
        }
    }

    let mut checks = vec![
        Check {
            check: "support_and_ncc_bounds",
            passed: bound_bad == 0,
            detail: format!("{bound_bad} of {samples} states violate n_a*n_b >= 1/M^2 or 1 <= N_NC <= M*sqrt(n_a*n_b)"),
        },
        Check {
            check: "marginals",
            passed: marg_bad == 0,
            detail: format!("{marg_bad} of {samples} states with wrong marginals"),
        },
        Check {
            check: "classical_above_edge",
            passed: thm1_bad == 0,
            detail: if stroinc {
                format!("{thm1_bad} of {above_edge} states above the edge are KD-classical")
            } else {
                "not strongly incompatible; nothing to check".into()
            },
        },
    ];
    if d <= NMIN_MAX_DIM {
        // the report cross-checks coinc against n_min and 2/M itself
        let r = incompat_report(u, tol.eta, tol.minor_tol);
        let (passed, detail) = match r {
            Ok(r) => (
                true,
                format!("coinc={} n_min={} edge={} stroinc={}", r.coinc, r.n_min.unwrap_or(0), r.edge, r.stroinc),
            ),
            Err(e) => (false, e.to_string()),
        };
        checks.push(Check { check: "coinc_iff_n_min_edge", passed, detail });
    }
    Ok(checks)
}

fn cmd_verify(a: &VerifyArgs) -> Run<(String, Option<PathBuf>, bool)> {
    let format = pick(a.out.format, Format::Csv, &[Format::Csv, Format::Json])?;
    a.tol.validate()?;
    let spec = a.basis.spec()?;
    let u = spec.build()?;
    let search = a.search.config(&a.tol)?;
    let checks = verify_checks(&u, &a.tol, search.seed, a.samples)?;
    let ok = checks.iter().all(|c| c.passed);
    let ctx = Ctx { command: "verify", spec, u, tol: Some(&a.tol), search: Some(search) };
    let meta = ctx.meta(format, None);
    let text = match format {
        Format::Json => with_meta(&meta, VerifyBody { samples: a.samples, passed: ok, checks: &checks }),
        _ => {
            let mut s = meta.csv_header();
            s.push_str("check,status,detail\n");
            for c in &checks {
                s.push_str(&format!(
                    "{},{},{}\n",
                    c.check,
                    if c.passed { "PASS" } else { "FAIL" },
                    c.detail.replace(',', ";")
                ));
            }
            s
        }
    };
    Ok((text, a.out.out.clone(), ok))
}

fn jobs(cmd: &Command) -> Option<usize> {
    match cmd {
        Command::Bases(_) => None,
        Command::Kd(a) => a.search.jobs,
        Command::Incompat(a) => a.search.jobs,
        Command::Diagram(a) => a.search.jobs,
        Command::Verify(a) => a.search.jobs,
    }
}

fn execute(cmd: &Command) -> Run<(String, Option<PathBuf>, bool)> {
    let with_ok = |r: Run<(String, Option<PathBuf>)>| r.map(|(t, p)| (t, p, true));
    match cmd {
        Command::Bases(a) => with_ok(cmd_bases(a)),
        Command::Kd(a) => with_ok(cmd_kd(a)),
        Command::Incompat(a) => with_ok(cmd_incompat(a)),
        Command::Diagram(a) => with_ok(cmd_diagram(a)),
        Command::Verify(a) => cmd_verify(a),
    }
}

/// Runs the tool on `argv` (program name first) and returns the exit code:
/// 0 on success, 1 on a validation error or a failed check, 2 on a usage
/// error.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let outcome = match jobs(&cli.command) {
        Some(0) => Err(usage("--jobs must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli.command)),
            Err(e) => Err(Failure::Invalid(Error::Parse(e.to_string()))),
        },
        None => execute(&cli.command),
    };
    match outcome {
        Ok((text, path, ok)) => {
            let written = match path {
                Some(p) => std::fs::write(&p, text.as_bytes()),
                None => stdout.write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return 1;
            }
            if ok {
                0
            } else {
                let _ = writeln!(stderr, "error: at least one check failed");
                1
            }
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}\n\nRun 'kdscope <COMMAND> --help' for the flag grammar.");
            2
        }
        Err(Failure::Invalid(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

/// Convenience wrapper used by tests and the binary.
pub fn run_to_strings<I, T>(argv: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}
