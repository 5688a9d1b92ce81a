use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use orbitcalc_core::gen::census_sequences;
use orbitcalc_core::groupexpr::{abelianization, beta1, center_rank, enumerate_family, in_family, is_torsion_free, normalize, order};
use orbitcalc_core::orbitcalc::compute;
use orbitcalc_core::polysym::{classify, symmetry_index, CritType, HomogPoly, Rotation};
use orbitcalc_core::reebmodel::VertexKind;
use orbitcalc_core::seqcalc::{is_nearly_bieberbach, is_nearly_crystallographic, parse_seq, seq_in_family};
use orbitcalc_core::{
    Diagnostic, GroupError, GroupExpr, GroupFamily, ModelError, OrbitError, PolyError, ReebModel, SeqError, SeqExpr,
    SeqFamily,
};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "orbitcalc", version, about = "Orbit invariants of smooth functions on surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Machine-readable JSON output.
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,
    /// Aligned human-readable output.
    #[arg(long, global = true)]
    text: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the critical point of a homogeneous polynomial at the origin.
    ClassifyPoly {
        /// Polynomial text such as `x^4+y^4`, or a JSON array `[a_0, ..., a_d]`
        /// of coefficients of `x^k y^(d-k)`.
        poly: String,
    },
    /// Compute the orbit sequence of a model.
    Orbit {
        #[arg(long = "in")]
        input: PathBuf,
        /// `boundary`, `empty`, or a list of vertex ids.
        #[arg(long = "X", num_args = 1..)]
        x: Option<Vec<String>>,
        #[arg(long)]
        trace: bool,
    },
    /// Invariants of a group expression.
    Group {
        expr: String,
        #[arg(long)]
        beta1: bool,
        #[arg(long)]
        center: bool,
        #[arg(long)]
        ab: bool,
        /// Test membership in a family (ccZ, ccB, clsBt, ccP, clsGt, ccBprime).
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        order: bool,
    },
    /// Evaluate a sequence build script or sequence text.
    Seq { script: String },
    /// List a group family or a census of sequences.
    Enumerate {
        family: String,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        param: u64,
        /// Print only the number of entries.
        #[arg(long)]
        count: bool,
    },
    /// Export a model as a DOT graph.
    Dot {
        #[arg(long = "in")]
        input: PathBuf,
        /// Add pendant framing edges at degenerate extremes.
        #[arg(long)]
        enhanced: bool,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("bad coefficient array: {0}")]
    Coefficients(String),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "E_IO",
            CliError::Coefficients(_) => "E_POLY_PARSE",
            CliError::UnknownFamily(_) => "E_UNKNOWN_FAMILY",
            CliError::Group(e) => e.code(),
            CliError::Seq(e) => e.code(),
            CliError::Poly(e) => e.code(),
            CliError::Model(e) => e.code(),
            CliError::Orbit(e) => e.code(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 2,
            _ => 1,
        }
    }

    fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            CliError::Model(ModelError::Invalid(d)) | CliError::Orbit(OrbitError::Model(ModelError::Invalid(d))) => d,
            _ => &[],
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Json,
    Text,
}

/// Key-value report rendered either as a JSON object or as aligned lines.
struct Report {
    rows: Vec<(&'static str, Value)>,
}

impl Report {
    fn new() -> Self {
        Report { rows: Vec::new() }
    }

    fn put(&mut self, key: &'static str, value: impl Into<Value>) -> &mut Self {
        self.rows.push((key, value.into()));
        self
    }

    fn render(&self, mode: Mode) -> String {
        match mode {
            Mode::Json => {
                let obj: serde_json::Map<String, Value> =
                    self.rows.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
                serde_json::to_string_pretty(&Value::Object(obj)).expect("json")
            }
            Mode::Text => {
                let width = self.rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                let mut out = String::new();
                for (k, v) in &self.rows {
                    match v {
                        Value::Array(items) => {
                            out.push_str(&format!("{k}\n"));
                            for item in items {
                                out.push_str(&format!("  {}\n", plain(item)));
                            }
                        }
                        _ => out.push_str(&format!("{k:width$}  {}\n", plain(v))),
                    }
                }
                out.trim_end().to_string()
            }
        }
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn load_model(path: &Path) -> Result<ReebModel, CliError> {
    Ok(ReebModel::from_json(&read(path)?)?)
}

fn parse_poly(text: &str) -> Result<HomogPoly, CliError> {
    if text.trim_start().starts_with('[') {
        let coeffs: Vec<i64> = serde_json::from_str(text).map_err(|e| CliError::Coefficients(e.to_string()))?;
        Ok(HomogPoly::from_ints(&coeffs)?)
    } else {
        Ok(HomogPoly::parse(text)?)
    }
}

fn crit_name(c: CritType) -> &'static str {
    match c {
        CritType::NonDegExtreme => "NonDegExtreme",
        CritType::DegExtreme => "DegExtreme",
        CritType::QuasiSaddle => "QuasiSaddle",
        CritType::NonDegSaddle => "NonDegSaddle",
        CritType::Saddle => "Saddle",
        CritType::NoCriticalPoint => "NoCriticalPoint",
    }
}

fn classify_poly(text: &str, mode: Mode) -> Result<String, CliError> {
    let g = parse_poly(text)?;
    let c = classify(&g)?;
    let mut r = Report::new();
    r.put("poly", g.to_string()).put("degree", c.degree).put("p", c.p).put("q", c.q);
    r.put("type", crit_name(c.crit_type)).put("rays", c.rays);
    if c.crit_type != CritType::NoCriticalPoint {
        let s = symmetry_index(&g)?;
        match s.rotation {
            Rotation::ContinuousSO2 => r.put("rotation", "SO(2)").put("m", Value::Null),
            Rotation::Cyclic { m } => r.put("rotation", format!("Z_{m}")).put("m", m),
        };
        r.put("dihedral", s.dihedral).put("framing_orbit", s.framing_orbit_size());
    }
    Ok(r.render(mode))
}

fn select_x(model: &mut ReebModel, sel: &[String]) -> Result<(), CliError> {
    model.x = match sel {
        [one] if one == "boundary" => {
            (0..model.vertices.len()).filter(|&v| model.vertices[v].kind == VertexKind::Boundary).collect()
        }
        [one] if one == "empty" => Vec::new(),
        ids => ids
            .iter()
            .map(|id| model.vertex_index(id).ok_or_else(|| ModelError::UnknownVertex(id.clone())))
            .collect::<Result<_, _>>()?,
    };
    Ok(())
}

fn seq_value(s: &SeqExpr) -> Value {
    json!({
        "kernel": s.kernel.to_string(),
        "middle": s.middle.to_string(),
        "quotient": s.quotient.to_string(),
        "text": s.to_string(),
    })
}

fn orbit(input: &Path, x: Option<&[String]>, trace: bool, mode: Mode) -> Result<String, CliError> {
    let mut model = load_model(input)?;
    if let Some(sel) = x {
        select_x(&mut model, sel)?;
    }
    let res = compute(&model)?;
    let mut r = Report::new();
    match mode {
        Mode::Json => r.put("seq", seq_value(&res.seq)),
        Mode::Text => r.put("seq", res.seq.to_string()),
    };
    r.put("pi1", res.pi1_orbit.to_string()).put("betti1", res.betti1);
    let h = &res.homotopy;
    match mode {
        Mode::Json => {
            r.put("homotopy", serde_json::to_value(h).expect("json"));
        }
        Mode::Text => {
            r.put("stabilizer", format!("{:?}", h.stabilizer_id));
            r.put("diff_factor", format!("{:?}", h.diffid_factor));
            r.put("aspherical", h.orbit_aspherical).put("torus_rank", h.weak_equiv_torus_rank);
        }
    }
    if let Some(s) = &res.stab_seq {
        r.put("stab_seq", if mode == Mode::Json { seq_value(s) } else { s.to_string().into() });
    }
    if let Some(g) = &res.full_stabilizer_pi0 {
        r.put("full_stabilizer_pi0", g.to_string());
    }
    if trace {
        r.put("trace", res.trace.clone());
    }
    Ok(r.render(mode))
}

fn group_family(name: &str) -> Result<GroupFamily, CliError> {
    name.parse().map_err(|_| CliError::UnknownFamily(name.to_string()))
}

struct GroupOps<'a> {
    beta1: bool,
    center: bool,
    ab: bool,
    family: Option<&'a str>,
    order: bool,
}

fn group(text: &str, ops: GroupOps<'_>, mode: Mode) -> Result<String, CliError> {
    let e = GroupExpr::parse(text)?;
    let mut r = Report::new();
    let none = !(ops.beta1 || ops.center || ops.ab || ops.order || ops.family.is_some());
    if none {
        r.put("normal_form", normalize(&e).to_string());
        r.put("order", order(&e).to_string());
        r.put("torsion_free", is_torsion_free(&e));
        let families: Vec<Value> =
            GroupFamily::ALL.into_iter().filter(|&f| in_family(&e, f)).map(|f| f.name().into()).collect();
        r.put("families", families);
        return Ok(r.render(mode));
    }
    if ops.beta1 {
        r.put("beta1", beta1(&e)?);
    }
    if ops.center {
        r.put("center_rank", center_rank(&e)?);
    }
    if ops.ab {
        r.put("abelianization", abelianization(&e)?.to_string());
    }
    if let Some(name) = ops.family {
        r.put("in_family", in_family(&e, group_family(name)?));
    }
    if ops.order {
        r.put("order", order(&e).to_string());
    }
    if mode == Mode::Text && r.rows.len() == 1 {
        return Ok(plain(&r.rows[0].1));
    }
    Ok(r.render(mode))
}

fn seq(script: &str, mode: Mode) -> Result<String, CliError> {
    let s = parse_seq(script)?;
    let mut r = Report::new();
    r.put("seq", s.to_string());
    r.put("kernel", s.kernel.to_string()).put("middle", s.middle.to_string()).put("quotient", s.quotient.to_string());
    r.put("build_depth", s.build_depth());
    r.put("nearly_crystallographic", is_nearly_crystallographic(&s));
    r.put("nearly_bieberbach", is_nearly_bieberbach(&s));
    let families: Vec<Value> =
        SeqFamily::ALL.into_iter().filter(|&f| seq_in_family(&s, f)).map(|f| f.name().into()).collect();
    r.put("families", families);
    Ok(r.render(mode))
}

fn enumerate(family: &str, depth: usize, param: u64, count: bool, mode: Mode) -> Result<String, CliError> {
    let items: Vec<String> = if let Ok(f) = family.parse::<GroupFamily>() {
        enumerate_family(f, depth, param).iter().map(|e| e.to_string()).collect()
    } else if let Ok(f) = family.parse::<SeqFamily>() {
        let ms: Vec<u64> = (1..=param.max(1)).collect();
        census_sequences(depth, 2, &ms).into_iter().filter(|s| seq_in_family(s, f)).map(|s| s.to_string()).collect()
    } else {
        return Err(CliError::UnknownFamily(family.to_string()));
    };
    let mut r = Report::new();
    r.put("family", family).put("depth", depth).put("param", param).put("count", items.len());
    if count {
        if mode == Mode::Text {
            return Ok(items.len().to_string());
        }
    } else if mode == Mode::Text {
        return Ok(items.join("\n"));
    } else {
        r.put("items", items);
    }
    Ok(r.render(mode))
}

fn dot(input: &Path, enhanced: bool) -> Result<String, CliError> {
    let model = load_model(input)?;
    model.ensure_valid()?;
    Ok(if enhanced { model.enhanced_graph().to_dot() } else { model.to_dot() })
}

fn run(cli: Cli) -> Result<String, CliError> {
    let mode = |default: Mode| match (cli.json, cli.text) {
        (true, _) => Mode::Json,
        (_, true) => Mode::Text,
        _ => default,
    };
    match &cli.command {
        Command::ClassifyPoly { poly } => classify_poly(poly, mode(Mode::Text)),
        Command::Orbit { input, x, trace } => orbit(input, x.as_deref(), *trace, mode(Mode::Json)),
        Command::Group { expr, beta1, center, ab, family, order } => group(
            expr,
            GroupOps { beta1: *beta1, center: *center, ab: *ab, family: family.as_deref(), order: *order },
            mode(Mode::Text),
        ),
        Command::Seq { script } => seq(script, mode(Mode::Text)),
        Command::Enumerate { family, depth, param, count } => {
            enumerate(family, *depth, *param, *count, mode(Mode::Text))
        }
        Command::Dot { input, enhanced } => dot(input, *enhanced),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            let _ = writeln!(stdout, "{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let mut stderr = io::stderr().lock();
            let _ = writeln!(stderr, "error[{}]: {e}", e.code());
            for d in e.diagnostics() {
                let _ = writeln!(stderr, "  {d}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
