//! Decorated Kronrod–Reeb graphs: JSON model, validation, internal edges,
//! canonical codes of rooted branches, symmetry inference, cutting into
//! pieces and DOT export.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Disk,
    Cylinder,
    Torus,
    Generic,
    Sphere,
    NonOrientable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub kind: SurfaceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genus: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<u32>,
}

impl SurfaceSpec {
    pub fn disk() -> Self {
        SurfaceSpec { kind: SurfaceKind::Disk, genus: None, boundary: None }
    }

    pub fn cylinder() -> Self {
        SurfaceSpec { kind: SurfaceKind::Cylinder, genus: None, boundary: None }
    }

    pub fn torus() -> Self {
        SurfaceSpec { kind: SurfaceKind::Torus, genus: None, boundary: None }
    }

    pub fn generic(genus: u32, boundary: u32) -> Self {
        SurfaceSpec { kind: SurfaceKind::Generic, genus: Some(genus), boundary: Some(boundary) }
    }

    /// The parameters implied by a named kind, or the declared ones.
    fn named(&self) -> Option<(u32, u32)> {
        match self.kind {
            SurfaceKind::Disk => Some((0, 1)),
            SurfaceKind::Cylinder => Some((0, 2)),
            SurfaceKind::Torus => Some((1, 0)),
            SurfaceKind::Sphere => Some((0, 0)),
            SurfaceKind::Generic | SurfaceKind::NonOrientable => None,
        }
    }

    pub fn genus(&self) -> u32 {
        self.named().map_or(self.genus.unwrap_or(0), |(g, _)| g)
    }

    pub fn boundary(&self) -> u32 {
        self.named().map_or(self.boundary.unwrap_or(0), |(_, b)| b)
    }

    pub fn euler(&self) -> i64 {
        2 - 2 * self.genus() as i64 - self.boundary() as i64
    }

    pub fn is_supported(&self) -> bool {
        !matches!(self.kind, SurfaceKind::Sphere | SurfaceKind::NonOrientable)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    R,
    S1,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VertexKind {
    Boundary,
    NonDegExtreme,
    DegExtreme { m: u64, dihedral: bool },
    /// Branch counts `p` of the critical points lying on the leaf.
    CriticalLeaf { crit_points: Vec<u32> },
}

impl VertexKind {
    pub fn is_extreme(&self) -> bool {
        matches!(self, VertexKind::NonDegExtreme | VertexKind::DegExtreme { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReebVertex {
    pub id: String,
    pub kind: VertexKind,
    pub level: Option<BigRational>,
}

/// Symmetry of a critical leaf relative to the regions around it: `fixed`
/// regions are invariant, the rest split into `orbits` of size `m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LeafSymmetry {
    pub leaf: usize,
    pub m: u64,
    pub fixed: Vec<usize>,
    pub orbits: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusSymmetry {
    pub m: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub location: String,
    pub message: String,
}

impl Diagnostic {
    fn new(code: &str, location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { code: code.to_string(), location: location.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.location, self.message)
    }
}

/// Whether level values take part in branch comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Genericity {
    #[default]
    Strict,
    Loose,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct ReebModel {
    pub surface: SurfaceSpec,
    pub target: Target,
    pub vertices: Vec<ReebVertex>,
    pub edges: Vec<(usize, usize)>,
    /// Cyclic order of incident edges at a vertex.
    pub ribbon: BTreeMap<usize, Vec<usize>>,
    pub symmetry: Vec<LeafSymmetry>,
    pub x: Vec<usize>,
    pub fibration_degree: Option<u64>,
    pub torus_symmetry: Option<TorusSymmetry>,
}

// ---------------------------------------------------------------------------
// JSON form

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawKind {
    Boundary,
    NondegExtreme,
    DegExtreme,
    CriticalLeaf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawCrit {
    p: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawLevel {
    Int(i64),
    Float(f64),
    Text(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawVertex {
    id: String,
    kind: RawKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dihedral: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    crit_points: Option<Vec<RawCrit>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    level: Option<RawLevel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawSymmetry {
    leaf: String,
    m: u64,
    #[serde(default)]
    fixed: Vec<usize>,
    #[serde(default)]
    orbits: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawModel {
    surface: SurfaceSpec,
    target: Target,
    #[serde(default)]
    vertices: Vec<RawVertex>,
    #[serde(default)]
    edges: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    ribbon: BTreeMap<String, Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    symmetry: Vec<RawSymmetry>,
    #[serde(rename = "X", default)]
    x: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fibration_degree: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    torus_symmetry: Option<TorusSymmetry>,
}

fn parse_level(raw: &RawLevel) -> Result<BigRational, ModelError> {
    match raw {
        RawLevel::Int(i) => Ok(BigRational::from_integer((*i).into())),
        RawLevel::Float(f) => {
            BigRational::from_f64(*f).ok_or_else(|| ModelError::Json(format!("level {f} is not finite")))
        }
        RawLevel::Text(s) => {
            let bad = || ModelError::Json(format!("level {s:?} is not a rational number"));
            match s.split_once('/') {
                Some((n, d)) => {
                    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                    if d.is_zero() {
                        return Err(bad());
                    }
                    Ok(BigRational::new(n, d))
                }
                None => Ok(BigRational::from_integer(s.trim().parse().map_err(|_| bad())?)),
            }
        }
    }
}

fn level_to_raw(q: &BigRational) -> RawLevel {
    if q.is_integer() {
        if let Ok(i) = i64::try_from(q.numer().clone()) {
            return RawLevel::Int(i);
        }
    }
    RawLevel::Text(format!("{}/{}", q.numer(), q.denom()))
}

impl TryFrom<RawModel> for ReebModel {
    type Error = ModelError;

    fn try_from(raw: RawModel) -> Result<Self, ModelError> {
        let mut index = HashMap::new();
        let mut vertices = Vec::with_capacity(raw.vertices.len());
        for (i, v) in raw.vertices.iter().enumerate() {
            if index.insert(v.id.clone(), i).is_some() {
                return Err(ModelError::Invalid(vec![Diagnostic::new(
                    "DUPLICATE_ID",
                    format!("vertex {}", v.id),
                    "vertex ids must be unique",
                )]));
            }
            let kind = match v.kind {
                RawKind::Boundary => VertexKind::Boundary,
                RawKind::NondegExtreme => VertexKind::NonDegExtreme,
                RawKind::DegExtreme => VertexKind::DegExtreme {
                    m: v.m.ok_or_else(|| ModelError::Json(format!("deg_extreme {} needs m", v.id)))?,
                    dihedral: v.dihedral.unwrap_or(false),
                },
                RawKind::CriticalLeaf => VertexKind::CriticalLeaf {
                    crit_points: v.crit_points.as_ref().map(|c| c.iter().map(|x| x.p).collect()).unwrap_or_default(),
                },
            };
            let level = v.level.as_ref().map(parse_level).transpose()?;
            vertices.push(ReebVertex { id: v.id.clone(), kind, level });
        }
        let lookup = |id: &str| index.get(id).copied().ok_or_else(|| ModelError::UnknownVertex(id.to_string()));
        let edges = raw
            .edges
            .iter()
            .map(|[a, b]| Ok((lookup(a)?, lookup(b)?)))
            .collect::<Result<Vec<_>, ModelError>>()?;
        let ribbon = raw
            .ribbon
            .iter()
            .map(|(v, order)| Ok((lookup(v)?, order.clone())))
            .collect::<Result<BTreeMap<_, _>, ModelError>>()?;
        let symmetry = raw
            .symmetry
            .iter()
            .map(|s| {
                Ok(LeafSymmetry { leaf: lookup(&s.leaf)?, m: s.m, fixed: s.fixed.clone(), orbits: s.orbits.clone() })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        let x = raw.x.iter().map(|id| lookup(id)).collect::<Result<Vec<_>, _>>()?;
        Ok(ReebModel {
            surface: raw.surface,
            target: raw.target,
            vertices,
            edges,
            ribbon,
            symmetry,
            x,
            fibration_degree: raw.fibration_degree,
            torus_symmetry: raw.torus_symmetry,
        })
    }
}

impl From<ReebModel> for RawModel {
    fn from(m: ReebModel) -> RawModel {
        let id = |v: usize| m.vertices[v].id.clone();
        RawModel {
            surface: m.surface.clone(),
            target: m.target,
            vertices: m
                .vertices
                .iter()
                .map(|v| {
                    let (kind, mm, dihedral, crit) = match &v.kind {
                        VertexKind::Boundary => (RawKind::Boundary, None, None, None),
                        VertexKind::NonDegExtreme => (RawKind::NondegExtreme, None, None, None),
                        VertexKind::DegExtreme { m, dihedral } => {
                            (RawKind::DegExtreme, Some(*m), dihedral.then_some(true), None)
                        }
                        VertexKind::CriticalLeaf { crit_points } => (
                            RawKind::CriticalLeaf,
                            None,
                            None,
                            Some(crit_points.iter().map(|&p| RawCrit { p }).collect()),
                        ),
                    };
                    RawVertex {
                        id: v.id.clone(),
                        kind,
                        m: mm,
                        dihedral,
                        crit_points: crit,
                        level: v.level.as_ref().map(level_to_raw),
                    }
                })
                .collect(),
            edges: m.edges.iter().map(|&(a, b)| [id(a), id(b)]).collect(),
            ribbon: m.ribbon.iter().map(|(v, o)| (id(*v), o.clone())).collect(),
            symmetry: m
                .symmetry
                .iter()
                .map(|s| RawSymmetry { leaf: id(s.leaf), m: s.m, fixed: s.fixed.clone(), orbits: s.orbits.clone() })
                .collect(),
            x: m.x.iter().map(|&v| id(v)).collect(),
            fibration_degree: m.fibration_degree,
            torus_symmetry: m.torus_symmetry,
        }
    }
}

// ---------------------------------------------------------------------------
// Construction and graph queries

impl ReebModel {
    pub fn new(surface: SurfaceSpec, target: Target) -> Self {
        ReebModel {
            surface,
            target,
            vertices: Vec::new(),
            edges: Vec::new(),
            ribbon: BTreeMap::new(),
            symmetry: Vec::new(),
            x: Vec::new(),
            fibration_degree: None,
            torus_symmetry: None,
        }
    }

    /// Torus fibered over the circle in `m` circles: one edge, no vertices.
    pub fn torus_fibration(m: u64) -> Self {
        let mut model = ReebModel::new(SurfaceSpec::torus(), Target::S1);
        model.fibration_degree = Some(m);
        model
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let raw: RawModel = serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))?;
        ReebModel::try_from(raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn add_vertex(&mut self, id: impl Into<String>, kind: VertexKind, level: Option<BigRational>) -> usize {
        self.vertices.push(ReebVertex { id: id.into(), kind, level });
        self.vertices.len() - 1
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> usize {
        self.edges.push((a, b));
        self.edges.len() - 1
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn is_fibration(&self) -> bool {
        self.fibration_degree.is_some() && self.vertices.is_empty()
    }

    /// Incident edges of `v`, a self-loop listed once per end.
    pub fn incident(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if a == v {
                out.push(e);
            }
            if b == v {
                out.push(e);
            }
        }
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident(v).len()
    }

    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    pub fn in_x(&self, v: usize) -> bool {
        self.x.contains(&v)
    }

    /// Euler characteristic of a regular neighbourhood of the leaf.
    pub fn leaf_euler(&self, v: usize) -> i64 {
        match &self.vertices[v].kind {
            VertexKind::Boundary => 0,
            VertexKind::NonDegExtreme | VertexKind::DegExtreme { .. } => 1,
            VertexKind::CriticalLeaf { crit_points } => {
                crit_points.len() as i64 - crit_points.iter().map(|&p| p as i64).sum::<i64>()
            }
        }
    }

    /// Genus of the neighbourhood of a critical leaf; `None` if the degree
    /// and Euler characteristic are incompatible.
    pub fn leaf_genus(&self, v: usize) -> Option<u32> {
        let twice = 2 - self.leaf_euler(v) - self.degree(v) as i64;
        (twice >= 0 && twice % 2 == 0).then_some((twice / 2) as u32)
    }

    fn components(&self) -> usize {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let next = p[c];
                p[c] = r;
                c = next;
            }
            r
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        (0..n).filter(|&v| find(&mut parent, v) == v).count()
    }

    /// First Betti number of the graph.
    pub fn cycle_rank(&self) -> usize {
        if self.is_fibration() {
            return 1;
        }
        let c = self.components();
        (self.edges.len() + c).saturating_sub(self.vertices.len())
    }

    // -----------------------------------------------------------------------
    // Validation

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let s = &self.surface;
        if !s.is_supported() {
            out.push(Diagnostic::new("UNSUPPORTED_SURFACE", "surface", "sphere and non-orientable surfaces are out of scope"));
            return out;
        }
        if let Some((g, b)) = s.named() {
            if s.genus.is_some_and(|x| x != g) || s.boundary.is_some_and(|x| x != b) {
                out.push(Diagnostic::new("SURFACE_PARAMS", "surface", format!("{:?} has genus {g} and {b} boundary circles", s.kind)));
            }
        } else if s.euler() >= 0 {
            out.push(Diagnostic::new("SURFACE_PARAMS", "surface", "generic surfaces need negative Euler characteristic; use disk, cylinder or torus"));
        }

        if self.fibration_degree.is_some() {
            if s.kind != SurfaceKind::Torus || !self.vertices.is_empty() || !self.edges.is_empty() {
                out.push(Diagnostic::new("BAD_FIBRATION", "fibration_degree", "a fibration model is a torus with no vertices"));
            }
            if self.fibration_degree == Some(0) {
                out.push(Diagnostic::new("BAD_FIBRATION", "fibration_degree", "fibration degree must be positive"));
            }
            if self.target != Target::S1 {
                out.push(Diagnostic::new("BAD_FIBRATION", "target", "a fibration without critical points maps to the circle"));
            }
            return out;
        }
        if self.vertices.is_empty() {
            out.push(Diagnostic::new("EMPTY_GRAPH", "vertices", "the graph has no vertices"));
            return out;
        }
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if a >= self.vertices.len() || b >= self.vertices.len() {
                out.push(Diagnostic::new("UNKNOWN_VERTEX", format!("edge {e}"), "edge endpoint out of range"));
                return out;
            }
        }

        if self.components() != 1 {
            out.push(Diagnostic::new("DISCONNECTED", "graph", "the graph must be connected"));
        }
        let b1 = self.cycle_rank();
        match s.kind {
            SurfaceKind::Disk | SurfaceKind::Cylinder if b1 > 0 => {
                out.push(Diagnostic::new("CYCLE_ON_TREE_SURFACE", "graph", format!("graph has {b1} independent cycle(s); expected a tree")));
            }
            SurfaceKind::Torus if b1 > 1 => {
                out.push(Diagnostic::new("EXCESS_CYCLES", "graph", format!("graph has {b1} independent cycles; at most one allowed")));
            }
            SurfaceKind::Generic if b1 > s.genus() as usize => {
                out.push(Diagnostic::new("EXCESS_CYCLES", "graph", format!("graph has {b1} independent cycles but genus is {}", s.genus())));
            }
            _ => {}
        }

        let mut genus_sum = 0i64;
        let mut genus_ok = true;
        for (v, vx) in self.vertices.iter().enumerate() {
            let loc = format!("vertex {}", vx.id);
            let deg = self.degree(v);
            match &vx.kind {
                VertexKind::Boundary | VertexKind::NonDegExtreme => {
                    if deg != 1 {
                        out.push(Diagnostic::new("BAD_DEGREE", loc.clone(), format!("degree {deg}, expected 1")));
                    }
                }
                VertexKind::DegExtreme { m, .. } => {
                    if deg != 1 {
                        out.push(Diagnostic::new("BAD_DEGREE", loc.clone(), format!("degree {deg}, expected 1")));
                    }
                    if *m < 2 {
                        out.push(Diagnostic::new("BAD_SYMMETRY_INDEX", loc.clone(), "a degenerate extreme has symmetry index m >= 2"));
                    }
                }
                VertexKind::CriticalLeaf { crit_points } => {
                    if crit_points.is_empty() || crit_points.contains(&0) {
                        out.push(Diagnostic::new("BAD_CRITICAL_LEAF", loc.clone(), "a critical leaf needs critical points with p >= 1"));
                        genus_ok = false;
                        continue;
                    }
                    if deg == 0 {
                        out.push(Diagnostic::new("BAD_DEGREE", loc.clone(), "a critical leaf must border some region"));
                    }
                    match self.leaf_genus(v) {
                        Some(g) => genus_sum += g as i64,
                        None => {
                            genus_ok = false;
                            out.push(Diagnostic::new(
                                "LEAF_GENUS",
                                loc.clone(),
                                format!("Euler characteristic {} and degree {deg} give no orientable neighbourhood", self.leaf_euler(v)),
                            ));
                        }
                    }
                }
            }
        }
        let euler: i64 = (0..self.vertices.len()).map(|v| self.leaf_euler(v)).sum();
        if euler != s.euler() {
            out.push(Diagnostic::new("EULER_MISMATCH", "graph", format!("leaves sum to Euler characteristic {euler}, surface has {}", s.euler())));
        }
        if genus_ok && genus_sum + b1 as i64 != s.genus() as i64 {
            out.push(Diagnostic::new(
                "GENUS_MISMATCH",
                "graph",
                format!("leaf genera {genus_sum} plus {b1} cycle(s) differ from genus {}", s.genus()),
            ));
        }
        let nb = self.vertices.iter().filter(|v| v.kind == VertexKind::Boundary).count();
        if nb != s.boundary() as usize {
            out.push(Diagnostic::new("BOUNDARY_COUNT", "graph", format!("{nb} boundary vertices, surface has {}", s.boundary())));
        }
        if self.target == Target::R {
            for (e, &(a, b)) in self.edges.iter().enumerate() {
                if let (Some(la), Some(lb)) = (&self.vertices[a].level, &self.vertices[b].level) {
                    if la == lb {
                        out.push(Diagnostic::new("LEVEL_CONFLICT", format!("edge {e}"), "adjacent leaves of a real-valued map lie on distinct levels"));
                    }
                }
            }
        }
        for &v in &self.x {
            if v >= self.vertices.len() || !(self.vertices[v].kind == VertexKind::Boundary || self.vertices[v].kind.is_extreme()) {
                out.push(Diagnostic::new("BAD_X", format!("X member {v}"), "X consists of boundary circles and extremes"));
            }
        }
        let x_set: BTreeSet<usize> = self.x.iter().copied().collect();
        if x_set.len() != self.x.len() {
            out.push(Diagnostic::new("BAD_X", "X", "X lists a vertex twice"));
        }
        for (v, order) in &self.ribbon {
            let mut a = order.clone();
            a.sort_unstable();
            let mut b = self.incident(*v);
            b.sort_unstable();
            if a != b {
                out.push(Diagnostic::new("BAD_RIBBON", format!("vertex {}", self.vertices[*v].id), "ribbon order must list each incident edge once"));
            }
        }
        if out.is_empty() {
            for s in &self.symmetry {
                if let Err(msg) = self.check_annotation(s) {
                    out.push(Diagnostic::new("BAD_ANNOTATION", format!("leaf {}", self.vertices[s.leaf].id), msg));
                }
            }
            if self.torus_symmetry.is_some() && self.surface.kind != SurfaceKind::Torus {
                out.push(Diagnostic::new("BAD_ANNOTATION", "torus_symmetry", "torus symmetry on a non-torus model"));
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<(), ModelError> {
        let diags = self.validate();
        if diags.is_empty() {
            Ok(())
        } else {
            Err(ModelError::Invalid(diags))
        }
    }

    fn check_annotation(&self, s: &LeafSymmetry) -> Result<(), String> {
        if !matches!(self.vertices[s.leaf].kind, VertexKind::CriticalLeaf { .. }) {
            return Err("symmetry annotations belong to critical leaves".into());
        }
        if s.m == 0 {
            return Err("m must be positive".into());
        }
        if s.fixed.len() > 2 {
            return Err(format!("{} fixed regions; at most 2 allowed", s.fixed.len()));
        }
        let mut listed: Vec<usize> = s.fixed.iter().chain(s.orbits.iter().flatten()).copied().collect();
        listed.sort_unstable();
        let mut incident = self.incident(s.leaf);
        incident.sort_unstable();
        if listed != incident {
            return Err("fixed regions and orbits must partition the incident edges".into());
        }
        for orbit in &s.orbits {
            if orbit.len() as u64 != s.m {
                return Err(format!("orbit {orbit:?} has size {}, expected {}", orbit.len(), s.m));
            }
            let codes: BTreeSet<String> =
                orbit.iter().map(|&e| self.branch_code(s.leaf, e, Genericity::Strict)).collect();
            if codes.len() > 1 {
                return Err(format!("regions {orbit:?} in one orbit are not isomorphic"));
            }
        }
        Ok(())
    }

    // -----------------------------------------------------------------------
    // Internal edges

    fn counts_as_internal_end(&self, v: usize, x: &[usize]) -> bool {
        matches!(self.vertices[v].kind, VertexKind::DegExtreme { .. } | VertexKind::CriticalLeaf { .. }) || x.contains(&v)
    }

    pub fn internal_edges(&self, x: &[usize]) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| self.counts_as_internal_end(a, x) && self.counts_as_internal_end(b, x))
            .map(|(e, _)| e)
            .collect()
    }

    pub fn pi0_delta_rank(&self, x: &[usize]) -> usize {
        self.internal_edges(x).len()
    }

    // -----------------------------------------------------------------------
    // Canonical codes

    fn label(&self, v: usize, g: Genericity) -> String {
        let vx = &self.vertices[v];
        let mut s = match &vx.kind {
            VertexKind::Boundary => "b".to_string(),
            VertexKind::NonDegExtreme => "n".to_string(),
            VertexKind::DegExtreme { m, dihedral } => format!("d{m}{}", if *dihedral { "r" } else { "" }),
            VertexKind::CriticalLeaf { crit_points } => {
                let mut c = crit_points.clone();
                c.sort_unstable();
                format!("k{c:?}")
            }
        };
        if self.in_x(v) {
            s.push('*');
        }
        if g == Genericity::Strict {
            if let Some(l) = &vx.level {
                write!(s, "@{l}").expect("write to string");
            }
        }
        s
    }

    /// Isomorphism-invariant code of the graph hanging from `v`, away from
    /// the edge `parent`.
    pub fn canonical_code(&self, v: usize, parent: Option<usize>, g: Genericity) -> String {
        let mut visited = BTreeSet::new();
        self.code_rec(v, parent, g, &mut visited)
    }

    /// Code of the branch reached from `v` through edge `e`.
    pub fn branch_code(&self, v: usize, e: usize, g: Genericity) -> String {
        let w = self.other_end(e, v);
        if w == v {
            return "loop".into();
        }
        let mut visited = BTreeSet::from([v]);
        self.code_rec(w, Some(e), g, &mut visited)
    }

    fn code_rec(&self, v: usize, parent: Option<usize>, g: Genericity, visited: &mut BTreeSet<usize>) -> String {
        if !visited.insert(v) {
            return "^".into();
        }
        let mut skipped = false;
        let mut children = Vec::new();
        for e in self.incident(v) {
            if Some(e) == parent && !skipped {
                skipped = true;
                continue;
            }
            let w = self.other_end(e, v);
            if w == v {
                children.push("loop".to_string());
            } else {
                children.push(self.code_rec(w, Some(e), g, visited));
            }
        }
        children.sort();
        format!("{}({})", self.label(v, g), children.join(","))
    }

    /// Whether the branch through `e` away from `v` contains a boundary
    /// circle or a member of X.
    pub fn branch_is_anchored(&self, v: usize, e: usize) -> bool {
        let mut seen = BTreeSet::from([v]);
        let mut queue = VecDeque::from([self.other_end(e, v)]);
        while let Some(w) = queue.pop_front() {
            if !seen.insert(w) {
                continue;
            }
            if self.vertices[w].kind == VertexKind::Boundary || self.in_x(w) {
                return true;
            }
            for f in self.incident(w) {
                queue.push_back(self.other_end(f, w));
            }
        }
        false
    }

    // -----------------------------------------------------------------------
    // Symmetry

    /// Symmetry at leaf `v` seen from the region across `parent`.
    pub fn leaf_symmetry(&self, v: usize, parent: Option<usize>, g: Genericity) -> Result<LeafSymmetry, ModelError> {
        let id = &self.vertices[v].id;
        if let Some(s) = self.symmetry.iter().find(|s| s.leaf == v) {
            self.check_annotation(s).map_err(|msg| ModelError::BadAnnotation { leaf: id.clone(), msg })?;
            if let Some(p) = parent {
                if !s.fixed.contains(&p) {
                    return Err(ModelError::BadAnnotation {
                        leaf: id.clone(),
                        msg: format!("edge {p} toward the fixed side must be a fixed region"),
                    });
                }
            }
            return Ok(s.clone());
        }
        let mut fixed: Vec<usize> = parent.into_iter().collect();
        let mut free = Vec::new();
        let mut skipped = false;
        for e in self.incident(v) {
            if Some(e) == parent && !skipped {
                skipped = true;
                continue;
            }
            if self.branch_is_anchored(v, e) || self.other_end(e, v) == v {
                fixed.push(e);
            } else {
                free.push(e);
            }
        }
        let trivial = |fixed: Vec<usize>, free: &[usize]| LeafSymmetry {
            leaf: v,
            m: 1,
            fixed,
            orbits: free.iter().map(|&e| vec![e]).collect(),
        };
        if let Some(order) = self.ribbon.get(&v) {
            let word: Vec<usize> = order.iter().copied().filter(|e| free.contains(e)).collect();
            let codes: Vec<String> = word.iter().map(|&e| self.branch_code(v, e, g)).collect();
            let period = cyclic_period(&codes);
            let m = if codes.is_empty() { 1 } else { codes.len() / period };
            if m <= 1 || fixed.len() > 2 {
                return Ok(trivial(fixed, &free));
            }
            let orbits = (0..period).map(|i| (0..m as usize).map(|k| word[i + k * period]).collect()).collect();
            return Ok(LeafSymmetry { leaf: v, m: m as u64, fixed, orbits });
        }
        let codes: Vec<String> = free.iter().map(|&e| self.branch_code(v, e, g)).collect();
        let distinct: BTreeSet<&String> = codes.iter().collect();
        if distinct.len() == codes.len() {
            return Ok(trivial(fixed, &free));
        }
        let single_saddle = matches!(&self.vertices[v].kind, VertexKind::CriticalLeaf { crit_points } if crit_points == &[2]);
        if single_saddle && free.len() == 2 && fixed.len() == 1 {
            return Ok(LeafSymmetry { leaf: v, m: 2, fixed, orbits: vec![free] });
        }
        Err(ModelError::AmbiguousSymmetry { leaf: id.clone() })
    }

    /// Fills in symmetry annotations for every critical leaf, orienting the
    /// graph from X (or from the first boundary circle).
    pub fn infer_symmetry(&self, g: Genericity) -> Result<ReebModel, ModelError> {
        let mut out = self.clone();
        let Some(root) = self
            .x
            .first()
            .copied()
            .or_else(|| self.vertices.iter().position(|v| v.kind == VertexKind::Boundary))
            .or_else(|| (!self.vertices.is_empty()).then_some(0))
        else {
            return Ok(out);
        };
        let mut seen = BTreeSet::from([root]);
        let mut queue = VecDeque::from([(root, None::<usize>)]);
        let mut found = Vec::new();
        while let Some((v, parent)) = queue.pop_front() {
            if matches!(self.vertices[v].kind, VertexKind::CriticalLeaf { .. }) {
                found.push(self.leaf_symmetry(v, parent, g)?);
            }
            for e in self.incident(v) {
                let w = self.other_end(e, v);
                if seen.insert(w) {
                    queue.push_back((w, Some(e)));
                }
            }
        }
        for s in found {
            if !out.symmetry.iter().any(|t| t.leaf == s.leaf) {
                out.symmetry.push(s);
            }
        }
        out.symmetry.sort_by_key(|s| s.leaf);
        Ok(out)
    }

    // -----------------------------------------------------------------------
    // Pieces

    /// Restriction to the vertices `keep`; every half-edge in `cuts` (edge,
    /// endpoint inside) is replaced by an edge to a new boundary vertex.
    /// Returns the piece, the new boundary vertices and the map from old to
    /// new vertex indices.
    pub fn submodel(
        &self,
        keep: &BTreeSet<usize>,
        cuts: &[(usize, usize)],
        surface: SurfaceSpec,
    ) -> (ReebModel, Vec<usize>, BTreeMap<usize, usize>) {
        let mut piece = ReebModel::new(surface, self.target);
        let mut vmap = BTreeMap::new();
        for &v in keep {
            vmap.insert(v, piece.add_vertex(self.vertices[v].id.clone(), self.vertices[v].kind.clone(), self.vertices[v].level.clone()));
        }
        let cut_edges: BTreeSet<usize> = cuts.iter().map(|c| c.0).collect();
        let mut emap: BTreeMap<usize, usize> = BTreeMap::new();
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if keep.contains(&a) && keep.contains(&b) && !cut_edges.contains(&e) {
                emap.insert(e, piece.add_edge(vmap[&a], vmap[&b]));
            }
        }
        let mut fresh = Vec::new();
        for (k, &(e, inside)) in cuts.iter().enumerate() {
            let outside_level = self.vertices[self.other_end(e, inside)].level.clone();
            let level = if self.other_end(e, inside) == inside { None } else { outside_level };
            let b = piece.add_vertex(format!("{}~cut{}.{}", self.vertices[inside].id, e, k), VertexKind::Boundary, level);
            let ne = piece.add_edge(b, vmap[&inside]);
            emap.entry(e).or_insert(ne);
            fresh.push(b);
        }
        for (v, order) in &self.ribbon {
            if let Some(&nv) = vmap.get(v) {
                let mapped: Vec<usize> = order.iter().filter_map(|e| emap.get(e).copied()).collect();
                if mapped.len() == order.len() {
                    piece.ribbon.insert(nv, mapped);
                }
            }
        }
        for s in &self.symmetry {
            if let Some(&nl) = vmap.get(&s.leaf) {
                let map_all = |es: &[usize]| es.iter().map(|e| emap.get(e).copied()).collect::<Option<Vec<_>>>();
                if let (Some(fixed), Some(orbits)) =
                    (map_all(&s.fixed), s.orbits.iter().map(|o| map_all(o)).collect::<Option<Vec<_>>>())
                {
                    piece.symmetry.push(LeafSymmetry { leaf: nl, m: s.m, fixed, orbits });
                }
            }
        }
        piece.x = self.x.iter().filter_map(|v| vmap.get(v).copied()).chain(fresh.iter().copied()).collect();
        (piece, fresh, vmap)
    }

    /// Euler characteristic of the canonical neighbourhood of a critical
    /// leaf: the leaf neighbourhood plus all complementary disks touching it.
    pub fn canonical_euler(&self, v: usize) -> i64 {
        let mut chi = self.leaf_euler(v);
        for e in self.incident(v) {
            let w = self.other_end(e, v);
            if w == v {
                continue;
            }
            if self.branch_is_disk(v, e) {
                chi += 1;
            }
        }
        chi
    }

    /// The branch through `e` is a disk when it is a tree attached only
    /// through `e`, holds no boundary circle and all its leaves are planar.
    fn branch_is_disk(&self, v: usize, e: usize) -> bool {
        let start = self.other_end(e, v);
        let mut seen = BTreeSet::new();
        let mut stack = vec![start];
        let mut chi = 0i64;
        let mut boundary_ends = 0usize;
        while let Some(w) = stack.pop() {
            if !seen.insert(w) {
                continue;
            }
            if self.vertices[w].kind == VertexKind::Boundary {
                return false;
            }
            chi += self.leaf_euler(w);
            for f in self.incident(w) {
                let u = self.other_end(f, w);
                if u == v {
                    boundary_ends += 1;
                } else {
                    stack.push(u);
                }
            }
        }
        boundary_ends == 1 && chi == 1
    }

    /// Cuts a surface of negative Euler characteristic at the non-extremal
    /// critical leaves whose canonical neighbourhoods have negative Euler
    /// characteristic.
    pub fn reduce(&self) -> Reduction {
        if self.surface.euler() >= 0 {
            let x = self.x.clone();
            return Reduction {
                cut_leaves: Vec::new(),
                pieces: vec![Piece { model: self.clone(), surface_kind: self.surface.kind, x, attachments: Vec::new() }],
            };
        }
        let cut: BTreeSet<usize> = (0..self.vertices.len())
            .filter(|&v| matches!(self.vertices[v].kind, VertexKind::CriticalLeaf { .. }) && self.canonical_euler(v) < 0)
            .collect();
        let mut seen = BTreeSet::new();
        let mut pieces = Vec::new();
        for start in 0..self.vertices.len() {
            if cut.contains(&start) || seen.contains(&start) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut stack = vec![start];
            let mut cuts = Vec::new();
            while let Some(w) = stack.pop() {
                if !comp.insert(w) {
                    continue;
                }
                for e in self.incident(w) {
                    let u = self.other_end(e, w);
                    if cut.contains(&u) {
                        cuts.push((e, w));
                    } else {
                        stack.push(u);
                    }
                }
            }
            seen.extend(comp.iter().copied());
            let chi: i64 = comp.iter().map(|&w| self.leaf_euler(w)).sum();
            let boundaries = cuts.len() + comp.iter().filter(|&&w| self.vertices[w].kind == VertexKind::Boundary).count();
            let kind = match (chi, boundaries) {
                (1, 1) => SurfaceKind::Disk,
                (0, 2) => SurfaceKind::Cylinder,
                _ => SurfaceKind::Generic,
            };
            let spec = match kind {
                SurfaceKind::Disk => SurfaceSpec::disk(),
                SurfaceKind::Cylinder => SurfaceSpec::cylinder(),
                _ => {
                    let g = ((2 - chi - boundaries as i64) / 2).max(0) as u32;
                    SurfaceSpec::generic(g, boundaries as u32)
                }
            };
            let (model, _, _) = self.submodel(&comp, &cuts, spec);
            let x = model.x.clone();
            pieces.push(Piece { model, surface_kind: kind, x, attachments: cuts.iter().map(|c| c.0).collect() });
        }
        // edges running between two cut leaves bound thin annuli without critical points
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if cut.contains(&a) && cut.contains(&b) {
                let mut model = ReebModel::new(SurfaceSpec::cylinder(), self.target);
                let p = model.add_vertex(format!("{}~cut{e}.0", self.vertices[a].id), VertexKind::Boundary, self.vertices[a].level.clone());
                let q = model.add_vertex(format!("{}~cut{e}.1", self.vertices[b].id), VertexKind::Boundary, self.vertices[b].level.clone());
                model.add_edge(p, q);
                model.x = vec![p, q];
                let x = model.x.clone();
                pieces.push(Piece { model, surface_kind: SurfaceKind::Cylinder, x, attachments: vec![e, e] });
            }
        }
        Reduction { cut_leaves: cut.into_iter().collect(), pieces }
    }

    // -----------------------------------------------------------------------
    // Enhanced graph and DOT

    pub fn enhanced_graph(&self) -> EnhancedGraph {
        let pendants = self
            .vertices
            .iter()
            .enumerate()
            .filter_map(|(v, vx)| match vx.kind {
                VertexKind::DegExtreme { m, dihedral } => Some((v, if dihedral { 2 * m } else { m })),
                _ => None,
            })
            .collect();
        EnhancedGraph { model: self.clone(), pendants }
    }

    pub fn to_dot(&self) -> String {
        self.enhanced_dot(&[])
    }

    fn enhanced_dot(&self, pendants: &[(usize, u64)]) -> String {
        let mut s = String::from("graph reeb {\n");
        for (v, vx) in self.vertices.iter().enumerate() {
            let (shape, kind) = match &vx.kind {
                VertexKind::Boundary => ("box", "boundary".to_string()),
                VertexKind::NonDegExtreme => ("circle", "extreme".to_string()),
                VertexKind::DegExtreme { m, .. } => ("doublecircle", format!("extreme m={m}")),
                VertexKind::CriticalLeaf { crit_points } => ("diamond", format!("leaf p={crit_points:?}")),
            };
            let x = if self.in_x(v) { ", style=filled" } else { "" };
            writeln!(s, "  v{v} [label=\"{}\\n{}\", shape={shape}{x}];", escape(&vx.id), kind).expect("write");
        }
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            writeln!(s, "  v{a} -- v{b} [label=\"e{e}\"];").expect("write");
        }
        for &(v, k) in pendants {
            for i in 0..k {
                writeln!(s, "  f{v}_{i} [shape=point];\n  v{v} -- f{v}_{i} [style=dashed];").expect("write");
            }
        }
        if self.is_fibration() {
            writeln!(s, "  fiber [shape=none, label=\"fibration degree {}\"];", self.fibration_degree.unwrap_or(0)).expect("write");
        }
        s.push_str("}\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Smallest rotation `p` with `word[i] == word[(i + p) % len]` for all `i`.
pub fn cyclic_period<T: PartialEq>(word: &[T]) -> usize {
    let n = word.len();
    if n == 0 {
        return 1;
    }
    (1..=n).find(|&p| n % p == 0 && (0..n).all(|i| word[i] == word[(i + p) % n])).unwrap_or(n)
}

#[derive(Debug, Clone)]
pub struct Piece {
    pub model: ReebModel,
    pub surface_kind: SurfaceKind,
    /// X inside the piece: the inherited part plus the cut circles.
    pub x: Vec<usize>,
    /// Original edges cut to produce this piece.
    pub attachments: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub cut_leaves: Vec<usize>,
    pub pieces: Vec<Piece>,
}

#[derive(Debug, Clone)]
pub struct EnhancedGraph {
    pub model: ReebModel,
    /// Framing edges glued at each degenerate extreme.
    pub pendants: Vec<(usize, u64)>,
}

impl EnhancedGraph {
    pub fn edge_count(&self) -> usize {
        self.model.edges.len() + self.pendants.iter().map(|p| p.1 as usize).sum::<usize>()
    }

    pub fn to_dot(&self) -> String {
        self.model.enhanced_dot(&self.pendants)
    }
}
