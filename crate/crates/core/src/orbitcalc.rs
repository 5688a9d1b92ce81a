//! From a validated model compute the sequence `π₀Δ′ ↪ π₀S′ ↠ G′`, the
//! fundamental group of the orbit and a coarse homotopy descriptor.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{ModelError, OrbitError};
use crate::groupexpr::{beta1, GroupExpr};
use crate::reebmodel::{cyclic_period, Genericity, ReebModel, SurfaceKind, SurfaceSpec, VertexKind};
use crate::seqcalc::{diag_garside, garside_quotient, natural, product, product_all, triv, wr, wr2, z, Build, SeqExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilizerType {
    Contractible,
    Circle,
}

/// Homotopy type of the identity component of the diffeomorphism group fixing X.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffIdFactor {
    Point,
    Circle,
    Torus,
    So3,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomotopyDescriptor {
    pub stabilizer_id: StabilizerType,
    pub diffid_factor: DiffIdFactor,
    pub orbit_aspherical: bool,
    /// `k` with the orbit weakly equivalent to `Diff_Id × T^k`; only when the
    /// finite quotient is trivial.
    pub weak_equiv_torus_rank: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitResult {
    pub seq: SeqExpr,
    pub pi1_orbit: GroupExpr,
    pub betti1: u64,
    pub homotopy: HomotopyDescriptor,
    /// Right column of the torus diagram, `π₀Δ′(f) ↪ π₀S′(f) ↠ G′(f)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stab_seq: Option<SeqExpr>,
    /// `π₀` of the full stabilizer relative to the boundary, for cylinders
    /// without critical points.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_stabilizer_pi0: Option<GroupExpr>,
    pub trace: Vec<String>,
}

struct Engine<'a> {
    model: &'a ReebModel,
    trace: Vec<String>,
}

impl Engine<'_> {
    fn note(&mut self, msg: String) {
        self.trace.push(msg);
    }

    /// Sequence of the region across `parent` seen from the fixed side, with
    /// the cut circle in X.
    fn region(&mut self, w: usize, parent: usize) -> Result<SeqExpr, OrbitError> {
        let m = self.model;
        let id = m.vertices[w].id.clone();
        match &m.vertices[w].kind {
            VertexKind::Boundary => {
                self.note(format!("{id}: collar without critical points, trivial"));
                Ok(triv())
            }
            VertexKind::NonDegExtreme => {
                self.note(format!("{id}: disk with one non-degenerate extreme, trivial"));
                Ok(triv())
            }
            VertexKind::DegExtreme { m: k, .. } => {
                self.note(format!("{id}: disk with one degenerate extreme of symmetry index {k}, z({k})"));
                Ok(z(*k))
            }
            VertexKind::CriticalLeaf { .. } => {
                let sym = m.leaf_symmetry(w, Some(parent), Genericity::Strict)?;
                let mut fixed_children = sym.fixed.clone();
                if let Some(pos) = fixed_children.iter().position(|&e| e == parent) {
                    fixed_children.remove(pos);
                }
                if sym.m == 1 {
                    let edges: Vec<usize> = fixed_children.iter().copied().chain(sym.orbits.iter().flatten().copied()).collect();
                    let children = edges
                        .iter()
                        .map(|&e| self.region(m.other_end(e, w), e))
                        .collect::<Result<Vec<_>, _>>()?;
                    self.note(format!("{id}: all {} regions invariant, wr(product, 1)", edges.len()));
                    return Ok(wr(&product_all(children), 1));
                }
                let reps = sym
                    .orbits
                    .iter()
                    .map(|o| self.region(m.other_end(o[0], w), o[0]))
                    .collect::<Result<Vec<_>, _>>()?;
                let a = wr(&product_all(reps), sym.m);
                self.note(format!("{id}: {} orbit(s) of size {} permuted cyclically", sym.orbits.len(), sym.m));
                match fixed_children.as_slice() {
                    [] => Ok(a),
                    [e] => {
                        let fixed = self.region(m.other_end(*e, w), *e)?;
                        self.note(format!("{id}: one further invariant region multiplied in"));
                        Ok(product(&fixed, &a))
                    }
                    _ => Err(OrbitError::InternalInvariant(format!(
                        "leaf {id} has more than two invariant regions under a rotation"
                    ))),
                }
            }
        }
    }

    /// Disk or cylinder rooted at the boundary vertex `root`, which lies in X.
    fn rooted(&mut self, root: usize) -> Result<SeqExpr, OrbitError> {
        let e = *self
            .model
            .incident(root)
            .first()
            .ok_or_else(|| OrbitError::InternalInvariant("root boundary has no edge".into()))?;
        let w = self.model.other_end(e, root);
        self.region(w, e)
    }
}

fn has_critical_points(model: &ReebModel) -> bool {
    model.vertices.iter().any(|v| v.kind != VertexKind::Boundary)
}

fn has_saddle_type(model: &ReebModel) -> bool {
    model
        .vertices
        .iter()
        .any(|v| matches!(v.kind, VertexKind::CriticalLeaf { .. } | VertexKind::DegExtreme { .. }))
}

fn x_boundaries(model: &ReebModel) -> Vec<usize> {
    model.x.iter().copied().filter(|&v| model.vertices[v].kind == VertexKind::Boundary).collect()
}

fn x_points(model: &ReebModel) -> Vec<usize> {
    model.x.iter().copied().filter(|&v| model.vertices[v].kind.is_extreme()).collect()
}

pub fn stabilizer_homotopy(model: &ReebModel) -> StabilizerType {
    let points = x_points(model).len() as i64;
    if has_saddle_type(model) || points > model.surface.euler() || !x_boundaries(model).is_empty() {
        StabilizerType::Contractible
    } else {
        StabilizerType::Circle
    }
}

fn diffid_factor(model: &ReebModel) -> DiffIdFactor {
    let bnd = x_boundaries(model).len();
    let pts = x_points(model).len();
    match model.surface.kind {
        SurfaceKind::Torus if bnd + pts == 0 => DiffIdFactor::Torus,
        SurfaceKind::Disk | SurfaceKind::Cylinder if bnd + pts == 0 => DiffIdFactor::Circle,
        SurfaceKind::Disk if bnd == 0 && pts == 1 => DiffIdFactor::Circle,
        SurfaceKind::Sphere if bnd == 0 && pts == 0 => DiffIdFactor::So3,
        SurfaceKind::Sphere if bnd == 0 && pts <= 2 => DiffIdFactor::Circle,
        _ => DiffIdFactor::Point,
    }
}

pub fn homotopy_descriptor(model: &ReebModel, seq: &SeqExpr) -> HomotopyDescriptor {
    let stabilizer_id = stabilizer_homotopy(model);
    let weak_equiv_torus_rank = (stabilizer_id == StabilizerType::Contractible && seq.quotient == GroupExpr::Unit)
        .then(|| beta1(&seq.kernel).ok())
        .flatten();
    HomotopyDescriptor {
        stabilizer_id,
        diffid_factor: diffid_factor(model),
        orbit_aspherical: model.surface.is_supported(),
        weak_equiv_torus_rank,
    }
}

/// Passes from X = boundary to X = ∅ by quotienting the diagonal Garside
/// element; surfaces of negative Euler characteristic are unchanged.
pub fn forget_boundary(seq: &SeqExpr, surface: &SurfaceSpec) -> Result<SeqExpr, OrbitError> {
    if surface.euler() < 0 {
        return Ok(seq.clone());
    }
    let factors = match &seq.build {
        Build::Triv => return Ok(triv()),
        Build::Prod { factors } => factors.clone(),
        _ => vec![seq.clone()],
    };
    Ok(diag_garside(&factors)?)
}

/// Saddle-free models: a disk with one non-degenerate extreme, a cylinder
/// without critical points (both with no boundary in X) and torus fibrations.
pub fn exceptional_lookup(model: &ReebModel) -> Result<OrbitResult, OrbitError> {
    let circle_desc = |diffid| HomotopyDescriptor {
        stabilizer_id: StabilizerType::Circle,
        diffid_factor: diffid,
        orbit_aspherical: true,
        weak_equiv_torus_rank: None,
    };
    if model.is_fibration() {
        let m = model.fibration_degree.unwrap_or(1);
        let (_, bottom) = natural(&z(m));
        return Ok(OrbitResult {
            stab_seq: Some(bottom.clone()),
            seq: bottom,
            pi1_orbit: GroupExpr::Z,
            betti1: 1,
            homotopy: circle_desc(DiffIdFactor::Torus),
            full_stabilizer_pi0: None,
            trace: vec![format!("torus fibred over the circle with {m} fibre circles; orbit is a circle")],
        });
    }
    if !x_boundaries(model).is_empty() {
        return Err(OrbitError::NotExceptional);
    }
    let kinds: Vec<&VertexKind> = model.vertices.iter().map(|v| &v.kind).collect();
    let trivial = |diffid, trace: &str, full| OrbitResult {
        seq: triv(),
        pi1_orbit: GroupExpr::Unit,
        betti1: 0,
        homotopy: circle_desc(diffid),
        stab_seq: None,
        full_stabilizer_pi0: full,
        trace: vec![trace.to_string()],
    };
    match (model.surface.kind, kinds.as_slice()) {
        (SurfaceKind::Disk, [a, b])
            if matches!((a, b), (VertexKind::Boundary, VertexKind::NonDegExtreme) | (VertexKind::NonDegExtreme, VertexKind::Boundary))
                && model.x.len() <= 1 =>
        {
            Ok(trivial(diffid_factor(model), "disk with a single non-degenerate extreme; stabilizer is a circle, orbit a point", None))
        }
        (SurfaceKind::Cylinder, [VertexKind::Boundary, VertexKind::Boundary]) if model.x.is_empty() => Ok(trivial(
            DiffIdFactor::Circle,
            "cylinder without critical points; stabilizer is a circle, orbit a point",
            Some(GroupExpr::Z),
        )),
        _ => Err(OrbitError::NotExceptional),
    }
}

pub fn compute(model: &ReebModel) -> Result<OrbitResult, OrbitError> {
    if !model.surface.is_supported() {
        return Err(OrbitError::UnsupportedSurface(format!("{:?}", model.surface.kind)));
    }
    model.ensure_valid()?;
    match exceptional_lookup(model) {
        Ok(r) => return Ok(r),
        Err(OrbitError::NotExceptional) => {}
        Err(e) => return Err(e),
    }
    if let Some(&p) = x_points(model).first() {
        return Err(OrbitError::PointInX(model.vertices[p].id.clone()));
    }
    let mut engine = Engine { model, trace: Vec::new() };
    let (seq, stab_seq) = match model.surface.kind {
        SurfaceKind::Disk | SurfaceKind::Cylinder => {
            let root = *x_boundaries(model).first().ok_or(OrbitError::EmptyXOnDisk)?;
            engine.note(format!("{:?} rooted at boundary {}", model.surface.kind, model.vertices[root].id));
            (engine.rooted(root)?, None)
        }
        SurfaceKind::Torus => {
            let (s, st) = torus(&mut engine)?;
            (s, Some(st))
        }
        _ => (negative_euler(&mut engine)?, None),
    };
    let pi1_orbit = seq.middle.clone();
    let betti1 = beta1(&pi1_orbit).map_err(|e| OrbitError::InternalInvariant(format!("orbit group: {e}")))?;
    let homotopy = homotopy_descriptor(model, &seq);
    let full_stabilizer_pi0 =
        (model.surface.kind == SurfaceKind::Cylinder && !has_critical_points(model)).then_some(GroupExpr::Z);
    Ok(OrbitResult { seq, pi1_orbit, betti1, homotopy, stab_seq, full_stabilizer_pi0, trace: engine.trace })
}

fn negative_euler(engine: &mut Engine<'_>) -> Result<SeqExpr, OrbitError> {
    let model = engine.model;
    let red = model.reduce();
    if red.cut_leaves.is_empty() {
        return Err(OrbitError::InternalInvariant("no critical leaf with negative canonical Euler characteristic".into()));
    }
    let names: Vec<&str> = red.cut_leaves.iter().map(|&v| model.vertices[v].id.as_str()).collect();
    engine.note(format!("cut at leaves {names:?} into {} piece(s)", red.pieces.len()));
    let mut seqs = Vec::new();
    for piece in &red.pieces {
        if !matches!(piece.surface_kind, SurfaceKind::Disk | SurfaceKind::Cylinder) {
            return Err(OrbitError::InternalInvariant(format!("piece of kind {:?} after cutting", piece.surface_kind)));
        }
        let sub = &piece.model;
        sub.ensure_valid().map_err(|e| OrbitError::InternalInvariant(format!("piece failed validation: {e}")))?;
        let bnd = x_boundaries(sub);
        let root = *bnd
            .iter()
            .rev()
            .find(|&&v| sub.vertices[v].id.contains("~cut"))
            .or_else(|| bnd.first())
            .ok_or_else(|| OrbitError::InternalInvariant("piece without a boundary in X".into()))?;
        let mut inner = Engine { model: sub, trace: Vec::new() };
        let s = inner.rooted(root)?;
        engine.trace.extend(inner.trace.into_iter().map(|t| format!("  {t}")));
        seqs.push(s);
    }
    Ok(product_all(seqs))
}

/// The unique cycle as a list of (vertex, edge to the next vertex).
fn find_cycle(model: &ReebModel) -> Vec<(usize, usize)> {
    let n = model.vertices.len();
    let mut alive: BTreeSet<usize> = (0..n).collect();
    let mut deg: Vec<usize> = (0..n).map(|v| model.degree(v)).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();
    while let Some(v) = stack.pop() {
        if !alive.remove(&v) {
            continue;
        }
        for e in model.incident(v) {
            let w = model.other_end(e, v);
            if alive.contains(&w) {
                deg[w] -= 1;
                if deg[w] <= 1 {
                    stack.push(w);
                }
            }
        }
    }
    let cycle_edges: BTreeSet<usize> = model
        .edges
        .iter()
        .enumerate()
        .filter(|(_, (a, b))| alive.contains(a) && alive.contains(b))
        .map(|(e, _)| e)
        .collect();
    let Some(&start) = alive.iter().next() else { return Vec::new() };
    let mut out = Vec::new();
    let mut cur = start;
    let mut prev: Option<usize> = None;
    loop {
        let next = model
            .incident(cur)
            .into_iter()
            .find(|e| cycle_edges.contains(e) && Some(*e) != prev)
            .expect("cycle continues");
        out.push((cur, next));
        cur = model.other_end(next, cur);
        prev = Some(next);
        if cur == start {
            break;
        }
    }
    out
}

fn torus(engine: &mut Engine<'_>) -> Result<(SeqExpr, SeqExpr), OrbitError> {
    let model = engine.model;
    if model.cycle_rank() == 1 {
        torus_cycle(engine)
    } else {
        torus_tree(engine)
    }
}

fn torus_cycle(engine: &mut Engine<'_>) -> Result<(SeqExpr, SeqExpr), OrbitError> {
    let model = engine.model;
    let cycle = find_cycle(model);
    let cycle_edges: BTreeSet<usize> = cycle.iter().map(|c| c.1).collect();
    let len = cycle.len();
    let word: Vec<String> = cycle
        .iter()
        .map(|&(v, _)| {
            let mut hanging: Vec<String> = model
                .incident(v)
                .into_iter()
                .filter(|e| !cycle_edges.contains(e))
                .map(|e| model.branch_code(v, e, Genericity::Strict))
                .collect();
            hanging.sort();
            format!("{}[{}]", model.canonical_code(v, None, Genericity::Strict).split('(').next().unwrap_or(""), hanging.join(","))
        })
        .collect();
    let period = cyclic_period(&word);
    let m = match model.torus_symmetry {
        Some(ts) => {
            let ok = ts.m >= 1 && len as u64 % ts.m == 0 && (len / ts.m as usize) % period == 0;
            if !ok {
                return Err(ModelError::BadAnnotation {
                    leaf: "torus".into(),
                    msg: format!("{} copies do not fit a cycle of {len} leaves with period {period}", ts.m),
                }
                .into());
            }
            ts.m
        }
        None => (len / period) as u64,
    };
    let r = len / m as usize;
    let mut keep = BTreeSet::new();
    for &(v, _) in &cycle[..r] {
        let mut stack = vec![v];
        while let Some(w) = stack.pop() {
            if !keep.insert(w) {
                continue;
            }
            for e in model.incident(w) {
                if !cycle_edges.contains(&e) {
                    stack.push(model.other_end(e, w));
                }
            }
        }
    }
    let into_first = cycle[len - 1].1;
    let out_of_last = cycle[r - 1].1;
    let cuts = [(into_first, cycle[0].0), (out_of_last, cycle[r - 1].0)];
    let (q, fresh, _) = model.submodel(&keep, &cuts, SurfaceSpec::cylinder());
    q.ensure_valid().map_err(|e| OrbitError::InternalInvariant(format!("cylinder between cut leaves: {e}")))?;
    engine.note(format!("torus with a cycle of {len} leaves: {m} cyclically permuted cylinder(s) of {r} leaves"));
    let mut inner = Engine { model: &q, trace: Vec::new() };
    let qs = inner.rooted(fresh[0])?;
    engine.trace.extend(inner.trace.into_iter().map(|t| format!("  {t}")));
    let seq = wr(&qs, m);
    let stab = garside_quotient(&wr(&forget_boundary(&qs, &q.surface)?, m))?;
    Ok((seq, stab))
}

fn torus_tree(engine: &mut Engine<'_>) -> Result<(SeqExpr, SeqExpr), OrbitError> {
    let model = engine.model;
    let center = (0..model.vertices.len())
        .find(|&v| matches!(model.vertices[v].kind, VertexKind::CriticalLeaf { .. }) && model.leaf_genus(v) == Some(1))
        .ok_or_else(|| OrbitError::InternalInvariant("no leaf of genus one on a torus tree".into()))?;
    let id = model.vertices[center].id.clone();
    let branches = model.incident(center);
    let mut classes: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for &e in &branches {
        classes.entry(model.branch_code(center, e, Genericity::Strict)).or_default().push(e);
    }
    let (m, n) = match model.torus_symmetry {
        Some(ts) => (ts.m, ts.n.unwrap_or(1)),
        None if classes.values().all(|c| c.len() == 1) => (1, 1),
        None => {
            return Err(OrbitError::UnannotatedTorusSymmetry(format!(
                "leaf {id} has isomorphic disk branches; give torus_symmetry {{m, n}}"
            )))
        }
    };
    let mn = (m * n) as usize;
    if mn == 0 || classes.values().any(|c| c.len() % mn != 0) {
        return Err(ModelError::BadAnnotation {
            leaf: id,
            msg: format!("disk branches cannot form free orbits of size {m}x{n}"),
        }
        .into());
    }
    let mut reps = Vec::new();
    for class in classes.values() {
        for &e in class.iter().step_by(mn) {
            reps.push(engine.region(model.other_end(e, center), e)?);
        }
    }
    engine.note(format!("torus tree cut at leaf {id}: {} disk orbit(s) under Z_{m} x Z_{n}", reps.len()));
    let seq = wr2(&product_all(reps), m, n);
    let stab = garside_quotient(&seq)?;
    Ok((seq, stab))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reebmodel::Target;
    use num_rational::BigRational;

    fn lvl(x: i64) -> Option<BigRational> {
        Some(BigRational::from_integer(x.into()))
    }

    #[test]
    fn degenerate_extreme_disk() {
        let mut m = ReebModel::new(SurfaceSpec::disk(), Target::R);
        let b = m.add_vertex("b", VertexKind::Boundary, lvl(0));
        let d = m.add_vertex("d", VertexKind::DegExtreme { m: 3, dihedral: false }, lvl(1));
        m.add_edge(b, d);
        m.x = vec![b];
        let r = compute(&m).unwrap();
        assert_eq!(r.seq, z(3));
        assert_eq!(r.pi1_orbit, GroupExpr::Z);
        let bottom = forget_boundary(&r.seq, &m.surface).unwrap();
        assert_eq!((bottom.kernel, bottom.middle, bottom.quotient), (GroupExpr::Unit, GroupExpr::Zmod(3), GroupExpr::Zmod(3)));
    }

    #[test]
    fn fibration() {
        let r = compute(&ReebModel::torus_fibration(3)).unwrap();
        assert_eq!(r.seq.middle, GroupExpr::Zmod(3));
        assert_eq!(r.pi1_orbit, GroupExpr::Z);
    }
}
