//! Random model generators and the realization census.
//!
//! Every generator is driven by a seeded ChaCha stream so corpora are
//! reproducible; `ORBITCALC_SEED` overrides the default seed.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::polysym::{Gq, HomogPoly};
use crate::reebmodel::{LeafSymmetry, ReebModel, SurfaceSpec, Target, VertexKind};
use crate::seqcalc::{product_all, wr, Build, SeqExpr};

pub const SEED_VAR: &str = "ORBITCALC_SEED";

/// Seed from `ORBITCALC_SEED`, falling back to `default`.
pub fn seed_from_env(default: u64) -> u64 {
    std::env::var(SEED_VAR).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(default)
}

// ---------------------------------------------------------------------------
// Shape trees

/// How a critical leaf announces its symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Annot {
    Infer,
    Ribbon,
    Explicit,
}

#[derive(Debug, Clone)]
pub enum ShapeKind {
    Boundary,
    NonDeg,
    Deg { m: u64, dihedral: bool },
    /// Children are `m` identical copies of `orbits`, plus an optional
    /// invariant `center` region.
    Leaf { crit: Vec<u32>, m: u64, orbits: Vec<Shape>, center: Option<Box<Shape>>, annot: Annot },
}

/// A rooted region of a Reeb graph, hanging below its parent leaf.
#[derive(Debug, Clone)]
pub struct Shape {
    pub level: i64,
    pub kind: ShapeKind,
}

impl Shape {
    fn degree_below(&self) -> usize {
        match &self.kind {
            ShapeKind::Leaf { m, orbits, center, .. } => *m as usize * orbits.len() + usize::from(center.is_some()),
            _ => 0,
        }
    }
}

struct Emitter {
    model: ReebModel,
}

impl Emitter {
    fn vertex(&mut self, prefix: &str, kind: VertexKind, level: i64) -> usize {
        let id = format!("{prefix}{}", self.model.vertices.len());
        self.model.add_vertex(id, kind, Some(BigRational::from_integer(BigInt::from(level))))
    }

    /// Emits `s` and joins it to `parent`; returns the new vertex.
    fn emit(&mut self, s: &Shape, parent: Option<usize>) -> usize {
        let v = match &s.kind {
            ShapeKind::Boundary => self.vertex("b", VertexKind::Boundary, s.level),
            ShapeKind::NonDeg => self.vertex("e", VertexKind::NonDegExtreme, s.level),
            ShapeKind::Deg { m, dihedral } => self.vertex("d", VertexKind::DegExtreme { m: *m, dihedral: *dihedral }, s.level),
            ShapeKind::Leaf { crit, .. } => self.vertex("c", VertexKind::CriticalLeaf { crit_points: crit.clone() }, s.level),
        };
        let pe = parent.map(|p| self.model.add_edge(p, v));
        if let ShapeKind::Leaf { m, orbits, center, annot, .. } = &s.kind {
            let ce = center.as_ref().map(|c| {
                let e = self.model.edges.len();
                self.emit(c, Some(v));
                e
            });
            let mut copies: Vec<Vec<usize>> = Vec::new();
            for _ in 0..*m {
                let mut row = Vec::new();
                for o in orbits {
                    row.push(self.model.edges.len());
                    self.emit(o, Some(v));
                }
                copies.push(row);
            }
            match annot {
                Annot::Infer => {}
                Annot::Ribbon => {
                    let order: Vec<usize> = pe.into_iter().chain(ce).chain(copies.iter().flatten().copied()).collect();
                    self.model.ribbon.insert(v, order);
                }
                Annot::Explicit => {
                    let fixed = pe.into_iter().chain(ce).collect();
                    let orbits = (0..orbits.len()).map(|i| copies.iter().map(|row| row[i]).collect()).collect();
                    self.model.symmetry.push(LeafSymmetry { leaf: v, m: *m, fixed, orbits });
                }
            }
        }
        v
    }
}

/// Builds a model whose graph is the shape tree hanging below a boundary root
/// at level 0.
pub fn model_from_shape(surface: SurfaceSpec, target: Target, root: &Shape) -> ReebModel {
    let mut em = Emitter { model: ReebModel::new(surface, target) };
    em.emit(root, None);
    em.model
}

/// Number of critical leaves in a shape, counting copies.
pub fn leaf_count(s: &Shape) -> usize {
    match &s.kind {
        ShapeKind::Leaf { m, orbits, center, .. } => {
            1 + *m as usize * orbits.iter().map(leaf_count).sum::<usize>() + center.as_deref().map_or(0, leaf_count)
        }
        _ => 0,
    }
}

/// Critical points of a leaf of genus `g` with `deg` adjacent regions. With
/// `simple` set every point is a saddle.
fn crit_points<R: Rng>(rng: &mut R, deg: usize, g: u32, simple: bool) -> Vec<u32> {
    let chi = 2 - 2 * g as i64 - deg as i64;
    assert!(chi <= 0, "a critical leaf with degree {deg} and genus {g} has positive Euler characteristic");
    if simple {
        assert!(chi < 0, "a saddle leaf needs negative Euler characteristic");
        return vec![2; (-chi) as usize];
    }
    let max_v = if chi == 0 { 2 } else { 3 };
    let v = rng.gen_range(1..=max_v) as i64;
    let total = v - chi;
    let mut parts = vec![1u32; v as usize];
    for _ in 0..total - v {
        let i = rng.gen_range(0..parts.len());
        parts[i] += 1;
    }
    parts.sort_unstable();
    parts
}

// ---------------------------------------------------------------------------
// Generators

pub struct ModelGen {
    rng: ChaCha8Rng,
    level: i64,
}

impl ModelGen {
    pub fn new(seed: u64) -> Self {
        ModelGen { rng: ChaCha8Rng::seed_from_u64(seed), level: 0 }
    }

    pub fn from_env(default: u64) -> Self {
        Self::new(seed_from_env(default))
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn next_level(&mut self) -> i64 {
        self.level += 1;
        self.level
    }

    fn leaf(&mut self, crit: Vec<u32>, m: u64, orbits: Vec<Shape>, center: Option<Shape>, annot: Annot, level: i64) -> Shape {
        Shape { level, kind: ShapeKind::Leaf { crit, m, orbits, center: center.map(Box::new), annot } }
    }

    /// Binary saddle tree with `saddles` saddles; every level is distinct.
    fn generic_tree(&mut self, saddles: usize) -> Shape {
        let level = self.next_level();
        if saddles == 0 {
            return Shape { level, kind: ShapeKind::NonDeg };
        }
        let left = self.rng.gen_range(0..saddles);
        let a = self.generic_tree(left);
        let b = self.generic_tree(saddles - 1 - left);
        self.leaf(vec![2], 1, vec![a, b], None, Annot::Infer, level)
    }

    /// Generic Morse function on the disk with `X = ∂D`.
    pub fn generic_morse_disk(&mut self, saddles: usize) -> ReebModel {
        self.level = 0;
        let root = Shape { level: 0, kind: ShapeKind::Boundary };
        let mut model = model_from_shape(SurfaceSpec::disk(), Target::R, &root);
        let tree = self.generic_tree(saddles);
        graft(&mut model, 0, &tree);
        model.x = vec![0];
        model
    }

    /// Saddle tree where some saddles swap two identical subtrees.
    fn simple_tree(&mut self, saddles: usize) -> Shape {
        let level = self.next_level();
        if saddles == 0 {
            return Shape { level, kind: ShapeKind::NonDeg };
        }
        if (saddles - 1) % 2 == 0 && self.rng.gen_bool(0.35) {
            let child = self.simple_tree((saddles - 1) / 2);
            return self.leaf(vec![2], 2, vec![child], None, Annot::Infer, level);
        }
        let left = self.rng.gen_range(0..saddles);
        let a = self.simple_tree(left);
        let b = self.simple_tree(saddles - 1 - left);
        self.leaf(vec![2], 1, vec![a, b], None, Annot::Infer, level)
    }

    pub fn simple_morse_disk(&mut self, saddles: usize) -> ReebModel {
        self.level = 0;
        let mut model = model_from_shape(SurfaceSpec::disk(), Target::R, &Shape { level: 0, kind: ShapeKind::Boundary });
        let tree = self.simple_tree(saddles);
        graft(&mut model, 0, &tree);
        model.x = vec![0];
        model
    }

    /// Simple Morse cylinder whose Reeb graph is a chain of `chain` saddles
    /// between the boundary circles, each carrying a hanging disk. With
    /// `equal_signs` both boundary circles are local minima.
    pub fn simple_morse_cylinder(&mut self, chain: usize, equal_signs: bool) -> ReebModel {
        self.level = 0;
        let mut levels = Vec::new();
        let mut hanging = Vec::new();
        for _ in 0..chain {
            levels.push(self.next_level());
            let n = self.rng.gen_range(0..3);
            hanging.push(self.simple_tree(n));
        }
        let far_level = if equal_signs { 0 } else { self.next_level() + 1 };
        let mut shape = Shape { level: far_level, kind: ShapeKind::Boundary };
        for (level, h) in levels.into_iter().zip(hanging).rev() {
            shape = self.leaf(vec![2], 1, vec![h], Some(shape), Annot::Infer, level);
        }
        cylinder_from_chain(shape, self.rng.gen_bool(0.5))
    }

    /// Simple Morse torus map to the circle whose Reeb graph is a cycle of
    /// saddles, repeated `m` times around the cycle.
    pub fn simple_morse_torus_cycle(&mut self, pattern: usize, m: u64) -> ReebModel {
        self.level = 0;
        let mut cells = Vec::new();
        for _ in 0..pattern.max(1) {
            let level = self.next_level();
            let n = self.rng.gen_range(0..3);
            cells.push((level, self.simple_tree(n)));
        }
        let mut em = Emitter { model: ReebModel::new(SurfaceSpec::torus(), Target::S1) };
        let mut cycle = Vec::new();
        for _ in 0..m {
            for (level, hanging) in &cells {
                let v = em.vertex("c", VertexKind::CriticalLeaf { crit_points: vec![2] }, *level);
                em.emit(hanging, Some(v));
                cycle.push(v);
            }
        }
        for i in 0..cycle.len() {
            em.model.add_edge(cycle[i], cycle[(i + 1) % cycle.len()]);
        }
        em.model
    }

    /// One of the three simple Morse corpora, chosen at random. Torus cycles
    /// use rotation orders 1 and 2.
    pub fn simple_morse(&mut self) -> ReebModel {
        match self.rng.gen_range(0..3) {
            0 => {
                let n = self.rng.gen_range(0..8);
                self.simple_morse_disk(n)
            }
            1 => {
                let c = self.rng.gen_range(1..4);
                let eq = self.rng.gen_bool(0.5);
                self.simple_morse_cylinder(c, eq)
            }
            _ => {
                let r = self.rng.gen_range(1..4);
                let m = self.rng.gen_range(1..=2);
                self.simple_morse_torus_cycle(r, m)
            }
        }
    }

    /// Disk region with degenerate extremes, multi-point leaves and rotations.
    fn arbitrary_tree(&mut self, budget: usize) -> Shape {
        let level = self.next_level();
        if budget == 0 || self.rng.gen_bool(0.25) {
            return if self.rng.gen_bool(0.6) {
                Shape { level, kind: ShapeKind::NonDeg }
            } else {
                Shape { level, kind: ShapeKind::Deg { m: self.rng.gen_range(2..=5), dihedral: self.rng.gen_bool(0.5) } }
            };
        }
        let rest = budget - 1;
        if self.rng.gen_bool(0.6) {
            let k = self.rng.gen_range(2..=3);
            let children = self.split(rest, k);
            let crit = crit_points(&mut self.rng, k + 1, 0, false);
            self.leaf(crit, 1, children, None, Annot::Infer, level)
        } else {
            let m = self.rng.gen_range(2..=4);
            let r = self.rng.gen_range(1..=2);
            let orbits = self.split(rest / m as usize, r);
            let center = if self.rng.gen_bool(0.3) { Some(self.arbitrary_tree(rest / 3)) } else { None };
            let annot = if center.is_some() { Annot::Explicit } else { Annot::Ribbon };
            let deg = 1 + m as usize * r + usize::from(center.is_some());
            let crit = crit_points(&mut self.rng, deg, 0, false);
            self.leaf(crit, m, orbits, center, annot, level)
        }
    }

    fn split(&mut self, budget: usize, k: usize) -> Vec<Shape> {
        let mut parts = vec![0usize; k];
        for _ in 0..budget {
            let i = self.rng.gen_range(0..k);
            parts[i] += 1;
        }
        parts.into_iter().map(|b| self.arbitrary_tree(b)).collect()
    }

    /// Chain leaf on a path toward `far`, with hanging disks that may rotate.
    fn chain_leaf(&mut self, far: Shape, level: i64) -> Shape {
        if self.rng.gen_bool(0.4) {
            let m = self.rng.gen_range(2..=3);
            let orbit = self.arbitrary_tree(1);
            let crit = crit_points(&mut self.rng, 2 + m as usize, 0, false);
            let annot = if self.rng.gen_bool(0.5) { Annot::Ribbon } else { Annot::Explicit };
            self.leaf(crit, m, vec![orbit], Some(far), annot, level)
        } else {
            let h = self.rng.gen_range(0..=2);
            let hanging = self.split(2, h.max(1)).into_iter().take(h).collect::<Vec<_>>();
            let crit = crit_points(&mut self.rng, 2 + hanging.len(), 0, false);
            self.leaf(crit, 1, hanging, Some(far), Annot::Infer, level)
        }
    }

    pub fn arbitrary_disk(&mut self) -> ReebModel {
        self.level = 0;
        let mut model = model_from_shape(SurfaceSpec::disk(), Target::R, &Shape { level: 0, kind: ShapeKind::Boundary });
        let budget = self.rng.gen_range(1..6);
        let tree = self.arbitrary_tree(budget);
        graft(&mut model, 0, &tree);
        model.x = vec![0];
        model
    }

    /// Cylinder with a chain of `chain ≥ 1` critical leaves; with
    /// `equal_signs` both boundary circles are local minima.
    pub fn arbitrary_cylinder(&mut self, chain: usize, equal_signs: bool) -> ReebModel {
        self.level = 0;
        let levels: Vec<i64> = (0..chain).map(|_| self.next_level()).collect();
        let far_level = if equal_signs { 0 } else { 1_000_000 };
        let mut shape = Shape { level: far_level, kind: ShapeKind::Boundary };
        for level in levels.into_iter().rev() {
            shape = self.chain_leaf(shape, level);
        }
        cylinder_from_chain(shape, self.rng.gen_bool(0.5))
    }

    /// Surface of negative Euler characteristic built around one or two
    /// cores carrying the genus.
    pub fn arbitrary_negative(&mut self) -> ReebModel {
        self.level = 0;
        let two = self.rng.gen_bool(0.4);
        let link = usize::from(two);
        let mut cores = Vec::new();
        for _ in 0..=link {
            let g = self.rng.gen_range(0..=1u32);
            let need = (3 - 2 * g as i64 - link as i64).max(0) as usize;
            let b = self.rng.gen_range(need..=need + 1);
            let n = self.rng.gen_range(0..=2usize);
            cores.push((g, b, n));
        }
        let mut genus = 0;
        let mut boundary = 0;
        let mut core_shapes: Vec<Shape> = Vec::new();
        for (idx, &(g, b, n)) in cores.iter().enumerate().rev() {
            let level = self.next_level();
            let mut children = Vec::new();
            for _ in 0..b {
                let far = Shape { level: -1_000_000 - self.next_level(), kind: ShapeKind::Boundary };
                let child = if self.rng.gen_bool(0.5) {
                    let l = self.next_level();
                    self.chain_leaf(far, l)
                } else {
                    far
                };
                children.push(child);
            }
            for _ in 0..n {
                let budget = self.rng.gen_range(0..3);
                children.push(self.arbitrary_tree(budget));
            }
            if idx == 0 {
                if let Some(inner) = core_shapes.pop() {
                    let linked = if self.rng.gen_bool(0.5) {
                        let l = self.next_level();
                        self.chain_leaf(inner, l)
                    } else {
                        inner
                    };
                    children.push(linked);
                }
            }
            let deg = children.len() + usize::from(idx == 1);
            let crit = crit_points(&mut self.rng, deg, g, false);
            genus += g;
            boundary += b as u32;
            core_shapes.push(self.leaf(crit, 1, children, None, Annot::Infer, level));
        }
        let root = core_shapes.pop().expect("core");
        let mut model = model_from_shape(SurfaceSpec::generic(genus, boundary), Target::R, &root);
        let bnd: Vec<usize> =
            (0..model.vertices.len()).filter(|&v| model.vertices[v].kind == VertexKind::Boundary).collect();
        model.x = bnd.into_iter().filter(|_| self.rng.gen_bool(0.5)).collect();
        model
    }

    /// Any in-scope model outside the torus: disk, cylinder or negative Euler
    /// characteristic, with nonempty X on disks and cylinders.
    pub fn arbitrary(&mut self) -> ReebModel {
        match self.rng.gen_range(0..10) {
            0..=3 => self.arbitrary_disk(),
            4..=6 => {
                let c = self.rng.gen_range(1..=3);
                let eq = self.rng.gen_bool(0.5);
                self.arbitrary_cylinder(c, eq)
            }
            _ => self.arbitrary_negative(),
        }
    }

    /// Cylinder with both boundary circles local minima and `X = ∂M`.
    pub fn equal_sign_cylinder(&mut self) -> ReebModel {
        let c = self.rng.gen_range(1..=3);
        let mut model = if self.rng.gen_bool(0.5) { self.simple_morse_cylinder(c, true) } else { self.arbitrary_cylinder(c, true) };
        model.x = (0..model.vertices.len()).filter(|&v| model.vertices[v].kind == VertexKind::Boundary).collect();
        model
    }

    // -----------------------------------------------------------------------
    // Polynomials

    /// Square-free real form of degree `d` invariant under rotation by `2π/m`,
    /// built from random Gaussian-integer z-basis coefficients.
    pub fn symmetric_poly(&mut self, d: usize, m: u64) -> HomogPoly {
        assert!(d >= 1 && m >= 1);
        let support: Vec<usize> = (0..=d).filter(|&j| (2 * j as i64 - d as i64).rem_euclid(m as i64) == 0).collect();
        assert!(admits_square_free(d, m), "no square-free form of degree {d} is invariant under order {m}");
        loop {
            let mut c = vec![Gq::zero(); d + 1];
            for &j in &support {
                if 2 * j > d {
                    continue;
                }
                let re = self.rng.gen_range(-3..=3);
                let im = if 2 * j == d { 0 } else { self.rng.gen_range(-3..=3) };
                c[j] = Gq::from_ints(re, im);
                c[d - j] = c[j].conj();
            }
            if let Ok(p) = HomogPoly::from_z_basis(&c) {
                if p.degree() == d && p.is_square_free() {
                    return p;
                }
            }
        }
    }

    /// Random square-free form of degree `2..=max_degree`, sometimes with a
    /// nontrivial rotational symmetry.
    pub fn square_free_poly(&mut self, max_degree: usize) -> HomogPoly {
        loop {
            let d = self.rng.gen_range(2..=max_degree.max(2));
            let m = self.rng.gen_range(1..=d as u64);
            if admits_square_free(d, m) {
                return self.symmetric_poly(d, m);
            }
        }
    }
}

/// Whether some square-free real form of degree `d` is invariant under rotation
/// by `2π/m`. Every invariant monomial `z^j z̄^{d-j}` carries the factor
/// `|z|^{2 min(j, d-j)}`, so one with `min(j, d-j) ≤ 1` must be available.
pub fn admits_square_free(d: usize, m: u64) -> bool {
    d == 2 || (0..=d).any(|j| j.min(d - j) <= 1 && (2 * j as i64 - d as i64).rem_euclid(m as i64) == 0)
}

/// Attaches `tree` below vertex `at` of `model`.
fn graft(model: &mut ReebModel, at: usize, tree: &Shape) {
    let mut em = Emitter { model: std::mem::replace(model, ReebModel::new(SurfaceSpec::disk(), Target::R)) };
    em.emit(tree, Some(at));
    *model = em.model;
}

/// Cylinder rooted at a boundary of level 0 above `chain`; with `both_x` the
/// far boundary is also put in X.
fn cylinder_from_chain(chain: Shape, both_x: bool) -> ReebModel {
    let mut model = model_from_shape(SurfaceSpec::cylinder(), Target::R, &Shape { level: 0, kind: ShapeKind::Boundary });
    graft(&mut model, 0, &chain);
    model.x = vec![0];
    if both_x {
        let far = (1..model.vertices.len()).find(|&v| model.vertices[v].kind == VertexKind::Boundary).expect("far boundary");
        model.x.push(far);
    }
    model
}

/// `+1` when a real-valued map has a local maximum on boundary circle `v`,
/// `-1` for a local minimum; `None` without levels.
pub fn boundary_sign(model: &ReebModel, v: usize) -> Option<i8> {
    let e = *model.incident(v).first()?;
    let w = model.other_end(e, v);
    let (a, b) = (model.vertices[v].level.as_ref()?, model.vertices[w].level.as_ref()?);
    Some(if a > b { 1 } else { -1 })
}

// ---------------------------------------------------------------------------
// Census

/// Sequences generated from the trivial one by products of at most
/// `max_arity` factors and `wr(·, m)` with `m ∈ ms`, nesting wreaths at most
/// `max_depth` times. Distinct up to the groups they name.
pub fn census_sequences(max_depth: usize, max_arity: usize, ms: &[u64]) -> Vec<SeqExpr> {
    let mut atoms: Vec<SeqExpr> = Vec::new();
    let mut level: Vec<SeqExpr> = vec![crate::seqcalc::triv()];
    for _ in 0..max_depth {
        let mut fresh = Vec::new();
        for base in &level {
            for &m in ms {
                let w = wr(base, m);
                if !atoms.iter().chain(&fresh).any(|a: &SeqExpr| a.same_groups(&w)) {
                    fresh.push(w);
                }
            }
        }
        atoms.extend(fresh);
        level = products(&atoms, max_arity);
    }
    level
}

fn products(atoms: &[SeqExpr], max_arity: usize) -> Vec<SeqExpr> {
    let mut out = vec![crate::seqcalc::triv()];
    let mut frontier: Vec<(usize, Vec<SeqExpr>)> = vec![(0, Vec::new())];
    for _ in 0..max_arity {
        let mut next = Vec::new();
        for (start, chosen) in &frontier {
            for (i, a) in atoms.iter().enumerate().skip(*start) {
                let mut c = chosen.clone();
                c.push(a.clone());
                let p = product_all(c.clone());
                if !out.iter().any(|o: &SeqExpr| o.same_groups(&p)) {
                    out.push(p);
                }
                next.push((i, c));
            }
        }
        frontier = next;
    }
    out
}

/// Disk model with `X = ∂D` whose sequence is isomorphic to `seq`, for
/// sequences built from the trivial one by products and `wr(·, m)`.
pub fn realize(seq: &SeqExpr) -> Option<ReebModel> {
    let mut depth = 0;
    let shape = realize_region(seq, &mut depth)?;
    let mut model = model_from_shape(SurfaceSpec::disk(), Target::R, &Shape { level: 0, kind: ShapeKind::Boundary });
    graft(&mut model, 0, &shape);
    model.x = vec![0];
    Some(model)
}

/// Wreath atoms of a product build; `None` for builds outside the closure.
fn atoms_of(seq: &SeqExpr) -> Option<Vec<(SeqExpr, u64)>> {
    match &seq.build {
        Build::Triv => Some(Vec::new()),
        Build::Zseq { m } => Some(vec![(crate::seqcalc::triv(), *m)]),
        Build::Wr { inner, m } => Some(vec![((**inner).clone(), *m)]),
        Build::Prod { factors } => {
            let mut out = Vec::new();
            for f in factors {
                out.extend(atoms_of(f)?);
            }
            Some(out)
        }
        _ => None,
    }
}

fn realize_region(seq: &SeqExpr, level: &mut i64) -> Option<Shape> {
    *level += 1;
    let here = *level;
    let mut atoms = atoms_of(seq)?;
    if atoms.is_empty() {
        return Some(Shape { level: here, kind: ShapeKind::NonDeg });
    }
    if let Some(pos) = atoms.iter().position(|(_, m)| *m == 1) {
        // wr(P, 1) × T ≅ wr(P × T, 1)
        let (inner, _) = atoms.remove(pos);
        let mut factors = vec![inner];
        factors.extend(atoms.into_iter().map(|(s, m)| wr(&s, m)));
        let mut children: Vec<Shape> = Vec::new();
        for f in product_factors(&product_all(factors)) {
            children.push(realize_region(&f, level)?);
        }
        while children.len() < 2 {
            *level += 1;
            children.push(Shape { level: *level, kind: ShapeKind::NonDeg });
        }
        let crit = vec![2; children.len() - 1];
        return Some(Shape { level: here, kind: ShapeKind::Leaf { crit, m: 1, orbits: children, center: None, annot: Annot::Explicit } });
    }
    let (inner, m) = atoms.remove(0);
    let center = if atoms.is_empty() {
        None
    } else {
        let rest = product_all(atoms.into_iter().map(|(s, m)| wr(&s, m)));
        Some(Box::new(realize_region(&rest, level)?))
    };
    let mut orbits = Vec::new();
    for f in product_factors(&inner) {
        orbits.push(realize_region(&f, level)?);
    }
    if orbits.is_empty() {
        *level += 1;
        orbits.push(Shape { level: *level, kind: ShapeKind::NonDeg });
    }
    let shape = Shape { level: here, kind: ShapeKind::Leaf { crit: Vec::new(), m, orbits, center, annot: Annot::Explicit } };
    let deg = 1 + shape.degree_below();
    let ShapeKind::Leaf { orbits, center, .. } = shape.kind else { unreachable!() };
    Some(Shape { level: here, kind: ShapeKind::Leaf { crit: vec![2; deg - 2], m, orbits, center, annot: Annot::Explicit } })
}

fn product_factors(seq: &SeqExpr) -> Vec<SeqExpr> {
    match &seq.build {
        Build::Triv => Vec::new(),
        Build::Prod { factors } => factors.clone(),
        _ => vec![seq.clone()],
    }
}
