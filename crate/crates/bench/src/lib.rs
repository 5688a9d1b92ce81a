//! Fixed inputs shared by the benchmarks.

use orbitcalc_core::gen::ModelGen;
use orbitcalc_core::groupexpr::{enumerate_family, GroupExpr, GroupFamily};
use orbitcalc_core::polysym::HomogPoly;
use orbitcalc_core::reebmodel::ReebModel;
use orbitcalc_core::wreath::{FiniteGroup, WreathElement, WreathShape};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 0xbe7c4;

/// `S3 wr_2 Z` with a batch of random elements.
pub fn s3_wreath(count: usize) -> (WreathShape, Vec<WreathElement>) {
    let shape = WreathShape::wr_z(WreathShape::finite(FiniteGroup::s3()), 2);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let xs = (0..count).map(|_| shape.random_element(&mut rng, 9)).collect();
    (shape, xs)
}

/// `Z wr_{2,2} Z²` with a batch of random elements.
pub fn lattice_wreath(count: usize) -> (WreathShape, Vec<WreathElement>) {
    let shape = WreathShape::wr_z2(WreathShape::integers(), 2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let xs = (0..count).map(|_| shape.random_element(&mut rng, 9)).collect();
    (shape, xs)
}

pub fn bieberbach_words(depth: usize) -> Vec<GroupExpr> {
    enumerate_family(GroupFamily::CcB, depth, 3)
}

pub fn square_free_forms(count: usize) -> Vec<HomogPoly> {
    let mut gen = ModelGen::new(SEED);
    (0..count).map(|_| gen.square_free_poly(8)).collect()
}

pub fn generic_disks(count: usize, saddles: usize) -> Vec<ReebModel> {
    let mut gen = ModelGen::new(SEED);
    (0..count).map(|_| gen.generic_morse_disk(saddles)).collect()
}

pub fn arbitrary_models(count: usize) -> Vec<ReebModel> {
    let mut gen = ModelGen::new(SEED);
    (0..count).map(|_| gen.arbitrary()).collect()
}
