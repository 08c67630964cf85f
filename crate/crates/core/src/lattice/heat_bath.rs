use rand::Rng;

use super::{FieldMode, SpinLattice};
use crate::error::Result;

/// h_i = Σ_{j∈nn(i)} S_j − |h|·S_i.
pub fn local_field(lattice: &SpinLattice, site: usize, h: f64) -> Result<f64> {
    lattice.check_site(site)?;
    Ok(field_from_parts(lattice.neighbor_sum(site), lattice.spin(site), h.abs()))
}

#[inline]
fn field_from_parts(neighbor_sum: i32, spin: i8, abs_h: f64) -> f64 {
    neighbor_sum as f64 - abs_h * spin as f64
}

/// Heat-bath probability that the updated spin is +1:
/// p_u = 1 / (1 + exp(−2β h_i)).
#[inline]
pub fn flip_up_probability(local_field: f64, beta: f64) -> f64 {
    logistic(2.0 * beta * local_field)
}

/// Overflow-free logistic function.
#[inline]
pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// p_u for every (neighbor sum, own spin) class at one value of |h|.
///
/// Entries are filled lazily and invalidated whenever |h| changes, which in
/// the ordered phase happens only on the rare accepted flips.
#[derive(Debug, Clone)]
pub struct HeatBathTable {
    beta: f64,
    abs_h_bits: u64,
    values: [f64; 10],
    filled: u16,
}

impl HeatBathTable {
    pub fn new(beta: f64) -> Self {
        HeatBathTable { beta, abs_h_bits: u64::MAX, values: [0.0; 10], filled: 0 }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    #[inline]
    pub fn up_probability(&mut self, neighbor_sum: i32, spin: i8, abs_h: f64) -> f64 {
        let bits = abs_h.to_bits();
        if bits != self.abs_h_bits {
            self.abs_h_bits = bits;
            self.filled = 0;
        }
        let idx = ((neighbor_sum + 4) as usize) + (spin > 0) as usize;
        if self.filled & (1 << idx) == 0 {
            self.values[idx] =
                flip_up_probability(field_from_parts(neighbor_sum, spin, abs_h), self.beta);
            self.filled |= 1 << idx;
        }
        self.values[idx]
    }
}

/// One heat-bath update of `site`: the new spin is +1 with probability p_u
/// regardless of its old value. `uniform` is a draw from [0, 1).
/// Returns whether the spin changed.
#[inline]
pub fn heat_bath_update(
    lattice: &mut SpinLattice,
    table: &mut HeatBathTable,
    site: usize,
    abs_h: f64,
    uniform: f64,
) -> bool {
    let spin = lattice.spin(site);
    let p_up = table.up_probability(lattice.neighbor_sum(site), spin, abs_h);
    let new_spin = if uniform < p_up { 1 } else { -1 };
    new_spin != spin && lattice.flip(site)
}

/// Reference random-sequential updater: N attempts per sweep on uniformly
/// drawn sites. Pinned sites consume their draw and are skipped.
#[derive(Debug, Clone)]
pub struct NaiveUpdater {
    table: HeatBathTable,
}

impl NaiveUpdater {
    pub fn new(beta: f64) -> Self {
        NaiveUpdater { table: HeatBathTable::new(beta) }
    }

    pub fn sweep<R: Rng + ?Sized>(
        &mut self,
        lattice: &mut SpinLattice,
        field: FieldMode,
        alpha: f64,
        rng: &mut R,
    ) {
        let n = lattice.len();
        for _ in 0..n {
            let site = rng.random_range(0..n);
            if lattice.is_pinned(site) {
                continue;
            }
            let abs_h = field.magnitude(lattice, alpha);
            let u: f64 = rng.random();
            heat_bath_update(lattice, &mut self.table, site, abs_h, u);
        }
    }
}
