//! The microscopic spin market: an L×L periodic lattice of buy/sell agents
//! coupled to their four neighbors and, through the minority term, to the
//! global magnetization.

mod active;
mod heat_bath;
mod params;
mod sim;

pub use active::ActiveSetUpdater;
pub use heat_bath::{flip_up_probability, heat_bath_update, local_field, HeatBathTable, NaiveUpdater};
pub use params::{
    beta_from_temperature_fraction, FieldMode, InitState, ModelParams, UpdaterKind, DEFAULT_TEMPERATURE_FRACTION,
    ISING_CRITICAL_TEMPERATURE,
};
pub use sim::{SeriesRecord, Simulation, TrailingMean, Updater, SMOOTHING_WINDOW};

use rand::Rng;

use crate::error::{Error, Result};

/// Smallest nonzero change of m on an L×L lattice: one flip, 2/L².
pub fn magnetization_quantum(side: usize) -> f64 {
    2.0 / (side * side) as f64
}

/// Square lattice of ±1 spins with periodic boundaries.
///
/// Sites are row-major: `site = y * L + x`. The spin sum and the border
/// length are cached and kept exact under every mutation.
#[derive(Debug, Clone)]
pub struct SpinLattice {
    side: usize,
    spins: Vec<i8>,
    pinned: Vec<bool>,
    neighbors: Vec<[u32; 4]>,
    spin_sum: i64,
    border_length: u64,
    revision: u64,
}

impl SpinLattice {
    pub fn new<R: Rng + ?Sized>(side: usize, init: InitState, rng: &mut R) -> Result<Self> {
        check_side(side)?;
        let n = side * side;
        let spins = match init {
            InitState::Stripes => (0..n)
                .map(|site| if site % side < side / 2 { 1 } else { -1 })
                .collect(),
            InitState::UniformUp => vec![1; n],
            InitState::UniformDown => vec![-1; n],
            InitState::Random => (0..n)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect(),
        };
        Self::from_spins(side, spins)
    }

    /// Builds a lattice from explicit row-major spins.
    pub fn from_spins(side: usize, spins: Vec<i8>) -> Result<Self> {
        check_side(side)?;
        if spins.len() != side * side {
            return Err(Error::InvalidParameter(format!(
                "expected {} spins, got {}",
                side * side,
                spins.len()
            )));
        }
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter(format!("spin value {bad} is not ±1")));
        }
        let n = side * side;
        let neighbors = (0..n)
            .map(|site| {
                let (x, y) = (site % side, site / side);
                let left = y * side + (x + side - 1) % side;
                let right = y * side + (x + 1) % side;
                let up = ((y + side - 1) % side) * side + x;
                let down = ((y + 1) % side) * side + x;
                [left as u32, right as u32, up as u32, down as u32]
            })
            .collect();
        let mut lattice = SpinLattice {
            side,
            spins,
            pinned: vec![false; n],
            neighbors,
            spin_sum: 0,
            border_length: 0,
            revision: 0,
        };
        lattice.spin_sum = lattice.recompute_spin_sum();
        lattice.border_length = lattice.recompute_border_length();
        Ok(lattice)
    }

    /// Pins the full columns `x = L/4` to +1 and `x = 3L/4` to −1.
    pub fn pin_columns(&mut self) -> Result<()> {
        if !self.side.is_multiple_of(4) {
            return Err(Error::PinningNeedsMultipleOfFour(self.side));
        }
        let (plus, minus) = (self.side / 4, 3 * self.side / 4);
        for y in 0..self.side {
            let a = y * self.side + plus;
            let b = y * self.side + minus;
            self.pinned[a] = false;
            self.pinned[b] = false;
            self.set_spin(a, 1);
            self.set_spin(b, -1);
            self.pinned[a] = true;
            self.pinned[b] = true;
        }
        self.revision += 1;
        Ok(())
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Number of sites, N = L².
    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    #[inline]
    pub fn spin(&self, site: usize) -> i8 {
        self.spins[site]
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    #[inline]
    pub fn is_pinned(&self, site: usize) -> bool {
        self.pinned[site]
    }

    pub fn pinned_count(&self) -> usize {
        self.pinned.iter().filter(|&&p| p).count()
    }

    #[inline]
    pub fn neighbors(&self, site: usize) -> [u32; 4] {
        self.neighbors[site]
    }

    #[inline]
    pub fn neighbor_sum(&self, site: usize) -> i32 {
        let nb = &self.neighbors[site];
        self.spins[nb[0] as usize] as i32
            + self.spins[nb[1] as usize] as i32
            + self.spins[nb[2] as usize] as i32
            + self.spins[nb[3] as usize] as i32
    }

    pub fn spin_sum(&self) -> i64 {
        self.spin_sum
    }

    /// m = (1/N) Σ S_k.
    pub fn magnetization(&self) -> f64 {
        self.spin_sum as f64 / self.len() as f64
    }

    /// Number of nearest-neighbor bonds joining opposite spins (cached).
    pub fn border_length(&self) -> u64 {
        self.border_length
    }

    pub fn recompute_spin_sum(&self) -> i64 {
        self.spins.iter().map(|&s| s as i64).sum()
    }

    /// From-scratch border length, counting each of the 2N bonds once via
    /// the right and down neighbors.
    pub fn recompute_border_length(&self) -> u64 {
        (0..self.len())
            .map(|site| {
                let nb = self.neighbors[site];
                let s = self.spins[site];
                (s != self.spins[nb[1] as usize]) as u64 + (s != self.spins[nb[3] as usize]) as u64
            })
            .sum()
    }

    /// Flips one spin, updating both caches. Pinned sites are left alone.
    /// Returns whether the spin changed.
    #[inline]
    pub fn flip(&mut self, site: usize) -> bool {
        if self.pinned[site] {
            return false;
        }
        let s = self.spins[site];
        let nb_sum = self.neighbor_sum(site);
        // Bonds to agreeing neighbors become borders and vice versa:
        // agreeing - disagreeing = s * nb_sum.
        let delta = s as i64 * nb_sum as i64;
        self.border_length = (self.border_length as i64 + delta) as u64;
        self.spins[site] = -s;
        self.spin_sum -= 2 * s as i64;
        self.revision += 1;
        true
    }

    /// Sets a spin to `value`; no-op on pinned sites.
    pub fn set_spin(&mut self, site: usize, value: i8) -> bool {
        debug_assert!(value == 1 || value == -1);
        if self.spins[site] != value {
            self.flip(site)
        } else {
            false
        }
    }

    /// Global spin flip, including pinned sites.
    pub fn invert(&mut self) {
        for s in &mut self.spins {
            *s = -*s;
        }
        self.spin_sum = -self.spin_sum;
        self.revision += 1;
    }

    /// Monotone counter bumped on every mutation; lets incremental updaters
    /// detect outside changes.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site < self.len() {
            Ok(())
        } else {
            Err(Error::SiteOutOfRange { site, sites: self.len() })
        }
    }
}

fn check_side(side: usize) -> Result<()> {
    if side < 2 {
        return Err(Error::InvalidParameter(format!("side length {side} must be at least 2")));
    }
    if side > 1 << 15 {
        return Err(Error::InvalidParameter(format!("side length {side} too large")));
    }
    Ok(())
}
