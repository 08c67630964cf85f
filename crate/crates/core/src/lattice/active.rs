//! Active-set updater.
//!
//! Only sites with at least one disagreeing neighbor switch with appreciable
//! probability, and there are O(l_b) of them. A naive sweep draws N sites
//! uniformly; the number of draws between two hits of the active set is
//! geometric with success probability |A|/N, so we jump straight to the next
//! hit and update a uniformly chosen active site. Draws landing in the bulk
//! are replaced by an aggregate process: per sweep, each bulk class (own
//! spin ±1, all four neighbors agreeing) yields Binomial(n_class, p_bulk)
//! flip events placed at uniform random positions in the sweep, with
//! p_bulk = 1 − p_u evaluated once per sweep.
//!
//! When borders are dense the sweep is delegated to the naive updater.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::heat_bath::{heat_bath_update, logistic, HeatBathTable};
use super::{FieldMode, NaiveUpdater, SpinLattice};

const NOT_ACTIVE: u32 = u32::MAX;

/// Above l_b > N / DENSE_BORDER_FRACTION a sweep falls back to plain
/// random-sequential updates.
const DENSE_BORDER_FRACTION: usize = 8;

#[derive(Debug, Clone)]
pub struct ActiveSetUpdater {
    table: HeatBathTable,
    naive: NaiveUpdater,
    members: Vec<u32>,
    slot: Vec<u32>,
    active_up: usize,
    pinned_up: usize,
    pinned: usize,
    synced_revision: Option<u64>,
    events: Vec<(u64, i8)>,
}

impl ActiveSetUpdater {
    pub fn new(beta: f64) -> Self {
        ActiveSetUpdater {
            table: HeatBathTable::new(beta),
            naive: NaiveUpdater::new(beta),
            members: Vec::new(),
            slot: Vec::new(),
            active_up: 0,
            pinned_up: 0,
            pinned: 0,
            synced_revision: None,
            events: Vec::new(),
        }
    }

    /// Number of sites currently eligible for regular attempts.
    pub fn active_len(&self) -> usize {
        self.members.len()
    }

    pub fn is_active(&self, site: usize) -> bool {
        self.slot.get(site).is_some_and(|&s| s != NOT_ACTIVE)
    }

    /// Rebuilds the active set from scratch.
    pub fn rebuild(&mut self, lattice: &SpinLattice) {
        let n = lattice.len();
        self.members.clear();
        self.slot.clear();
        self.slot.resize(n, NOT_ACTIVE);
        self.active_up = 0;
        self.pinned_up = 0;
        self.pinned = 0;
        for site in 0..n {
            if lattice.is_pinned(site) {
                self.pinned += 1;
                self.pinned_up += (lattice.spin(site) > 0) as usize;
            } else if wants_active(lattice, site) {
                self.insert(lattice, site);
            }
        }
        self.synced_revision = Some(lattice.revision());
    }

    pub fn sweep<R: Rng + ?Sized>(
        &mut self,
        lattice: &mut SpinLattice,
        field: FieldMode,
        alpha: f64,
        rng: &mut R,
    ) {
        if lattice.border_length() as usize > lattice.len() / DENSE_BORDER_FRACTION {
            // Disordered configuration: most sites are active, so the plain
            // sweep is both exact and cheaper. The set is rebuilt lazily once
            // the borders thin out again.
            self.naive.sweep(lattice, field, alpha, rng);
            self.synced_revision = None;
            return;
        }
        if self.synced_revision != Some(lattice.revision()) || self.slot.len() != lattice.len() {
            self.rebuild(lattice);
        }
        let n = lattice.len() as u64;

        // Aggregate bulk events for this sweep.
        let abs_h = field.magnitude(lattice, alpha);
        // A fully aligned site with spin s has h_i = s(4 − |h|).
        let p_bulk = logistic(-2.0 * self.table.beta() * (4.0 - abs_h));
        let unpinned_up = self.up_count(lattice) - self.pinned_up;
        let unpinned = lattice.len() - self.pinned;
        let bulk_up = unpinned_up - self.active_up;
        let bulk_down = (unpinned - unpinned_up) - (self.members.len() - self.active_up);
        self.events.clear();
        for (count, spin) in [(bulk_up, 1i8), (bulk_down, -1i8)] {
            if count == 0 || p_bulk <= 0.0 {
                continue;
            }
            let k = Binomial::new(count as u64, p_bulk.min(1.0)).unwrap().sample(rng);
            for _ in 0..k {
                self.events.push((rng.random_range(1..=n), spin));
            }
        }
        self.events.sort_unstable();

        let mut drawn = 0u64;
        let mut next_event = 0;
        // ln(1 − |A|/N), refreshed when the set size changes.
        let mut log_miss = (usize::MAX, 0.0f64);
        loop {
            let len = self.members.len();
            let next_hit = if len == 0 {
                u64::MAX
            } else {
                if log_miss.0 != len {
                    log_miss = (len, (-(len as f64) / n as f64).ln_1p());
                }
                // Geometric number of bulk draws before the next active hit.
                let skip = if len as u64 >= n {
                    0
                } else {
                    let u = 1.0 - rng.random::<f64>();
                    (u.ln() / log_miss.1) as u64
                };
                drawn.saturating_add(skip).saturating_add(1)
            };
            if let Some(&(at, spin)) = self.events.get(next_event) {
                if at <= next_hit {
                    // Memorylessness lets us discard the pending geometric
                    // draw and restart from the event position.
                    drawn = drawn.max(at);
                    next_event += 1;
                    self.bulk_flip(lattice, spin, rng);
                    continue;
                }
            }
            if next_hit > n {
                break;
            }
            drawn = next_hit;
            let site = self.members[rng.random_range(0..self.members.len())] as usize;
            let abs_h = field.magnitude(lattice, alpha);
            let was = lattice.spin(site);
            let u: f64 = rng.random();
            if heat_bath_update(lattice, &mut self.table, site, abs_h, u) {
                self.after_flip(lattice, site, was);
            }
        }
        self.synced_revision = Some(lattice.revision());
    }

    fn up_count(&self, lattice: &SpinLattice) -> usize {
        ((lattice.len() as i64 + lattice.spin_sum()) / 2) as usize
    }

    fn bulk_flip<R: Rng + ?Sized>(&mut self, lattice: &mut SpinLattice, spin: i8, rng: &mut R) {
        let n = lattice.len();
        // Rejection sampling; bounded so a vanished class cannot stall the sweep.
        for _ in 0..64 * n {
            let site = rng.random_range(0..n);
            if self.slot[site] == NOT_ACTIVE && !lattice.is_pinned(site) && lattice.spin(site) == spin
            {
                let was = lattice.spin(site);
                if lattice.flip(site) {
                    self.after_flip(lattice, site, was);
                }
                return;
            }
        }
    }

    fn after_flip(&mut self, lattice: &SpinLattice, site: usize, was: i8) {
        if self.slot[site] != NOT_ACTIVE {
            // Member changed spin in place.
            if was > 0 {
                self.active_up -= 1;
            } else {
                self.active_up += 1;
            }
        }
        self.refresh(lattice, site);
        for nb in lattice.neighbors(site) {
            self.refresh(lattice, nb as usize);
        }
    }

    #[inline]
    fn refresh(&mut self, lattice: &SpinLattice, site: usize) {
        if lattice.is_pinned(site) {
            return;
        }
        let want = wants_active(lattice, site);
        let have = self.slot[site] != NOT_ACTIVE;
        if want && !have {
            self.insert(lattice, site);
        } else if !want && have {
            self.remove(lattice, site);
        }
    }

    fn insert(&mut self, lattice: &SpinLattice, site: usize) {
        self.slot[site] = self.members.len() as u32;
        self.members.push(site as u32);
        self.active_up += (lattice.spin(site) > 0) as usize;
    }

    fn remove(&mut self, lattice: &SpinLattice, site: usize) {
        let idx = self.slot[site] as usize;
        let last = *self.members.last().unwrap();
        self.members.swap_remove(idx);
        if last as usize != site {
            self.slot[last as usize] = idx as u32;
        }
        self.slot[site] = NOT_ACTIVE;
        self.active_up -= (lattice.spin(site) > 0) as usize;
    }
}

#[inline]
fn wants_active(lattice: &SpinLattice, site: usize) -> bool {
    let s = lattice.spin(site);
    lattice.neighbors(site).iter().any(|&nb| lattice.spin(nb as usize) != s)
}
