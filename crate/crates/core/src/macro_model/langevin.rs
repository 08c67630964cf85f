use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::VolatilityModel;
use crate::lattice::{SeriesRecord, TrailingMean, SMOOTHING_WINDOW};
use crate::rng;

#[derive(Debug, Clone)]
pub struct MacroState {
    pub m: f64,
    pub t: u64,
    window: TrailingMean,
}

impl MacroState {
    pub fn new(m0: f64) -> Self {
        Self::with_window(m0, SMOOTHING_WINDOW)
    }

    pub fn with_window(m0: f64, window: usize) -> Self {
        let mut w = TrailingMean::new(window);
        w.push(m0);
        MacroState { m: m0, t: 0, window: w }
    }

    /// Trailing mean of the m history.
    pub fn m_bar(&self) -> f64 {
        self.window.mean()
    }
}

/// Folds x back into [−1, 1] by reflection at the edges.
fn reflect(mut x: f64) -> f64 {
    while !(-1.0..=1.0).contains(&x) {
        x = if x > 1.0 { 2.0 - x } else { -2.0 - x };
    }
    x
}

/// Advances the state by Δm = σ(L, α·|m̄|)·ξ. Returns the step record and
/// whether the volatility lookup had to be clamped.
pub fn langevin_step<V, R>(
    state: &mut MacroState,
    model: &V,
    alpha: f64,
    side: usize,
    rng: &mut R,
) -> (SeriesRecord, bool)
where
    V: VolatilityModel + ?Sized,
    R: Rng + ?Sized,
{
    let q = model.query(side, alpha * state.m_bar().abs());
    let xi: f64 = rng.sample(StandardNormal);
    let before = state.m;
    state.m = reflect(state.m + q.sigma * xi);
    state.t += 1;
    let m_bar = state.window.push(state.m);
    let record = SeriesRecord {
        t: state.t,
        m: state.m,
        dm: state.m - before,
        lb: None,
        h_smoothed: alpha * m_bar,
    };
    (record, q.clamped)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroRun {
    pub records: Vec<SeriesRecord>,
    /// Steps whose volatility lookup fell outside the tabulated h range.
    pub clamped_queries: usize,
}

impl MacroRun {
    pub fn dm(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.dm).collect()
    }
}

/// Feedback run: the smoothed macro magnetization sets its own volatility.
pub fn run_self_driven<V: VolatilityModel + ?Sized>(
    model: &V,
    alpha: f64,
    side: usize,
    m0: f64,
    steps: usize,
    seed: u64,
) -> MacroRun {
    let mut rng = rng::stream(seed, 0);
    let mut state = MacroState::new(m0);
    let mut clamped_queries = 0;
    let records = (0..steps)
        .map(|_| {
            let (rec, clamped) = langevin_step(&mut state, model, alpha, side, &mut rng);
            clamped_queries += clamped as usize;
            rec
        })
        .collect();
    MacroRun { records, clamped_queries }
}

/// Open-loop run: Δm(t) = σ(L, |h̄(t)|)·ξ_t for an externally supplied
/// smoothed field, typically recorded from a microscopic run. m is the
/// running sum of Δm from zero.
pub fn run_driven<V: VolatilityModel + ?Sized>(
    h_series: &[f64],
    model: &V,
    side: usize,
    seed: u64,
) -> MacroRun {
    let mut rng = rng::stream(seed, 0);
    let mut m = 0.0;
    let mut clamped_queries = 0;
    let records = h_series
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let q = model.query(side, h);
            clamped_queries += q.clamped as usize;
            let xi: f64 = rng.sample(StandardNormal);
            let dm = q.sigma * xi;
            m += dm;
            SeriesRecord { t: i as u64 + 1, m, dm, lb: None, h_smoothed: h }
        })
        .collect();
    MacroRun { records, clamped_queries }
}

/// Steps of a self-driven run from m = 0 until |m̄| ≥ m_crit, or `None`
/// if that does not happen within `max_steps`.
pub fn first_hit_time<V: VolatilityModel + ?Sized>(
    model: &V,
    alpha: f64,
    side: usize,
    m_crit: f64,
    max_steps: u64,
    seed: u64,
) -> Option<u64> {
    let mut rng = rng::stream(seed, 0);
    let mut state = MacroState::new(0.0);
    while state.t < max_steps {
        langevin_step(&mut state, model, alpha, side, &mut rng);
        if state.m_bar().abs() >= m_crit {
            return Some(state.t);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::macro_model::ConstantVolatility;
    use crate::stats;

    #[test]
    fn zero_volatility_keeps_m_constant() {
        let run = run_self_driven(&ConstantVolatility(0.0), 20.0, 128, 0.3, 200, 1);
        assert!(run.records.iter().all(|r| r.m == 0.3 && r.dm == 0.0));
    }

    #[test]
    fn window_mean_matches_history() {
        let model = ConstantVolatility(0.05);
        let mut rng = rng::stream(2, 0);
        let mut state = MacroState::new(0.0);
        let mut history = vec![0.0];
        for _ in 0..100 {
            langevin_step(&mut state, &model, 1.0, 8, &mut rng);
            history.push(state.m);
            let tail = &history[history.len().saturating_sub(SMOOTHING_WINDOW)..];
            assert!((state.m_bar() - stats::mean(tail)).abs() < 1e-12);
        }
    }

    #[test]
    fn reflection_stays_in_bounds() {
        assert_eq!(reflect(1.25), 0.75);
        assert_eq!(reflect(-1.5), -0.5);
        assert_eq!(reflect(3.5), -0.5);
        let run = run_self_driven(&ConstantVolatility(0.7), 1.0, 8, 0.9, 5000, 3);
        assert!(run.records.iter().all(|r| r.m.abs() <= 1.0));
    }

    #[test]
    fn unconditional_steps_are_gaussian_with_model_sigma() {
        let run = run_self_driven(&ConstantVolatility(1e-3), 20.0, 128, 0.0, 50_000, 4);
        let dm = run.dm();
        assert!((stats::std_dev(&dm) / 1e-3 - 1.0).abs() < 0.02);
        assert!((stats::kurtosis(&dm) - 3.0).abs() < 0.15);
    }

    #[test]
    fn driven_run_follows_the_field() {
        assert!(run_driven(&[], &ConstantVolatility(1.0), 8, 0).records.is_empty());
        let run = run_driven(&[0.5; 1000], &ConstantVolatility(0.01), 8, 5);
        assert_eq!(run.records.len(), 1000);
        let last = run.records.last().unwrap();
        let sum: f64 = run.dm().iter().sum();
        assert!((last.m - sum).abs() < 1e-12);
        assert!(run.records.iter().all(|r| r.h_smoothed == 0.5));
    }

    #[test]
    fn first_hit_needs_distance_over_sigma_squared_steps() {
        let mean_hit = |sigma: f64| {
            let times: Vec<f64> = (0..200)
                .map(|s| first_hit_time(&ConstantVolatility(sigma), 1.0, 8, 0.1, 10_000_000, s).unwrap() as f64)
                .collect();
            stats::mean(&times)
        };
        let ratio = mean_hit(0.005) / mean_hit(0.01);
        assert!((ratio / 4.0 - 1.0).abs() < 0.25, "ratio {ratio}");
    }
}
