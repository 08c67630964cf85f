//! Macroscopic Langevin description of the magnetization.
//!
//! Δm(t) = σ(L, α·|m̄(t)|)·ξ_t with ξ standard normal and m̄ the trailing
//! mean over [`SMOOTHING_WINDOW`](crate::lattice::SMOOTHING_WINDOW) steps.

mod compare;
mod langevin;
mod surface;

pub use compare::{
    compare_micro_macro, compare_with, density_agreement, mixture_density, return_density, return_density_at,
    rolling_volatility, ComparisonPoint, ComparisonReport, DensityAgreement, MixtureDensity,
    AGREEMENT_DECADES, AGREEMENT_MIN_COUNT,
};
pub use langevin::{first_hit_time, langevin_step, run_driven, run_self_driven, MacroRun, MacroState};
pub use surface::{
    fit_surface, isotonic_increasing, ScalingExponents, SurfaceCurve, SurfaceData, VolatilitySurface,
    DISORDERED_BORDER_DENSITY,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceQuery {
    pub sigma: f64,
    /// The query h lay outside the tabulated range and was clamped.
    pub clamped: bool,
    /// Tabulated L the value was derived from.
    pub source_side: usize,
}

/// Anything that assigns a volatility to (L, h).
pub trait VolatilityModel {
    /// Volatility at |h|.
    fn query(&self, side: usize, h: f64) -> SurfaceQuery;

    fn sigma(&self, side: usize, h: f64) -> f64 {
        self.query(side, h).sigma
    }
}

/// σ independent of L and h.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantVolatility(pub f64);

impl VolatilityModel for ConstantVolatility {
    fn query(&self, side: usize, _h: f64) -> SurfaceQuery {
        SurfaceQuery { sigma: self.0, clamped: false, source_side: side }
    }
}
