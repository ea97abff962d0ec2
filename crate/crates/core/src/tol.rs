//! Centrally configured numerical tolerances.
//!
//! All defaults can be scaled globally through the `RETRO_TOL` environment
//! variable (a multiplicative factor applied to every tolerance).

/// Tolerance bundle used across the library.
#[derive(Debug, Clone, Copy)]
pub struct Tol {
    /// Relative Hermiticity tolerance (scaled by the Frobenius norm).
    pub herm: f64,
    /// Relative eigendecomposition reconstruction tolerance.
    pub eig: f64,
    /// Absolute PSD slack for state / POVM validation.
    pub psd: f64,
    /// Absolute trace-normalization tolerance.
    pub trace: f64,
    /// Feasibility slack for causality certificates.
    pub feas: f64,
}

impl Default for Tol {
    fn default() -> Self {
        let scale = std::env::var("RETRO_TOL")
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|s| s.is_finite() && *s > 0.0)
            .unwrap_or(1.0);
        Tol {
            herm: 1e-9 * scale,
            eig: 1e-9 * scale,
            psd: 1e-9 * scale,
            trace: 1e-9 * scale,
            feas: 1e-8 * scale,
        }
    }
}

impl Tol {
    /// Scale every tolerance by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        Tol {
            herm: self.herm * factor,
            eig: self.eig * factor,
            psd: self.psd * factor,
            trace: self.trace * factor,
            feas: self.feas * factor,
        }
    }
}

/// Default capacity limit on embedded tensor-space amplitudes (d^k).
pub const MAX_EMBEDDED_DIM: usize = 1 << 14;
