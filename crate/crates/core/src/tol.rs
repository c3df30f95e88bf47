use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every numerical threshold used by the library, threaded explicitly
/// through the operations that need one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceConfig {
    /// Relative size below which a polynomial coefficient is treated as zero.
    pub eps_zero: f64,
    /// Roots closer than `delta_cluster * max(1, |root|)` are merged.
    pub delta_cluster: f64,
    /// Half-width of the band around the unit circle reported as `boundary`.
    pub delta_boundary: f64,
    /// Poles must satisfy `|p| >= 1 + tau_pole` to lie in Rat(D).
    pub tau_pole: f64,
    /// Relative threshold for a derivative to count as nonvanishing.
    pub tau_ord: f64,
    /// `|Gamma_-(a; t) - 1| > tau_unit` for a local component to be a unit.
    pub tau_unit: f64,
    pub eps_bezout: f64,
    /// Witness residual bound, relative to `||s|| + 1`.
    pub eps_witness: f64,
    /// Singular values below this count toward a kernel.
    pub sigma_svd: f64,
    /// Distance within which zeros of `1 - Gamma_+` are paired.
    pub delta_match: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eps_zero: 1e-13,
            delta_cluster: 1e-7,
            delta_boundary: 1e-9,
            tau_pole: 1e-8,
            tau_ord: 1e-7,
            tau_unit: 1e-8,
            eps_bezout: 1e-9,
            eps_witness: 1e-8,
            sigma_svd: 1e-6,
            delta_match: 1e-6,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eps_zero", self.eps_zero),
            ("delta_cluster", self.delta_cluster),
            ("delta_boundary", self.delta_boundary),
            ("tau_pole", self.tau_pole),
            ("tau_ord", self.tau_ord),
            ("tau_unit", self.tau_unit),
            ("eps_bezout", self.eps_bezout),
            ("eps_witness", self.eps_witness),
            ("sigma_svd", self.sigma_svd),
            ("delta_match", self.delta_match),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidTolerance { name, value });
            }
        }
        Ok(())
    }

    /// Cluster radius around `x`.
    pub fn cluster_radius(&self, x: f64) -> f64 {
        self.delta_cluster * x.abs().max(1.0)
    }

    /// Sets a field by name; used by the `--tol-<name>` flags.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name.replace('-', "_").as_str() {
            "eps_zero" => &mut self.eps_zero,
            "delta_cluster" => &mut self.delta_cluster,
            "delta_boundary" => &mut self.delta_boundary,
            "tau_pole" => &mut self.tau_pole,
            "tau_ord" => &mut self.tau_ord,
            "tau_unit" => &mut self.tau_unit,
            "eps_bezout" => &mut self.eps_bezout,
            "eps_witness" => &mut self.eps_witness,
            "sigma_svd" => &mut self.sigma_svd,
            "delta_match" => &mut self.delta_match,
            _ => return Err(Error::UnknownTolerance(name.to_string())),
        };
        *slot = value;
        self.validate()
    }
}
