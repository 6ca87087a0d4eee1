//! TOML configuration files for [`DenoiseConfig`].
//!
//! Every key is optional. Resolution order, later wins: built-in defaults,
//! noise-level defaults when `noise_sigma` is set, then explicit keys.
//!
//! ```toml
//! noise_sigma = 20.0     # sets delta_th = 120, sigma_d = 40 unless given below
//! delta_th = 50.0
//! sigma_d = 30.0
//! sigma_a = 10.0
//! sigma_b = 10.0
//! gamma_th = 0.85
//! gamma_d = 0.85
//! iterations = 8
//! order = 2
//! cutoff_divisor = 43.0
//! poly_degree = 10
//! grid_points = 256
//! preserve_dc = true
//! coefficients = "refit"  # or "fixed"
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{CoefficientMode, DenoiseConfig};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub noise_sigma: Option<f64>,
    pub delta_th: Option<f64>,
    pub sigma_d: Option<f64>,
    pub sigma_a: Option<f64>,
    pub sigma_b: Option<f64>,
    pub gamma_th: Option<f64>,
    pub gamma_d: Option<f64>,
    pub iterations: Option<usize>,
    pub order: Option<u32>,
    pub cutoff_divisor: Option<f64>,
    pub poly_degree: Option<usize>,
    pub grid_points: Option<usize>,
    pub preserve_dc: Option<bool>,
    pub coefficients: Option<CoefficientMode>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Keys set in `overrides` replace keys in `self`.
    pub fn merged(&self, overrides: &ConfigFile) -> ConfigFile {
        macro_rules! pick {
            ($($field:ident),*) => {
                ConfigFile { $($field: overrides.$field.or(self.$field)),* }
            };
        }
        pick!(
            noise_sigma,
            delta_th,
            sigma_d,
            sigma_a,
            sigma_b,
            gamma_th,
            gamma_d,
            iterations,
            order,
            cutoff_divisor,
            poly_degree,
            grid_points,
            preserve_dc,
            coefficients
        )
    }

    pub fn resolve(&self) -> Result<DenoiseConfig> {
        let mut c = match self.noise_sigma {
            Some(sigma) => DenoiseConfig::for_noise_sigma(sigma).map_err(|e| Error::Config(e.to_string()))?,
            None => DenoiseConfig::default(),
        };
        let p = &mut c.initial_params;
        set(&mut p.delta_th, self.delta_th);
        set(&mut p.sigma_d, self.sigma_d);
        set(&mut p.sigma_a, self.sigma_a);
        set(&mut p.sigma_b, self.sigma_b);
        set(&mut c.gamma_th, self.gamma_th);
        set(&mut c.gamma_d, self.gamma_d);
        set(&mut c.iterations, self.iterations);
        let d = &mut c.filter_design;
        set(&mut d.order, self.order);
        set(&mut d.cutoff_divisor, self.cutoff_divisor);
        set(&mut d.poly_degree, self.poly_degree);
        set(&mut d.grid_points, self.grid_points);
        set(&mut d.preserve_dc, self.preserve_dc);
        set(&mut c.coefficients, self.coefficients);
        c.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(c)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
