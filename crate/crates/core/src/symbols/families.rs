use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::counterexamples::sign_matrix;
use crate::error::{bail, Result};
use crate::harmonic::{psi_hat, sigma_from_matrix, PeriodicGrid, Symbol, SymbolMeta};
use crate::numeric::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolFamily {
    PlainCounterexample {
        #[serde(rename = "N")]
        n: usize,
        theta: f64,
    },
    LogTheta {
        theta: f64,
    },
    Loglog {
        theta: f64,
    },
    StrongLog {
        theta: f64,
    },
}

impl SymbolFamily {
    pub fn theta(&self) -> f64 {
        match *self {
            Self::PlainCounterexample { theta, .. }
            | Self::LogTheta { theta }
            | Self::Loglog { theta }
            | Self::StrongLog { theta } => theta,
        }
    }

    /// The profile `w(x)` at `x = |log₂(|ξ|/|η|)|`; `None` for matrix symbols.
    pub fn profile(&self, x: f64) -> Option<f64> {
        let theta = self.theta();
        if x.is_infinite() {
            return Some(0.0);
        }
        Some(match self {
            Self::PlainCounterexample { .. } => return None,
            // (log₂(1+x))^{−θ} joined smoothly to 1 near x = 0.
            Self::LogTheta { .. } => {
                let b = psi_hat(x);
                if b == 1.0 {
                    1.0
                } else {
                    b + (1.0 - b) * (1.0 + x).log2().powf(-theta)
                }
            }
            // The loglog weight as a function of the continuous index, joined
            // to 1 below x₀ = 2 where the outer logarithm is small.
            Self::Loglog { .. } => {
                let b = psi_hat(x / 2.0);
                if b == 1.0 {
                    1.0
                } else {
                    let inner = (x + 2.0).log2().log2().max(1.0);
                    b + (1.0 - b) * (1.0 + x).log2().recip() * inner.powf(-theta)
                }
            }
            Self::StrongLog { .. } => (1.0 + x).powf(-theta),
        })
    }
}

/// Log-ratio coordinate `|log₂(|ξ|/|η|)|`, infinite when exactly one of the
/// frequencies vanishes.
pub fn log_ratio(xi: f64, eta: f64) -> f64 {
    (xi.abs().log2() - eta.abs().log2()).abs()
}

/// Symbols of the Marcinkiewicz-type families. The smooth families vanish
/// when either frequency is zero.
pub fn marcinkiewicz_symbol(family: SymbolFamily, grid: PeriodicGrid) -> Result<Symbol> {
    let theta = family.theta();
    if !(theta > 0.0 && theta.is_finite()) {
        bail!(Argument, "theta must be positive and finite, got {theta}");
    }
    if let SymbolFamily::PlainCounterexample { n, theta } = family {
        let mut s = sigma_from_matrix(&sign_matrix(n, theta)?, grid)?;
        s.meta.provenance = format!("plain_counterexample(N={n}, theta={theta})");
        return Ok(s);
    }
    let name = match family {
        SymbolFamily::LogTheta { .. } => "log_theta",
        SymbolFamily::Loglog { .. } => "loglog",
        _ => "strong_log",
    };
    Ok(Symbol::callable(
        grid,
        Arc::new(move |x, y| {
            if x == 0.0 || y == 0.0 {
                return C64::new(0.0, 0.0);
            }
            C64::new(family.profile(log_ratio(x, y)).unwrap_or(0.0), 0.0)
        }),
        SymbolMeta { provenance: format!("{name}(theta={theta})"), support: "ξ ≠ 0, η ≠ 0".into(), truncated: false },
    ))
}
