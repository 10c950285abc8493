//! Compactly supported smooth frequency bumps.

fn smooth_edge(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Radial cutoff: exactly 1 on `|ξ| ≤ 1`, exactly 0 on `|ξ| ≥ 2`, smooth between.
pub fn psi_hat(xi: f64) -> f64 {
    let r = xi.abs();
    if r <= 1.0 {
        return 1.0;
    }
    if r >= 2.0 {
        return 0.0;
    }
    let a = smooth_edge(2.0 - r);
    let b = smooth_edge(r - 1.0);
    a / (a + b)
}

/// `ψ̂(ξ) − ψ̂(2ξ)`, supported in `1/2 ≤ |ξ| ≤ 2`.
pub fn phi_hat(xi: f64) -> f64 {
    psi_hat(xi) - psi_hat(2.0 * xi)
}

/// `φ̂(4ξ) + φ̂(8ξ) + φ̂(16ξ)`: 1 on `1/16 ≤ |ξ| ≤ 1/4`, 0 off `1/32 ≤ |ξ| ≤ 1/2`.
pub fn zeta_hat(xi: f64) -> f64 {
    phi_hat(4.0 * xi) + phi_hat(8.0 * xi) + phi_hat(16.0 * xi)
}

/// `φ̂(2^{−j} ξ)`.
pub fn phi_hat_j(j: i32, xi: f64) -> f64 {
    phi_hat(xi * 2f64.powi(-j))
}

/// `ψ̂(2^{−j} ξ)`.
pub fn psi_hat_j(j: i32, xi: f64) -> f64 {
    psi_hat(xi * 2f64.powi(-j))
}

/// The three bump evaluators bundled together.
#[derive(Clone, Copy, Debug, Default)]
pub struct BumpKit;

impl BumpKit {
    pub fn psi(&self, xi: f64) -> f64 {
        psi_hat(xi)
    }

    pub fn phi(&self, xi: f64) -> f64 {
        phi_hat(xi)
    }

    pub fn zeta(&self, xi: f64) -> f64 {
        zeta_hat(xi)
    }
}

pub fn make_bumps() -> BumpKit {
    BumpKit
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateaus() {
        assert_eq!(psi_hat(0.5), 1.0);
        assert_eq!(psi_hat(3.0), 0.0);
        assert_eq!(phi_hat(1.0), 1.0);
        for i in 0..=200 {
            let r = 1.0 + i as f64 / 200.0;
            let v = psi_hat(r);
            assert!((0.0..=1.0).contains(&v));
            assert_eq!(psi_hat(-r), v);
        }
        assert!((psi_hat(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn telescoping() {
        for xi in [1.3, -0.07, 5.5, 100.0] {
            let s: f64 = (-12..=12).map(|j| phi_hat_j(j, xi)).sum();
            assert!((s - 1.0).abs() < 1e-14, "{xi}: {s}");
        }
    }

    #[test]
    fn supports() {
        for i in 0..4000 {
            let x = i as f64 / 1000.0;
            if !(0.5..=2.0).contains(&x) {
                assert_eq!(phi_hat(x), 0.0);
            }
            if (1.0 / 16.0..=0.25).contains(&x) {
                assert!((zeta_hat(x) - 1.0).abs() < 1e-15);
            }
            if !(1.0 / 32.0..=0.5).contains(&x) {
                assert_eq!(zeta_hat(x), 0.0);
            }
        }
    }
}
