use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Even real potential `Φ(x) = Σ_k c_k cos(k x)` with finitely many modes.
///
/// Mode `k = 0` is allowed and acts as a constant shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TrigPotential {
    modes: BTreeMap<u32, f64>,
}

impl TrigPotential {
    pub fn new(modes: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (k, c) in modes {
            if !c.is_finite() {
                return Err(Error::Domain(format!("coefficient of mode {k} is not finite")));
            }
            if c != 0.0 {
                *map.entry(k).or_insert(0.0) += c;
            }
        }
        Ok(Self { modes: map })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `c cos(x)`.
    pub fn cosine(c: f64) -> Self {
        Self::new([(1, c)]).expect("finite coefficient")
    }

    pub fn modes(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.modes.iter().map(|(&k, &c)| (k, c))
    }

    /// Modes with `k >= 1`; these are the only ones that produce forces.
    pub fn active_modes(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.modes().filter(|&(k, _)| k > 0)
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn max_mode(&self) -> u32 {
        self.modes.keys().next_back().copied().unwrap_or(0)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.modes().map(|(k, c)| c * (k as f64 * x).cos()).sum()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.modes().map(|(k, c)| -c * k as f64 * (k as f64 * x).sin()).sum()
    }

    /// Fourier weight `Φ̂(h)` for integer `h`, so that `Φ(x) = Σ_h Φ̂(h) e^{ihx}`.
    pub fn fourier_weight(&self, h: i64) -> f64 {
        let k = h.unsigned_abs() as u32;
        let c = self.modes.get(&k).copied().unwrap_or(0.0);
        if h == 0 {
            c
        } else {
            0.5 * c
        }
    }

    /// Nonzero `(h, Φ̂(h))` pairs with `h != 0`, ordered by `h`.
    pub fn fourier_pairs(&self) -> Vec<(i64, f64)> {
        let mut out = Vec::new();
        for (k, c) in self.active_modes().collect::<Vec<_>>().into_iter().rev() {
            out.push((-(k as i64), 0.5 * c));
        }
        for (k, c) in self.active_modes() {
            out.push((k as i64, 0.5 * c));
        }
        out
    }

    /// `‖Φ‖_∞` bound `Σ|c_k|`.
    pub fn sup_norm(&self) -> f64 {
        self.modes().map(|(_, c)| c.abs()).sum()
    }

    /// `‖∇Φ‖_∞` bound `Σ k|c_k|`.
    pub fn grad_sup(&self) -> f64 {
        self.modes().map(|(k, c)| k as f64 * c.abs()).sum()
    }

    /// `Lip(∇Φ)` bound `Σ k²|c_k|`.
    pub fn grad_lipschitz(&self) -> f64 {
        self.modes().map(|(k, c)| (k as f64).powi(2) * c.abs()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_and_bounds() {
        let p = TrigPotential::new([(1, 0.1), (3, -0.2)]).unwrap();
        assert_eq!(p.fourier_weight(-3), -0.1);
        assert_eq!(p.fourier_weight(2), 0.0);
        assert!((p.sup_norm() - 0.3).abs() < 1e-15);
        assert!((p.grad_sup() - 0.7).abs() < 1e-15);
        assert!((p.grad_lipschitz() - 1.9).abs() < 1e-15);
        let pairs = p.fourier_pairs();
        assert_eq!(pairs.iter().map(|x| x.0).collect::<Vec<_>>(), vec![-3, -1, 1, 3]);
        let x = 0.37;
        let s: f64 = pairs.iter().map(|&(h, w)| w * (h as f64 * x).cos()).sum();
        assert!((s - p.value(x)).abs() < 1e-14);
    }

    #[test]
    fn bounds_dominate_samples() {
        let p = TrigPotential::new([(1, 0.4), (2, 0.3), (5, -0.1)]).unwrap();
        for i in 0..1000 {
            let x = i as f64 * 0.00628;
            assert!(p.value(x).abs() <= p.sup_norm() + 1e-15);
            assert!(p.derivative(x).abs() <= p.grad_sup() + 1e-15);
        }
    }
}
