//! Constant formulas re-evaluated in 256-bit arithmetic.

use mflab::constants::RateParameters;
use mflab::TrigPotential;

use super::hp::{hp, int, Hp};

pub fn c_phi_hp(beta: f64, t: f64, phi: &TrigPotential) -> Hp {
    let mut s = int(0);
    for (k, c) in phi.modes().filter(|(k, _)| *k > 0) {
        // both h = ±k carry |c|/2
        let term = int(k as i64) * hp(c.abs()) * (hp(2.0 * beta) * int(k as i64) * (hp(t.abs()) + 1.0)).exp();
        s = s + term;
    }
    s
}

pub fn beta0_hp(alpha: f64, beta: f64, bp: f64, phi: &TrigPotential) -> Hp {
    let g = |b: &Hp| {
        let s = (b - &hp(beta)) / b.clone();
        let mut cp = int(0);
        for (k, c) in phi.modes().filter(|(k, _)| *k > 0) {
            cp = cp + int(k as i64) * hp(c.abs()) * (hp(2.0 * bp) * int(k as i64) * (s.clone() + 1.0)).exp();
        }
        int(2) * (s.clone() + 1.0) * s * cp * hp(alpha).exp() - (hp(bp) - b.clone())
    };
    let (mut lo, mut hi) = (hp(beta), hp(bp));
    for _ in 0..240 {
        let mid = (&lo + &hi) / int(2);
        if g(&mid).is_positive() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

pub fn x_of_a_hp(a: &Hp) -> Hp {
    int(1) + ((a * a + 4.0).sqrt() - a.clone()) / int(2)
}

pub fn gamma_hp(j: u32, tau: &Hp) -> Hp {
    let l = (int(1) / tau.clone()).ln();
    let a = int(j as i64 + 1) * l.clone();
    let x = x_of_a_hp(&a);
    ((&a * &x + &x * &x) / (x.exp() * l.clone() * l)).exp()
}

pub fn c1_hp(j: u32, tau: &Hp) -> Hp {
    let om = int(1) - tau.clone();
    int(j as i64 + 1) / om.powi(2) + int(2) * tau.clone() / om.powi(3)
}

pub fn c_jtau_hp(j: u32, tau: &Hp) -> Hp {
    (gamma_hp(j, tau) + 1.0) * c1_hp(j, tau) + int(4) / (int(1) - tau.clone())
}

pub fn log_comparison_hp(j: u32, x: &Hp, n: f64) -> Hp {
    let two_pow = |e: Hp| (e * Hp::ln2()).exp();
    (x.clone() + (j as f64 + 1.0)) * Hp::ln2() - two_pow(-(x.clone() + 1.0)) * Hp::ln2() * hp(n).ln()
}

pub fn b_hp(d: u32, hbar: &Hp, j: u32, t: f64, lambda: &Hp) -> Hp {
    int(2 * d as i64) * hbar.clone() * ((lambda * &hp(t)).exp() * int(j as i64) + 1.0)
}

pub fn hbar_star_hp(p: &RateParameters, t: f64) -> Hp {
    let lambda = int(3) + int(4) * hp(p.potential.grad_lipschitz()).powi(2);
    let phi = hp(p.potential.sup_norm());
    let f = |h: &Hp| {
        let x = int(16) * hp(t) * phi.clone() / h.clone();
        let inner = (x.clone() * int(2) + (2.0 * p.j as f64 + 2.0)) * Hp::ln2() - b_hp(p.d, h, p.j, t, &lambda).ln();
        (x * Hp::ln2()).exp() / Hp::ln2() * inner - hp(p.n).ln()
    };
    let (mut lo, mut hi) = (hp(1e-6), hp(1e3));
    assert!(f(&lo).is_positive() && !f(&hi).is_positive());
    for _ in 0..240 {
        let mid = (&lo * &hi).sqrt();
        if f(&mid).is_positive() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn n0_of_j_hp(j: u32) -> u32 {
    (1..)
        .find(|&n| {
            let nn = int(n as i64);
            let lhs = int(2).powi(n as usize) * ((nn.clone() + j as f64).powi(2) / (int(4) * (int(2) * nn).exp()) + int(2) / int(4).powi(n as usize));
            !int(1).lt(&lhs)
        })
        .unwrap()
}
