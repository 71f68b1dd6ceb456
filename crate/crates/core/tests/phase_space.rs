mod common;

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use mflab::phase_space::*;
use mflab::C64;
use proptest::prelude::*;
use rand::Rng;

fn gaussian_grid() -> PhaseGrid {
    PhaseGrid::new(1, 128, 48.0, 24.0).unwrap()
}

fn standard_gaussian(g: PhaseGrid, a: f64) -> PhaseFunction {
    let c = 0.5 * g.period;
    PhaseFunction::from_fn(g, |x, v| (-((x[0] - c - a).powi(2) + v[0] * v[0]) / 2.0).exp() / (2.0 * PI)).unwrap()
}

#[test]
fn gaussian_transform_matches_direct_quadrature() {
    let g = gaussian_grid();
    let f = standard_gaussian(g, 0.0);
    let ft = symplectic_fourier(&f);
    let c = 0.5 * g.period;
    let modes = [(0, 0), (1, 0), (0, 1), (3, -2), (-4, 5), (7, 7), (-9, 2), (12, -1), (2, 14), (-15, -15)];
    for (mx, mv) in modes {
        let (xi, eta) = (g.xi(mx), g.eta(mv));
        let mut direct = C64::new(0.0, 0.0);
        for (i, val) in f.values.iter().enumerate() {
            let (a, b) = (i / g.n(), i % g.n());
            direct += C64::from_polar(*val, g.x(a) * xi - g.v(b) * eta);
        }
        direct *= g.cell_volume();
        let got = ft.get(&[mx, mv]);
        assert!((got - direct).norm() < 1e-12, "mode ({mx},{mv})");
        let exact = C64::from_polar((-(xi * xi + eta * eta) / 2.0).exp(), c * xi);
        assert!((got - exact).norm() < 1e-12, "mode ({mx},{mv}) vs analytic");
    }
    assert_abs_diff_eq!(ft.get(&[0, 0]).re, 1.0, epsilon = 1e-12);
}

#[test]
fn shift_multiplies_by_phase() {
    let g = gaussian_grid();
    let a = 3.0 * g.dx();
    let f0 = symplectic_fourier(&standard_gaussian(g, 0.0));
    let f1 = symplectic_fourier(&standard_gaussian(g, a));
    for &m in &[1i64, -3, 7] {
        let want = f0.get(&[m, 2]) * C64::from_polar(1.0, a * g.xi(m));
        assert!((f1.get(&[m, 2]) - want).norm() < 1e-13);
    }
}

#[test]
fn beta_norm_of_standard_gaussian() {
    let g = gaussian_grid();
    let ft = symplectic_fourier(&standard_gaussian(g, 0.0));
    let rho = 0.5;
    let got = beta_norm(&ft, rho).unwrap();
    // per-axis maximizer of e^{ρs − s²/2} is s = ρ; the grid sup picks the nearest modes
    let axis = |step: f64| {
        let m = (rho / step).floor();
        [m, m + 1.0].iter().map(|&k| (rho * k * step - (k * step).powi(2) / 2.0).exp()).fold(0.0, f64::max)
    };
    let oracle = axis(g.xi(1)) * axis(g.eta(1));
    assert_abs_diff_eq!(got, oracle, epsilon = 1e-12);
    assert!(got <= (rho * rho).exp() && got > (rho * rho).exp() * 0.99);
    assert_abs_diff_eq!(beta_norm(&ft, 0.0).unwrap(), 1.0, epsilon = 1e-12);
}

#[test]
fn boundary_maximizer_is_flagged() {
    let g = PhaseGrid::new(1, 8, 2.0 * PI, 4.0).unwrap();
    let mut f = FourierPhaseFunction::zeros(g);
    f.coefficients[0] = C64::new(1.0, 0.0);
    let edge = g.fourier_index(&[3, 0]).unwrap();
    f.coefficients[edge] = C64::new(0.5, 0.0);
    assert!(matches!(beta_norm(&f, 1.0), Err(mflab::Error::UnresolvedNorm { .. })));
    assert!(beta_norm(&f, 0.0).is_ok());
}

#[test]
fn sequence_norm_weights() {
    let g = gaussian_grid();
    let f = symplectic_fourier(&standard_gaussian(g, 0.0));
    let ff = f.tensor(&f).unwrap();
    let s = sequence_norm(&[f.clone(), ff], 0.3, 0.0).unwrap();
    assert_abs_diff_eq!(s, (-0.3f64).exp() + (-0.6f64).exp(), epsilon = 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn symplectic_roundtrip(vals in proptest::collection::vec(-1.0f64..1.0, 256), stagger in any::<bool>()) {
        let mut g = PhaseGrid::lattice(1, 16, 0.7).unwrap();
        g.stagger = stagger;
        let f = PhaseFunction::new(g, vals).unwrap();
        let back = inverse_symplectic_fourier(&symplectic_fourier(&f));
        for (a, b) in back.values.iter().zip(&f.values) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn real_functions_are_conjugate_symmetric(vals in proptest::collection::vec(-1.0f64..1.0, 4096)) {
        let g = PhaseGrid::new(2, 8, 2.0 * PI, 3.0).unwrap();
        let ft = symplectic_fourier(&PhaseFunction::new(g, vals).unwrap());
        prop_assert!(ft.conjugate_symmetry_defect() < 1e-12);
    }
}

#[test]
fn coherent_wigner_matches_quadrature_of_kernel() {
    let (n, hbar) = (64, 0.2);
    let z = CoherentPoint::new(2.5, 0.6, hbar);
    let d = DensityOperator::coherent(z, n);
    let ft = wigner_fourier(&d).unwrap();
    let g = ft.grid;
    // analytic periodized packet, used as the kernel ψ(x)ψ*(y)
    let psi = |x: f64| -> C64 {
        (-6..=6)
            .map(|w| {
                let y = x - z.q + 2.0 * PI * w as f64;
                C64::from_polar((-y * y / (2.0 * hbar)).exp(), z.p * y / hbar)
            })
            .sum::<C64>()
            / (PI * hbar).powf(0.25)
    };
    let m = 4096;
    for (mx, mv) in [(0i64, 0i64), (1, 0), (0, 3), (-2, 5), (4, -7), (-6, -2)] {
        let (xi, eta) = (g.xi(mx), g.eta(mv));
        let mut q = C64::new(0.0, 0.0);
        for i in 0..m {
            let x = 2.0 * PI * i as f64 / m as f64;
            q += C64::from_polar(1.0, x * xi) * psi(x - hbar * eta / 2.0) * psi(x + hbar * eta / 2.0).conj();
        }
        q *= 2.0 * PI / m as f64;
        assert!((ft.get(&[mx, mv]) - q).norm() < 1e-10, "mode ({mx},{mv}): {} vs {}", ft.get(&[mx, mv]), q);
        let closed = C64::from_polar((-hbar * (xi * xi + eta * eta) / 4.0).exp(), z.q * xi - z.p * eta);
        assert!((q - closed).norm() < 1e-10);
    }
}

#[test]
fn trace_identity_and_roundtrip_on_random_operators() {
    let mut r = common::rng(11);
    for case in 0..20 {
        let hbar = r.random_range(0.3..1.5);
        let d = common::random_mixture(&mut r, 32, 6, 3, hbar);
        let w = wigner_transform(&d).unwrap();
        assert_abs_diff_eq!(w.integral(), d.trace().re, epsilon = 1e-10);
        let dense = d.to_dense().unwrap();
        let back = inverse_wigner(&w, hbar).unwrap().to_dense().unwrap();
        let err = dense.data.iter().zip(&back.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "case {case}: {err}");
        let ft = wigner_fourier(&d).unwrap();
        assert!(beta_norm(&ft, 0.2).map(|v| v >= 1.0 - 1e-9).unwrap_or(true));
        assert!(weighted_sup(&ft, 0.2).0 >= 1.0 - 1e-9);
    }
}

#[test]
fn dense_and_ensemble_wigner_agree() {
    let mut r = common::rng(5);
    let d = common::random_pair_ensemble(&mut r, 16, 3, 2, 0.8);
    let a = wigner_fourier(&d).unwrap();
    let b = wigner_fourier(&DensityOperator::dense(d.to_dense().unwrap(), 0.8)).unwrap();
    assert!(a.max_abs_diff(&b) < 1e-12);
}

#[test]
fn pairing_identity_for_coherent_projectors() {
    let (n, hbar) = (64, 0.3);
    let z1 = CoherentPoint::new(2.0, 0.3, hbar);
    let z2 = CoherentPoint::new(2.4, -0.2, hbar);
    let w1 = wigner_transform(&DensityOperator::coherent(z1, n)).unwrap();
    let w2 = wigner_transform(&DensityOperator::coherent(z2, n)).unwrap();
    let pairing: f64 = w1.values.iter().zip(&w2.values).map(|(a, b)| a * b).sum::<f64>() * w1.grid.cell_volume();
    let overlap = (-((z1.q - z2.q).powi(2) + (z1.p - z2.p).powi(2)) / (2.0 * hbar)).exp();
    assert_abs_diff_eq!(2.0 * PI * hbar * pairing, overlap, epsilon = 1e-10);
}

#[test]
fn unresolved_kernel_is_rejected() {
    let n = 16;
    let mut r = common::rng(2);
    let psi: Vec<C64> = (0..n).map(|_| C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect();
    let mut k = DenseKernel::zeros(1, n);
    k.add_pure(1.0, &psi);
    let d = DensityOperator::dense(k, 1.0);
    assert!(matches!(wigner_fourier(&d), Err(mflab::Error::Resolution(_))));
}

#[test]
fn coherent_husimi_matches_overlap_formula() {
    let (n, hbar) = (64, 0.2);
    let z = CoherentPoint::new(PI, 0.4, hbar);
    let h = husimi(&DensityOperator::coherent(z, n)).unwrap();
    let g = h.grid;
    for (i, val) in h.values.iter().enumerate() {
        let (a, b) = (i / n, i % n);
        assert!((val - z.husimi(g.x(a), g.v(b))).abs() < 1e-10);
    }
}

#[test]
fn husimi_is_mollified_wigner() {
    let mut r = common::rng(3);
    for _ in 0..10 {
        // grid-normalized torus coherent states differ from the heat kernel by O(e^{-π²/ħ})
        let hbar = r.random_range(0.25..0.45);
        let d = common::random_mixture(&mut r, 32, 5, 3, hbar);
        let h = husimi_direct(&d).unwrap();
        let m = heat_mollified_wigner(&d, hbar / 4.0).unwrap();
        let err = h.values.iter().zip(&m.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        assert!(h.min() >= -1e-12);
        assert_abs_diff_eq!(h.integral(), 1.0, epsilon = 1e-9);
    }
}

fn gaussian_symbol(g: PhaseGrid, q: f64, p: f64, sx: f64, sv: f64) -> PhaseFunction {
    PhaseFunction::from_fn(g, |x, v| {
        (-(x[0] - q).powi(2) / (2.0 * sx * sx) - (v[0] - p).powi(2) / (2.0 * sv * sv)).exp() / (2.0 * PI * sx * sv)
    })
    .unwrap()
}

#[test]
fn toeplitz_of_lebesgue_is_identity() {
    for &(n, hbar) in &[(16usize, 1.0), (32, 0.4)] {
        let g = PhaseGrid::lattice(1, n, hbar).unwrap().unstaggered();
        let one = PhaseFunction::from_fn(g, |_, _| 1.0).unwrap();
        let d = toeplitz_quantize(&one, hbar).unwrap();
        let k = d.to_dense().unwrap();
        let dx = 2.0 * PI / n as f64;
        for a in 0..n {
            for b in 0..n {
                let want = if a == b { 1.0 / dx } else { 0.0 };
                assert!((k.get(a, b) - want).norm() * dx < 1e-8);
            }
        }
    }
}

#[test]
fn toeplitz_of_point_mass_is_coherent_projector() {
    let (n, hbar) = (32, 0.5);
    let z = CoherentPoint::new(PI, 1.0, hbar);
    let d = toeplitz_point_masses(&[(z.q, z.p, 1.0)], hbar, n).unwrap();
    let psi = z.state(n);
    let mut want = DenseKernel::zeros(1, n);
    want.add_pure(1.0, &psi);
    assert_eq!(d.to_dense().unwrap(), want);
}

#[test]
fn toeplitz_mollification_identities() {
    let mut r = common::rng(7);
    let n = 64;
    for case in 0..20 {
        let hbar = r.random_range(0.2..0.3);
        let (q, p) = (PI + r.random_range(-0.3..0.3), r.random_range(-0.3..0.3));
        let (sx, sv) = (r.random_range(0.35..0.5), r.random_range(0.35..0.5));
        let g = PhaseGrid::lattice(1, n, hbar).unwrap().unstaggered();
        let mu = gaussian_symbol(g, q, p, sx, sv);
        let d = toeplitz_quantize(&mu, hbar).unwrap();
        let k = d.to_dense().unwrap();
        assert!(k.hermiticity_defect() < 1e-12);
        assert_abs_diff_eq!(d.trace().re * 2.0 * PI * hbar, mu.integral(), epsilon = 1e-9);
        assert!(eigenvalues(&k)[0] > -1e-12);
        // Fourier side of W[OP(μ)] against (2πħ)^{-1} e^{−ħ|ζ|²/4} μ̃
        let ft = wigner_fourier(&d).unwrap();
        let wg = ft.grid;
        let mut worst: f64 = 0.0;
        for mx in -6i64..=6 {
            for mv in -6i64..=6 {
                let (xi, eta) = (wg.xi(mx), wg.eta(mv));
                let mu_t = C64::from_polar((-(sx * sx * xi * xi + sv * sv * eta * eta) / 2.0).exp(), q * xi - p * eta);
                let want = mu_t * (-hbar * (xi * xi + eta * eta) / 4.0).exp() / (2.0 * PI * hbar);
                worst = worst.max((ft.get(&[mx, mv]) - want).norm() * 2.0 * PI * hbar);
            }
        }
        assert!(worst < 1e-6, "case {case}: {worst}");
        // Husimi against (2πħ)^{-1} e^{ħΔ/2} μ
        let h = husimi(&d).unwrap();
        // the torus Husimi is periodic in x, so the oracle sums the x-images
        let (tx, tv) = ((sx * sx + hbar).sqrt(), (sv * sv + hbar).sqrt());
        let images: Vec<PhaseFunction> = (-2..=2).map(|w| gaussian_symbol(g, q + 2.0 * PI * w as f64, p, tx, tv)).collect();
        let smooth: Vec<f64> = (0..g.len()).map(|i| images.iter().map(|f| f.values[i]).sum()).collect();
        let err = h.values.iter().zip(&smooth).map(|(a, b)| (a * 2.0 * PI * hbar - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "case {case}: husimi {err}");
    }
}

#[test]
fn negative_symbol_is_rejected() {
    let g = PhaseGrid::lattice(1, 8, 1.0).unwrap().unstaggered();
    let mu = PhaseFunction::from_fn(g, |x, _| x[0] - 1.0).unwrap();
    assert!(matches!(toeplitz_quantize(&mu, 1.0), Err(mflab::Error::Domain(_))));
}

#[test]
fn husimi_nonnegative_for_random_toeplitz_symbols() {
    let mut r = common::rng(13);
    let n = 16;
    for _ in 0..100 {
        let hbar = r.random_range(0.5..1.5);
        let pts: Vec<(f64, f64, f64)> = (0..4)
            .map(|_| (r.random_range(0.0..2.0 * PI), r.random_range(-2.0..2.0), r.random_range(0.0..1.0)))
            .collect();
        let tot: f64 = pts.iter().map(|p| p.2).sum();
        let pts: Vec<_> = pts.into_iter().map(|(a, b, w)| (a, b, w / tot)).collect();
        let d = toeplitz_point_masses(&pts, hbar, n).unwrap();
        assert!(husimi(&d).unwrap().min() >= -1e-12);
    }
}

#[test]
fn marginals_and_partial_traces() {
    let mut r = common::rng(17);
    let hbar = 0.9;
    let d2 = common::random_pair_ensemble(&mut r, 16, 3, 3, hbar);
    let w2 = wigner_fourier(&d2).unwrap();
    let via_w = fourier_marginal(&w2, 1).unwrap();
    let via_tr = wigner_fourier(&partial_trace(&d2, 1).unwrap()).unwrap();
    assert!(via_w.max_abs_diff(&via_tr) < 1e-9);
    let dense = DensityOperator::dense(d2.to_dense().unwrap(), hbar);
    let via_dense = wigner_fourier(&partial_trace(&dense, 1).unwrap()).unwrap();
    assert!(via_dense.max_abs_diff(&via_tr) < 1e-9);
    // physical-space marginal agrees and preserves mass
    let phys = wigner_transform(&d2).unwrap();
    let m1 = marginal(&phys, 1).unwrap();
    assert_abs_diff_eq!(m1.integral(), phys.integral(), epsilon = 1e-10);
    let w1 = inverse_symplectic_fourier(&via_tr);
    let err = m1.values.iter().zip(&w1.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-9);
    // factorized marginal
    let w = wigner_fourier(&common::random_mixture(&mut r, 16, 3, 2, hbar)).unwrap();
    let ww = w.tensor(&w).unwrap();
    assert!(fourier_marginal(&ww, 1).unwrap().max_abs_diff(&w) < 1e-12);
    assert!(marginal(&phys, 3).is_err());
}

#[test]
fn partial_trace_of_coherent_product() {
    let n = 16;
    let (a, b) = (CoherentPoint::new(1.0, 0.5, 1.0), CoherentPoint::new(4.0, -1.0, 1.0));
    let m = ProductMember { weight: 1.0, factors: vec![a.state(n), b.state(n)] };
    let d = DensityOperator::dense(DensityOperator::ensemble(2, n, vec![m], 1.0).unwrap().to_dense().unwrap(), 1.0);
    let p = partial_trace(&d, 1).unwrap().to_dense().unwrap();
    let want = DensityOperator::coherent(a, n).to_dense().unwrap();
    let err = p.data.iter().zip(&want.data).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    assert!(err < 1e-12);
}

#[test]
fn trace_norm_properties() {
    let mut r = common::rng(19);
    let d = common::random_mixture(&mut r, 16, 4, 3, 1.0);
    assert_abs_diff_eq!(trace_norm(&d.to_dense().unwrap()).unwrap(), 1.0, epsilon = 1e-10);
    for _ in 0..5 {
        let k = common::random_hermitian(&mut r, 2, 8, 4);
        let full = trace_norm(&k).unwrap();
        let reduced = partial_trace(&DensityOperator::dense(k, 1.0), 1).unwrap().to_dense().unwrap();
        assert!(trace_norm(&reduced).unwrap() <= full + 1e-10);
    }
}

#[test]
fn trace_norm_matches_real_embedding_oracle() {
    let mut r = common::rng(23);
    let n = 4;
    let dx = 2.0 * PI / n as f64;
    for _ in 0..10 {
        let mut m = nalgebra::DMatrix::<f64>::zeros(2 * n, 2 * n);
        let mut k = DenseKernel::zeros(1, n);
        for a in 0..n {
            for b in a..n {
                let z = if a == b {
                    C64::new(r.random_range(-1.0..1.0), 0.0)
                } else {
                    C64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
                };
                k.data[a * n + b] = z / dx;
                k.data[b * n + a] = z.conj() / dx;
            }
        }
        for a in 0..n {
            for b in 0..n {
                let z = k.get(a, b) * dx;
                m[(a, b)] = z.re;
                m[(a + n, b + n)] = z.re;
                m[(a, b + n)] = -z.im;
                m[(a + n, b)] = z.im;
            }
        }
        let oracle: f64 = m.symmetric_eigen().eigenvalues.iter().map(|l| l.abs()).sum::<f64>() / 2.0;
        assert_abs_diff_eq!(trace_norm(&k).unwrap(), oracle, epsilon = 1e-10);
    }
}

#[test]
fn husimi_l1_contraction() {
    let mut r = common::rng(29);
    for _ in 0..10 {
        let k = common::random_hermitian(&mut r, 1, 16, 5);
        let tn = trace_norm(&k).unwrap();
        let h = husimi(&DensityOperator::dense(k, 0.8)).unwrap();
        assert!(h.l1_norm() <= tn + 1e-10, "{} > {}", h.l1_norm(), tn);
    }
}

#[test]
fn non_hermitian_kernel_rejected() {
    let mut k = DenseKernel::zeros(1, 4);
    k.data[1] = C64::new(1.0, 0.0);
    assert!(trace_norm(&k).is_err());
}
