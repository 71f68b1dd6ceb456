use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[0, 1]` (Golub–Welsch).
pub fn gauss_legendre(order: usize) -> Result<Vec<(f64, f64)>> {
    if order == 0 || order > 64 {
        return Err(Error::Domain(format!("quadrature order must be in 1..=64, got {order}")));
    }
    let mut jac = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut out: Vec<(f64, f64)> = (0..order)
        .map(|i| {
            let x = eig.eigenvalues[i];
            let w = 2.0 * eig.eigenvectors[(0, i)].powi(2);
            (0.5 * (x + 1.0), 0.5 * w)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// Iterated rule on the ordered simplex `0 ≤ t_1 ≤ … ≤ t_n ≤ t`: each point lists `t_1..t_n`.
pub fn simplex_rule(n: usize, t: f64, order: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    let rule = gauss_legendre(order)?;
    let mut pts = vec![(Vec::new(), 1.0, t)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(pts.len() * order);
        for (times, w, upper) in &pts {
            for &(x, wx) in &rule {
                let s = upper * x;
                let mut ts = vec![s];
                ts.extend_from_slice(times);
                next.push((ts, w * wx * upper, s));
            }
        }
        pts = next;
    }
    Ok(pts.into_iter().map(|(ts, w, _)| (ts, w)).collect())
}
