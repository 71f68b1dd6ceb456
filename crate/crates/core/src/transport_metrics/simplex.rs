//! Transportation simplex (MODI potentials on the basis spanning tree).

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Optimal plan of a balanced transportation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    pub value: f64,
    /// Basic cells `(i, j, mass)`; zero-mass cells may appear (degenerate basis).
    pub plan: Vec<(usize, usize, f64)>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub iterations: usize,
}

impl TransportSolution {
    pub fn dual_value(&self, supply: &[f64], demand: &[f64]) -> f64 {
        supply.iter().zip(&self.u).map(|(a, b)| a * b).sum::<f64>()
            + demand.iter().zip(&self.v).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn dense_plan(&self, m: usize, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; m * n];
        for &(i, j, x) in &self.plan {
            out[i * n + j] += x;
        }
        out
    }
}

struct Tree {
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
}

/// Minimizes `Σ c_ij π_ij` over couplings of `supply` (rows) and `demand` (columns).
pub fn solve_transport(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<TransportSolution> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 || cost.len() != m * n {
        return Err(Error::Domain("empty or mismatched transportation problem".into()));
    }
    let (ss, sd): (f64, f64) = (supply.iter().sum(), demand.iter().sum());
    if (ss - sd).abs() > 1e-12 * ss.max(1.0) {
        return Err(Error::Domain(format!("unbalanced masses {ss} vs {sd}")));
    }
    let scale = cost.iter().fold(0.0f64, |a, c| a.max(c.abs())).max(1.0);
    let tol = 1e-13 * scale;

    // northwest corner basis with exactly m + n − 1 cells
    let mut basis: Vec<(usize, usize, f64)> = Vec::with_capacity(m + n - 1);
    let (mut s, mut d) = (supply.to_vec(), demand.to_vec());
    let (mut i, mut j) = (0, 0);
    loop {
        let x = s[i].min(d[j]);
        basis.push((i, j, x));
        s[i] -= x;
        d[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if i == m - 1 {
            j += 1;
        } else if j == n - 1 {
            i += 1;
        } else if s[i] <= d[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    debug_assert_eq!(basis.len(), m + n - 1);

    let nodes = m + n;
    let mut iterations = 0;
    let mut degenerate_run = 0usize;
    loop {
        iterations += 1;
        if iterations > 50 * (m * n + 10) {
            return Err(Error::Internal("transportation simplex did not converge".into()));
        }
        // potentials and rooted tree from row node 0
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
        for (e, &(i, j, _)) in basis.iter().enumerate() {
            adj[i].push((m + j, e));
            adj[m + j].push((i, e));
        }
        let mut u = vec![0.0; m];
        let mut v = vec![0.0; n];
        let mut tree = Tree { parent: vec![None; nodes], depth: vec![0; nodes] };
        let mut seen = vec![false; nodes];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(a) = queue.pop_front() {
            for &(b, e) in &adj[a] {
                if seen[b] {
                    continue;
                }
                seen[b] = true;
                let (bi, bj, _) = basis[e];
                if b >= m {
                    v[b - m] = cost[bi * n + bj] - u[bi];
                } else {
                    u[b] = cost[bi * n + bj] - v[bj];
                }
                tree.parent[b] = Some((a, e));
                tree.depth[b] = tree.depth[a] + 1;
                queue.push_back(b);
            }
        }
        if seen.iter().any(|x| !x) {
            return Err(Error::Internal("basis is not a spanning tree".into()));
        }
        // entering cell: Dantzig, or Bland after a long degenerate run
        let bland = degenerate_run > 2 * nodes;
        let mut enter: Option<(usize, usize)> = None;
        let mut best = -tol;
        'scan: for i in 0..m {
            for j in 0..n {
                let r = cost[i * n + j] - u[i] - v[j];
                if r < best {
                    enter = Some((i, j));
                    if bland {
                        break 'scan;
                    }
                    best = r;
                }
            }
        }
        let Some((ei, ej)) = enter else {
            let value = basis.iter().map(|&(i, j, x)| x * cost[i * n + j]).sum();
            return Ok(TransportSolution { value, plan: basis, u, v, iterations });
        };
        // cycle: tree path from column node to row node, closed by the entering edge
        let (mut a, mut b) = (m + ej, ei);
        let mut from_a = Vec::new();
        let mut from_b = Vec::new();
        while tree.depth[a] > tree.depth[b] {
            let (p, e) = tree.parent[a].unwrap();
            from_a.push(e);
            a = p;
        }
        while tree.depth[b] > tree.depth[a] {
            let (p, e) = tree.parent[b].unwrap();
            from_b.push(e);
            b = p;
        }
        while a != b {
            let (pa, ea) = tree.parent[a].unwrap();
            let (pb, eb) = tree.parent[b].unwrap();
            from_a.push(ea);
            from_b.push(eb);
            a = pa;
            b = pb;
        }
        // walking from column ej back to row ei: edges alternate −, +, −, ...
        let mut path = from_a;
        path.extend(from_b.into_iter().rev());
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (k, &e) in path.iter().enumerate() {
            if k % 2 == 0 && basis[e].2 < theta {
                theta = basis[e].2;
                leave = e;
            }
        }
        degenerate_run = if theta <= 0.0 { degenerate_run + 1 } else { 0 };
        for (k, &e) in path.iter().enumerate() {
            if k % 2 == 0 {
                basis[e].2 -= theta;
            } else {
                basis[e].2 += theta;
            }
        }
        basis[leave] = (ei, ej, theta);
        for c in basis.iter_mut() {
            if c.2 < 0.0 {
                c.2 = 0.0;
            }
        }
    }
}
